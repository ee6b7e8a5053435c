"""Multiply-add accounting for machine-independent cost checks.

Arithmetic cost is tracked as nominal scalar multiply-adds, derived from
operand shapes with textbook operation counts.  Counting is off unless a
`count_madds()` context is active, so production paths pay one context-var
lookup per tracked call.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass


@dataclass
class MaddCounter:
    madds: int = 0


_ACTIVE: ContextVar[MaddCounter | None] = ContextVar("hbs_madd_counter", default=None)


@contextmanager
def count_madds():
    """Activate a counter; yields it so callers can read `.madds` after."""
    counter = MaddCounter()
    token = _ACTIVE.set(counter)
    try:
        yield counter
    finally:
        _ACTIVE.reset(token)


def add_madds(n):
    counter = _ACTIVE.get()
    if counter is not None:
        counter.madds += int(n)


def matmul_madds(m, k, n):
    """(m x k) @ (k x n)."""
    return m * k * n


def qr_madds(m, n, full=False):
    """Householder QR of an m x n matrix with m >= n, including explicit
    formation of Q (reduced by default, all m columns when `full`)."""
    factor = m * n * n - n**3 // 3
    form_q = m * m * n if full else m * n * n
    return factor + form_q


def svd_madds(m, n):
    """Thin SVD of an m x n matrix; coarse Golub-Reinsch-style count."""
    small = min(m, n)
    return 2 * m * n * small + 4 * small**3
