"""Container file format for factorizations.

Layout: magic bytes "HBSF", a u32 format version, a self-describing header
(n, rank, depth, leaf threshold, then one u32 row count per non-root node
in level order), followed by all blocks as little-endian float64 in
column-major order — for each non-root node in level order its column
basis, row basis, and discrepancy block, and the root core last.  Round
trips are bit-exact.
"""

import struct

import numpy as np

from .errors import FormatError
from .factorization import HbsFactorization
from .tree import build_tree

MAGIC = b"HBSF"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQIII")  # magic, version, n, rank, depth, leaf_threshold


def save_factorization(f: HbsFactorization, path) -> None:
    """Write a factorization to `path` (see module docstring for layout)."""
    tree, r = f.tree, f.rank
    non_root = tree.nodes[1:]
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(MAGIC, FORMAT_VERSION, tree.n, r, tree.depth, tree.leaf_threshold)
        )
        rows = np.array(
            [f.u_bases[node.id].shape[0] for node in non_root], dtype="<u4"
        )
        fh.write(rows.tobytes())
        for node in non_root:
            for block in (f.u_bases[node.id], f.v_bases[node.id], f.discs[node.id]):
                fh.write(np.asarray(block, dtype="<f8").tobytes(order="F"))
        fh.write(np.asarray(f.root_disc, dtype="<f8").tobytes(order="F"))


def _take(buffer, offset, nbytes, what):
    if offset + nbytes > len(buffer):
        raise FormatError(f"truncated file: {what} needs {nbytes} bytes past offset {offset}")
    return buffer[offset : offset + nbytes], offset + nbytes


def load_factorization(path) -> HbsFactorization:
    """Read a factorization written by `save_factorization`; raises
    FormatError on bad magic, unknown version, or truncation."""
    with open(path, "rb") as fh:
        buffer = fh.read()
    raw, offset = _take(buffer, 0, _HEADER.size, "header")
    magic, version, n, rank, depth, leaf_threshold = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")

    tree = build_tree(n, leaf_threshold)
    if tree.depth != depth:
        raise FormatError(
            f"header depth {depth} does not match the depth-{tree.depth} tree for "
            f"n={n}, leaf threshold {leaf_threshold}"
        )
    non_root = tree.nodes[1:]
    raw, offset = _take(buffer, offset, 4 * len(non_root), "node dimensions")
    rows = np.frombuffer(raw, dtype="<u4")
    for node, r_rows in zip(non_root, rows):
        expected = node.size if node.is_leaf else 2 * rank
        if r_rows != expected:
            raise FormatError(
                f"node {node.id}: header row count {r_rows} does not match {expected}"
            )

    def read_block(shape, what):
        nonlocal offset
        nbytes = 8 * shape[0] * shape[1]
        raw, offset = _take(buffer, offset, nbytes, what)
        return np.frombuffer(raw, dtype="<f8").reshape(shape, order="F").copy()

    u_bases, v_bases, discs = {}, {}, {}
    for node in non_root:
        q = node.size if node.is_leaf else 2 * rank
        u_bases[node.id] = read_block((q, rank), f"node {node.id} column basis")
        v_bases[node.id] = read_block((q, rank), f"node {node.id} row basis")
        discs[node.id] = read_block((q, q), f"node {node.id} discrepancy")
    root_disc = read_block((2 * rank, 2 * rank), "root core")
    if offset != len(buffer):
        raise FormatError(f"{len(buffer) - offset} trailing bytes after root core")
    return HbsFactorization(tree, rank, u_bases, v_bases, discs, root_disc)
