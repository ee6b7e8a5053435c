"""Compressed-operator container: a telescoping factorization over a cluster
tree with per-node orthonormal bases and dense discrepancy blocks.

Every non-root node tau stores a column basis u_basis[tau], a row basis
v_basis[tau] (both with `rank` orthonormal columns), and a square
discrepancy block disc[tau] holding the part of the node's diagonal block
the bases cannot express.  The root stores only a 2*rank square core.
Applying the represented operator is a single upward sweep, a root solve,
and a downward sweep, in O(rank^2 * n) multiply-adds.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ResourceLimitError
from .flops import add_madds, matmul_madds
from .linalg import STREAM_SYNTHETIC
from .tree import ClusterTree

DENSE_CAP_DEFAULT = 8192
_ORTHONORMALITY_TOL = 1e-10


class HbsFactorization:
    """Telescoping factorization of a square operator over a cluster tree.

    Blocks are keyed by node id.  Leaf bases are (leaf size x rank), parent
    bases are (2*rank x rank); leaf discrepancies are square of the leaf
    size, parent discrepancies and the root core are (2*rank x 2*rank).
    """

    def __init__(self, tree: ClusterTree, rank: int, u_bases, v_bases, discs, root_disc):
        self.tree = tree
        self.rank = rank
        self.u_bases = u_bases
        self.v_bases = v_bases
        self.discs = discs
        self.root_disc = np.asarray(root_disc, dtype=np.float64)
        self._check_shapes()

    @property
    def n(self) -> int:
        return self.tree.n

    def _expected_block_rows(self, node) -> int:
        return node.size if node.is_leaf else 2 * self.rank

    def _check_shapes(self):
        r = self.rank
        if self.root_disc.shape != (2 * r, 2 * r):
            raise DimensionError(
                f"root core must be {2 * r} x {2 * r}, got {self.root_disc.shape}"
            )
        for node in self.tree.nodes[1:]:
            rows = self._expected_block_rows(node)
            for blocks, shape, kind in (
                (self.u_bases, (rows, r), "column basis"),
                (self.v_bases, (rows, r), "row basis"),
                (self.discs, (rows, rows), "discrepancy"),
            ):
                block = blocks[node.id]
                if block.shape != shape:
                    raise DimensionError(
                        f"node {node.id}: {kind} must be {shape[0]} x {shape[1]}, "
                        f"got {block.shape}"
                    )

    def validate(self):
        """Check orthonormality of every stored basis and finiteness of all
        blocks; raises ValueError on violation."""
        r = self.rank
        eye = np.eye(r)
        for node in self.tree.nodes[1:]:
            for blocks, kind in ((self.u_bases, "column basis"), (self.v_bases, "row basis")):
                basis = blocks[node.id]
                defect = np.linalg.norm(basis.T @ basis - eye)
                if not defect <= _ORTHONORMALITY_TOL:
                    raise ValueError(
                        f"node {node.id}: {kind} orthonormality defect {defect:.3e}"
                    )
            if not np.isfinite(self.discs[node.id]).all():
                raise ValueError(f"node {node.id}: discrepancy block has non-finite entries")
        if not np.isfinite(self.root_disc).all():
            raise ValueError("root core has non-finite entries")
        return self


def apply_matrix(f: HbsFactorization, q: np.ndarray, transpose: bool = False) -> np.ndarray:
    """Apply the represented operator (or its transpose) to the columns of q.

    Upward pass projects each node's slice onto its row basis, the root core
    couples the two halves, and the downward pass expands through column
    bases while discrepancy blocks re-inject what the bases miss.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != f.n:
        raise DimensionError(f"expected a {f.n} x c matrix, got array of shape {q.shape}")
    tree, r = f.tree, f.rank
    c = q.shape[1]
    # Transposing swaps the roles of the two basis families and transposes
    # every discrepancy block.
    up_bases = f.u_bases if transpose else f.v_bases
    down_bases = f.v_bases if transpose else f.u_bases

    def disc(node_id):
        d = f.discs[node_id]
        return d.T if transpose else d

    qhat: dict[int, np.ndarray] = {}
    for level in range(tree.depth, 0, -1):
        for node in tree.nodes_at_level(level):
            if node.is_leaf:
                block = q[node.begin : node.end]
            else:
                a, b = node.children
                block = np.vstack((qhat[a], qhat[b]))
            add_madds(matmul_madds(r, block.shape[0], c))
            qhat[node.id] = up_bases[node.id].T @ block

    root_core = f.root_disc.T if transpose else f.root_disc
    a, b = tree.root.children
    add_madds(matmul_madds(2 * r, 2 * r, c))
    coupled = root_core @ np.vstack((qhat[a], qhat[b]))
    uhat = {a: coupled[:r], b: coupled[r:]}

    out = np.empty_like(q)
    for level in range(1, tree.depth + 1):
        for node in tree.nodes_at_level(level):
            if node.is_leaf:
                add_madds(matmul_madds(node.size, r, c) + matmul_madds(node.size, node.size, c))
                out[node.begin : node.end] = (
                    down_bases[node.id] @ uhat[node.id] + disc(node.id) @ q[node.begin : node.end]
                )
            else:
                a, b = node.children
                add_madds(matmul_madds(2 * r, r, c) + matmul_madds(2 * r, 2 * r, c))
                expanded = down_bases[node.id] @ uhat[node.id] + disc(node.id) @ np.vstack(
                    (qhat[a], qhat[b])
                )
                uhat[a] = expanded[:r]
                uhat[b] = expanded[r:]
    return out


def apply(f: HbsFactorization, q: np.ndarray) -> np.ndarray:
    """Apply the represented operator to one vector."""
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != f.n:
        raise DimensionError(f"expected a length-{f.n} vector, got array of shape {q.shape}")
    return apply_matrix(f, q[:, None])[:, 0]


def apply_transpose(f: HbsFactorization, q: np.ndarray) -> np.ndarray:
    """Apply the transpose of the represented operator to one vector."""
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != f.n:
        raise DimensionError(f"expected a length-{f.n} vector, got array of shape {q.shape}")
    return apply_matrix(f, q[:, None], transpose=True)[:, 0]


def to_dense(f: HbsFactorization, max_n: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Expand the factorization into an explicit dense matrix (test oracle;
    refuses dimensions above `max_n` to protect the linear-memory contract)."""
    if f.n > max_n:
        raise ResourceLimitError(f"refusing to densify a {f.n} x {f.n} matrix (cap {max_n})")
    import scipy.linalg

    core = f.root_disc
    for level in range(1, f.tree.depth + 1):
        nodes = f.tree.nodes_at_level(level)
        u_blk = scipy.linalg.block_diag(*(f.u_bases[node.id] for node in nodes))
        v_blk = scipy.linalg.block_diag(*(f.v_bases[node.id] for node in nodes))
        d_blk = scipy.linalg.block_diag(*(f.discs[node.id] for node in nodes))
        core = u_blk @ core @ v_blk.T + d_blk
    return core


@dataclass(frozen=True)
class LevelStorage:
    level: int
    basis_floats: int
    disc_floats: int


@dataclass(frozen=True)
class StorageReport:
    total_floats: int
    floats_per_dof: float
    levels: list[LevelStorage]


def storage(f: HbsFactorization) -> StorageReport:
    """Exact float counts of every stored block, per level and in total."""
    levels = [LevelStorage(level=0, basis_floats=0, disc_floats=f.root_disc.size)]
    for level in range(1, f.tree.depth + 1):
        basis = disc = 0
        for node in f.tree.nodes_at_level(level):
            basis += f.u_bases[node.id].size + f.v_bases[node.id].size
            disc += f.discs[node.id].size
        levels.append(LevelStorage(level=level, basis_floats=basis, disc_floats=disc))
    total = sum(lv.basis_floats + lv.disc_floats for lv in levels)
    return StorageReport(total_floats=total, floats_per_dof=total / f.n, levels=levels)


def random_hbs(tree: ClusterTree, k: int, seed: int) -> HbsFactorization:
    """Generate a factorization whose dense expansion is exactly block-rank-k
    compressible on `tree` (off-diagonal blocks at every level have rank at
    most k by construction).

    Bases are orthonormalized Gaussian blocks; discrepancy blocks are
    Gaussian with their basis-visible component projected out, which makes
    the emitted blocks coincide with the canonical telescoping factors of
    the generator's own dense matrix.
    """
    if k < 0:
        raise DimensionError(f"block rank must be nonnegative, got {k}")
    if k > tree.min_leaf_size:
        raise DimensionError(
            f"block rank {k} exceeds the smallest leaf size {tree.min_leaf_size}"
        )
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(STREAM_SYNTHETIC,))
    )
    u_bases: dict[int, np.ndarray] = {}
    v_bases: dict[int, np.ndarray] = {}
    discs: dict[int, np.ndarray] = {}
    for node in tree.nodes[1:]:
        rows = node.size if node.is_leaf else 2 * k
        u = np.linalg.qr(rng.standard_normal((rows, k)))[0]
        v = np.linalg.qr(rng.standard_normal((rows, k)))[0]
        d = rng.standard_normal((rows, rows))
        d -= u @ (u.T @ d @ v) @ v.T
        u_bases[node.id] = u
        v_bases[node.id] = v
        discs[node.id] = d
    root_disc = rng.standard_normal((2 * k, 2 * k))
    return HbsFactorization(tree, k, u_bases, v_bases, discs, root_disc).validate()
