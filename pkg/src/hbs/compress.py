"""Reconstruct a telescoping factorization from randomized probes.

The operator is touched exactly twice: one batched product per direction
against Gaussian test matrices of s columns each.  Every node's bases are
then recovered by projecting the global probes onto the nullspace of the
node's own test rows (so the samples see only off-diagonal contributions),
discrepancy blocks come from least-squares solves against the test rows,
and compressed nodes lift their samples into coarser-level test/sample
quadruples until the root core is solved directly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError, IllConditionedProbeError
from .factorization import HbsFactorization
from .flops import add_madds, matmul_madds
from .linalg import (
    DEFAULT_ILL_CONDITIONING_TOL,
    STREAM_OMEGA,
    STREAM_PSI,
    col,
    gaussian_matrix,
    lstsq_right,
    nullspace,
)
from .oracle import MatVecOracle
from .tree import ClusterTree, Node, build_tree


@dataclass(frozen=True)
class CompressionConfig:
    """Run parameters: basis rank r, leaf threshold m, probe count s (None
    selects the default max(r + max leaf size, 3r)), RNG seed, and the
    relative tolerance below which a probe matrix counts as rank deficient."""

    rank: int
    leaf_threshold: int
    probes: int | None = None
    seed: int = 0
    ill_conditioning_tol: float = DEFAULT_ILL_CONDITIONING_TOL

    def resolved_probes(self, tree: ClusterTree) -> int:
        if self.probes is not None:
            return self.probes
        return max(self.rank + tree.max_leaf_size, 3 * self.rank)

    def validate_for(self, tree: ClusterTree) -> int:
        """Check feasibility against a concrete tree; returns the probe
        count to use."""
        if self.rank < 1:
            raise ConfigurationError(f"rank must be positive, got {self.rank}")
        if self.leaf_threshold < self.rank:
            raise ConfigurationError(
                f"leaf threshold {self.leaf_threshold} < rank {self.rank}: "
                "leaf bases would be wider than tall"
            )
        if tree.min_leaf_size < self.rank:
            raise ConfigurationError(
                f"smallest leaf has {tree.min_leaf_size} rows < rank {self.rank}; "
                "lower the rank or raise the leaf threshold"
            )
        s = self.resolved_probes(tree)
        s_min = max(self.rank + tree.max_leaf_size, 3 * self.rank)
        if s < s_min:
            raise ConfigurationError(
                f"probe count {s} below the required max(r + max leaf, 3r) = {s_min}"
            )
        return s


@dataclass(frozen=True)
class SampleSet:
    """Global probe quadruple: test matrices omega/psi and their images
    y = A omega, z = A^T psi."""

    omega: np.ndarray
    psi: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        shapes = {self.omega.shape, self.psi.shape, self.y.shape, self.z.shape}
        if len(shapes) != 1:
            raise DimensionError(f"sample matrices must share one shape, got {shapes}")

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def probes(self) -> int:
        return self.omega.shape[1]


@dataclass(frozen=True)
class NodeSamples:
    """One node's rows of the probe quadruple (leaf), or their lifted
    2r-row counterparts (parent)."""

    omega_t: np.ndarray
    psi_t: np.ndarray
    y_t: np.ndarray
    z_t: np.ndarray

    def __post_init__(self):
        shapes = {self.omega_t.shape, self.psi_t.shape, self.y_t.shape, self.z_t.shape}
        if len(shapes) != 1:
            raise DimensionError(f"node sample matrices must share one shape, got {shapes}")

    @property
    def rows(self) -> int:
        return self.omega_t.shape[0]

    @property
    def probes(self) -> int:
        return self.omega_t.shape[1]


@dataclass(frozen=True)
class CompressedNode:
    """A fully compressed node: its bases, discrepancy block, and the
    samples it consumed (needed once more when lifting to the parent)."""

    u: np.ndarray
    v: np.ndarray
    disc: np.ndarray
    samples: NodeSamples


def draw_samples(oracle: MatVecOracle, s: int, seed: int) -> SampleSet:
    """Draw the two Gaussian test matrices and take one batched product
    through each direction of the oracle."""
    if s < 1:
        raise DimensionError(f"need at least one probe column, got {s}")
    omega = gaussian_matrix(oracle.n, s, seed, STREAM_OMEGA)
    psi = gaussian_matrix(oracle.n, s, seed, STREAM_PSI)
    y = oracle.apply_batch(omega)
    z = oracle.apply_transpose_batch(psi)
    return SampleSet(omega=omega, psi=psi, y=y, z=z)


def leaf_node_samples(samples: SampleSet, node: Node) -> NodeSamples:
    """Row-slice the global quadruple to one leaf's index range."""
    sl = slice(node.begin, node.end)
    return NodeSamples(
        omega_t=samples.omega[sl],
        psi_t=samples.psi[sl],
        y_t=samples.y[sl],
        z_t=samples.z[sl],
    )


def compress_node_bases(ns: NodeSamples, r: int):
    """Recover the node's bases from its samples.

    Projecting the probes onto null(omega_t) removes the diagonal block's
    contribution, so y_t @ P is a randomized sample of the node's
    off-diagonal row block; orthonormalizing it gives the column basis.
    The row basis comes from the transposed-side quadruple the same way.
    Returns (u, v, p, q) with p, q the nullspace projectors used.
    """
    if ns.probes - ns.rows < r:
        raise ConfigurationError(
            f"probe count {ns.probes} leaves nullity {ns.probes - ns.rows} < rank {r} "
            f"for a {ns.rows}-row node; increase the probe count s"
        )
    p = nullspace(ns.omega_t, r)
    add_madds(matmul_madds(ns.rows, ns.probes, r))
    u = col(ns.y_t @ p, r)
    q = nullspace(ns.psi_t, r)
    add_madds(matmul_madds(ns.rows, ns.probes, r))
    v = col(ns.z_t @ q, r)
    return u, v, p, q


def compute_discrepancy(
    u: np.ndarray,
    v: np.ndarray,
    ns: NodeSamples,
    tol: float = DEFAULT_ILL_CONDITIONING_TOL,
) -> np.ndarray:
    """Recover the discrepancy block from the node's samples.

    The part of the diagonal block outside range(u) is read off the
    forward samples, the part inside range(u) but outside range(v)^T off
    the transposed ones; both reduce to least-squares solves against the
    node's test rows.
    """
    rows = ns.rows
    y_solve = lstsq_right(ns.y_t, ns.omega_t, tol)
    z_solve = lstsq_right(ns.z_t, ns.psi_t, tol)
    add_madds(6 * matmul_madds(u.shape[1], rows, rows))
    left = y_solve - u @ (u.T @ y_solve)
    right = u @ (u.T @ (z_solve - v @ (v.T @ z_solve)).T)
    return left + right


def lift_to_parent(alpha: CompressedNode, beta: CompressedNode) -> NodeSamples:
    """Combine two compressed children into their parent's test/sample rows.

    Test rows are the probes seen through the children's bases; sample rows
    first subtract what the children's own discrepancy blocks already
    explain, then project onto the bases.  The result is an exact probe
    quadruple for the coarser-level operator.
    """

    def lifted(child):
        ns = child.samples
        rows, s = ns.rows, ns.probes
        r = child.u.shape[1]
        add_madds(4 * matmul_madds(r, rows, s) + 2 * matmul_madds(rows, rows, s))
        return (
            child.v.T @ ns.omega_t,
            child.u.T @ ns.psi_t,
            child.u.T @ (ns.y_t - child.disc @ ns.omega_t),
            child.v.T @ (ns.z_t - child.disc.T @ ns.psi_t),
        )

    blocks = tuple(zip(lifted(alpha), lifted(beta)))
    return NodeSamples(
        omega_t=np.vstack(blocks[0]),
        psi_t=np.vstack(blocks[1]),
        y_t=np.vstack(blocks[2]),
        z_t=np.vstack(blocks[3]),
    )


def compute_root(ns: NodeSamples, tol: float = DEFAULT_ILL_CONDITIONING_TOL) -> np.ndarray:
    """At the root the whole remaining operator is the core, so one
    least-squares solve against the lifted test rows recovers it."""
    return lstsq_right(ns.y_t, ns.omega_t, tol)


def compress_from_samples(
    samples: SampleSet, tree: ClusterTree, config: CompressionConfig
) -> HbsFactorization:
    """Run the level sweep on an already-drawn sample quadruple (the
    post-sampling arithmetic; touches no oracle)."""
    if samples.n != tree.n:
        raise DimensionError(f"samples are for n={samples.n}, tree has n={tree.n}")
    r = config.rank
    tol = config.ill_conditioning_tol
    u_bases: dict[int, np.ndarray] = {}
    v_bases: dict[int, np.ndarray] = {}
    discs: dict[int, np.ndarray] = {}
    state: dict[int, CompressedNode] = {}

    for level in range(tree.depth, 0, -1):
        for node in tree.nodes_at_level(level):
            if node.is_leaf:
                ns = leaf_node_samples(samples, node)
            else:
                a, b = node.children
                ns = lift_to_parent(state.pop(a), state.pop(b))
            try:
                u, v, _, _ = compress_node_bases(ns, r)
                d = compute_discrepancy(u, v, ns, tol)
            except IllConditionedProbeError as exc:
                raise IllConditionedProbeError(
                    f"node {node.id} (level {node.level}): {exc}",
                    node_id=node.id,
                    level=node.level,
                ) from exc
            u_bases[node.id] = u
            v_bases[node.id] = v
            discs[node.id] = d
            state[node.id] = CompressedNode(u=u, v=v, disc=d, samples=ns)

    root = tree.root
    a, b = root.children
    root_ns = lift_to_parent(state.pop(a), state.pop(b))
    try:
        root_disc = compute_root(root_ns, tol)
    except IllConditionedProbeError as exc:
        raise IllConditionedProbeError(
            f"node {root.id} (level {root.level}): {exc}", node_id=root.id, level=root.level
        ) from exc
    return HbsFactorization(tree, r, u_bases, v_bases, discs, root_disc)


def compress(oracle: MatVecOracle, config: CompressionConfig) -> HbsFactorization:
    """Compress a black-box operator end to end: build the tree, draw the
    probe quadruple (exactly s columns through each direction), and sweep
    from the leaves to the root."""
    tree = build_tree(oracle.n, config.leaf_threshold)
    s = config.validate_for(tree)
    samples = draw_samples(oracle, s, config.seed)
    return compress_from_samples(samples, tree, config)
