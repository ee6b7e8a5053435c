"""Fully populated binary trees over contiguous index ranges.

The tree fixes the block structure of a compressed operator: the root owns
[0, n), every parent splits its range into two nearly equal halves (left
child takes the ceiling half), and all leaves sit at one global depth, the
smallest at which every leaf fits under the size threshold.
"""

from dataclasses import dataclass, field

from .errors import ConfigurationError, DimensionError


@dataclass(frozen=True)
class Node:
    id: int
    level: int
    begin: int
    end: int
    parent: int | None
    children: tuple[int, int] | None

    @property
    def size(self) -> int:
        return self.end - self.begin

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True)
class ClusterTree:
    n: int
    depth: int
    leaf_threshold: int
    nodes: list[Node] = field(repr=False)

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def nodes_at_level(self, level: int) -> list[Node]:
        """Nodes of one level in ascending range order; their ranges
        partition [0, n)."""
        if level < 0 or level > self.depth:
            raise DimensionError(f"level {level} outside [0, {self.depth}]")
        first = 2**level - 1
        return self.nodes[first : 2 * first + 1]

    def leaves(self) -> list[Node]:
        return self.nodes_at_level(self.depth)

    @property
    def min_leaf_size(self) -> int:
        return min(node.size for node in self.leaves())

    @property
    def max_leaf_size(self) -> int:
        return max(node.size for node in self.leaves())


def build_tree(n: int, leaf_threshold: int) -> ClusterTree:
    """Build the depth-L fully populated binary tree on [0, n), where L is
    the smallest depth at which ceil(n / 2^L) <= leaf_threshold.

    Every branch is split all the way to depth L, so leaf sizes differ by at
    most one; compression sweeps can then proceed level by level.
    """
    if n < 2:
        raise ConfigurationError(f"need at least 2 indices to partition, got {n}")
    if leaf_threshold < 2:
        raise ConfigurationError(f"leaf threshold must be at least 2, got {leaf_threshold}")
    if leaf_threshold >= n:
        raise ConfigurationError(
            f"leaf threshold {leaf_threshold} >= matrix dimension {n}: "
            "tree would have no levels"
        )

    depth = 1
    while (n + (1 << depth) - 1) >> depth > leaf_threshold:  # ceil(n / 2**depth)
        depth += 1

    nodes: list[Node] = []
    ranges = [(0, n)]
    next_ranges: list[tuple[int, int]] = []
    for level in range(depth + 1):
        first = 2**level - 1
        for j, (begin, end) in enumerate(ranges):
            node_id = first + j
            parent = (node_id - 1) // 2 if node_id > 0 else None
            if level < depth:
                children = (2 * node_id + 1, 2 * node_id + 2)
                mid = begin + (end - begin + 1) // 2
                next_ranges.append((begin, mid))
                next_ranges.append((mid, end))
            else:
                children = None
            nodes.append(Node(node_id, level, begin, end, parent, children))
        ranges, next_ranges = next_ranges, []

    return ClusterTree(n=n, depth=depth, leaf_threshold=leaf_threshold, nodes=nodes)


def nodes_at_level(tree: ClusterTree, level: int) -> list[Node]:
    return tree.nodes_at_level(level)
