"""Dyadic lattices of the unit torus (dim 1) or unit cube (dim >= 2).

Nodes are addressed arithmetically as ``(generation, index)``.  Node values
live in flat per-generation arrays, so a node functional over a lattice of
depth ``d`` is a tuple of ``d + 1`` arrays with ``branching**k`` entries at
generation ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

MAX_LEAVES = 2**24


class LatticeError(ValueError):
    """Raised for out-of-range nodes or oversized lattices."""


class NodeId(NamedTuple):
    generation: int
    index: int


@dataclass(frozen=True)
class LatticeSpec:
    dim: int
    depth: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise LatticeError(f"dim must be a positive integer, got {self.dim!r}")
        if int(self.depth) != self.depth or self.depth < 0:
            raise LatticeError(f"depth must be a non-negative integer, got {self.depth!r}")
        if self.dim * self.depth > 24:
            raise LatticeError(
                f"lattice dim={self.dim}, depth={self.depth} exceeds {MAX_LEAVES} leaves"
            )

    @property
    def branching(self) -> int:
        return 2**self.dim

    @property
    def n_leaves(self) -> int:
        return self.branching**self.depth

    def count(self, generation: int) -> int:
        """Number of nodes at ``generation``."""
        _check_generation(self, generation)
        return self.branching**generation

    @property
    def n_nodes(self) -> int:
        return sum(self.branching**k for k in range(self.depth + 1))


def _check_generation(spec: LatticeSpec, k: int) -> None:
    if k < 0 or k > spec.depth:
        raise LatticeError(f"generation {k} outside 0..{spec.depth}")


def check_node(spec: LatticeSpec, node) -> NodeId:
    node = NodeId(*node)
    _check_generation(spec, node.generation)
    if not 0 <= node.index < spec.branching**node.generation:
        raise LatticeError(f"index {node.index} out of range at generation {node.generation}")
    return node


def measure(spec: LatticeSpec, node) -> float:
    """Lebesgue measure of the node's cube, ``2**(-dim * generation)``."""
    node = check_node(spec, node)
    # exact: a power of two
    return 2.0 ** (-spec.dim * node.generation)


def generation_measure(spec: LatticeSpec, k: int) -> float:
    _check_generation(spec, k)
    return 2.0 ** (-spec.dim * k)


def parent(spec: LatticeSpec, node) -> NodeId:
    node = check_node(spec, node)
    if node.generation == 0:
        raise LatticeError("the root has no parent")
    return NodeId(node.generation - 1, node.index // spec.branching)


def children(spec: LatticeSpec, node) -> list[NodeId]:
    """Children in index order; in dim 1 the left half comes first."""
    node = check_node(spec, node)
    if node.generation >= spec.depth:
        raise LatticeError(f"node {tuple(node)} is at the finest generation and has no children")
    b = spec.branching
    return [NodeId(node.generation + 1, node.index * b + v) for v in range(b)]


def nodes_at_generation(spec: LatticeSpec, k: int) -> Iterator[NodeId]:
    _check_generation(spec, k)
    for i in range(spec.branching**k):
        yield NodeId(k, i)


def iter_nodes(spec: LatticeSpec, max_generation: int | None = None) -> Iterator[NodeId]:
    """All nodes, generation by generation, in index order."""
    top = spec.depth if max_generation is None else max_generation
    for k in range(top + 1):
        yield from nodes_at_generation(spec, k)


def leaf_range(spec: LatticeSpec, node) -> range:
    """Indices of the finest-generation nodes lying below ``node``."""
    node = check_node(spec, node)
    width = spec.branching ** (spec.depth - node.generation)
    return range(node.index * width, (node.index + 1) * width)


def contains(spec: LatticeSpec, outer, inner) -> bool:
    """Whether ``inner`` lies in ``outer`` (a node contains itself)."""
    outer, inner = check_node(spec, outer), check_node(spec, inner)
    if inner.generation < outer.generation:
        return False
    shift = spec.branching ** (inner.generation - outer.generation)
    return inner.index // shift == outer.index
