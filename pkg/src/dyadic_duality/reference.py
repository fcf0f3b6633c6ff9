"""Naive reference implementations used as oracles.

Everything here works from raw leaf values with plain Python loops and
direct enumeration of the defining sums: each node average is recomputed
from its leaves, Haar coefficients come from the inner product with the
Haar function, and no recurrence or per-generation array is shared with the
fast paths in :mod:`dyadic_duality.haar` and :mod:`dyadic_duality.lemma`.
Only meant for small lattices.
"""

from __future__ import annotations

import math

from .lattice import LatticeSpec, NodeId, contains, iter_nodes, leaf_range, measure


def _spec(values, dim=1) -> LatticeSpec:
    n = len(values)
    depth = 0
    while (2**dim) ** depth < n:
        depth += 1
    if (2**dim) ** depth != n:
        raise ValueError(f"length {n} is not a power of {2**dim}")
    return LatticeSpec(dim, depth)


def average(values, node, dim=1) -> float:
    spec = _spec(values, dim)
    idx = leaf_range(spec, node)
    return math.fsum(values[i] for i in idx) / len(idx)


def increment(values, node) -> float:
    """``<f>_{I+} - <f>_{I-}`` for an internal node of a 1-D lattice."""
    k, i = node
    return average(values, (k + 1, 2 * i + 1)) - average(values, (k + 1, 2 * i))


def haar_function(depth: int, node) -> list[float]:
    """Leaf values of h_I: +1/sqrt|I| on the left half, -1/sqrt|I| on the right."""
    spec = LatticeSpec(1, depth)
    out = [0.0] * spec.n_leaves
    idx = leaf_range(spec, node)
    h = 1.0 / math.sqrt(measure(spec, node))
    half = len(idx) // 2
    for j, leaf in enumerate(idx):
        out[leaf] = h if j < half else -h
    return out


def inner_product(f, g) -> float:
    w = 1.0 / len(f)
    return math.fsum(a * b * w for a, b in zip(f, g))


def haar_coefficient(values, node) -> float:
    spec = _spec(values)
    return inner_product(values, haar_function(spec.depth, node))


def internal_nodes(spec: LatticeSpec):
    return [n for n in iter_nodes(spec) if n.generation < spec.depth]


def _increments(values, spec) -> dict:
    return {I: increment(values, I) for I in internal_nodes(spec)}


def bmo_norm(values) -> float:
    spec = _spec(values)
    inc = _increments(values, spec)
    best = 0.0
    for J in iter_nodes(spec):
        total = math.fsum(
            d**2 * measure(spec, I) for I, d in inc.items() if contains(spec, J, I)
        )
        best = max(best, total / measure(spec, J))
    return math.sqrt(best)


def tl_norm(values) -> float:
    spec = _spec(values)
    inc = _increments(values, spec)
    w = 1.0 / spec.n_leaves
    terms = []
    for leaf in range(spec.n_leaves):
        L = NodeId(spec.depth, leaf)
        sq = math.fsum(d**2 for I, d in inc.items() if contains(spec, I, L))
        terms.append(w * math.sqrt(sq))
    return math.fsum(terms)


def l2_deviation(values) -> float:
    mean = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def duality_sum(f, phi) -> float:
    """Sum over internal J of |(f, h_J)| |(phi, h_J)|, via inner products."""
    spec = _spec(f)
    return math.fsum(
        abs(haar_coefficient(f, J)) * abs(haar_coefficient(phi, J)) for J in internal_nodes(spec)
    )


def pair_functionals(f, phi) -> tuple[dict, dict]:
    """S and M node dictionaries straight from their defining sums (dim 1).

    M_J = (1/|J|) sum_{I in J, internal} incr_phi(I)^2 |I|
    S_J = sum_{I strictly containing J} incr_f(I)^2
    """
    spec = _spec(f)
    inc_f, inc_phi = _increments(f, spec), _increments(phi, spec)
    S, M = {}, {}
    for J in iter_nodes(spec):
        M[J] = math.fsum(
            d**2 * measure(spec, I) for I, d in inc_phi.items() if contains(spec, J, I)
        ) / measure(spec, J)
        S[J] = math.fsum(d**2 for I, d in inc_f.items() if I != J and contains(spec, I, J))
    return S, M


def lemma_sides(S: dict, M: dict, mbar: float, spec: LatticeSpec, n: int) -> tuple[float, float]:
    """Both sides of the summed key-lemma inequality at truncation level n.

    ``S`` and ``M`` map NodeId -> value; works in any dimension.
    """
    b = spec.branching
    lhs_terms = []
    for J in iter_nodes(spec, n - 1):
        kids = [NodeId(J.generation + 1, J.index * b + v) for v in range(b)]
        dS = S[kids[0]] - S[J]
        dM = M[J] - math.fsum(M[c] for c in kids) / b
        lhs_terms.append(measure(spec, J) * math.sqrt(max(dS * dM, 0.0)))
    w = float(b) ** (-n)
    rhs = math.sqrt(2 * mbar) * w * math.fsum(math.sqrt(S[J]) for J in iter_nodes(spec) if J.generation == n)
    return math.fsum(lhs_terms), rhs
