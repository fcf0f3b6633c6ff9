"""Seeded random inputs: step functions and externally built admissible pairs."""

from __future__ import annotations

import numpy as np

from .haar import HaarCoefficients, StepFunction, reconstruct
from .lattice import LatticeSpec
from .lemma import AdmissiblePair, NodeFunctional

STEP_KINDS = ("gaussian", "cauchy", "sparse_haar", "lacunary", "levels")


def random_step_function(spec: LatticeSpec, rng: np.random.Generator, kind: str | None = None) -> StepFunction:
    """A random step function on ``spec``.

    ``kind`` picks the flavour; ``None`` draws one uniformly.  ``sparse_haar``
    and ``lacunary`` (one generation dominating) are built in coefficient
    space, so they are 1-D only and fall back to ``gaussian`` otherwise.
    """
    if kind is None:
        kind = STEP_KINDS[int(rng.integers(len(STEP_KINDS)))]
    n = spec.n_leaves
    if spec.dim != 1 and kind in ("sparse_haar", "lacunary"):
        kind = "gaussian"
    if kind == "gaussian":
        vals = rng.normal(size=n)
    elif kind == "cauchy":
        vals = rng.standard_cauchy(size=n)
    elif kind == "levels":
        vals = rng.integers(-3, 4, size=n).astype(float)
    elif kind in ("sparse_haar", "lacunary"):
        coeffs = []
        hot = int(rng.integers(spec.depth)) if spec.depth else 0
        for k in range(spec.depth):
            c = rng.normal(size=2**k)
            if kind == "sparse_haar":
                c *= rng.random(2**k) < 0.2
            elif k != hot:
                c *= 1e-3
            coeffs.append(c)
        return reconstruct(HaarCoefficients(spec, float(rng.normal()), tuple(coeffs)))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return StepFunction(spec, vals)


def _increments(rng: np.random.Generator, size: int, zero_prob: float) -> np.ndarray:
    style = int(rng.integers(3))
    if style == 0:
        x = rng.exponential(size=size)
    elif style == 1:
        x = rng.pareto(1.5, size=size)
    else:
        x = rng.random(size) ** 4
    return np.where(rng.random(size) < zero_prob, 0.0, x)


def random_admissible_pair(spec: LatticeSpec, rng: np.random.Generator) -> AdmissiblePair:
    """An admissible (S, M) built directly, not derived from any functions.

    S starts from a random non-negative root value and adds one non-negative
    increment per sibling set; M puts random values on the leaves and adds a
    non-negative excess over the children's mean at each parent.  Increments
    are often zero and sometimes heavy-tailed, so degenerate and lopsided
    nodes show up regularly.  The bound ``mbar`` is the max of M, sometimes
    inflated.
    """
    b = spec.branching
    zp = float(rng.choice([0.0, 0.3, 0.7]))
    S = [np.array([0.0 if rng.random() < 0.5 else rng.exponential()])]
    for k in range(spec.depth):
        S.append(np.repeat(S[k] + _increments(rng, b**k, zp), b))

    leaf_style = int(rng.integers(3))
    if leaf_style == 0:
        leaves = np.zeros(spec.n_leaves)
    elif leaf_style == 1:
        leaves = rng.random(spec.n_leaves)
    else:
        leaves = _increments(rng, spec.n_leaves, zp)
    M = [None] * (spec.depth + 1)
    M[spec.depth] = leaves
    for k in range(spec.depth - 1, -1, -1):
        kids = M[k + 1]
        mean = 0.5 * (kids[0::2] + kids[1::2]) if b == 2 else kids.reshape(-1, b).sum(axis=1) / b
        M[k] = mean + _increments(rng, b**k, zp)

    top = max(float(np.max(v)) for v in M)
    mbar = top * (1.0 + (rng.exponential() if rng.random() < 0.3 else 0.0))
    return AdmissiblePair(NodeFunctional(spec, tuple(S)), NodeFunctional(spec, tuple(M)), mbar)
