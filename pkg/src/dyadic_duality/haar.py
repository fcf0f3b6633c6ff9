"""Step functions on dyadic lattices, Haar expansions and the two dyadic norms.

Conventions
-----------
* ``<f>_I`` is the average of ``f`` over ``I``; in dim 1, ``I-`` / ``I+`` are
  the left / right halves (child 0 / child 1).
* ``h_I = +1/sqrt|I|`` on ``I-`` and ``-1/sqrt|I|`` on ``I+``, so
  ``(f, h_I) = sqrt|I|/2 * (<f>_{I-} - <f>_{I+})``.
* The *increment* of ``f`` at ``I`` is ``<f>_{I+} - <f>_{I-}``.

Summations over leaves use :func:`tree_sum` (pairwise halving), so results
are bit-reproducible for a given input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeError, LatticeSpec, check_node, leaf_range, measure


class ValidationError(ValueError):
    pass


def tree_sum(a: np.ndarray) -> float:
    """Sum a length-2**k array by repeated pairwise halving."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return 0.0
    if n & (n - 1):
        raise ValueError("tree_sum needs a power-of-two length")
    while a.shape[0] > 1:
        a = a[0::2] + a[1::2]
    return float(a[0])


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Values on the leaves of ``spec``, in leaf index order."""

    spec: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.spec.n_leaves:
            raise ValidationError(
                f"expected {self.spec.n_leaves} leaf values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("step function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values, dim: int = 1) -> "StepFunction":
        n = len(values)
        b = 2**dim
        depth = round(math.log(n, b)) if n > 1 else 0
        if b**depth != n:
            raise ValidationError(f"{n} values do not fill a dim-{dim} dyadic lattice")
        return cls(LatticeSpec(dim, depth), values)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        _same_lattice(self, other)
        return StepFunction(self.spec, self.values + other.values)

    def __mul__(self, c: float) -> "StepFunction":
        return StepFunction(self.spec, self.values * float(c))

    __rmul__ = __mul__

    def shift(self, c: float) -> "StepFunction":
        return StepFunction(self.spec, self.values + float(c))


@dataclass(frozen=True, eq=False)
class HaarCoefficients:
    """Mean plus one coefficient per internal node, stored per generation."""

    spec: LatticeSpec
    mean: float
    coeffs: tuple  # coeffs[k] has 2**k entries, k = 0 .. depth-1

    def flat(self) -> np.ndarray:
        """Coefficients in heap order: node (k, i) sits at 2**k - 1 + i."""
        if not self.coeffs:
            return np.zeros(0)
        return np.concatenate(self.coeffs)

    @classmethod
    def from_flat(cls, spec: LatticeSpec, flat, mean: float = 0.0) -> "HaarCoefficients":
        flat = np.asarray(flat, dtype=float)
        if spec.dim != 1 or flat.shape != (spec.n_leaves - 1,):
            raise ValidationError(f"need {spec.n_leaves - 1} coefficients for {spec}")
        coeffs = tuple(flat[2**k - 1 : 2 ** (k + 1) - 1].copy() for k in range(spec.depth))
        return cls(spec, float(mean), coeffs)


def _same_lattice(a, b) -> None:
    if a.spec != b.spec:
        raise ValidationError(f"mismatched lattices: {a.spec} vs {b.spec}")


def _require_dim1(f) -> None:
    if f.spec.dim != 1:
        raise ValidationError("Haar analysis is defined on 1-D lattices only")


def level_averages(f: StepFunction) -> list[np.ndarray]:
    """Averages of ``f`` on every node, ``out[k][i] = <f>_{(k, i)}``.

    One bottom-up pass; each parent is the plain mean of its children.
    """
    spec = f.spec
    out = [None] * (spec.depth + 1)
    out[spec.depth] = f.values
    b = spec.branching
    for k in range(spec.depth - 1, -1, -1):
        kids = out[k + 1]
        if b == 2:
            out[k] = 0.5 * (kids[0::2] + kids[1::2])
        else:
            out[k] = kids.reshape(-1, b).sum(axis=1) / b
    return out


def squared_increments(avgs: list[np.ndarray], spec: LatticeSpec) -> list[np.ndarray]:
    """Per internal node, the squared increment ``(<f>_{I+} - <f>_{I-})**2``.

    For dim >= 2 this generalises to ``(4 / 2**dim) * sum_v (<f>_{I^v} - <f>_I)**2``,
    which reduces to the 1-D expression when dim = 1.
    """
    b = spec.branching
    out = []
    for k in range(spec.depth):
        kids = avgs[k + 1]
        if b == 2:
            out.append((kids[1::2] - kids[0::2]) ** 2)
        else:
            dev = kids.reshape(-1, b) - avgs[k][:, None]
            out.append((4.0 / b) * (dev**2).sum(axis=1))
    return out


def subtree_means(inc2: list[np.ndarray], spec: LatticeSpec) -> list[np.ndarray]:
    """``M_J = inc2_J + mean of children's M``, with M = 0 on the leaves.

    This equals ``(1/|J|) * sum_{I in J} inc2_I |I|`` and is the oscillation
    functional whose supremum is the squared BMO norm.
    """
    b = spec.branching
    M = [None] * (spec.depth + 1)
    M[spec.depth] = np.zeros(spec.n_leaves)
    for k in range(spec.depth - 1, -1, -1):
        kids = M[k + 1]
        if b == 2:
            mean = 0.5 * (kids[0::2] + kids[1::2])
        else:
            mean = kids.reshape(-1, b).sum(axis=1) / b
        M[k] = inc2[k] + mean
    return M


def ancestor_sums(inc2: list[np.ndarray], spec: LatticeSpec) -> list[np.ndarray]:
    """``S_J = sum of inc2_I over I strictly containing J``; S_root = 0.

    Siblings receive one shared value (``np.repeat``), so they are bitwise equal.
    """
    b = spec.branching
    S = [np.zeros(1)]
    for k in range(spec.depth):
        S.append(np.repeat(S[k] + inc2[k], b))
    return S


def average(f: StepFunction, node) -> float:
    node = check_node(f.spec, node)
    return float(level_averages(f)[node.generation][node.index])


def haar_coefficient(f: StepFunction, node) -> float:
    _require_dim1(f)
    node = check_node(f.spec, node)
    if node.generation >= f.spec.depth:
        raise LatticeError(f"leaf {tuple(node)} has no Haar coefficient")
    avgs = level_averages(f)
    kids = avgs[node.generation + 1]
    left, right = kids[2 * node.index], kids[2 * node.index + 1]
    return math.sqrt(measure(f.spec, node)) / 2 * (left - right)


def expand(f: StepFunction) -> HaarCoefficients:
    _require_dim1(f)
    avgs = level_averages(f)
    coeffs = []
    for k in range(f.spec.depth):
        kids = avgs[k + 1]
        coeffs.append(math.sqrt(2.0**-k) / 2 * (kids[0::2] - kids[1::2]))
    return HaarCoefficients(f.spec, float(avgs[0][0]), tuple(coeffs))


def reconstruct(h: HaarCoefficients) -> StepFunction:
    spec = h.spec
    if spec.dim != 1 or len(h.coeffs) != spec.depth:
        raise ValidationError("coefficient array does not match its lattice")
    avg = np.array([h.mean])
    for k, c in enumerate(h.coeffs):
        c = np.asarray(c, dtype=float)
        if c.shape != avg.shape:
            raise ValidationError(f"generation {k} needs {avg.shape[0]} coefficients")
        d = c / math.sqrt(2.0**-k)
        nxt = np.empty(2 * avg.shape[0])
        nxt[0::2] = avg + d
        nxt[1::2] = avg - d
        avg = nxt
    return StepFunction(spec, avg)


def l2_deviation(f: StepFunction) -> float:
    """``||f - <f>||_{L^2}`` over the whole torus."""
    mean = tree_sum(f.values) / f.spec.n_leaves
    return math.sqrt(tree_sum((f.values - mean) ** 2) / f.spec.n_leaves)


def oscillation_levels(phi: StepFunction) -> list[np.ndarray]:
    avgs = level_averages(phi)
    return subtree_means(squared_increments(avgs, phi.spec), phi.spec)


def bmo_norm_squared(phi: StepFunction) -> float:
    return float(max(np.max(m) for m in oscillation_levels(phi)))


def bmo_norm(phi: StepFunction) -> float:
    """Dyadic BMO norm: sqrt of sup_J (1/|J|) sum_{I in J} (<phi>_{I+} - <phi>_{I-})^2 |I|.

    The sup runs over every node including leaves, where the sum is empty.
    """
    _require_dim1(phi)
    return math.sqrt(bmo_norm_squared(phi))


def square_function(f: StepFunction) -> np.ndarray:
    """Leaf values of the dyadic square function of ``f``."""
    inc2 = squared_increments(level_averages(f), f.spec)
    return np.sqrt(ancestor_sums(inc2, f.spec)[f.spec.depth])


def tl_norm(f: StepFunction) -> float:
    """Triebel-Lizorkin norm: the integral of the dyadic square function."""
    _require_dim1(f)
    return tree_sum(square_function(f)) / f.spec.n_leaves


def haar_step_function(spec: LatticeSpec, node) -> StepFunction:
    """The Haar function h_I sampled at the lattice's leaf resolution."""
    if spec.dim != 1:
        raise ValidationError("Haar functions are built on 1-D lattices")
    node = check_node(spec, node)
    if node.generation >= spec.depth:
        raise LatticeError(f"h_I needs an internal node, got leaf {tuple(node)}")
    vals = np.zeros(spec.n_leaves)
    idx = leaf_range(spec, node)
    half = len(idx) // 2
    h = 1.0 / math.sqrt(measure(spec, node))
    vals[idx.start : idx.start + half] = h
    vals[idx.start + half : idx.stop] = -h
    return StepFunction(spec, vals)


def make_atom(spec: LatticeSpec, node, profile, rtol: float = 1e-12) -> StepFunction:
    """Embed an atom supported on ``node``.

    ``profile`` holds the values on the leaves below ``node`` (in order).  It
    must satisfy ``|a| <= 1/|I|`` and have zero integral; the zero profile is
    accepted.
    """
    node = check_node(spec, node)
    idx = leaf_range(spec, node)
    p = np.asarray(profile, dtype=float)
    if p.shape != (len(idx),):
        raise ValidationError(f"atom profile must have {len(idx)} entries (leaves below {tuple(node)})")
    if not np.all(np.isfinite(p)):
        raise ValidationError("atom profile must be finite")
    cap = 1.0 / measure(spec, node)
    if np.max(np.abs(p), initial=0.0) > cap * (1 + rtol):
        raise ValidationError(f"atom exceeds the size bound 1/|I| = {cap}")
    leaf = 1.0 / spec.n_leaves
    integral = tree_sum(p) * leaf
    if abs(integral) > rtol * cap * len(idx) * leaf:
        raise ValidationError(f"atom must have zero mean, integral is {integral:.3e}")
    vals = np.zeros(spec.n_leaves)
    vals[idx.start : idx.stop] = p
    return StepFunction(spec, vals)
