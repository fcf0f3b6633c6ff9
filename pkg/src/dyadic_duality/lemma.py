"""Node functionals S, M and an executable induction on scales.

For a lattice with branching ``b = 2**dim`` the engine checks, node by node,

    (1/b) sum_v B(S_0, M_v) >= sqrt(2 mbar_B) sqrt((M - mean_v M_v)(S_0 - S)) + B(S, M)

where S = S_J, S_0 is the common value of S on the children, M = M_J and M_v
are the children's M values, then telescopes these from the finest
generation to the root.  The summed statement is

    sum_{gen(J) < n} |J| sqrt((S_child - S_J)(M_J - mean M_child))
        <= sqrt(2 mbar) b**(-n) sum_{gen(J) = n} sqrt(S_J).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bellman import BellmanCandidate
from .haar import (
    StepFunction,
    ValidationError,
    ancestor_sums,
    expand,
    level_averages,
    squared_increments,
    subtree_means,
    tree_sum,
)
from .lattice import LatticeSpec, NodeId, check_node
from .report import Check, VerificationReport


class InadmissibleError(ValueError):
    def __init__(self, report: VerificationReport):
        self.report = report
        node = report.first_violation()
        names = ", ".join(c.name for c in report.failures())
        super().__init__(f"inadmissible pair: {names} violated; first violating node {tuple(node) if node else None}")


class DomainError(ValueError):
    pass


class DualityMismatch(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class NodeFunctional:
    """One real per node; ``levels[k]`` holds generation k in index order."""

    spec: LatticeSpec
    levels: tuple

    def __post_init__(self):
        levels = tuple(np.array(v, dtype=float) for v in self.levels)
        if len(levels) != self.spec.depth + 1:
            raise ValidationError(f"need {self.spec.depth + 1} generations, got {len(levels)}")
        for k, v in enumerate(levels):
            if v.shape != (self.spec.branching**k,):
                raise ValidationError(f"generation {k} needs {self.spec.branching**k} values")
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"non-finite value at generation {k}")
            v.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    def __getitem__(self, node) -> float:
        node = check_node(self.spec, node)
        return float(self.levels[node.generation][node.index])

    def child_means(self, k: int) -> np.ndarray:
        kids = self.levels[k + 1]
        b = self.spec.branching
        if b == 2:
            return 0.5 * (kids[0::2] + kids[1::2])
        return kids.reshape(-1, b).sum(axis=1) / b

    def to_lists(self) -> list[list[float]]:
        return [v.tolist() for v in self.levels]


def _first_bad(margins: list[np.ndarray], bound: list[np.ndarray] | float):
    """Worst margin, its node, and the first node whose margin is below -bound."""
    worst, worst_node, first = math.inf, None, None
    for k, m in enumerate(margins):
        if m.size == 0:
            continue
        i = int(np.argmin(m))
        if m[i] < worst:
            worst, worst_node = float(m[i]), NodeId(k, i)
        lim = bound[k] if isinstance(bound, list) else bound
        bad = np.nonzero(m < -lim)[0]
        if first is None and bad.size:
            first = NodeId(k, int(bad[0]))
    return worst, worst_node, first


def check_admissibility(
    S: NodeFunctional, M: NodeFunctional, mbar: float, tol: float = 0.0
) -> VerificationReport:
    """Check the sibling/monotone conditions on S and the super-mean/bound conditions on M.

    Violations are report entries, never exceptions.  Margins are raw
    differences; a node violates a condition when its margin is below
    ``-tol * max(1, |reference value|)``.
    """
    if S.spec != M.spec:
        raise ValidationError(f"mismatched lattices: {S.spec} vs {M.spec}")
    spec = S.spec
    b = spec.branching
    rep = VerificationReport("admissibility", info={"mbar": mbar, "tol": tol, "dim": spec.dim, "depth": spec.depth})

    def add(name, margins, refs, shift=0):
        bounds = [tol * np.maximum(1.0, np.abs(r)) for r in refs]
        worst, node, first = _first_bad(margins, bounds)
        if worst is math.inf:
            worst = 0.0
        if shift and node is not None:
            node = NodeId(node.generation + shift, node.index)
            first = None if first is None else NodeId(first.generation + shift, first.index)
        rep.checks.append(Check(name, first is None, worst, node, tol, first))

    add("S_nonnegative", list(S.levels), [np.zeros_like(v) for v in S.levels])
    # sibling equality is reported against the child level (shift = 1)
    sib, sib_ref = [], []
    for k in range(spec.depth):
        kids = S.levels[k + 1].reshape(-1, b)
        sib.append(-np.abs(kids - kids[:, :1]).ravel())
        sib_ref.append(S.levels[k + 1])
    add("S_siblings_equal", sib, sib_ref, shift=1)
    mono, mono_ref = [], []
    for k in range(spec.depth):
        mono.append(S.levels[k + 1] - np.repeat(S.levels[k], b))
        mono_ref.append(np.repeat(S.levels[k], b))
    add("S_monotone", mono, mono_ref, shift=1)
    add(
        "M_super_mean",
        [M.levels[k] - M.child_means(k) for k in range(spec.depth)],
        [M.levels[k] for k in range(spec.depth)],
    )
    bounds = [np.minimum(v, mbar - v) for v in M.levels]
    add("M_bounds", bounds, [np.full_like(v, mbar) for v in M.levels])
    return rep


@dataclass(frozen=True, eq=False)
class AdmissiblePair:
    """S and M functionals, validated on construction.

    ``mbar`` defaults to the maximum of M.  ``tol`` is the admissibility
    tolerance; pairs built from functions use 0 (exact), loaded pairs may need
    a little slack for rounding.
    """

    S: NodeFunctional
    M: NodeFunctional
    mbar: float | None = None
    tol: float = 0.0

    def __post_init__(self):
        if self.mbar is None:
            object.__setattr__(self, "mbar", float(max(np.max(v) for v in self.M.levels)))
        rep = check_admissibility(self.S, self.M, self.mbar, self.tol)
        if not rep.passed:
            raise InadmissibleError(rep)

    @property
    def spec(self) -> LatticeSpec:
        return self.S.spec


def build_pair(f: StepFunction, phi: StepFunction) -> AdmissiblePair:
    """S from ``f`` (sums of squared increments over strict ancestors), M from ``phi``
    (mean squared increments over the subtree).

    In dim 1 the squared increment is ``(<g>_{J+} - <g>_{J-})**2`` and
    ``mbar`` is the squared dyadic BMO norm of ``phi``.
    """
    if f.spec != phi.spec:
        raise ValidationError(f"mismatched lattices: {f.spec} vs {phi.spec}")
    spec = f.spec
    S = ancestor_sums(squared_increments(level_averages(f), spec), spec)
    M = subtree_means(squared_increments(level_averages(phi), spec), spec)
    return AdmissiblePair(NodeFunctional(spec, tuple(S)), NodeFunctional(spec, tuple(M)))


def _bvalue(B: BellmanCandidate, x, y) -> np.ndarray:
    return np.asarray(B.value(np.asarray(x, float), np.asarray(y, float)), dtype=float)


def generation_margins(B: BellmanCandidate, pair: AdmissiblePair, k: int):
    """Margins LHS - RHS of the per-node inequality at every node of generation k.

    Returns ``(margins, scales, terms)`` where ``scales = max(|LHS|, |RHS|)`` and
    ``terms = sqrt((S_0 - S)(M - mean M_v))`` (negative rounding clipped to 0).
    Nodes with S = S_0 = 0 get margin 0.
    """
    spec = pair.spec
    b = spec.branching
    S, S0 = pair.S.levels[k], pair.S.levels[k + 1][::b]
    M = pair.M.levels[k]
    Mkids = pair.M.levels[k + 1]
    dS = np.maximum(S0 - S, 0.0)
    dM = np.maximum(M - pair.M.child_means(k), 0.0)
    terms = np.sqrt(dS * dM)
    vals = _bvalue(B, np.repeat(S0, b), Mkids).reshape(-1, b)
    lhs = vals.sum(axis=1) / b
    rhs = math.sqrt(2 * B.mbar) * terms + _bvalue(B, S, M)
    margins = lhs - rhs
    degenerate = (S == 0) & (S0 == 0)
    margins = np.where(degenerate, 0.0, margins)
    scales = np.maximum(np.abs(lhs), np.abs(rhs))
    return margins, scales, terms


def _check_domain(B: BellmanCandidate, pair: AdmissiblePair) -> None:
    if B.mbar < pair.mbar:
        raise DomainError(f"candidate mbar {B.mbar} is below the pair's bound {pair.mbar}")


def verify_node_inequality(B: BellmanCandidate, pair: AdmissiblePair, node, tol: float = 1e-12) -> float:
    """Margin LHS - RHS of the per-node inequality at an internal ``node``."""
    _check_domain(B, pair)
    node = check_node(pair.spec, node)
    if node.generation >= pair.spec.depth:
        raise ValidationError(f"node {tuple(node)} is a leaf")
    margins, _, _ = generation_margins(B, pair, node.generation)
    return float(margins[node.index])


@dataclass
class InductionTrace:
    dim: int
    depth_n: int
    mbar: float
    bellman_mbar: float
    tol: float
    F: list[float]
    lhs_by_level: list[float]
    rhs_by_level: list[float]
    margins: list[np.ndarray] = field(repr=False)
    scales: list[np.ndarray] = field(repr=False)
    certificate_lhs: float
    certificate_rhs: float
    identity_rel_error: float

    @property
    def lhs(self) -> float:
        return self.lhs_by_level[-1]

    @property
    def rhs(self) -> float:
        return self.rhs_by_level[-1]

    def relative_margins(self) -> list[np.ndarray]:
        return [np.where(s > 0, m / np.where(s > 0, s, 1.0), m) for m, s in zip(self.margins, self.scales)]

    @property
    def min_relative_margin(self) -> float:
        rel = [r.min() for r in self.relative_margins() if r.size]
        return float(min(rel)) if rel else 0.0

    def worst_node(self) -> NodeId | None:
        best, where = math.inf, None
        for k, r in enumerate(self.relative_margins()):
            i = int(np.argmin(r))
            if r[i] < best:
                best, where = r[i], NodeId(k, i)
        return where

    def tight_nodes(self, rel: float = 1e-6) -> list[NodeId]:
        """Nodes whose per-node margin is within ``rel * scale`` of zero (degenerate ones excluded)."""
        out = []
        for k, (m, s) in enumerate(zip(self.margins, self.scales)):
            idx = np.nonzero((np.abs(m) <= rel * s) & (s > 0))[0]
            out.extend(NodeId(k, int(i)) for i in idx)
        return out

    @property
    def levels_hold(self) -> list[bool]:
        return [
            l <= r + self.tol * max(abs(l), abs(r))
            for l, r in zip(self.lhs_by_level, self.rhs_by_level)
        ]

    @property
    def nodes_hold(self) -> bool:
        return self.min_relative_margin >= -self.tol

    @property
    def certificate_holds(self) -> bool:
        scale = max(abs(self.certificate_lhs), abs(self.certificate_rhs))
        return self.certificate_lhs >= self.certificate_rhs - self.tol * scale

    @property
    def passed(self) -> bool:
        return all(self.levels_hold) and self.nodes_hold and self.certificate_holds and self.identity_rel_error <= 1e-10

    def to_dict(self) -> dict:
        worst = self.worst_node()
        return {
            "dim": self.dim,
            "depth_n": self.depth_n,
            "mbar": self.mbar,
            "bellman_mbar": self.bellman_mbar,
            "tol": self.tol,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "passed": self.passed,
            "F": list(self.F),
            "lhs_by_level": list(self.lhs_by_level),
            "rhs_by_level": list(self.rhs_by_level),
            "levels_hold": self.levels_hold,
            "min_margin_by_generation": [float(m.min()) for m in self.margins],
            "min_relative_margin": self.min_relative_margin,
            "worst_node": list(worst) if worst else None,
            "margins": [m.tolist() for m in self.margins],
            "certificate_lhs": self.certificate_lhs,
            "certificate_rhs": self.certificate_rhs,
            "certificate_holds": self.certificate_holds,
            "identity_rel_error": self.identity_rel_error,
        }


def verify_key_lemma(
    B: BellmanCandidate,
    pair: AdmissiblePair,
    depth_n: int | None = None,
    tol: float = 1e-12,
    node_check=generation_margins,
) -> InductionTrace:
    """Run the induction on scales down to generation ``depth_n`` and record everything.

    ``F[k-1]`` is the weighted partial sum over generation k-1,
    ``sqrt(2 mbar_B) * sum_J sqrt((S_0 - S)(M - mean M_v))``.  The summed
    inequality is evaluated at every truncation level 1..depth_n with the
    pair's own ``mbar``; the telescoped certificate uses the candidate.

    ``node_check(B, pair, k)`` supplies the per-node condition and must return
    ``(margins, scales, terms)`` like :func:`generation_margins`, the default.
    """
    spec = pair.spec
    n = spec.depth if depth_n is None else int(depth_n)
    if not 1 <= n <= spec.depth:
        raise ValidationError(f"depth_n must lie in 1..{spec.depth}, got {depth_n}")
    _check_domain(B, pair)
    rep = check_admissibility(pair.S, pair.M, pair.mbar, pair.tol)
    if not rep.passed:
        raise InadmissibleError(rep)

    b = spec.branching
    c_b = math.sqrt(2 * B.mbar)
    margins, scales, F, lhs_levels, rhs_levels = [], [], [], [], []
    lhs = 0.0
    for k in range(n):
        m, s, terms = node_check(B, pair, k)
        margins.append(m)
        scales.append(s)
        total = tree_sum(terms)
        F.append(c_b * total)
        lhs += float(b) ** (-k) * total
        lhs_levels.append(lhs)
        rhs_levels.append(math.sqrt(2 * pair.mbar) * float(b) ** (-(k + 1)) * tree_sum(np.sqrt(pair.S.levels[k + 1])))

    # telescoping: b^-n sum_{gen n} B/b >= sum_k b^-k F_k + B(root)/b
    Bn = _bvalue(B, pair.S.levels[n], pair.M.levels[n])
    cert_lhs = float(b) ** (-n) * tree_sum(Bn) / b
    root = float(_bvalue(B, pair.S.levels[0], pair.M.levels[0])[0])
    cert_rhs = math.fsum(float(b) ** (-(k + 1)) * F[k] for k in range(n)) + root / b

    rebuilt = math.fsum(float(b) ** (-k) * F[k] for k in range(n)) / c_b
    ident = abs(rebuilt - lhs) / max(abs(lhs), 1e-300) if lhs else abs(rebuilt)

    return InductionTrace(
        dim=spec.dim,
        depth_n=n,
        mbar=pair.mbar,
        bellman_mbar=B.mbar,
        tol=tol,
        F=F,
        lhs_by_level=lhs_levels,
        rhs_by_level=rhs_levels,
        margins=margins,
        scales=scales,
        certificate_lhs=cert_lhs,
        certificate_rhs=cert_rhs,
        identity_rel_error=ident,
    )


def duality_sum(f: StepFunction, phi: StepFunction, rtol: float = 1e-10) -> float:
    """``sum_J |(f, h_J)| |(phi, h_J)|``, cross-checked against
    ``(1/4) sum_J |J| |incr f(J)| |incr phi(J)|``.
    """
    if f.spec != phi.spec:
        raise ValidationError(f"mismatched lattices: {f.spec} vs {phi.spec}")
    cf, cp = expand(f).flat(), expand(phi).flat()
    by_coeff = math.fsum(np.abs(cf) * np.abs(cp))
    af, ap = level_averages(f), level_averages(phi)
    parts = []
    for k in range(f.spec.depth):
        df = af[k + 1][1::2] - af[k + 1][0::2]
        dp = ap[k + 1][1::2] - ap[k + 1][0::2]
        parts.append(2.0**-k * np.abs(df) * np.abs(dp))
    by_incr = 0.25 * math.fsum(np.concatenate(parts)) if parts else 0.0
    scale = math.sqrt(math.fsum(cf**2) * math.fsum(cp**2))
    if abs(by_coeff - by_incr) > rtol * max(abs(by_coeff), scale):
        raise DualityMismatch(f"coefficient form {by_coeff!r} != increment form {by_incr!r}")
    return by_coeff
