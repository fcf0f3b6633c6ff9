"""Randomised search for pairs (f, phi) with a large duality ratio.

The objective is

    ratio(f, phi) = duality_sum(f, phi) / (bmo_norm(phi) * tl_norm(f)),

which is scale invariant in each argument and bounded above by sqrt(2)/4.
The search runs in Haar-coefficient space with the mean fixed at zero.
Restart ``r`` draws from ``np.random.default_rng(seed + r)``; restart 0
always starts from f = phi = h_root, whose ratio is exactly 1/4.

``iterations`` is the objective-evaluation budget of each restart, counting
the starting point, so ``iterations=1`` evaluates only the start.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import reference
from .bellman import sample_candidate
from .haar import (
    HaarCoefficients,
    StepFunction,
    ancestor_sums,
    bmo_norm,
    reconstruct,
    subtree_means,
    tl_norm,
)
from .lattice import LatticeSpec
from .lemma import build_pair, duality_sum, verify_key_lemma
from .optim import golden_section
from .report import Check, VerificationReport

CEILING = math.sqrt(2.0) / 4.0
STRATEGIES = ("random", "coordinate_ascent", "hybrid")
MAX_DEPTH = 12


class UndefinedRatioError(ValueError):
    pass


class CertificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    depth: int
    iterations: int
    seed: int = 0
    strategy: str = "hybrid"
    restarts: int = 1
    line_evals: int = 12

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must lie in 1..{MAX_DEPTH}, got {self.depth}")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.line_evals < 2:
            raise ValueError("line_evals must be at least 2")


class _Objective:
    """Ratio evaluated straight from heap-ordered Haar coefficients."""

    def __init__(self, depth: int):
        self.spec = LatticeSpec(1, depth)
        self.slices = [slice(2**k - 1, 2 ** (k + 1) - 1) for k in range(depth)]
        # squared increment = 4 c^2 / |I| = 4 * 2^k * c^2
        self.weights = np.concatenate([np.full(2**k, 4.0 * 2**k) for k in range(depth)])
        self.evals = 0
        self.max_seen = 0.0

    def _levels(self, c):
        inc2 = self.weights * c * c
        return [inc2[s] for s in self.slices]

    def parts(self, cf, cp) -> tuple[float, float, float]:
        dual = float(np.dot(np.abs(cf), np.abs(cp)))
        bmo = math.sqrt(max(float(np.max(m)) for m in subtree_means(self._levels(cp), self.spec)))
        sq = np.sqrt(ancestor_sums(self._levels(cf), self.spec)[-1])
        tl = float(np.sum(sq)) / self.spec.n_leaves
        return dual, bmo, tl

    def __call__(self, cf, cp) -> float:
        self.evals += 1
        dual, bmo, tl = self.parts(cf, cp)
        if bmo == 0.0 or tl == 0.0:
            return 0.0
        r = dual / (bmo * tl)
        self.max_seen = max(self.max_seen, r)
        return r


def _coefficients(x) -> HaarCoefficients:
    if isinstance(x, HaarCoefficients):
        return x
    if isinstance(x, StepFunction):
        from .haar import expand

        return expand(x)
    raise TypeError(f"expected StepFunction or HaarCoefficients, got {type(x).__name__}")


def ratio(f, phi) -> float:
    """duality_sum(f, phi) / (bmo_norm(phi) * tl_norm(f)).

    Accepts step functions or Haar coefficients.
    """
    f = f if isinstance(f, StepFunction) else reconstruct(_coefficients(f))
    phi = phi if isinstance(phi, StepFunction) else reconstruct(_coefficients(phi))
    b, t = bmo_norm(phi), tl_norm(f)
    if b == 0.0 or t == 0.0:
        raise UndefinedRatioError("ratio undefined: a norm vanishes (constant function)")
    return duality_sum(f, phi) / (b * t)


@dataclass
class _RestartOutcome:
    index: int
    best: float
    cf: np.ndarray
    cp: np.ndarray
    incumbents: list[float]
    evals: int
    max_seen: float


def _normalise(v: np.ndarray) -> np.ndarray:
    n = math.sqrt(float(np.dot(v, v)))
    return v / n if n > 0 else v


def _initial(depth: int, r: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    m = 2**depth - 1
    if r == 0:
        e = np.zeros(m)
        e[0] = 1.0
        return e, e.copy()
    # decay by sqrt|I| so no single generation dominates a typical draw
    decay = np.concatenate([np.full(2**k, 2.0 ** (-k / 2)) for k in range(depth)])
    cf = rng.normal(size=m) * decay
    cp = cf + 0.5 * rng.normal(size=m) * decay if rng.random() < 0.5 else rng.normal(size=m) * decay
    return _normalise(cf), _normalise(cp)


class _Runner:
    def __init__(self, config: SearchConfig, r: int):
        self.config = config
        self.r = r
        self.rng = np.random.default_rng(config.seed + r)
        self.obj = _Objective(config.depth)
        self.cf, self.cp = _initial(config.depth, r, self.rng)
        self.best = self.obj(self.cf, self.cp)
        self.incumbents = [self.best]

    @property
    def left(self) -> int:
        return self.config.iterations - self.obj.evals

    def _offer(self, cf, cp, value) -> None:
        # strict improvement only: the first incumbent found wins ties
        if value > self.best:
            self.best, self.cf, self.cp = value, _normalise(cf), _normalise(cp)
        self.incumbents.append(self.best)

    def random_phase(self, budget: int) -> None:
        m = self.cf.size
        sigma = 0.3
        stop = self.obj.evals + budget
        while self.obj.evals < min(stop, self.config.iterations):
            cf, cp = self.cf.copy(), self.cp.copy()
            if self.rng.random() < 0.5:
                cf += sigma * self.rng.normal(size=m) / math.sqrt(m)
                cp += sigma * self.rng.normal(size=m) / math.sqrt(m)
            else:
                j = int(self.rng.integers(2 * m))
                target = cf if j < m else cp
                target[j % m] += sigma * self.rng.normal()
            before = self.best
            self._offer(cf, cp, self.obj(cf, cp))
            sigma = sigma * math.exp(1 / 3) if self.best > before else sigma * math.exp(-1 / 12)
            sigma = min(max(sigma, 1e-8), 2.0)

    def ascent_phase(self) -> None:
        m = self.cf.size
        j = 0
        while self.left > 0:
            which, pos = divmod(j % (2 * m), m)
            j += 1
            base_f, base_p = self.cf, self.cp
            cur = (base_f if which == 0 else base_p)[pos]
            span = 2.0 * max(abs(cur), float(np.max(np.abs(base_f if which == 0 else base_p))), 1e-3)

            def neg(t, which=which, pos=pos, base_f=base_f, base_p=base_p):
                cf, cp = base_f.copy(), base_p.copy()
                (cf if which == 0 else cp)[pos] = t
                return -self.obj(cf, cp)

            budget = min(self.config.line_evals, self.left)
            if budget < 2:
                # one evaluation left: try the sign flip of this coordinate
                t, val = -cur, -neg(-cur)
            else:
                t, fval = golden_section(neg, cur - span, cur + span, tol=0.0, max_evals=budget)
                val = -fval
            cf, cp = base_f.copy(), base_p.copy()
            (cf if which == 0 else cp)[pos] = t
            self._offer(cf, cp, val)

    def run(self) -> _RestartOutcome:
        strat = self.config.strategy
        if strat == "random":
            self.random_phase(self.left)
        elif strat == "coordinate_ascent":
            self.ascent_phase()
        else:
            self.random_phase(self.left // 2)
            self.ascent_phase()
        return _RestartOutcome(
            self.r, self.best, self.cf, self.cp, self.incumbents, self.obj.evals, self.obj.max_seen
        )


def _run_restart(args) -> _RestartOutcome:
    config, r = args
    return _Runner(config, r).run()


@dataclass
class SearchResult:
    config: SearchConfig
    best_ratio: float
    best_restart: int
    f_star: HaarCoefficients
    phi_star: HaarCoefficients
    history: list[float]
    certificate: dict
    max_evaluated_ratio: float
    evaluations: int
    incumbents: list[list[float]] = field(default_factory=list, repr=False)

    def step_functions(self) -> tuple[StepFunction, StepFunction]:
        return reconstruct(self.f_star), reconstruct(self.phi_star)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "best_ratio": self.best_ratio,
            "best_restart": self.best_restart,
            "ceiling": CEILING,
            "history": list(self.history),
            "certificate": dict(self.certificate),
            "max_evaluated_ratio": self.max_evaluated_ratio,
            "evaluations": self.evaluations,
            "f_star": {"mean": self.f_star.mean, "coeffs": self.f_star.flat().tolist()},
            "phi_star": {"mean": self.phi_star.mean, "coeffs": self.phi_star.flat().tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SearchResult":
        config = SearchConfig(**d["config"])
        spec = LatticeSpec(1, config.depth)
        return cls(
            config=config,
            best_ratio=float(d["best_ratio"]),
            best_restart=int(d["best_restart"]),
            f_star=HaarCoefficients.from_flat(spec, d["f_star"]["coeffs"], d["f_star"]["mean"]),
            phi_star=HaarCoefficients.from_flat(spec, d["phi_star"]["coeffs"], d["phi_star"]["mean"]),
            history=[float(x) for x in d["history"]],
            certificate=dict(d["certificate"]),
            max_evaluated_ratio=float(d["max_evaluated_ratio"]),
            evaluations=int(d["evaluations"]),
        )


def search(config: SearchConfig, workers: int = 1) -> SearchResult:
    """Run all restarts and keep the best pair (ties go to the lower restart index).

    The winner's ratio is recomputed from scratch through the step-function
    path and must agree with the incumbent to 1e-9 relative.
    """
    jobs = [(config, r) for r in range(config.restarts)]
    if workers > 1 and config.restarts > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_restart, jobs))
    else:
        outcomes = [_run_restart(j) for j in jobs]

    win = outcomes[0]
    for o in outcomes[1:]:
        if o.best > win.best:
            win = o
    spec = LatticeSpec(1, config.depth)
    f_star = HaarCoefficients.from_flat(spec, win.cf)
    phi_star = HaarCoefficients.from_flat(spec, win.cp)
    f, phi = reconstruct(f_star), reconstruct(phi_star)
    d, b, t = duality_sum(f, phi), bmo_norm(phi), tl_norm(f)
    recomputed = d / (b * t)
    if abs(recomputed - win.best) > 1e-9 * recomputed:
        raise CertificationError(f"incumbent {win.best!r} does not reproduce ({recomputed!r})")
    return SearchResult(
        config=config,
        best_ratio=recomputed,
        best_restart=win.index,
        f_star=f_star,
        phi_star=phi_star,
        history=[o.best for o in outcomes],
        certificate={"duality_sum": d, "bmo_norm": b, "tl_norm": t, "ratio": recomputed},
        max_evaluated_ratio=max(o.max_seen for o in outcomes),
        evaluations=sum(o.evals for o in outcomes),
        incumbents=[o.incumbents for o in outcomes],
    )


def certify(result: SearchResult, rtol: float = 1e-9, tight_rel: float = 1e-6) -> VerificationReport:
    """Recompute the winner with the naive reference routines and rerun the key lemma on it.

    Discrepancies beyond ``rtol`` fail the report.  Nodes whose per-node margin
    is within ``tight_rel`` of zero (relative to the node's scale) are listed
    in ``info["tight_nodes"]``; the smallest relative margin is in
    ``info["min_relative_margin"]``.
    """
    f, phi = result.step_functions()
    fv, pv = f.values.tolist(), phi.values.tolist()
    naive = {
        "duality_sum": reference.duality_sum(fv, pv),
        "bmo_norm": reference.bmo_norm(pv),
        "tl_norm": reference.tl_norm(fv),
    }
    naive["ratio"] = naive["duality_sum"] / (naive["bmo_norm"] * naive["tl_norm"])
    rep = VerificationReport("certify", info={"naive": naive})

    for key in ("duality_sum", "bmo_norm", "tl_norm", "ratio"):
        claimed = result.best_ratio if key == "ratio" else result.certificate.get(key, math.nan)
        err = abs(claimed - naive[key]) / max(abs(naive[key]), 1e-300)
        rep.checks.append(
            Check(f"{key}_matches", bool(err <= rtol), -err, None, rtol, detail=f"claimed {claimed!r}, naive {naive[key]!r}")
        )
    if result.certificate.get("ratio") is not None:
        err = abs(result.certificate["ratio"] - result.best_ratio) / max(result.best_ratio, 1e-300)
        rep.checks.append(Check("certificate_consistent", bool(err <= rtol), -err, None, rtol))
    slack = CEILING + 1e-9 - naive["ratio"]
    rep.checks.append(Check("below_ceiling", slack >= 0, slack, None, 1e-9))

    pair = build_pair(f, phi)
    trace = verify_key_lemma(sample_candidate(pair.mbar), pair)
    rep.checks.append(Check("key_lemma", trace.passed, trace.min_relative_margin, tuple(trace.worst_node() or ()), trace.tol))
    tight = trace.tight_nodes(tight_rel)
    rep.info.update(
        tight_nodes=[tuple(n) for n in tight],
        near_tight_nodes=len(trace.tight_nodes(1e-3)),
        min_relative_margin=trace.min_relative_margin,
        lemma_lhs=trace.lhs,
        lemma_rhs=trace.rhs,
    )
    return rep
