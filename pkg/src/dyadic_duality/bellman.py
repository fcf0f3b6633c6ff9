"""Bellman candidates on [0, inf) x [0, mbar] and a checker for their hypotheses.

The conditions verified are

    0 <= B(x, y) <= 2 mbar sqrt(x)
    -B_x B_y >= mbar / 2
    B_xx <= 0,  B_yy >= 0
    B(0, y) = 0

A condition ``E >= c`` passes when ``E >= c - tol * max(1, |c|)``; reported
margins are ``(E - c) / max(1, |c|)``, so a record passes iff its worst margin
is at least ``-tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .optim import expand_bracket, golden_section

CONDITIONS = (
    "lower_bound",
    "upper_bound",
    "mixed_derivative",
    "concave_x",
    "convex_y",
    "boundary_zero",
)


class InfeasibleFamilyError(ValueError):
    pass


class CandidateError(ValueError):
    pass


Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class BellmanCandidate:
    """A candidate B with optional analytic partials.

    ``form`` is ``"family"`` for sqrt(x) (A - y), ``"closed_form"`` for other
    analytic candidates and ``"grid_sampled"`` for tabulated ones.  Grid
    candidates carry their sample grid; their derivatives are taken by finite
    differences on that grid.
    """

    mbar: float
    value: Field
    dx: Field | None = None
    dy: Field | None = None
    dxx: Field | None = None
    dyy: Field | None = None
    form: str = "closed_form"
    A: float | None = None
    grid_x: np.ndarray | None = field(default=None, repr=False)
    grid_y: np.ndarray | None = field(default=None, repr=False)
    grid_values: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, x, y):
        return self.value(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    @property
    def upper_constant(self) -> float | None:
        """C1 in 0 <= B <= C1 sqrt(x) (family only)."""
        return self.A if self.form == "family" else None

    @property
    def mixed_constant(self) -> float | None:
        """C2 in -B_x B_y >= C2 (family only)."""
        return (self.A - self.mbar) / 2 if self.form == "family" else None

    @property
    def has_analytic_derivatives(self) -> bool:
        return None not in (self.dx, self.dy, self.dxx, self.dyy)


def family_candidate(A: float, mbar: float) -> BellmanCandidate:
    """B(x, y) = sqrt(x) (A - y); needs A > mbar for -B_x B_y to stay positive."""
    if not mbar > 0:
        raise ValueError(f"mbar must be positive, got {mbar}")
    if not A > mbar:
        raise InfeasibleFamilyError(f"A = {A} must exceed mbar = {mbar}")
    A, mbar = float(A), float(mbar)
    return BellmanCandidate(
        mbar=mbar,
        value=lambda x, y: np.sqrt(x) * (A - y),
        dx=lambda x, y: (A - y) / (2 * np.sqrt(x)),
        dy=lambda x, y: -np.sqrt(x) + 0 * y,
        dxx=lambda x, y: -(A - y) / (4 * x**1.5),
        dyy=lambda x, y: np.zeros(np.broadcast(x, y).shape),
        form="family",
        A=A,
    )


def sample_candidate(mbar: float) -> BellmanCandidate:
    """B(x, y) = sqrt(x) (2 mbar - y), the best member of the family."""
    if not mbar > 0:
        raise ValueError(f"mbar must be positive, got {mbar}")
    return family_candidate(2.0 * mbar, mbar)


def grid_candidate(mbar: float, x, y, values) -> BellmanCandidate:
    """Tabulated candidate, ``values[i][j] = B(x[i], y[j])``; evaluated by bilinear interpolation."""
    from scipy.interpolate import RegularGridInterpolator

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = np.asarray(values, dtype=float)
    if not mbar > 0:
        raise CandidateError("mbar must be positive")
    if x.ndim != 1 or y.ndim != 1 or x.size < 3 or y.size < 3:
        raise CandidateError("grid needs at least 3 points along each axis")
    if v.shape != (x.size, y.size):
        raise CandidateError(f"values shape {v.shape} does not match grid {(x.size, y.size)}")
    if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0) or x[0] < 0:
        raise CandidateError("grid axes must be strictly increasing with x >= 0")
    if y[0] > 0 or y[-1] < mbar * (1 - 1e-12):
        raise CandidateError("y grid must cover [0, mbar]")
    if not np.all(np.isfinite(v)):
        raise CandidateError("non-finite candidate values")
    interp = RegularGridInterpolator((x, y), v, method="linear", bounds_error=True)

    def value(xx, yy):
        xx, yy = np.broadcast_arrays(np.asarray(xx, float), np.asarray(yy, float))
        pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
        return interp(pts).reshape(xx.shape)

    return BellmanCandidate(
        mbar=float(mbar), value=value, form="grid_sampled", grid_x=x, grid_y=y, grid_values=v
    )


@dataclass(frozen=True)
class GridSpec:
    x_min: float = 1e-8
    x_max: float = 1e4
    nx: int = 200
    ny: int = 101

    def axes(self, mbar: float) -> tuple[np.ndarray, np.ndarray]:
        if not (0 < self.x_min < self.x_max) or self.nx < 1 or self.ny < 1:
            raise CandidateError(f"empty or invalid grid {self}")
        x = np.logspace(math.log10(self.x_min), math.log10(self.x_max), self.nx)
        y = np.linspace(0.0, mbar, self.ny)
        return x, y


@dataclass
class ConditionRecord:
    name: str
    passed: bool
    worst_margin: float
    worst_value: float
    threshold: float
    worst_location: tuple[float, float] | None
    evaluated: bool = True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "evaluated": self.evaluated,
            "worst_margin": self.worst_margin,
            "worst_value": self.worst_value,
            "threshold": self.threshold,
            "worst_location": list(self.worst_location) if self.worst_location else None,
        }


@dataclass
class ConditionReport:
    mbar: float
    tol: float
    form: str
    records: dict[str, ConditionRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records.values())

    def failed(self) -> list[str]:
        return [name for name, r in self.records.items() if not r.passed]

    def __getitem__(self, name: str) -> ConditionRecord:
        return self.records[name]

    def to_dict(self) -> dict:
        return {
            "mbar": self.mbar,
            "tol": self.tol,
            "form": self.form,
            "passed": self.passed,
            "failed": self.failed(),
            "conditions": [self.records[n].to_dict() for n in CONDITIONS],
        }


def _record(name, E, c, X, Y, tol) -> ConditionRecord:
    E = np.asarray(E, dtype=float)
    scale = max(1.0, abs(c))
    margins = (E - c) / scale
    flat = margins.ravel()
    if np.any(np.isnan(flat)):
        raise CandidateError(f"non-finite values while checking {name}")
    i = int(np.argmin(flat))  # first minimum: smallest x, then smallest y
    loc = (float(np.ravel(X)[i]), float(np.ravel(Y)[i]))
    worst = float(flat[i])
    return ConditionRecord(name, worst >= -tol, worst, float(E.ravel()[i]), float(c), loc)


def _d1(v: np.ndarray, t: np.ndarray, axis: int) -> np.ndarray:
    return np.gradient(v, t, axis=axis, edge_order=2)


def _d2(v: np.ndarray, t: np.ndarray, axis: int) -> np.ndarray:
    """Three-point second derivative on a non-uniform axis; ends reuse the nearest stencil."""
    v = np.moveaxis(v, axis, 0)
    h1 = (t[1:-1] - t[:-2])[:, None]
    h2 = (t[2:] - t[1:-1])[:, None]
    inner = 2 * (
        v[:-2] / (h1 * (h1 + h2)) - v[1:-1] / (h1 * h2) + v[2:] / (h2 * (h1 + h2))
    )
    out = np.concatenate([inner[:1], inner, inner[-1:]], axis=0)
    return np.moveaxis(out, 0, axis)


def verify_conditions(
    cand: BellmanCandidate, grid: GridSpec | None = None, tol: float = 1e-12
) -> ConditionReport:
    """Check every Bellman condition on a grid and report worst margins.

    Closed-form candidates are checked on ``grid`` (default :class:`GridSpec`)
    with analytic partials.  Grid-sampled candidates are checked on their own
    sample grid with finite differences.  Derivative conditions skip x = 0.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    mbar = cand.mbar
    if cand.form == "grid_sampled":
        xs, ys, V = cand.grid_x, cand.grid_y, cand.grid_values
        has_zero = xs[0] == 0.0
        xpos, Vpos = (xs[1:], V[1:]) if has_zero else (xs, V)
        if xpos.size < 3:
            raise CandidateError("need at least 3 positive x samples")
        X, Y = np.meshgrid(xpos, ys, indexing="ij")
        B = Vpos
        Bx, By = _d1(B, xpos, 0), _d1(B, ys, 1)
        Bxx, Byy = _d2(B, xpos, 0), _d2(B, ys, 1)
        B0 = V[0] if has_zero else None
    else:
        xs, ys = (grid or GridSpec()).axes(mbar)
        if xs.size == 0 or ys.size == 0:
            raise CandidateError("empty grid")
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        B = cand.value(X, Y)
        if not np.all(np.isfinite(B)):
            raise CandidateError("non-finite candidate values")
        if cand.has_analytic_derivatives:
            Bx, By, Bxx, Byy = (d(X, Y) for d in (cand.dx, cand.dy, cand.dxx, cand.dyy))
        else:
            Bx, By, Bxx, Byy = numeric_partials(cand, X, Y)
        B0 = cand.value(np.zeros_like(ys), ys)
        if not np.all(np.isfinite(B0)):
            raise CandidateError("non-finite candidate values at x = 0")

    recs = {
        "lower_bound": _record("lower_bound", B, 0.0, X, Y, tol),
        "upper_bound": _record("upper_bound", 2 * mbar * np.sqrt(X) - B, 0.0, X, Y, tol),
        "mixed_derivative": _record("mixed_derivative", -Bx * By, mbar / 2, X, Y, tol),
        "concave_x": _record("concave_x", -Bxx, 0.0, X, Y, tol),
        "convex_y": _record("convex_y", Byy, 0.0, X, Y, tol),
    }
    if B0 is None:
        recs["boundary_zero"] = ConditionRecord(
            "boundary_zero", True, 0.0, 0.0, 0.0, None, evaluated=False
        )
    else:
        recs["boundary_zero"] = _record(
            "boundary_zero", -np.abs(B0), 0.0, np.zeros_like(ys), ys, tol
        )
    return ConditionReport(mbar, tol, cand.form, recs)


def numeric_partials(cand: BellmanCandidate, X, Y, rel_step: float = 1e-4):
    """Central-difference partials of ``cand.value`` with steps relative to x and mbar.

    Falls back to one-sided stencils in y at the edges of [0, mbar].
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    f = cand.value
    hx = rel_step * X
    Bx = (f(X + hx, Y) - f(X - hx, Y)) / (2 * hx)
    hxx = 10 * rel_step * X
    Bxx = (f(X + hxx, Y) - 2 * f(X, Y) + f(X - hxx, Y)) / hxx**2

    hy = 10 * rel_step * cand.mbar
    # shift the 3-point stencil inward at the y-boundaries
    Yc = np.clip(Y, hy, cand.mbar - hy)
    lo, mid, hi = f(X, Yc - hy), f(X, Yc), f(X, Yc + hy)
    Byy = (lo - 2 * mid + hi) / hy**2
    By = (hi - lo) / (2 * hy) + (Y - Yc) * Byy
    return Bx, By, Bxx, Byy


def family_ratio(A: float, mbar: float) -> float:
    """C1 / sqrt(C2) for the family member with parameter A."""
    if A <= mbar:
        return math.inf
    return math.sqrt(2.0) * A / math.sqrt(A - mbar)


def optimize_family(mbar: float, tol: float = 1e-9) -> tuple[float, float]:
    """Golden-section minimisation of the family ratio over A > mbar."""
    if not mbar > 0:
        raise ValueError(f"mbar must be positive, got {mbar}")
    func = lambda A: family_ratio(A, mbar)  # noqa: E731
    hi = expand_bracket(func, mbar, mbar + 1.0)
    A, r = golden_section(func, mbar, hi, tol=tol)
    return A, r
