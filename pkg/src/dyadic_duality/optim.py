"""Derivative-free 1-D minimisation used by the family optimiser and the search."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_evals: int | None = None,
) -> tuple[float, float]:
    """Minimise a unimodal ``func`` on the open interval (a, b).

    Endpoints are never evaluated.  Stops when the bracket is narrower than
    ``tol`` or after ``max_evals`` evaluations (at least 2), and returns the
    best evaluated point and its value.
    """
    if not b > a:
        raise ValueError(f"empty bracket ({a}, {b})")
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    evals = 2
    while b - a > tol and (max_evals is None or evals < max_evals):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = func(d)
        evals += 1
    return (c, fc) if fc <= fd else (d, fd)


def expand_bracket(func: Callable[[float], float], lo: float, start: float, limit: float = 1e12) -> float:
    """Grow ``hi`` geometrically from ``start`` until func(hi) exceeds func at the midpoint.

    Used for objectives that blow up at ``lo`` and eventually increase, so that
    (lo, hi) contains a minimiser.
    """
    hi = start
    while hi - lo < limit:
        mid = lo + (hi - lo) / 2
        if func(hi) > func(mid):
            return hi
        hi = lo + 2 * (hi - lo)
    raise RuntimeError("could not bracket a minimum")
