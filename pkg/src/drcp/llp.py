"""
Worst-case evaluation of a robust constraint over its scalar uncertainty interval.

A dense grid locates every candidate peak, golden-section search refines
the most promising ones, and a three-point parabolic step recovers the
last digits that comparisons of nearly equal function values cannot.
"""

from dataclasses import dataclass

import numpy as np

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LlpResult:
    g_max: float
    y_max: float
    certified_gap: float  # -1.0 when no Lipschitz bound is known

    @property
    def certified(self):
        return self.certified_gap >= 0.0


@dataclass(frozen=True)
class LocallyFeasible:
    g_max: float


@dataclass(frozen=True)
class Violated:
    y_max: float
    g_max: float


def _eval_grid(g, x, ys):
    try:
        vals = np.asarray(g(x, ys), dtype=float)
        if vals.shape == ys.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(g(x, y)) for y in ys])


def _golden_max(phi, a, b, tol):
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = phi(c), phi(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = phi(d)
    return (c, fc) if fc >= fd else (d, fd)


def _parabolic_polish(phi, y, fy, a, b, h=1e-5, rounds=2):
    for _ in range(rounds):
        if y - h < a or y + h > b:
            break
        fm, fp = phi(y - h), phi(y + h)
        curv = fp - 2.0 * fy + fm
        if not curv < 0.0:
            break
        y_new = y - 0.5 * h * (fp - fm) / curv
        if not a <= y_new <= b:
            break
        f_new = phi(y_new)
        # values this close to the peak are flat up to rounding
        if f_new < fy - 8.0 * np.finfo(float).eps * (1.0 + abs(fy)):
            break
        y, fy = y_new, f_new
    return y, fy


def _local_maxima(vals):
    left = np.r_[-np.inf, vals[:-1]]
    right = np.r_[vals[1:], -np.inf]
    return np.flatnonzero((vals >= left) & (vals >= right))


def solve_llp(g, x, grid_n=2001, refine_tol=1e-10, n_brackets=5):
    """Maximise ``g(x, y)`` over ``y`` in ``[g.y_lo, g.y_hi]``.

    Parameters
    ----------
    g : RobustConstraint
    x : array_like
        Decision point.
    grid_n : int
        Uniform grid size, endpoints included.
    refine_tol : float
        Final bracket width for golden-section refinement.
    n_brackets : int
        How many of the highest grid peaks are refined.

    Returns
    -------
    LlpResult
        ``g_max`` is re-evaluated at ``y_max``. Among equal maxima the
        smallest ``y`` is returned.
    """
    if grid_n < 3:
        raise ValueError("grid_n must be at least 3")
    x = np.asarray(x, dtype=float)
    lo, hi = float(g.y_lo), float(g.y_hi)
    if lo == hi:
        return LlpResult(float(g(x, lo)), lo, 0.0)
    ys = np.linspace(lo, hi, grid_n)
    vals = _eval_grid(g, x, ys)

    def phi(y):
        return float(g(x, y))

    peaks = _local_maxima(vals)
    # highest first; stable sort keeps smaller y ahead on ties
    peaks = peaks[np.argsort(-vals[peaks], kind="stable")][:n_brackets]
    k0 = int(np.argmax(vals))  # first occurrence = smallest y
    best_y, best_g = float(ys[k0]), float(vals[k0])
    for k in peaks:
        a = ys[max(k - 1, 0)]
        b = ys[min(k + 1, grid_n - 1)]
        y, fy = _golden_max(phi, a, b, refine_tol)
        y, fy = _parabolic_polish(phi, y, fy, a, b)
        # golden section never evaluates the bracket ends; an interval end wins a rounding tie
        for end in {a, b} & {lo, hi}:
            f_end = phi(end)
            if f_end >= fy - 8.0 * np.finfo(float).eps * (1.0 + abs(fy)):
                y, fy = end, f_end
        if fy > best_g or (fy == best_g and y < best_y):
            best_y, best_g = float(y), float(fy)
    best_y = min(max(best_y, lo), hi)
    gap = -1.0
    if g.lipschitz_y is not None:
        gap = float(g.lipschitz_y) * (hi - lo) / (grid_n - 1) / 2.0
    return LlpResult(phi(best_y), best_y, gap)


def feasibility_verdict(res):
    """``LocallyFeasible`` iff ``g_max <= 0``, else ``Violated`` carrying the cut point."""
    if res.g_max <= 0.0:
        return LocallyFeasible(res.g_max)
    return Violated(res.y_max, res.g_max)
