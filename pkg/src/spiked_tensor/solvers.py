"""One-dimensional solvers shared by the threshold and replica modules.

Golden-section search (scalar and array-parallel) and bisection, with the
tolerances and residual reporting the callers assert on.  The array-parallel
golden section refines many independent 1-D minimizations in lockstep, which
is what makes batch evaluation of the sparse rate function cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BracketError(RuntimeError):
    """No sign change (bisection) or no bracket (root scan) was found."""


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int


def golden_min(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10):
    """Minimize unimodal ``f`` on [a, b]; returns (x, f(x)) with |x - x*| <= tol."""
    if b < a:
        a, b = b, a
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = c if fc < fd else d
    return x, min(fc, fd)


def golden_min_vec(
    f: Callable[[np.ndarray], np.ndarray],
    a: np.ndarray,
    b: np.ndarray,
    iterations: int,
):
    """Array-parallel golden section: one independent minimization per entry.

    ``f`` must map an array of abscissas to an array of values elementwise.
    Costs exactly one vector evaluation of ``f`` per iteration; after ``k``
    iterations every interval has width (b - a) * INV_PHI**k.  Returns
    (x, f(x)) at the better of the two final probes of each problem.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_next = np.where(left, b - INV_PHI * (b - a), d)
        d_next = np.where(left, c, a + INV_PHI * (b - a))
        probe = np.where(left, c_next, d_next)
        fprobe = f(probe)
        fc, fd = np.where(left, fprobe, fd), np.where(left, fc, fprobe)
        c, d = c_next, d_next
    x = np.where(fc < fd, c, d)
    return x, np.minimum(fc, fd)


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-12,
    max_iter: int = 300,
) -> RootResult:
    """Bisection root of ``f`` on [lo, hi]; endpoints must bracket a sign change."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return RootResult(lo, 0.0, 0)
    if fhi == 0.0:
        return RootResult(hi, 0.0, 0)
    if flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    it = 0
    while hi - lo > xtol and it < max_iter:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        it += 1
        if fm == 0.0:
            lo = hi = mid
            break
        if fm * flo > 0:
            lo, flo = mid, fm
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return RootResult(root, abs(f(root)), it)


def geometric_grid(npts: int, tmin: float = 1e-9, tmax_gap: float = 1e-14) -> np.ndarray:
    """Grid on (0, 1) that is dense near both endpoints.

    Uniform points plus log-spaced points toward 0 and geometrically spaced
    points toward 1; minimizers of threshold objectives drift into the
    boundary layer at 1 for large tensor order, so uniform grids miss them.
    """
    uniform = np.linspace(tmin, 1.0 - 1e-9, npts)
    toward0 = 10.0 ** np.linspace(math.log10(tmin), -0.3, npts // 4)
    toward1 = 1.0 - 10.0 ** np.linspace(math.log10(tmax_gap), -0.3, npts // 4)
    return np.unique(np.concatenate([uniform, toward0, toward1]))
