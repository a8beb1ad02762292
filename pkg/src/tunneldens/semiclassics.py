"""Complex traversal-time shifts and their singular behavior.

A particle crossing the box at energy E spends

    T(E) = integral over allowed regions of sqrt(m / (2(E - V(x)))) dx

of real time; the barrier adds the imaginary part

    integral over forbidden regions of sqrt(m / (2(V(x) - E))) dx.

Subtracting the free crossing time gives the complex time shift whose
value, divided by pi*hbar, reproduces the smoothed continuum level
density.  Near a barrier-top energy the shift develops the
characteristic excited-state-QPT singularities: a symmetric logarithmic
divergence (quadratic top, real part), a step (quadratic top, imaginary
part), and a |E-E0|^(-1/4) power law (quartic top, real part).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import csv
import json

import numpy as np
import scipy.optimize

from .model import (
    Classicality,
    PotentialSpec,
    StationaryPoint,
    decompose_regions,
    envelope_support,
    eval_potential,
    stationary_points,
)

__all__ = [
    "TimeShiftCurve",
    "SingularityFit",
    "re_time_shift",
    "im_time_shift",
    "time_shift_curve",
    "semiclassical_density",
    "fit_singularity",
]

# per-interval node budget; the convergence check runs at half this
QUAD_BUDGET = 200

# flag grid points within this many grid spacings of a stationary energy
SINGULAR_WINDOW_SPACINGS = 10

IM_CONVENTION = (
    "im_values are the positive forbidden-region integrals; they equal "
    "+hbar * d ln|T|/dE, so negate before comparing with pi*hbar*Im(density)"
)


@dataclass(frozen=True, eq=False)
class TimeShiftCurve:
    """Complex time shift sampled on a real energy grid.

    ``im_values`` carries the positive barrier integrals (see
    ``im_convention`` for the sign relative to scattering quantities).
    ``singular_flags`` marks samples too close to a stationary energy to
    be trusted in smooth fits.
    """

    grid: np.ndarray
    re_values: np.ndarray
    im_values: np.ndarray
    singular_flags: np.ndarray
    metadata: dict
    im_convention: str = IM_CONVENTION

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# config: {json.dumps(self.metadata)}\n")
            writer = csv.writer(fh)
            writer.writerow(["E", "re_dT", "im_dT", "singular_flag"])
            for e, re, im, flag in zip(
                self.grid, self.re_values, self.im_values, self.singular_flags
            ):
                writer.writerow(
                    [repr(float(e)), repr(float(re)), repr(float(im)), int(flag)]
                )


@dataclass(frozen=True)
class SingularityFit:
    """Fitted singular model at one stationary energy.

    ``model`` is "log", "step" or "power_quarter"; ``goodness`` is the
    coefficient of determination for the least-squares models and the
    gap-to-noise ratio for the step.
    """

    E0: float
    model: str
    params: dict
    goodness: float


@lru_cache(maxsize=8)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _seg_plain(g, a: float, b: float, n: int) -> float:
    if b <= a:
        return 0.0
    x, w = _gauss(n)
    xm = 0.5 * (a + b) + 0.5 * (b - a) * x
    return 0.5 * (b - a) * float(np.sum(w * g(xm)))


def _seg_endpoint(g, x_t: float, length: float, sign: int, n: int) -> float:
    # substitute x = x_t + sign*u^2: du picks up a factor 2u that cancels
    # the inverse-square-root blowup of g at the turning point
    if length <= 0:
        return 0.0
    x, w = _gauss(n)
    umax = np.sqrt(length)
    u = 0.5 * umax * (x + 1.0)
    xm = x_t + sign * u * u
    return 0.5 * umax * float(np.sum(w * g(xm) * 2.0 * u))


def _piece(g, lo, hi, graded_lo, graded_hi, n) -> float:
    s = min(2.0, (hi - lo) / 3.0)
    left = (
        _seg_endpoint(g, lo, s, +1, n) if graded_lo
        else _seg_plain(g, lo, lo + s, n)
    )
    right = (
        _seg_endpoint(g, hi, s, -1, n) if graded_hi
        else _seg_plain(g, hi - s, hi, n)
    )
    return left + _seg_plain(g, lo + s, hi - s, n) + right


def _interval_integral(
    g, lo: float, hi: float, sing_lo: bool, sing_hi: bool,
    inner: list, strict: bool, context: str,
) -> float:
    """Integrate g over [lo, hi] with grading toward marked points.

    ``sing_lo``/``sing_hi`` mark genuine inverse-square-root endpoints
    (turning points); ``inner`` lists interior x positions where V comes
    closest to E (stationary points), across which the integrand can
    spike sharply without being singular.  Both cases get the square-
    root substitution, which removes the singularity in the first case
    and acts as a graded mesh in the second.  A node-halving check
    guards convergence when ``strict``.
    """
    marks = [(lo, sing_lo)]
    for p in sorted(inner):
        if p - 1e-9 > lo and p + 1e-9 < hi:
            marks.append((p, True))
    marks.append((hi, sing_hi))

    def once(n):
        return sum(
            _piece(g, a, b, ga, gb, n)
            for (a, ga), (b, gb) in zip(marks[:-1], marks[1:])
        )

    full = once(QUAD_BUDGET // 3)
    if strict:
        half = once(QUAD_BUDGET // 6)
        err = abs(full - half)
        if err > max(1e-7 * abs(full), 1e-9):
            raise RuntimeError(
                f"quadrature not converged on [{lo:g}, {hi:g}] ({context}): "
                f"node-halving estimate {err:.3e}"
            )
    return full


def _decompose(spec, E, x_L, x_R, stationary):
    if stationary is None:
        stationary = stationary_points(spec)
    return decompose_regions(spec, E, x_L, x_R, stationary=stationary), stationary


def re_time_shift(
    spec: PotentialSpec,
    classicality: Classicality,
    E: float,
    x_L: float,
    x_R: float,
    stationary: list[StationaryPoint] | None = None,
    strict: bool = True,
) -> float:
    """Allowed-region crossing time minus the free crossing time.

    The free term is combined into a single difference integrand before
    quadrature, so the large flat stretches of the box cancel exactly
    instead of catastrophically; outside the envelope of V the
    difference vanishes and the integration is clipped.  Inverse-
    square-root turning-point endpoints get the substitution treatment.
    """
    dec, stationary = _decompose(spec, E, x_L, x_R, stationary)
    m = classicality.mass
    f_free = np.sqrt(m / (2.0 * E))

    def g(x):
        v = eval_potential(spec, x).real
        gap = np.maximum(E - v, 1e-300)
        return np.sqrt(m / (2.0 * gap)) - f_free

    clip = envelope_support(spec) + 1.0
    x0s = [sp.x0 for sp in stationary]
    total = 0.0
    for lo, hi in dec.allowed:
        sing_lo = lo != x_L
        sing_hi = hi != x_R
        if not sing_lo:
            lo = max(lo, -clip)
        if not sing_hi:
            hi = min(hi, clip)
        if hi <= lo:
            continue
        total += _interval_integral(
            g, lo, hi, sing_lo, sing_hi, x0s, strict and not dec.tangent,
            f"re time shift at E={E:g}",
        )
    forbidden_measure = sum(hi - lo for lo, hi in dec.forbidden)
    return total - f_free * forbidden_measure


def im_time_shift(
    spec: PotentialSpec,
    classicality: Classicality,
    E: float,
    x_L: float,
    x_R: float,
    stationary: list[StationaryPoint] | None = None,
    strict: bool = True,
) -> float:
    """Barrier integral sqrt(m/(2(V-E))) over the forbidden regions.

    Non-negative by construction; exactly zero once E clears the
    barrier.
    """
    dec, stationary = _decompose(spec, E, x_L, x_R, stationary)
    if not dec.forbidden:
        return 0.0
    m = classicality.mass

    def g(x):
        v = eval_potential(spec, x).real
        gap = np.maximum(v - E, 1e-300)
        return np.sqrt(m / (2.0 * gap))

    x0s = [sp.x0 for sp in stationary]
    total = 0.0
    for lo, hi in dec.forbidden:
        total += _interval_integral(
            g, lo, hi, lo != x_L, hi != x_R, x0s, strict and not dec.tangent,
            f"im time shift at E={E:g}",
        )
    return total


def time_shift_curve(
    spec: PotentialSpec,
    classicality: Classicality,
    grid: np.ndarray,
    x_L: float,
    x_R: float,
) -> TimeShiftCurve:
    """Both time-shift parts over a grid, with singular samples flagged.

    Samples within SINGULAR_WINDOW_SPACINGS grid steps of a stationary
    energy (or computed from a nudged tangent decomposition) carry the
    singular flag; their values are best-effort and excluded from fits.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a 1d strictly ascending array")
    stationary = stationary_points(spec)
    spacing = float(np.median(np.diff(grid)))
    window = SINGULAR_WINDOW_SPACINGS * spacing

    flags = np.zeros(len(grid), dtype=bool)
    for sp in stationary:
        flags |= np.abs(grid - sp.E0) < window

    re_vals = np.empty(len(grid))
    im_vals = np.empty(len(grid))
    for i, E in enumerate(grid):
        dec = decompose_regions(spec, E, x_L, x_R, stationary=stationary)
        if dec.tangent:
            flags[i] = True
        strict = not flags[i]
        re_vals[i] = re_time_shift(
            spec, classicality, E, x_L, x_R, stationary, strict=strict
        )
        im_vals[i] = im_time_shift(
            spec, classicality, E, x_L, x_R, stationary, strict=strict
        )
    meta = {
        "potential": {"a": spec.a, "b": spec.b, "c": spec.c, "eta": spec.eta},
        "hbar": classicality.hbar,
        "mass": classicality.mass,
        "x_L": x_L,
        "x_R": x_R,
    }
    return TimeShiftCurve(
        grid=grid,
        re_values=re_vals,
        im_values=im_vals,
        singular_flags=flags,
        metadata=meta,
    )


def semiclassical_density(
    spec: PotentialSpec,
    classicality: Classicality,
    grid: np.ndarray,
    x_L: float,
    x_R: float,
) -> TimeShiftCurve:
    """Time-shift curve rescaled by 1/(pi*hbar) into a level density."""
    curve = time_shift_curve(spec, classicality, grid, x_L, x_R)
    scale = 1.0 / (np.pi * classicality.hbar)
    meta = dict(curve.metadata)
    meta["scaled_by"] = "1/(pi*hbar)"
    return TimeShiftCurve(
        grid=curve.grid,
        re_values=curve.re_values * scale,
        im_values=curve.im_values * scale,
        singular_flags=curve.singular_flags,
        metadata=meta,
    )


def _r_squared(y, fit):
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0


def fit_singularity(
    curve: TimeShiftCurve,
    sp: StationaryPoint,
    window: float,
    model: str | None = None,
) -> SingularityFit:
    """Least-squares fit of the singular behavior around one barrier top.

    Model selection follows the stationary point: a quadratic maximum
    implies "log" on the real part (or "step" on the imaginary part if
    requested), a quartic maximum implies "power_quarter" on the real
    part.  Samples inside the singular flag zone are excluded; at least
    20 clean samples per side of E0 are required.
    """
    if model is None:
        if sp.kind == "maximum" and sp.order == 2:
            model = "log"
        elif sp.kind == "maximum" and sp.order == 4:
            model = "power_quarter"
        else:
            raise ValueError(f"no singular model for a {sp.kind} of order {sp.order}")
    allowed_models = {
        "log": ("maximum", 2),
        "step": ("maximum", 2),
        "power_quarter": ("maximum", 4),
    }
    if model not in allowed_models:
        raise ValueError(f"unknown model {model!r}")
    if allowed_models[model] != (sp.kind, sp.order):
        raise ValueError(
            f"model {model!r} does not apply to a {sp.kind} of order {sp.order}"
        )

    d = curve.grid - sp.E0
    keep = (np.abs(d) <= window) & ~curve.singular_flags
    below = keep & (d < 0)
    above = keep & (d > 0)
    if below.sum() < 20 or above.sum() < 20:
        raise ValueError(
            f"need at least 20 clean samples per side of E0={sp.E0:g}, "
            f"got {int(below.sum())}/{int(above.sum())}"
        )

    if model == "step":
        y = curve.im_values
        mean_below = float(np.mean(y[below]))
        mean_above = float(np.mean(y[above]))
        sigma = float(np.sqrt(0.5 * (np.var(y[below]) + np.var(y[above]))))
        gap = abs(mean_below - mean_above)
        return SingularityFit(
            E0=sp.E0,
            model="step",
            params={
                "mean_below": mean_below,
                "mean_above": mean_above,
                "gap": gap,
                "sigma": sigma,
            },
            goodness=gap / sigma if sigma > 0 else np.inf,
        )

    y = curve.re_values[keep]
    x = np.abs(d[keep])
    if model == "log":
        A = np.column_stack([np.log(x), np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        fit = A @ coef
        return SingularityFit(
            E0=sp.E0,
            model="log",
            params={"amplitude": float(coef[0]), "offset": float(coef[1])},
            goodness=_r_squared(y, fit),
        )

    # power_quarter: shared exponent, per-side amplitude and offset.  The
    # offsets matter: the divergent term rides on a regular background of
    # comparable size, which biases a bare log-log slope far off the true
    # exponent.
    side = (d[keep] > 0).astype(float)

    def power_model(X, p, amp_below, off_below, amp_above, off_above):
        xx, ss = X
        lobe = amp_below * xx**p + off_below
        hibe = amp_above * xx**p + off_above
        return np.where(ss > 0.5, hibe, lobe)

    slope0 = np.polyfit(np.log(x), np.log(np.maximum(np.abs(y), 1e-300)), 1)[0]
    p0 = [slope0, 1.0, 0.0, 1.0, 0.0]
    popt, _ = scipy.optimize.curve_fit(
        power_model, (x, side), y, p0=p0, maxfev=20000
    )
    fit = power_model((x, side), *popt)
    return SingularityFit(
        E0=sp.E0,
        model="power_quarter",
        params={
            "exponent": float(popt[0]),
            "amp_below": float(popt[1]),
            "offset_below": float(popt[2]),
            "amp_above": float(popt[3]),
            "offset_above": float(popt[4]),
        },
        goodness=_r_squared(y, fit),
    )
