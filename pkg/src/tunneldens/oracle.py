"""Direct scattering solver used to cross-check the spectral route.

Transmission through the potential is computed the pedestrian way: the
wave function is propagated across a uniform piecewise-constant slicing
of the interaction region with exact per-slice solutions (trigonometric
where E > V, hyperbolic where E < V), stepping leftward from an
outgoing plane wave.  No complex scaling, no basis, no eigenvalues.

The complex phase of the transmission amplitude, written T = e^{i*Phi},
carries everything: Re Phi is the scattering phase, Im Phi = -ln|T| the
tunneling suppression, and (1/pi) dPhi/dE is an independent measurement
of the continuum level density change.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.signal

from .model import Classicality, PotentialSpec, envelope_support, eval_potential

__all__ = [
    "ScatterPoint",
    "OracleCurve",
    "ResonanceMatch",
    "scatter_piecewise",
    "solve_scatter",
    "oracle_density",
    "resonance_extract",
    "match_resonances",
]

# slices per local de Broglie wavelength, and an absolute floor
PER_WAVELENGTH = 40
MIN_SLICES = 10_000

# adjacent principal-value phase jumps above this mean the grid cannot
# be unwrapped reliably
UNWRAP_LIMIT = 0.9 * np.pi


@dataclass(frozen=True)
class ScatterPoint:
    """Scattering data at one energy, with T = e^{i*Phi}."""

    E: float
    T: complex
    R: complex
    Phi: complex


@dataclass(frozen=True, eq=False)
class OracleCurve:
    """Scattering results on an energy grid plus the derived density.

    ``phases`` is branch-tracked along the grid; ``density`` holds
    (1/pi) dPhi/dE by central differences (one-sided at the ends), so
    its real part is the phase-shift derivative and its imaginary part
    is -(1/pi) d ln|T| / dE.
    """

    energies: np.ndarray
    transmissions: np.ndarray
    reflections: np.ndarray
    phases: np.ndarray
    density: np.ndarray
    metadata: dict

    def point(self, i: int) -> ScatterPoint:
        return ScatterPoint(
            E=float(self.energies[i]),
            T=complex(self.transmissions[i]),
            R=complex(self.reflections[i]),
            Phi=complex(self.phases[i]),
        )

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# config: {json.dumps(self.metadata)}\n")
            writer = csv.writer(fh)
            writer.writerow(
                ["E", "re_T", "im_T", "re_R", "im_R",
                 "re_phi_total", "im_phi_total", "re_drho", "im_drho"]
            )
            for i in range(len(self.energies)):
                writer.writerow(
                    [repr(float(x)) for x in (
                        self.energies[i],
                        self.transmissions[i].real, self.transmissions[i].imag,
                        self.reflections[i].real, self.reflections[i].imag,
                        self.phases[i].real, self.phases[i].imag,
                        self.density[i].real, self.density[i].imag,
                    )]
                )


def scatter_piecewise(
    v_mid: np.ndarray,
    x_lo: float,
    x_hi: float,
    Es: np.ndarray,
    classicality: Classicality,
):
    """Propagate plane waves across a sampled potential.

    ``v_mid`` holds the potential at the midpoints of a uniform slicing
    of [x_lo, x_hi].  Returns (ln|T|, arg T, R) per energy, with arg T
    as a principal value.  The solution vector is renormalized every
    slice and the magnitude tracked in log space, so arbitrarily deep
    tunneling cannot overflow.
    """
    Es = np.atleast_1d(np.asarray(Es, dtype=float))
    if np.any(Es <= 0):
        raise ValueError("scattering energies must be positive")
    v_mid = np.asarray(v_mid, dtype=float)
    n = len(v_mid)
    if n < 1 or not x_lo < x_hi:
        raise ValueError("need at least one slice and x_lo < x_hi")
    hbar, m = classicality.hbar, classicality.mass
    if not np.any(v_mid):
        one = np.ones_like(Es, dtype=complex)
        return np.zeros_like(Es), np.zeros_like(Es), np.zeros_like(one)

    h = (x_hi - x_lo) / n
    k0 = np.sqrt(2 * m * Es) / hbar
    psi = np.exp(1j * k0 * x_hi)
    dpsi = 1j * k0 * psi
    logs = np.zeros_like(Es)
    for i in range(n - 1, -1, -1):
        val = 2 * m * (Es - v_mid[i]) / hbar**2
        k = np.sqrt(np.abs(val))
        pos = val >= 0
        ch = np.where(pos, np.cos(k * h), np.cosh(k * h))
        sh = np.where(
            pos,
            np.sinc(k * h / np.pi) * h,
            np.sinh(k * h) / np.where(k > 0, k, 1.0),
        )
        sh = np.where((~pos) & (k == 0), h, sh)
        dch = np.where(pos, k * np.sin(k * h), -k * np.sinh(k * h))
        psi, dpsi = psi * ch - dpsi * sh, psi * dch + dpsi * ch
        sc = np.maximum(np.abs(psi), np.abs(dpsi) / k0)
        psi = psi / sc
        dpsi = dpsi / sc
        logs += np.log(sc)
    phase = np.exp(-1j * k0 * x_lo)
    A = 0.5 * (psi + dpsi / (1j * k0)) * phase
    B = 0.5 * (psi - dpsi / (1j * k0)) / phase
    ln_T = -logs - np.log(np.abs(A))
    arg_T = -np.angle(A)
    R = B / A
    return ln_T, arg_T, R


def _slicing(spec, classicality, Es, x_L, x_R, resolution, n_slices):
    xs = envelope_support(spec)
    lo, hi = max(x_L, -xs), min(x_R, xs)
    if not lo < hi:
        # box entirely outside the envelope: free propagation
        lo, hi = -1.0, 1.0
    if n_slices is None:
        gap = float(np.max(Es)) + float(np.abs(eval_potential(spec, np.linspace(lo, hi, 2001)).real).max())
        lam = 2 * np.pi * classicality.hbar / np.sqrt(2 * classicality.mass * gap)
        n_slices = max(MIN_SLICES, int(np.ceil(resolution * (hi - lo) / lam)))
    edges = np.linspace(lo, hi, n_slices + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    v_mid = eval_potential(spec, mids).real
    return v_mid, lo, hi, n_slices


def solve_scatter(
    spec: PotentialSpec,
    classicality: Classicality,
    E: float,
    x_L: float,
    x_R: float,
    resolution: int = PER_WAVELENGTH,
    n_slices: int | None = None,
) -> ScatterPoint:
    """Transmission and reflection amplitudes at a single energy.

    ``resolution`` is the minimum slice count per local de Broglie
    wavelength (floor MIN_SLICES overall); ``n_slices`` overrides the
    automatic choice.  The integration range is clipped to where the
    envelope of V is above floating-point noise; outside, propagation
    is free and handled exactly by the plane-wave matching.
    """
    if resolution < PER_WAVELENGTH:
        raise ValueError(f"resolution below {PER_WAVELENGTH} slices per wavelength")
    v_mid, lo, hi, n_slices = _slicing(
        spec, classicality, np.array([E]), x_L, x_R, resolution, n_slices
    )
    ln_T, arg_T, R = scatter_piecewise(v_mid, lo, hi, np.array([E]), classicality)
    T = np.exp(ln_T[0]) * np.exp(1j * arg_T[0])
    return ScatterPoint(
        E=float(E),
        T=complex(T),
        R=complex(R[0]),
        Phi=complex(arg_T[0] - 1j * ln_T[0]),
    )


def _unwrap(raw: np.ndarray) -> np.ndarray:
    """Continuous phase from principal values; rejects unresolvable grids."""
    jumps = np.diff(raw)
    wrapped = (jumps + np.pi) % (2 * np.pi) - np.pi
    if len(wrapped) and np.abs(wrapped).max() > UNWRAP_LIMIT:
        worst = int(np.argmax(np.abs(wrapped)))
        raise ValueError(
            f"phase changes by {wrapped[worst]:+.3f} rad between adjacent "
            f"grid points near index {worst}; refine the energy grid"
        )
    return np.concatenate([[raw[0]], raw[0] + np.cumsum(wrapped)])


def oracle_density(
    spec: PotentialSpec,
    classicality: Classicality,
    grid: np.ndarray,
    x_L: float,
    x_R: float,
    resolution: int = PER_WAVELENGTH,
    n_slices: int | None = None,
    derivative_delta: float | None = None,
) -> OracleCurve:
    """Scattering along a grid and the density from the phase derivative.

    With ``derivative_delta`` unset the derivative uses adjacent grid
    points, which low-pass filters structure on the grid scale.  A
    small explicit delta (say 1e-6) instead differences Phi(E +/- delta)
    at every sample, resolving peaks much narrower than the grid at the
    cost of two extra scattering sweeps.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a 1d strictly ascending array, >= 3 points")
    v_mid, lo, hi, n_slices = _slicing(
        spec, classicality, grid, x_L, x_R, resolution, n_slices
    )
    n = len(grid)
    if derivative_delta is None:
        ln_T, arg_T, R = scatter_piecewise(v_mid, lo, hi, grid, classicality)
        phi = _unwrap(arg_T) - 1j * ln_T
        density = np.empty_like(phi)
        density[1:-1] = (phi[2:] - phi[:-2]) / (grid[2:] - grid[:-2])
        density[0] = (phi[1] - phi[0]) / (grid[1] - grid[0])
        density[-1] = (phi[-1] - phi[-2]) / (grid[-1] - grid[-2])
        density /= np.pi
    else:
        d = float(derivative_delta)
        if not 0 < d < grid[0]:
            raise ValueError("derivative_delta must be positive and below grid[0]")
        Es = np.concatenate([grid - d, grid + d, grid])
        ln_all, arg_all, R_all = scatter_piecewise(v_mid, lo, hi, Es, classicality)
        ln_T, arg_T, R = ln_all[2 * n:], arg_all[2 * n:], R_all[2 * n:]
        # the step 2*delta is tiny, so the principal-value phase change
        # never wraps even across a very narrow resonance
        dphi = np.mod(arg_all[n:2 * n] - arg_all[:n] + np.pi, 2 * np.pi) - np.pi
        dln = ln_all[n:2 * n] - ln_all[:n]
        phi = _unwrap(arg_T) - 1j * ln_T
        density = (dphi - 1j * dln) / (2 * d) / np.pi
    meta = {
        "potential": {"a": spec.a, "b": spec.b, "c": spec.c, "eta": spec.eta},
        "hbar": classicality.hbar,
        "mass": classicality.mass,
        "x_range": [lo, hi],
        "n_slices": int(n_slices),
        "derivative_delta": derivative_delta,
    }
    return OracleCurve(
        energies=grid,
        transmissions=np.exp(ln_T) * np.exp(1j * arg_T),
        reflections=R,
        phases=phi,
        density=density,
        metadata=meta,
    )


def _lorentzians(E, centers, widths):
    # unit-strength resonance peaks: each transmission pole contributes
    # exactly one state worth of area
    E = np.asarray(E)[:, None]
    c = np.asarray(centers)[None, :]
    w = np.asarray(widths)[None, :]
    return np.sum((w / (2 * np.pi)) / ((E - c) ** 2 + w**2 / 4), axis=1)


def resonance_extract(curve: OracleCurve, prominence: float = 0.05) -> list:
    """Blind peak search on the real density with local Lorentzian fits.

    Returns (E_k, Gamma_k) pairs for every resolved peak; overlapping
    structures that merge into a single hump come back as one effective
    peak, so this is a discovery tool, not an exhaustive inventory (see
    match_resonances for testing a known candidate list).
    """
    y = curve.density.real
    grid = curve.energies
    if len(y) < 7:
        return []
    peaks, _ = scipy.signal.find_peaks(y, prominence=prominence * y.max())
    results = []
    spacing = float(np.median(np.diff(grid)))
    for p in peaks:
        # FWHM of a Lorentzian equals its width parameter
        widths, _, _, _ = scipy.signal.peak_widths(y, [p], rel_height=0.5)
        g0 = max(widths[0] * spacing, 2 * spacing)
        window = (grid > grid[p] - 4 * g0) & (grid < grid[p] + 4 * g0)
        if window.sum() < 7:
            continue
        gw, yw = grid[window], y[window]

        def model(E, e, g, s, c0, c1):
            return s * (g / (2 * np.pi)) / ((E - e) ** 2 + g**2 / 4) + c0 + c1 * E

        p0 = [grid[p], g0, max(y[p] * np.pi * g0 / 2, 1e-6), 0.0, 0.0]
        try:
            popt, _ = scipy.optimize.curve_fit(model, gw, yw, p0=p0, maxfev=20000)
        except RuntimeError:
            continue
        e_fit, g_fit = float(popt[0]), float(abs(popt[1]))
        if gw[0] < e_fit < gw[-1]:
            results.append((e_fit, g_fit))
    return sorted(results)


@dataclass(frozen=True)
class ResonanceMatch:
    """One claimed resonance re-fitted against the oracle density."""

    claimed_E: float
    claimed_G: float
    fitted_E: float
    fitted_G: float


def match_resonances(
    curve: OracleCurve,
    claimed,
    released=None,
    n_baseline: int = 6,
    position_bound: float = 0.08,
    width_factor_bounds: tuple = (0.2, 5.0),
    width_floor: float | None = None,
) -> list:
    """Test a claimed resonance list against the oracle density.

    The real density is modeled as the sum of unit-strength peaks at
    every claimed position whose line shape overlaps the grid (within
    three widths of the window, width above ``width_floor``) plus a
    smooth Chebyshev baseline.  One claim at a time is then released:
    its position and width are refit with all other components frozen,
    so a wrong claim has nowhere to hide in neighboring parameters.

    ``claimed`` is a sequence of complex values E_k - i*Gamma_k/2;
    ``released`` optionally selects (by boolean mask over claimed) the
    subset to refit, defaulting to every modeled claim wider than twice
    the grid spacing.  ``width_floor`` defaults to a tenth of the grid
    spacing.  Returns a ResonanceMatch per released claim.
    """
    claimed = np.asarray(claimed, dtype=complex)
    grid = curve.energies
    y = curve.density.real
    spacing = float(np.median(np.diff(grid)))
    if width_floor is None:
        width_floor = 0.1 * spacing
    Ec = claimed.real
    Gc = -2.0 * claimed.imag

    modeled = (
        (Ec + 3 * Gc > grid[0]) & (Ec - 3 * Gc < grid[-1]) & (Gc > width_floor)
    )
    model_idx = np.arange(len(claimed))[modeled]
    Em, Gm = Ec[modeled], Gc[modeled]
    if released is None:
        released_idx = model_idx[Gm > 2 * spacing]
    else:
        released = np.asarray(released, dtype=bool)
        released_idx = np.arange(len(claimed))[released & modeled]

    mid = 0.5 * (grid[0] + grid[-1])
    span = 0.5 * (grid[-1] - grid[0])
    basis = np.polynomial.chebyshev.chebvander((grid - mid) / span, n_baseline - 1)

    results = []
    for idx in released_idx:
        e0 = Ec[idx]
        g0 = Gc[idx]
        others = model_idx != idx
        fixed = _lorentzians(grid, Em[others], Gm[others])

        def model(E, e, g, *coeffs):
            own = (g / (2 * np.pi)) / ((E - e) ** 2 + g**2 / 4)
            return fixed + own + basis @ np.asarray(coeffs)

        resid = y - fixed - (g0 / (2 * np.pi)) / ((grid - e0) ** 2 + g0**2 / 4)
        c0, *_ = np.linalg.lstsq(basis, resid, rcond=None)
        lo = [e0 - position_bound, g0 * width_factor_bounds[0]] + [-np.inf] * n_baseline
        hi = [e0 + position_bound, g0 * width_factor_bounds[1]] + [np.inf] * n_baseline
        popt, _ = scipy.optimize.curve_fit(
            model, grid, y, p0=[e0, g0] + list(c0), bounds=(lo, hi), maxfev=50000
        )
        results.append(
            ResonanceMatch(
                claimed_E=float(e0),
                claimed_G=float(g0),
                fitted_E=float(popt[0]),
                fitted_G=float(popt[1]),
            )
        )
    return results
