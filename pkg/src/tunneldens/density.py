"""Continuum level density from two complex-scaled spectra.

The change in level density induced by the potential is a difference of
resolvent traces, which over the discrete eigenvalues of the scaled
interacting and free Hamiltonians becomes a sum of simple poles,

    delta_rho(E) = (i/pi) * [sum_k 1/(E - E_k)  -  sum_k 1/(E - E0_k)].

Everything here works in a complex energy written as E - i*Gamma/2.  On
the real axis the sum is smoothed by shifting the evaluation point to
E + i*epsilon.  The antiderivative (the complex phase, whose imaginary
part is -ln|T|) and residue-theorem contour counts come from the same
pole structure.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .csm import SpectralSet

__all__ = [
    "ComplexEnergy",
    "DensityCurve",
    "PhaseCurve",
    "ContourCount",
    "rho_term",
    "delta_rho",
    "density_curve",
    "integrate_phase",
    "contour_count",
]

# closer than this to a pole the sums are pure noise
POLE_TOL = 1e-14

# a contour integral further than this from an integer means the
# quadrature (or the loop placement) needs refinement
CONTOUR_RESIDUAL_TOL = 0.01


@dataclass(frozen=True)
class ComplexEnergy:
    """Energy point E - i*Gamma/2.  Gamma < 0 reaches the upper half plane."""

    E: float
    Gamma: float = 0.0

    @property
    def value(self) -> complex:
        return self.E - 0.5j * self.Gamma

    @classmethod
    def from_value(cls, z: complex) -> "ComplexEnergy":
        return cls(E=float(np.real(z)), Gamma=float(-2.0 * np.imag(z)))


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """Smoothed density values on an ascending real energy grid."""

    grid: np.ndarray
    values: np.ndarray
    epsilon: float
    metadata: dict

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# config: {json.dumps(self.metadata)}\n")
            writer = csv.writer(fh)
            writer.writerow(["E", "re_drho", "im_drho", "epsilon"])
            for e, v in zip(self.grid, self.values):
                writer.writerow(
                    [repr(float(e)), repr(float(v.real)), repr(float(v.imag)),
                     repr(float(self.epsilon))]
                )


@dataclass(frozen=True, eq=False)
class PhaseCurve:
    """Integrated complex phase, anchored so Im -> 0 at ``reference``."""

    grid: np.ndarray
    values: np.ndarray
    reference: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# config: {json.dumps({'reference': self.reference})}\n")
            writer = csv.writer(fh)
            writer.writerow(["E", "re_phi", "im_phi"])
            for e, v in zip(self.grid, self.values):
                writer.writerow([repr(float(e)), repr(float(v.real)), repr(float(v.imag))])


def _split(vals: np.ndarray):
    # eigenvalue E_k - i*Gamma_k/2 -> (E_k, Gamma_k)
    return vals.real, -2.0 * vals.imag


def rho_term(sset: SpectralSet, at: ComplexEnergy) -> complex:
    """Resolvent-trace sum (i/pi) sum_k 1/(E - E_k) for one spectrum.

    Written out per part: with dE = E - E_k and dG = Gamma - Gamma_k,

        Re = (1/pi) sum_k (-dG/2) / (dE^2 + dG^2/4)
        Im = (1/pi) sum_k   dE    / (dE^2 + dG^2/4)

    so each resonance contributes a Lorentzian to the real part and a
    dispersive odd curve to the imaginary part.
    """
    if len(sset.eigenvalues) == 0:
        return 0.0 + 0.0j
    E_k, G_k = _split(sset.eigenvalues)
    dE = at.E - E_k
    dG = at.Gamma - G_k
    denom = dE * dE + 0.25 * dG * dG
    nearest = np.argmin(denom)
    if denom[nearest] < POLE_TOL**2:
        raise ValueError(
            f"evaluation point {at.value} sits on the eigenvalue "
            f"{sset.eigenvalues[nearest]} (distance < {POLE_TOL})"
        )
    re = np.sum(-0.5 * dG / denom) / np.pi
    im = np.sum(dE / denom) / np.pi
    return complex(re, im)


def delta_rho(interacting: SpectralSet, free: SpectralSet, at: ComplexEnergy) -> complex:
    """Interacting minus free resolvent trace at one energy point."""
    return rho_term(interacting, at) - rho_term(free, at)


def density_curve(
    interacting: SpectralSet,
    free: SpectralSet,
    grid: np.ndarray,
    epsilon: float,
) -> DensityCurve:
    """Smoothed density delta_rho(E + i*epsilon) over a real grid.

    The shift into the upper half plane keeps every pole at finite
    distance; epsilon = 0 is allowed when all eigenvalues have strictly
    positive width.  Below E ~ 0.1 the interacting/free background
    cancellation degrades, so grids normally start above that.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a 1d strictly ascending array")
    values = np.empty(len(grid), dtype=complex)
    for i, E in enumerate(grid):
        values[i] = delta_rho(interacting, free, ComplexEnergy(E, -2.0 * epsilon))
    if not np.all(np.isfinite(values)):
        raise ValueError("density curve contains non-finite values")
    meta = {
        "theta": interacting.theta,
        "L": interacting.basis.L,
        "N": interacting.basis.N,
        "epsilon_convention": "evaluated at E + i*epsilon",
    }
    pot = interacting.potential
    if pot is not None:
        meta["potential"] = {"a": pot.a, "b": pot.b, "c": pot.c, "eta": pot.eta}
    return DensityCurve(grid=grid, values=values, epsilon=epsilon, metadata=meta)


def integrate_phase(
    curve: DensityCurve, interacting: SpectralSet, free: SpectralSet
) -> PhaseCurve:
    """Antiderivative of pi*delta_rho along the curve's grid, in closed form.

    Each pole integrates to a logarithm,

        phi(E) = sum_k i*ln(E + i*eps - E_k) - sum_k i*ln(E + i*eps - E0_k) + C.

    With eps > 0 and all eigenvalues on or below the real axis every log
    argument stays in the upper half plane, so the principal branch is
    already continuous; a jump of more than pi between neighboring grid
    points would mean the grid is too coarse to resolve the structure it
    crosses, and is rejected.  C is fixed so the imaginary part (which
    equals -ln|transmission|) vanishes at the top of the grid.
    """
    z = curve.grid + 1j * curve.epsilon
    phi = 1j * np.sum(np.log(z[:, None] - interacting.eigenvalues[None, :]), axis=1)
    phi -= 1j * np.sum(np.log(z[:, None] - free.eigenvalues[None, :]), axis=1)
    jumps = np.abs(np.diff(phi))
    if len(jumps) and jumps.max() > np.pi:
        worst = curve.grid[int(np.argmax(jumps)) + 1]
        raise ValueError(
            f"phase jump above pi near E={worst:g}; refine the energy grid"
        )
    phi = phi - 1j * phi[-1].imag
    return PhaseCurve(grid=curve.grid, values=phi, reference=float(curve.grid[-1]))


@dataclass(frozen=True)
class ContourCount:
    """Result of a residue-theorem loop count."""

    count: int
    residual: float
    interacting_enclosed: int
    free_enclosed: int


def _boundary_distance(z: complex, re_lo, re_hi, im_lo, im_hi) -> float:
    x, y = z.real, z.imag
    dx = max(re_lo - x, 0.0, x - re_hi)
    dy = max(im_lo - y, 0.0, y - im_hi)
    if dx > 0 or dy > 0:
        return float(np.hypot(dx, dy))
    return float(min(x - re_lo, re_hi - x, y - im_lo, im_hi - y))


def contour_count(
    interacting: SpectralSet,
    free: SpectralSet,
    rect: tuple,
) -> ContourCount:
    """Count enclosed interacting-minus-free eigenvalues by integration.

    ``rect`` is (re_lo, re_hi, im_lo, im_hi) in the complex energy
    plane.  The loop is traversed clockwise, which makes the integral
    (1/2) * contour integral of delta_rho equal to +(enclosed
    interacting - enclosed free).  The pre-rounding residual is
    returned; a residual above CONTOUR_RESIDUAL_TOL raises, as does a
    loop passing within 1e-9 of any eigenvalue.
    """
    re_lo, re_hi, im_lo, im_hi = map(float, rect)
    if not (re_lo < re_hi and im_lo < im_hi):
        raise ValueError(f"degenerate rectangle {rect}")

    for sset in (interacting, free):
        for val in sset.eigenvalues:
            if _boundary_distance(val, re_lo, re_hi, im_lo, im_hi) < 1e-9:
                raise ValueError(
                    f"eigenvalue {val} lies within 1e-9 of the loop boundary"
                )

    def inside(vals):
        return int(
            np.sum(
                (vals.real > re_lo) & (vals.real < re_hi)
                & (vals.imag > im_lo) & (vals.imag < im_hi)
            )
        )

    n_int = inside(interacting.eigenvalues)
    n_free = inside(free.eigenvalues)

    # clockwise: across the top, down the right side, back, up
    corners = [
        complex(re_lo, im_hi),
        complex(re_hi, im_hi),
        complex(re_hi, im_lo),
        complex(re_lo, im_lo),
        complex(re_lo, im_hi),
    ]
    total = 0.0 + 0.0j
    for z0, z1 in zip(corners[:-1], corners[1:]):
        dz = z1 - z0

        def seg(t):
            at = ComplexEnergy.from_value(z0 + t * dz)
            return delta_rho(interacting, free, at)

        val, _ = scipy.integrate.quad(seg, 0.0, 1.0, complex_func=True, limit=500)
        total += val * dz
    half = 0.5 * total
    count = int(np.round(half.real))
    residual = float(abs(half - count))
    if residual > CONTOUR_RESIDUAL_TOL:
        raise ValueError(
            f"contour residual {residual:.3g} exceeds {CONTOUR_RESIDUAL_TOL}; "
            "refine the quadrature or move the loop away from poles"
        )
    if count != n_int - n_free:
        raise RuntimeError(
            f"contour count {count} disagrees with direct enclosure "
            f"{n_int}-{n_free}"
        )
    return ContourCount(
        count=count,
        residual=residual,
        interacting_enclosed=n_int,
        free_enclosed=n_free,
    )
