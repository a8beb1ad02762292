"""Gaussian-modulated polynomial potentials and their classical structure.

The potential family is

    V(x) = (a + b*x + c*x**2) * exp(-eta * x**2),

evaluated for real or complex argument (the scaled Hamiltonian needs
V(e^{i*theta} x)).  This module also locates and classifies stationary
points of V and splits a box [x_L, x_R] into classically allowed and
forbidden regions at a given energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PotentialSpec",
    "Classicality",
    "StationaryPoint",
    "RegionDecomposition",
    "eval_potential",
    "envelope_support",
    "stationary_points",
    "decompose_regions",
]

# Envelope floor below which V is treated as exactly zero.
ENVELOPE_FLOOR = 1e-16

# Bracketing grid size and bisection tolerance for turning points.
TURNING_GRID = 10_000
TURNING_XTOL = 1e-12

# Half-width of the tangency window around a stationary energy.
TANGENCY_EPS = 1e-9


@dataclass(frozen=True)
class PotentialSpec:
    """Coefficients of V(x) = (a + b x + c x^2) exp(-eta x^2).

    All coefficients are real and dimensionless.  ``eta`` must be positive
    so the potential decays at infinity; the analytic matrix elements and
    the finite-interval support argument both rely on that.
    """

    a: float
    b: float
    c: float
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    @property
    def scale(self) -> float:
        """Magnitude scale of the coefficients, used for tolerances."""
        return max(abs(self.a), abs(self.b), abs(self.c), 1e-300)

    def poly_coeffs(self) -> np.ndarray:
        """Polynomial part in ascending order (a, b, c)."""
        return np.array([self.a, self.b, self.c], dtype=float)


@dataclass(frozen=True)
class Classicality:
    """Effective Planck constant and mass.

    Only the ratio hbar/sqrt(mass) affects observables; eigenvalues are
    invariant under (hbar, mass) -> (k*hbar, k^2*mass).
    """

    hbar: float
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be positive")

    @property
    def ratio(self) -> float:
        return self.hbar / np.sqrt(self.mass)


@dataclass(frozen=True)
class StationaryPoint:
    """A root of V'(x) with its local classification.

    ``order`` is the index of the first non-vanishing derivative at x0
    (2 = quadratic, 4 = quartic); ``kind`` is "maximum" or "minimum".
    """

    x0: float
    E0: float
    order: int
    kind: str


@dataclass(frozen=True)
class RegionDecomposition:
    """Allowed/forbidden intervals of [x_L, x_R] at a fixed energy.

    Intervals are ordered, disjoint, alternate in character and jointly
    cover [x_L, x_R].  Interior boundaries are turning points V(x) = E.
    ``tangent`` marks decompositions computed at an energy within the
    tangency window of a stationary energy (the energy was nudged off
    the tangency; such samples must be excluded from fits of smooth
    behavior).
    """

    energy: float
    allowed: tuple = field(default_factory=tuple)
    forbidden: tuple = field(default_factory=tuple)
    tangent: bool = False


def eval_potential(spec: PotentialSpec, z):
    """Evaluate V at a real or complex point (scalar or array)."""
    z = np.asarray(z)
    out = (spec.a + spec.b * z + spec.c * z * z) * np.exp(-spec.eta * z * z)
    return out if out.shape else out[()]


def envelope_support(spec: PotentialSpec, floor: float = ENVELOPE_FLOOR) -> float:
    """Half-width x_s beyond which |V| < floor * coefficient scale.

    The Gaussian envelope dominates any polynomial prefactor; a modest
    safety margin on the log absorbs the polynomial growth.
    """
    # exp(-eta x^2) * poly < floor  once  eta x^2 > log(scale/floor) + margin
    arg = np.log(max(spec.scale / floor, 10.0)) + 6.0
    return float(np.sqrt(arg / spec.eta))


def _derivative_polys(spec: PotentialSpec, max_order: int) -> list[np.ndarray]:
    """Polynomial factors Q_j with V^(j)(x) = Q_j(x) exp(-eta x^2).

    Q_0 is the bare polynomial; the recurrence is Q_{j+1} = Q_j' - 2 eta x Q_j.
    Coefficients ascending.
    """
    polys = [spec.poly_coeffs()]
    for _ in range(max_order):
        q = polys[-1]
        dq = np.polynomial.polynomial.polyder(q) if len(q) > 1 else np.zeros(1)
        shifted = np.concatenate([[0.0], q])  # x * Q_j
        n = max(len(dq), len(shifted))
        nxt = np.zeros(n)
        nxt[: len(dq)] += dq
        nxt[: len(shifted)] -= 2.0 * spec.eta * shifted
        polys.append(nxt)
    return polys


def stationary_points(
    spec: PotentialSpec,
    search_interval: tuple[float, float] | None = None,
) -> list[StationaryPoint]:
    """All real stationary points of V in the interval, sorted by x0.

    The derivative of V is a polynomial times the Gaussian envelope, so
    roots of V' are roots of that polynomial; they are classified by the
    first analytic derivative whose magnitude at the root exceeds
    1e-8 times the coefficient scale.

    Parameters
    ----------
    spec : PotentialSpec
    search_interval : (lo, hi), optional
        Defaults to the envelope support, which covers every stationary
        point the ratio V can resolve above the floor.
    """
    if search_interval is None:
        xs = envelope_support(spec)
        search_interval = (-xs, xs)
    lo, hi = search_interval

    polys = _derivative_polys(spec, max_order=6)
    q1 = polys[1]
    # np.roots wants descending coefficients and a nonzero leading term
    coeffs = np.trim_zeros(q1[::-1], "f")
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs)
    real = np.sort(roots[np.abs(roots.imag) < 1e-8].real)
    real = real[(real >= lo) & (real <= hi)]
    if len(real) == 0:
        return []

    # merge root clusters (repeated roots of higher-order stationary points)
    clusters = [[real[0]]]
    for r in real[1:]:
        if r - clusters[-1][-1] < 1e-6:
            clusters[-1].append(r)
        else:
            clusters.append([r])

    points = []
    deriv_tol = 1e-8 * spec.scale
    for cluster in clusters:
        x0 = float(np.mean(cluster))
        env = np.exp(-spec.eta * x0 * x0)
        order = None
        for j in range(2, 7):
            val = np.polynomial.polynomial.polyval(x0, polys[j]) * env
            if abs(val) > deriv_tol:
                order = j
                sign = np.sign(val)
                break
        if order is None or order % 2 == 1:
            raise ValueError(
                f"could not classify stationary point near x0={x0!r}: "
                f"first non-vanishing derivative is of order {order}"
            )
        kind = "maximum" if sign < 0 else "minimum"
        E0 = float(eval_potential(spec, x0).real)
        points.append(StationaryPoint(x0=x0, E0=E0, order=order, kind=kind))
    return points


def _bisect_turning(spec: PotentialSpec, E: float, xa: float, xb: float) -> float:
    """Refine a bracketed root of V(x) - E to TURNING_XTOL."""
    fa = eval_potential(spec, xa).real - E
    while xb - xa > TURNING_XTOL:
        xm = 0.5 * (xa + xb)
        fm = eval_potential(spec, xm).real - E
        if fa * fm <= 0:
            xb = xm
        else:
            xa, fa = xm, fm
    return 0.5 * (xa + xb)


def decompose_regions(
    spec: PotentialSpec,
    E: float,
    x_L: float,
    x_R: float,
    stationary: list[StationaryPoint] | None = None,
) -> RegionDecomposition:
    """Split [x_L, x_R] into allowed (E >= V) and forbidden (E < V) intervals.

    Turning points are bracketed on a uniform grid over the envelope
    support and refined by bisection.  Outside the support V vanishes to
    working precision, so for E > 0 those stretches are always allowed.
    If E lies within the tangency window of a stationary energy it is
    nudged off by TANGENCY_EPS (keeping its side) and the result is
    marked ``tangent``.

    Passing the stationary-point list avoids recomputing it on dense
    energy grids.
    """
    if not E > 0:
        raise ValueError(f"decompose_regions requires E > 0, got {E}")
    if not x_L < x_R:
        raise ValueError(f"need x_L < x_R, got {x_L}, {x_R}")

    if stationary is None:
        stationary = stationary_points(spec)
    tangent = False
    E_work = E
    for sp in stationary:
        if abs(E - sp.E0) < TANGENCY_EPS:
            tangent = True
            E_work = sp.E0 + (TANGENCY_EPS if E >= sp.E0 else -TANGENCY_EPS)
            break

    xs = envelope_support(spec)
    glo, ghi = max(x_L, -xs), min(x_R, xs)
    turning: list[float] = []
    if glo < ghi:
        grid = np.linspace(glo, ghi, TURNING_GRID)
        vals = eval_potential(spec, grid).real - E_work
        sign_change = np.where(vals[:-1] * vals[1:] < 0)[0]
        for i in sign_change:
            turning.append(_bisect_turning(spec, E_work, grid[i], grid[i + 1]))

    edges = [x_L] + turning + [x_R]
    allowed, forbidden = [], []
    for xa, xb in zip(edges[:-1], edges[1:]):
        xm = 0.5 * (xa + xb)
        if eval_potential(spec, xm).real <= E_work:
            allowed.append((xa, xb))
        else:
            forbidden.append((xa, xb))
    return RegionDecomposition(
        energy=E,
        allowed=tuple(allowed),
        forbidden=tuple(forbidden),
        tangent=tangent,
    )
