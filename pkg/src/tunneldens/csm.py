"""Complex-scaled Hamiltonians in a finite-box sine basis.

The similarity transform x -> e^{i*theta} x turns the Hamiltonian into a
complex-symmetric matrix whose resonance eigenvalues E_k - i*Gamma_k/2
are exposed below the real axis, while the discretized continuum rotates
onto the line arg(E) = -2*theta.  The box is [-L/2, L/2] with Dirichlet
walls; the basis functions are

    phi_n(x) = sqrt(2/L) * sin(n*pi/L * (x + L/2)),   n = 1..N,

so the kinetic part is exactly diagonal and the potential part has a
closed form built from Gaussian moment integrals.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np
import scipy.integrate
import scipy.linalg

from .model import Classicality, PotentialSpec, eval_potential

__all__ = [
    "BoxBasis",
    "ScaledHamiltonian",
    "SpectralSet",
    "DriftEntry",
    "StabilizationReport",
    "kinetic_diagonal",
    "potential_matrix",
    "potential_element_quad",
    "assemble",
    "eigensolve",
    "classify",
    "stabilization_scan",
]

RESONANCE = "resonance"
BACKGROUND = "background"


@dataclass(frozen=True)
class BoxBasis:
    """Dirichlet box of length L with N sine modes."""

    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got {self.L}")
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise ValueError(f"need at least one basis function, got N={self.N}")

    def kappa(self) -> np.ndarray:
        """Mode wavenumbers n*pi/L, n = 1..N."""
        return np.arange(1, self.N + 1) * (np.pi / self.L)


@dataclass(frozen=True, eq=False)
class ScaledHamiltonian:
    """Dense complex-symmetric matrix of the scaled Hamiltonian.

    ``potential`` is None for the free (kinetic-only) case.
    """

    theta: float
    matrix: np.ndarray
    basis: BoxBasis
    classicality: Classicality
    potential: PotentialSpec | None


@dataclass(frozen=True, eq=False)
class SpectralSet:
    """Eigenvalues of one scaled Hamiltonian, sorted by real part.

    ``labels`` is None straight out of the eigensolver and a per-value
    tuple of "resonance"/"background" after classification.
    ``provenance`` is "interacting" or "free".
    """

    eigenvalues: np.ndarray
    labels: tuple | None
    theta: float
    provenance: str
    basis: BoxBasis
    classicality: Classicality
    potential: PotentialSpec | None = None

    @property
    def resonances(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("spectral set is unlabeled; run classify first")
        mask = np.array([lab == RESONANCE for lab in self.labels])
        return self.eigenvalues[mask]

    @property
    def background(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("spectral set is unlabeled; run classify first")
        mask = np.array([lab == BACKGROUND for lab in self.labels])
        return self.eigenvalues[mask]

    def to_csv(self, path):
        """Write eigenvalues as re_E, im_E, label, theta, L, N rows."""
        config = {
            "provenance": self.provenance,
            "hbar": self.classicality.hbar,
            "mass": self.classicality.mass,
        }
        with open(path, "w", newline="") as fh:
            fh.write(f"# config: {json.dumps(config)}\n")
            writer = csv.writer(fh)
            writer.writerow(["re_E", "im_E", "label", "theta", "L", "N"])
            labels = self.labels or ("unlabeled",) * len(self.eigenvalues)
            for val, lab in zip(self.eigenvalues, labels):
                writer.writerow(
                    [repr(float(val.real)), repr(float(val.imag)), lab,
                     repr(float(self.theta)), repr(float(self.basis.L)), self.basis.N]
                )


def kinetic_diagonal(basis: BoxBasis, classicality: Classicality, theta: float) -> np.ndarray:
    """Diagonal kinetic energies e^{-2i theta} (hbar kappa_n)^2 / 2m."""
    k = basis.kappa()
    return np.exp(-2j * theta) * (classicality.hbar * k) ** 2 / (2.0 * classicality.mass)


def _check_scaling_angle(spec: PotentialSpec, theta: float):
    # the scaled envelope exp(-eta e^{2i theta} x^2) must still decay
    if not np.cos(2.0 * theta) > 0:
        raise ValueError(
            f"scaling angle theta={theta} puts 2*theta outside (-pi/2, pi/2); "
            "the rotated Gaussian envelope would not decay"
        )


def potential_matrix(spec: PotentialSpec, basis: BoxBasis, theta: float) -> np.ndarray:
    """Matrix of V(e^{i theta} x) in the sine basis, analytically.

    The product of two sine modes splits into cosines of the difference
    and sum wavenumbers, so every entry is a combination of the moment
    integrals over the full line

        F_j = integral x^j exp(-alpha x^2 + i k x) dx,
        alpha = eta e^{2i theta},  j = 0, 1, 2.

    Extending the box integral to the full line is exact to below 1e-12
    for the parameter sets of interest because the scaled envelope has
    decayed at |x| = L/2.  Entries depend on |m - n| and m + n only, so
    the matrix is symmetric by construction.
    """
    _check_scaling_angle(spec, theta)
    al = spec.eta * np.exp(2j * theta)
    at = spec.a
    bt = spec.b * np.exp(1j * theta)
    ct = spec.c * np.exp(2j * theta)

    j = np.arange(0, 2 * basis.N + 1)
    k = j * np.pi / basis.L
    F0 = np.sqrt(np.pi / al) * np.exp(-(k**2) / (4 * al))
    F1 = (1j * k / (2 * al)) * F0
    F2 = (1 / (2 * al)) * (1 - k**2 / (2 * al)) * F0
    # phase delta_j = j*pi/2 from re-centering the box at the left wall
    cosd = np.cos(j * np.pi / 2)
    sind = np.sin(j * np.pi / 2)
    G = at * cosd * F0 + 1j * bt * sind * F1 + ct * cosd * F2

    n = np.arange(1, basis.N + 1)
    return (G[np.abs(n[:, None] - n[None, :])] - G[n[:, None] + n[None, :]]) / basis.L


def potential_element_quad(
    spec: PotentialSpec, basis: BoxBasis, theta: float, m: int, n: int
) -> complex:
    """One matrix element by adaptive quadrature.  Validation only; slow."""
    L = basis.L
    km = m * np.pi / L
    kn = n * np.pi / L

    def integrand(x):
        phi_m = np.sqrt(2 / L) * np.sin(km * (x + L / 2))
        phi_n = np.sqrt(2 / L) * np.sin(kn * (x + L / 2))
        return phi_m * phi_n * eval_potential(spec, np.exp(1j * theta) * x)

    val, _ = scipy.integrate.quad(
        integrand, -L / 2, L / 2, complex_func=True, limit=400
    )
    return val


def assemble(
    spec: PotentialSpec | None,
    basis: BoxBasis,
    classicality: Classicality,
    theta: float,
) -> ScaledHamiltonian:
    """Kinetic diagonal plus potential matrix; spec=None means free."""
    H = np.zeros((basis.N, basis.N), dtype=complex)
    np.fill_diagonal(H, kinetic_diagonal(basis, classicality, theta))
    if spec is not None:
        H += potential_matrix(spec, basis, theta)
    return ScaledHamiltonian(
        theta=theta, matrix=H, basis=basis, classicality=classicality, potential=spec
    )


def eigensolve(H: ScaledHamiltonian) -> SpectralSet:
    """All eigenvalues of the dense complex-symmetric matrix.

    Only eigenvalues are computed; the density formulas never need
    eigenvectors.  Values come back sorted by real part.
    """
    if H.potential is None:
        vals = np.diag(H.matrix).copy()
    else:
        try:
            vals = scipy.linalg.eigvals(H.matrix, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise RuntimeError(
                f"eigensolver failed for N={H.basis.N}, theta={H.theta}, "
                f"max|H|={np.abs(H.matrix).max():.3e}"
            ) from exc
    vals = vals[np.argsort(vals.real)]
    return SpectralSet(
        eigenvalues=vals,
        labels=None,
        theta=H.theta,
        provenance="free" if H.potential is None else "interacting",
        basis=H.basis,
        classicality=H.classicality,
        potential=H.potential,
    )


def classify(sset: SpectralSet, margin: float | None = None) -> SpectralSet:
    """Label eigenvalues as rotated-continuum background or resonance.

    A value E = |E| e^{-i beta} is background when beta deviates from the
    continuum line 2*theta by less than ``margin`` (radians), or when its
    real part is non-positive.  Everything else is a resonance candidate;
    stabilization_scan is the authoritative filter on those.

    The default margin is 10% of 2*theta.
    """
    if margin is None:
        margin = 0.1 * (2.0 * sset.theta)
    labels = []
    for val in sset.eigenvalues:
        if val.real <= 0:
            labels.append(BACKGROUND)
            continue
        beta = -np.angle(val)
        labels.append(BACKGROUND if abs(beta - 2.0 * sset.theta) < margin else RESONANCE)
    return replace(sset, labels=tuple(labels))


@dataclass(frozen=True)
class DriftEntry:
    """One resonance candidate with its worst drift under perturbations."""

    value: complex
    drift: float
    stable: bool


@dataclass(frozen=True, eq=False)
class StabilizationReport:
    entries: tuple
    tolerance: float
    deltas: tuple

    @property
    def stable_resonances(self) -> np.ndarray:
        return np.array([e.value for e in self.entries if e.stable])


def stabilization_scan(
    spec: PotentialSpec,
    classicality: Classicality,
    base: BoxBasis,
    theta: float,
    deltas: list | None = None,
    tolerance: float = 1e-3,
    margin: float | None = None,
    min_energy: float = 0.1,
) -> StabilizationReport:
    """Check resonance candidates for invariance under (L, N, theta) changes.

    For each candidate of the base spectrum the nearest eigenvalue of
    every perturbed spectrum is found and the worst displacement
    recorded; candidates moving more than ``tolerance`` are demoted.
    Background eigenvalues track the box and the rotation, genuine
    resonances do not.

    ``deltas`` lists perturbed (L, N, theta) triples; the default grows
    the box and basis by 10% and tilts theta by 0.05.  Candidates with
    Re E below ``min_energy`` are dropped: next to the origin the
    rotated continuum crowds the threshold and candidate labels there
    are not trustworthy.
    """
    if deltas is None:
        deltas = [
            (base.L * 1.1, int(round(base.N * 1.1)), theta),
            (base.L, base.N, theta + 0.05),
        ]
    base_set = classify(
        eigensolve(assemble(spec, base, classicality, theta)), margin=margin
    )
    candidates = base_set.resonances
    candidates = candidates[candidates.real >= min_energy]

    perturbed = []
    for Lp, Np, thp in deltas:
        pset = eigensolve(assemble(spec, BoxBasis(Lp, Np), classicality, thp))
        perturbed.append(pset.eigenvalues)

    entries = []
    for val in candidates:
        drift = 0.0
        for vals in perturbed:
            drift = max(drift, np.abs(vals - val).min())
        entries.append(DriftEntry(value=val, drift=drift, stable=drift < tolerance))
    return StabilizationReport(
        entries=tuple(entries), tolerance=tolerance, deltas=tuple(deltas)
    )
