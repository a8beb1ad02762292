"""Scattering-oracle checks, anchored on closed forms and invariants."""

import numpy as np
import pytest

from tunneldens.model import Classicality, PotentialSpec, envelope_support, eval_potential
from tunneldens.oracle import (
    OracleCurve,
    match_resonances,
    oracle_density,
    resonance_extract,
    scatter_piecewise,
    solve_scatter,
    _unwrap,
)

BARRIER = PotentialSpec(1.0, 0.0, 0.0, 0.1)
POCKET = PotentialSpec(0.346, -0.173, 0.173, 0.1)
QUARTIC = PotentialSpec(1.0, 0.0, 0.1, 0.1)

CL = Classicality(hbar=0.1)


def rect_transmission(E, V0, w, hbar, m):
    k_sq = 2 * m * E / hbar**2
    if E < V0:
        kap = np.sqrt(2 * m * (V0 - E)) / hbar
        return 1.0 / (1.0 + V0**2 * np.sinh(kap * w) ** 2 / (4 * E * (V0 - E)))
    kp = np.sqrt(2 * m * (E - V0)) / hbar
    del k_sq
    return 1.0 / (1.0 + V0**2 * np.sin(kp * w) ** 2 / (4 * E * (E - V0)))


def test_free_potential_scatters_trivially():
    spec = PotentialSpec(0.0, 0.0, 0.0, 0.1)
    pt = solve_scatter(spec, CL, 1.0, -50.0, 50.0)
    assert pt.T == 1.0 + 0.0j
    assert pt.R == 0.0j
    assert pt.Phi == 0.0j


def test_rectangular_barrier_closed_form():
    # slice edges land exactly on the barrier edges, so the sampled
    # potential is the rectangle itself and only matching error remains
    V0, w, hbar, m = 1.0, 2.0, 1.0, 1.0
    cl = Classicality(hbar=hbar, mass=m)
    x_lo, x_hi, n = -1.0, 3.0, 4000
    edges = np.linspace(x_lo, x_hi, n + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    v = np.where((mids > 0) & (mids < w), V0, 0.0)
    for ratio in (0.25, 0.5, 0.9, 1.5, 3.0):
        E = ratio * V0
        ln_T, _, R = scatter_piecewise(v, x_lo, x_hi, np.array([E]), cl)
        got = np.exp(2 * ln_T[0])
        ref = rect_transmission(E, V0, w, hbar, m)
        assert got == pytest.approx(ref, abs=1e-8)
        assert abs(got + abs(R[0]) ** 2 - 1) < 1e-8


def test_unitarity_on_random_energies():
    rng = np.random.default_rng(23)
    cl = Classicality(hbar=0.3)
    for spec in (BARRIER, POCKET, QUARTIC):
        Es = np.sort(rng.uniform(0.15, 3.0, size=34))
        xs = envelope_support(spec)
        edges = np.linspace(-xs, xs, 10001)
        mids = 0.5 * (edges[1:] + edges[:-1])
        v = eval_potential(spec, mids).real
        ln_T, _, R = scatter_piecewise(v, -xs, xs, Es, cl)
        residual = np.abs(np.exp(2 * ln_T) + np.abs(R) ** 2 - 1)
        assert residual.max() < 1e-8


def test_slice_halving_is_converged():
    for E in (0.8, 1.5):
        p1 = solve_scatter(BARRIER, CL, E, -50.0, 50.0, n_slices=30000)
        p2 = solve_scatter(BARRIER, CL, E, -50.0, 50.0, n_slices=60000)
        assert abs(abs(p1.T) - abs(p2.T)) < 1e-8


def test_transmission_reciprocity():
    # |T| must not care which side the wave comes from, even for the
    # asymmetric well-plus-barrier shape
    xs = envelope_support(POCKET)
    edges = np.linspace(-xs, xs, 20001)
    mids = 0.5 * (edges[1:] + edges[:-1])
    v = eval_potential(POCKET, mids).real
    cl = Classicality(hbar=0.058)
    for E in (0.7, 0.95):
        ln_f, _, _ = scatter_piecewise(v, -xs, xs, np.array([E]), cl)
        ln_b, _, _ = scatter_piecewise(v[::-1], -xs, xs, np.array([E]), cl)
        assert abs(np.exp(ln_f[0]) - np.exp(ln_b[0])) < 1e-10


def test_tunneling_suppression_grows_below_barrier():
    Es = np.linspace(0.3, 0.95, 14)
    xs = envelope_support(BARRIER)
    edges = np.linspace(-xs, xs, 10001)
    mids = 0.5 * (edges[1:] + edges[:-1])
    v = eval_potential(BARRIER, mids).real
    ln_T, _, _ = scatter_piecewise(v, -xs, xs, Es, CL)
    assert np.all(np.diff(ln_T) > 0)


def test_point_reconstructs_amplitude_from_phase():
    pt = solve_scatter(BARRIER, CL, 0.8, -50.0, 50.0)
    assert np.exp(1j * pt.Phi) == pytest.approx(pt.T, rel=1e-12)
    assert abs(pt.T) < 1e-5


def test_density_of_free_potential_is_zero():
    spec = PotentialSpec(0.0, 0.0, 0.0, 0.1)
    grid = np.linspace(0.5, 1.5, 21)
    curve = oracle_density(spec, CL, grid, -50.0, 50.0)
    assert np.all(curve.density == 0.0)
    assert np.all(curve.phases == 0.0)


def test_density_peaks_at_top_resonance():
    grid = np.arange(0.95, 1.05001, 1e-3)
    curve = oracle_density(BARRIER, CL, grid, -50.0, 50.0)
    i = int(np.argmax(curve.density.real))
    assert abs(grid[i] - 0.9998) < 3e-3
    assert curve.density.real[i] > 10.0


def test_unwrap_recovers_fast_continuous_phase():
    true = np.cumsum(np.full(40, 0.5))
    raw = np.angle(np.exp(1j * true))
    rec = _unwrap(raw)
    assert np.allclose(rec - rec[0], true - true[0], atol=1e-12)


def test_unwrap_rejects_aliased_grid():
    raw = np.array([0.0, 0.1, 3.1, 0.2, 0.3])
    with pytest.raises(ValueError, match="refine"):
        _unwrap(raw)


def _synthetic_curve(grid, centers, widths, baseline):
    E = grid[:, None]
    c = np.asarray(centers)[None, :]
    w = np.asarray(widths)[None, :]
    y = np.sum((w / (2 * np.pi)) / ((E - c) ** 2 + w**2 / 4), axis=1) + baseline(grid)
    zeros = np.zeros_like(grid, dtype=complex)
    return OracleCurve(
        energies=grid,
        transmissions=zeros,
        reflections=zeros,
        phases=zeros,
        density=y.astype(complex),
        metadata={},
    )


def test_extract_recovers_single_lorentzian():
    grid = np.arange(0.5, 1.5, 1e-3)
    curve = _synthetic_curve(grid, [1.0333], [0.02], lambda E: 0.3 + 0.05 * E)
    found = resonance_extract(curve)
    assert len(found) == 1
    assert found[0][0] == pytest.approx(1.0333, abs=1e-6)
    assert found[0][1] == pytest.approx(0.02, abs=1e-6)


def test_extract_recovers_two_separated_lorentzians():
    grid = np.arange(0.4, 1.6, 5e-4)
    curve = _synthetic_curve(grid, [0.7, 1.1], [0.015, 0.04], lambda E: 0.1 * np.ones_like(E))
    found = resonance_extract(curve)
    assert len(found) == 2
    assert found[0][0] == pytest.approx(0.7, abs=1e-5)
    # the neighbor's tail leaks into the local window, costing accuracy
    assert found[1][1] == pytest.approx(0.04, abs=1e-4)


def test_match_refits_overlapping_claims():
    grid = np.arange(0.5, 1.5, 1e-3)
    centers = [0.90, 0.95, 1.00]
    widths = [0.12, 0.10, 0.15]
    curve = _synthetic_curve(grid, centers, widths, lambda E: 0.2 - 0.1 * E)
    claimed = [c - 0.5j * w for c, w in zip(centers, widths)]
    results = match_resonances(curve, claimed)
    assert len(results) == 3
    for res, c, w in zip(results, centers, widths):
        assert res.fitted_E == pytest.approx(c, abs=1e-4)
        assert res.fitted_G == pytest.approx(w, rel=1e-3)


def test_match_pulls_wrong_claim_toward_truth():
    # one claim shifted by 0.03; the release fit should land back on
    # the true position, exposing the discrepancy
    grid = np.arange(0.5, 1.5, 1e-3)
    curve = _synthetic_curve(grid, [0.90, 1.05], [0.10, 0.12], lambda E: np.zeros_like(E))
    claimed = [(0.93) - 0.5j * 0.10, 1.05 - 0.5j * 0.12]
    results = match_resonances(curve, claimed, released=[True, False])
    assert len(results) == 1
    assert abs(results[0].fitted_E - 0.90) < 2e-3
    assert abs(results[0].fitted_E - results[0].claimed_E) > 0.02


def test_match_drops_claims_below_grid_resolution():
    grid = np.arange(0.5, 1.5, 1e-3)
    curve = _synthetic_curve(grid, [1.0], [0.1], lambda E: np.zeros_like(E))
    claimed = [1.0 - 0.05j, 0.8 - 0.5j * 1e-5]
    results = match_resonances(curve, claimed)
    assert len(results) == 1
    assert results[0].claimed_E == 1.0


def test_curve_csv_round_trip(tmp_path):
    grid = np.arange(0.95, 1.00001, 1e-3)
    curve = oracle_density(BARRIER, CL, grid, -50.0, 50.0)
    path = tmp_path / "oracle.csv"
    curve.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1].split(",")[0] == "E"
    row = lines[2].split(",")
    assert float(row[0]) == grid[0]
    assert float(row[5]) == curve.phases[0].real
    assert float(row[8]) == curve.density[0].imag


def test_rejects_bad_inputs():
    with pytest.raises(ValueError, match="positive"):
        solve_scatter(BARRIER, CL, -0.5, -50.0, 50.0)
    with pytest.raises(ValueError, match="resolution"):
        solve_scatter(BARRIER, CL, 1.0, -50.0, 50.0, resolution=10)
    with pytest.raises(ValueError, match="ascending"):
        oracle_density(BARRIER, CL, np.array([1.0, 0.9, 1.1]), -50.0, 50.0)
