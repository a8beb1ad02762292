import numpy as np
import pytest
import scipy.integrate

from tunneldens.model import (
    Classicality,
    PotentialSpec,
    decompose_regions,
    eval_potential,
    stationary_points,
)
from tunneldens.semiclassics import (
    _interval_integral,
    fit_singularity,
    im_time_shift,
    re_time_shift,
    semiclassical_density,
    time_shift_curve,
)

BARRIER = PotentialSpec(1.0, 0.0, 0.0, 0.1)
QUARTIC = PotentialSpec(1.0, 0.0, 0.1, 0.1)
POCKET = PotentialSpec(0.346, -0.173, 0.173, 0.1)
CL = Classicality(0.1)
XL, XR = -250.0, 250.0


def quad_reference(spec, E, x_L, x_R):
    # brute-force adaptive quadrature with explicit turning-point
    # subdivision, kept deliberately independent of the module's scheme
    dec = decompose_regions(spec, E, x_L, x_R)
    f_free = np.sqrt(1.0 / (2 * E))

    def fdiff(x):
        v = float(eval_potential(spec, x).real)
        return np.sqrt(1.0 / (2 * max(E - v, 1e-300))) - f_free

    def fbar(x):
        v = float(eval_potential(spec, x).real)
        return np.sqrt(1.0 / (2 * max(v - E, 1e-300)))

    re_ref = 0.0
    for lo, hi in dec.allowed:
        lo, hi = max(lo, -35.0), min(hi, 35.0)
        if hi <= lo:
            continue
        re_ref += scipy.integrate.quad(fdiff, lo, hi, limit=500)[0]
    re_ref -= f_free * sum(hi - lo for lo, hi in dec.forbidden)
    im_ref = sum(
        scipy.integrate.quad(fbar, lo, hi, limit=500)[0] for lo, hi in dec.forbidden
    )
    return re_ref, im_ref


def test_zero_potential_zero_shift():
    zero = PotentialSpec(0.0, 0.0, 0.0, 0.1)
    for E in (0.2, 1.0, 5.0):
        assert re_time_shift(zero, CL, E, XL, XR) == 0.0
        assert im_time_shift(zero, CL, E, XL, XR) == 0.0


def test_above_barrier_shift_positive_and_matches_quadrature():
    E = 2.0
    val = re_time_shift(BARRIER, CL, E, XL, XR)
    ref, _ = quad_reference(BARRIER, E, XL, XR)
    assert val > 0
    assert val == pytest.approx(ref, abs=1e-8)


def test_im_vanishes_above_barrier():
    assert im_time_shift(BARRIER, CL, 1.2, XL, XR) == 0.0
    assert im_time_shift(POCKET, CL, 1.5, XL, XR) == 0.0


def test_constant_integrand_square_barrier_form():
    # over a forbidden stretch of constant V the barrier integral is
    # just width * sqrt(m / (2(V0 - E)))
    V0, E, w = 2.0, 0.5, 3.0
    g = lambda x: np.full_like(np.asarray(x, dtype=float), np.sqrt(1.0 / (2 * (V0 - E))))
    val = _interval_integral(g, 0.0, w, False, False, [], True, "test")
    assert val == pytest.approx(w * np.sqrt(1.0 / (2 * (V0 - E))), rel=1e-12)


def test_barrier_integral_decreases_toward_top():
    vals = [im_time_shift(BARRIER, CL, E, XL, XR) for E in (0.3, 0.5, 0.7, 0.9, 0.99)]
    assert all(np.isfinite(vals))
    assert all(a > b for a, b in zip(vals[:-1], vals[1:]))
    assert vals[-1] > 0


def test_step_height_near_quadratic_top():
    # a quadratic top V ~ 1 - eta x^2 gives the limiting barrier integral
    # pi * sqrt(m / (2 eta)) as E -> 1 from below
    limit = np.pi * np.sqrt(1.0 / (2 * 0.1))
    assert im_time_shift(BARRIER, CL, 0.998, XL, XR) == pytest.approx(limit, rel=1e-2)


def test_shifts_scale_as_sqrt_mass():
    for E in (0.6, 1.4):
        r1 = re_time_shift(BARRIER, Classicality(0.1, 1.0), E, XL, XR)
        r4 = re_time_shift(BARRIER, Classicality(0.1, 4.0), E, XL, XR)
        assert r4 == pytest.approx(2 * r1, rel=1e-12)
        i1 = im_time_shift(BARRIER, Classicality(0.1, 1.0), E, XL, XR)
        i4 = im_time_shift(BARRIER, Classicality(0.1, 4.0), E, XL, XR)
        assert i4 == pytest.approx(2 * i1, rel=1e-12)


def test_matches_adaptive_quadrature_on_random_samples():
    rng = np.random.default_rng(11)
    specs = (BARRIER, QUARTIC, POCKET)
    checked = 0
    while checked < 10:
        spec = specs[checked % 3]
        E = float(rng.uniform(0.15, 2.5))
        if any(abs(E - s.E0) < 0.02 for s in stationary_points(spec)):
            continue
        re_ref, im_ref = quad_reference(spec, E, XL, XR)
        re_val = re_time_shift(spec, CL, E, XL, XR)
        im_val = im_time_shift(spec, CL, E, XL, XR)
        assert re_val == pytest.approx(re_ref, rel=1e-7, abs=1e-9)
        assert im_val == pytest.approx(im_ref, rel=1e-7, abs=1e-9)
        checked += 1


def test_curve_flags_and_positivity():
    grid = np.arange(0.85, 1.15, 2e-3)
    curve = time_shift_curve(BARRIER, CL, grid, XL, XR)
    assert np.all(curve.im_values >= 0)
    assert np.all(np.isfinite(curve.re_values))
    spacing = 2e-3
    near = np.abs(grid - 1.0) < 10 * spacing
    assert np.all(curve.singular_flags[near])
    assert not np.any(curve.singular_flags[~near])
    assert "negate" in curve.im_convention


def test_curve_rejects_bad_grid():
    with pytest.raises(ValueError):
        time_shift_curve(BARRIER, CL, np.array([1.0, 0.5]), XL, XR)


def test_density_is_scaled_curve():
    grid = np.linspace(0.4, 0.6, 5)
    curve = time_shift_curve(BARRIER, CL, grid, XL, XR)
    dens = semiclassical_density(BARRIER, CL, grid, XL, XR)
    scale = 1.0 / (np.pi * CL.hbar)
    assert np.allclose(dens.re_values, curve.re_values * scale, rtol=1e-14)
    assert np.allclose(dens.im_values, curve.im_values * scale, rtol=1e-14)
    assert dens.metadata["scaled_by"] == "1/(pi*hbar)"


def test_free_density_curve_is_zero():
    zero = PotentialSpec(0.0, 0.0, 0.0, 0.1)
    dens = semiclassical_density(zero, CL, np.linspace(0.3, 1.5, 7), XL, XR)
    assert np.abs(dens.re_values).max() == 0.0
    assert np.abs(dens.im_values).max() == 0.0


@pytest.fixture(scope="module")
def barrier_curve():
    grid = np.arange(0.85, 1.15001, 2e-3)
    return time_shift_curve(BARRIER, CL, grid, XL, XR)


@pytest.fixture(scope="module")
def quartic_curve():
    grid = np.arange(0.95, 1.05001, 5e-4)
    return time_shift_curve(QUARTIC, CL, grid, XL, XR)


def test_log_divergence_at_quadratic_top(barrier_curve):
    sp = stationary_points(BARRIER)[0]
    fit = fit_singularity(barrier_curve, sp, window=0.1)
    assert fit.model == "log"
    assert fit.goodness > 0.99
    assert fit.params["amplitude"] < 0


def test_step_at_quadratic_top(barrier_curve):
    sp = stationary_points(BARRIER)[0]
    fit = fit_singularity(barrier_curve, sp, window=0.1, model="step")
    assert fit.model == "step"
    assert fit.goodness > 5
    assert fit.params["mean_below"] > fit.params["mean_above"]
    assert fit.params["mean_above"] == pytest.approx(0.0, abs=1e-12)


def test_quarter_power_at_quartic_top(quartic_curve):
    sp = stationary_points(QUARTIC)[0]
    fit = fit_singularity(quartic_curve, sp, window=0.03)
    assert fit.model == "power_quarter"
    assert fit.params["exponent"] == pytest.approx(-0.25, abs=0.05)
    assert fit.goodness > 0.99


def test_fit_model_validation(barrier_curve):
    sp = stationary_points(BARRIER)[0]
    with pytest.raises(ValueError, match="does not apply"):
        fit_singularity(barrier_curve, sp, window=0.1, model="power_quarter")
    with pytest.raises(ValueError, match="unknown model"):
        fit_singularity(barrier_curve, sp, window=0.1, model="cusp")
    well = stationary_points(POCKET)[1]
    assert well.kind == "minimum"
    with pytest.raises(ValueError, match="no singular model"):
        fit_singularity(barrier_curve, well, window=0.1)


def test_fit_requires_enough_samples(barrier_curve):
    sp = stationary_points(BARRIER)[0]
    with pytest.raises(ValueError, match="20 clean samples"):
        fit_singularity(barrier_curve, sp, window=0.03)


def test_curve_csv(tmp_path, barrier_curve):
    path = tmp_path / "shift.csv"
    barrier_curve.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1] == "E,re_dT,im_dT,singular_flag"
    assert len(lines) == 2 + len(barrier_curve.grid)
    row = lines[2].split(",")
    assert float(row[0]) == pytest.approx(0.85)
    assert row[3] in ("0", "1")
