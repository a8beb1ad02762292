import numpy as np
import pytest

from tunneldens.model import (
    PotentialSpec,
    decompose_regions,
    envelope_support,
    eval_potential,
    stationary_points,
)

BARRIER = PotentialSpec(1.0, 0.0, 0.0, 0.1)
QUARTIC = PotentialSpec(1.0, 0.0, 0.1, 0.1)
POCKET = PotentialSpec(0.346, -0.173, 0.173, 0.1)


def test_eval_matches_direct_formula():
    rng = np.random.default_rng(7)
    x = rng.uniform(-6, 6, 50)
    v = eval_potential(POCKET, x)
    ref = (0.346 - 0.173 * x + 0.173 * x**2) * np.exp(-0.1 * x**2)
    assert np.allclose(v, ref, rtol=0, atol=1e-15)


def test_eval_complex_argument():
    z = 1.3 * np.exp(0.4j)
    v = eval_potential(BARRIER, z)
    assert v == pytest.approx(np.exp(-0.1 * z * z))


def test_eta_must_be_positive():
    with pytest.raises(ValueError):
        PotentialSpec(1.0, 0.0, 0.0, -0.1)


def test_envelope_support_bounds_potential():
    for spec in (BARRIER, QUARTIC, POCKET):
        xs = envelope_support(spec)
        edge = np.array([-xs, xs, 1.5 * xs])
        assert np.all(np.abs(eval_potential(spec, edge)) < 1e-14)


def test_gaussian_barrier_single_maximum():
    pts = stationary_points(BARRIER)
    assert len(pts) == 1
    (p,) = pts
    assert p.x0 == pytest.approx(0.0, abs=1e-12)
    assert p.E0 == pytest.approx(1.0, abs=1e-12)
    assert p.order == 2
    assert p.kind == "maximum"


def test_quartic_top_detected():
    # a*eta = c makes the curvature at x = 0 vanish; the top is quartic
    # with fourth derivative 12*c*eta - 12*a*eta**2 = -0.12.
    pts = stationary_points(QUARTIC)
    tops = [p for p in pts if p.x0 == pytest.approx(0.0, abs=1e-9)]
    assert len(tops) == 1
    assert tops[0].order == 4
    assert tops[0].kind == "maximum"
    assert tops[0].E0 == pytest.approx(1.0, abs=1e-12)


def test_pocket_three_stationary_points():
    # V' vanishes on the roots of x^3 - x^2 - 8x + 5; values pinned from
    # an independent polynomial-root computation.
    pts = stationary_points(POCKET)
    assert len(pts) == 3
    x0 = [p.x0 for p in pts]
    e0 = [p.E0 for p in pts]
    kinds = [p.kind for p in pts]
    assert x0 == pytest.approx([-2.68046364, 0.60690128, 3.07356235], abs=1e-7)
    assert e0 == pytest.approx([1.000670, 0.293707, 0.563210], abs=1e-5)
    assert kinds == ["maximum", "minimum", "maximum"]
    assert all(p.order == 2 for p in pts)


def test_turning_points_gaussian_half_height():
    # V(x) = E at x = sqrt(ln(a/E)/eta); for E = 1/2 this is sqrt(10 ln 2)
    dec = decompose_regions(BARRIER, 0.5, -50.0, 50.0)
    xt = 2.6327688477341593
    assert len(dec.forbidden) == 1
    lo, hi = dec.forbidden[0]
    assert lo == pytest.approx(-xt, abs=1e-9)
    assert hi == pytest.approx(xt, abs=1e-9)
    assert len(dec.allowed) == 2
    assert not dec.tangent


def test_regions_cover_box():
    for E in (0.3, 0.5633, 0.9, 1.5):
        dec = decompose_regions(POCKET, E, -50.0, 50.0)
        ivals = sorted(dec.allowed + dec.forbidden)
        assert ivals[0][0] == -50.0
        assert ivals[-1][1] == 50.0
        for (_, b1), (a2, _) in zip(ivals[:-1], ivals[1:]):
            assert b1 == pytest.approx(a2, abs=1e-12)
        total = sum(b - a for a, b in ivals)
        assert total == pytest.approx(100.0, abs=1e-9)


def test_above_barrier_all_allowed():
    dec = decompose_regions(BARRIER, 1.5, -50.0, 50.0)
    assert dec.forbidden == ()
    assert dec.allowed == ((-50.0, 50.0),)


def test_tangent_energy_flagged():
    dec = decompose_regions(BARRIER, 1.0, -50.0, 50.0)
    assert dec.tangent
    off = decompose_regions(BARRIER, 0.98, -50.0, 50.0)
    assert not off.tangent


def test_symmetric_potential_symmetric_regions():
    dec = decompose_regions(QUARTIC, 0.6, -40.0, 40.0)
    assert len(dec.forbidden) == 1
    lo, hi = dec.forbidden[0]
    assert lo == pytest.approx(-hi, abs=1e-9)


def test_stationary_list_can_be_reused():
    pts = stationary_points(POCKET)
    a = decompose_regions(POCKET, 0.4, -50.0, 50.0)
    b = decompose_regions(POCKET, 0.4, -50.0, 50.0, stationary=pts)
    assert a == b
