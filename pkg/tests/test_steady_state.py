from __future__ import annotations

import cmath
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublelambda.atom_bloch import AtomParams
from doublelambda.coefficients import (
    MasterCoefficients,
    build_coefficients,
    random_master_coefficients,
    rate_constants,
)
from doublelambda.errors import DisregardedUnstable, SingularDrift, SingularM
from doublelambda.moments import MomentState, duan_parameter, evolve_moments
from doublelambda.regimes import drr_coefficients, drr_master_coefficients, reit_coefficients
from doublelambda.steady_state import (
    classify_stability,
    entanglement_verdict,
    m_denominator,
    rotate_phase,
    steady_closed_form,
    steady_linear_solve,
)


def rel_close(a, b, rel):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def test_closed_form_matches_linear_solve_on_random_draws(rng):
    worst = 0.0
    for _ in range(100):
        mc = random_master_coefficients(rng, scale=0.4)
        rc = rate_constants(mc)
        a = steady_closed_form(mc, rc)
        b = steady_linear_solve(mc, rc)
        assert a.stable and b.stable
        scale = max(abs(a.n1), abs(a.n2), abs(a.w), 1e-300)
        for x, y in ((a.n1, b.n1), (a.n2, b.n2), (a.w, b.w)):
            worst = max(worst, abs(x - y) / scale)
    assert worst <= 1e-9


def test_reit_closed_form_example():
    xi = 1.0
    k = math.sqrt(1.01)
    mc = reit_coefficients(xi, k, k, phi=math.pi / 2)
    sm = steady_closed_form(mc, rate_constants(mc))
    assert sm.n1 == pytest.approx(50.0, rel=1e-12)
    assert sm.n2 == pytest.approx(50.0, rel=1e-12)
    assert abs(sm.w) == pytest.approx(k / 0.02, rel=1e-12)
    assert sm.w.real < 0 and abs(sm.w.imag) < 1e-9
    rep = entanglement_verdict(sm)
    assert rep.entangled and rep.duan_d == pytest.approx(2 * (101 - k / 0.01), abs=1e-9)


def test_pure_loss_steady_state_is_vacuum():
    mc = MasterCoefficients.pure_loss(0.3, 1.7)
    sm = steady_closed_form(mc, rate_constants(mc))
    assert (sm.n1, sm.n2, sm.w) == (0.0, 0.0, 0j)
    rep = entanglement_verdict(sm)
    assert rep.duan_d == 2.0 and not rep.entangled


def test_stability_classification():
    mc = reit_coefficients(0.5, 1.0, 1.0)
    assert classify_stability(mc, rate_constants(mc))[0]

    ks, ka = 0.4, 1.3
    loss = MasterCoefficients.pure_loss(ks, ka)
    stable, eig = classify_stability(loss, rate_constants(loss))
    assert stable
    expected = sorted([-2 * ks, -2 * ka, -(ks + ka), -(ks + ka)])
    assert np.allclose(sorted(e.real for e in eig), expected, atol=1e-14)

    dc = drr_coefficients(AtomParams(0.1, 0.1, kappa_s=0.4, kappa_a=0.4))
    weak = drr_master_coefficients(dc, 0.4)
    stable, eig = classify_stability(weak, rate_constants(weak))
    assert not stable and max(e.real for e in eig) > 0


def test_unstable_point_is_disregarded():
    mc = reit_coefficients(2.0, 1.0, 1.0, phi=math.pi / 2)
    sm = steady_closed_form(mc, rate_constants(mc))
    assert not sm.stable
    with pytest.raises(DisregardedUnstable):
        entanglement_verdict(sm)


def test_real_positive_amplitude_at_zero_phase_is_separable():
    # E real and positive with phi = 0 puts w on the positive real axis
    mc = reit_coefficients(-0.5, 1.0, 1.0)
    sm = steady_closed_form(mc, rate_constants(mc))
    sm = replace(sm, e_amplitude=complex(abs(sm.e_amplitude)))
    sm0 = rotate_phase(sm, 0.0)
    assert sm0.w.real > 0 and sm0.w.imag == 0
    rep = entanglement_verdict(sm0)
    assert rep.duan_d > 2 and not rep.entangled


def test_all_zero_coefficients_are_singular():
    mc = MasterCoefficients(0j, 0j, 0j, 0j, 0j, 0j, 0j, 0j, 1.0, 1.0)
    rc = rate_constants(mc)
    with pytest.raises(SingularM):
        steady_closed_form(mc, rc)
    with pytest.raises(SingularDrift):
        steady_linear_solve(mc, rc)


def test_near_pole_is_flagged_as_boundary():
    xi = 1.0
    k = xi * (1 + 1e-10)
    mc = reit_coefficients(xi, k, k)
    sm = steady_closed_form(mc, rate_constants(mc))
    assert sm.boundary
    far = reit_coefficients(xi, 2.0, 2.0)
    assert not steady_closed_form(far, rate_constants(far)).boundary


def test_m_denominator_vanishes_at_reit_pole():
    mc = reit_coefficients(0.7, 0.7, 0.7)
    assert abs(m_denominator(rate_constants(mc))) < 1e-15


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), delta=st.floats(-6.3, 6.3))
def test_photon_numbers_independent_of_phase(seed, delta):
    mc = random_master_coefficients(np.random.default_rng(seed), 0.4)
    rc = rate_constants(mc)
    a = steady_closed_form(mc, rc)
    b = steady_closed_form(mc.replace(phi=mc.phi + delta), rc)
    assert a.n1 == b.n1 and a.n2 == b.n2
    assert a.e_amplitude == b.e_amplitude
    assert b.w == pytest.approx(a.w * cmath.exp(1j * delta), abs=1e-14 * max(abs(a.w), 1))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_verdict_agrees_with_duan_phase_form(seed):
    mc = random_master_coefficients(np.random.default_rng(seed), 0.6)
    sm = steady_closed_form(mc, rate_constants(mc))
    rep = entanglement_verdict(sm)
    ref = duan_parameter(MomentState(sm.n1, sm.n2, sm.w))
    assert rep.duan_d == pytest.approx(ref.duan_d, abs=1e-10 * (1 + sm.n1 + sm.n2))
    assert rep.entangled == (0 < rep.duan_d < 2)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_long_time_ode_reaches_closed_form(seed):
    mc = random_master_coefficients(np.random.default_rng(seed), 0.4)
    rc = rate_constants(mc)
    sm = steady_closed_form(mc, rc)
    rate = min(abs(e.real) for e in sm.drift_eigenvalues)
    final = evolve_moments(MomentState.vacuum(), mc, rc, 30.0 / rate, tol=1e-12)[-1]
    scale = max(abs(sm.n1), abs(sm.n2), abs(sm.w), 1e-3)
    assert abs(final.n1 - sm.n1) <= 1e-6 * scale
    assert abs(final.n2 - sm.n2) <= 1e-6 * scale
    assert abs(final.w - sm.w) <= 1e-6 * scale


def test_pipeline_steady_state_for_driven_atom():
    p = AtomParams(1.0, 25.0, delta_p=40.0, kappa_s=0.00105, kappa_a=0.00105, phi=math.pi / 2)
    mc = build_coefficients(p).master
    rc = rate_constants(mc)
    a = steady_closed_form(mc, rc)
    b = steady_linear_solve(mc, rc)
    assert rel_close(a.n1, b.n1, 1e-9) and rel_close(a.n2, b.n2, 1e-9)
    assert rel_close(a.w, b.w, 1e-9)
