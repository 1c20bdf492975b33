import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from djnmr import (
    HardPulse,
    ShapedPulse,
    SpinSystem,
    apply,
    build_hamiltonian,
    calibrate_amplitude,
    collective_operator,
    envelope_samples,
    fidelity,
    function_to_harmonics,
    gaussian_pulse,
    hard_pulse_propagator,
    ideal_multitransition_pi,
    pseudopure_state,
    schedule_rows,
    shaped_pulse_propagator,
    single_spin_operator,
    thermal_state,
    transition_table,
)
from djnmr.dj import BooleanFunction
from djnmr.pulses import envelope_sigma


def expm_hermitian(m):
    """exp(-i m) through the spectral decomposition; the slow reference."""
    evals, evecs = np.linalg.eigh(m)
    return (evecs * np.exp(-1j * evals)) @ evecs.conj().T


@pytest.fixture()
def s2():
    return SpinSystem(shifts=[500.0, -300.0], couplings=[50.0])


def test_hard_pulse_matches_exponential(s2, s3):
    for sys in (s2, s3):
        for flip, phase in ((math.pi / 2.0, 0.0), (math.pi, 1.1), (0.7, -2.0)):
            u = hard_pulse_propagator(sys, HardPulse(flip, phase))
            gen = flip * (math.cos(phase) * collective_operator(sys, "x")
                          + math.sin(phase) * collective_operator(sys, "y"))
            want = expm_hermitian(gen)
            assert np.abs(u.matrix - want).max() <= 1e-12


def test_hard_pulse_validation():
    with pytest.raises(ValueError):
        HardPulse(-0.1)
    with pytest.raises(ValueError):
        HardPulse(7.0)


def test_ideal_pi_population_swap(s3):
    table = transition_table(s3, 0)
    t = next(x for x in table if x.data_pattern == "00")
    u = ideal_multitransition_pi(s3, [t])
    rho = apply(u, pseudopure_state(s3, "000"))
    assert rho.matrix[4, 4] == pytest.approx(1.0)
    assert rho.matrix[0, 0] == pytest.approx(0.0)


def test_ideal_pi_order_invariance(s3):
    table = transition_table(s3, 0)
    u_fwd = ideal_multitransition_pi(s3, table)
    u_rev = ideal_multitransition_pi(s3, list(reversed(table)))
    assert np.array_equal(u_fwd.matrix, u_rev.matrix)


def test_ideal_pi_on_all_transitions_negates_work_iz(s3):
    u = ideal_multitransition_pi(s3, transition_table(s3, 0)).matrix
    izw = single_spin_operator(s3, 0, "z")
    assert np.abs(u @ izw @ u.conj().T + izw).max() <= 1e-12
    for data in (1, 2):
        izd = single_spin_operator(s3, data, "z")
        assert np.abs(u @ izd @ u.conj().T - izd).max() <= 1e-12


def test_ideal_pi_rejections(s3):
    data_line = transition_table(s3, 1)[0]
    with pytest.raises(ValueError, match="work spin"):
        ideal_multitransition_pi(s3, [data_line])
    t = transition_table(s3, 0)[0]
    with pytest.raises(ValueError, match="duplicate"):
        ideal_multitransition_pi(s3, [t, t])
    with pytest.raises(TypeError):
        ideal_multitransition_pi(s3, [(0, 1)])


def test_calibration_against_fine_quadrature():
    duration, truncation, samples = 0.024, 0.01, 4096
    amp = calibrate_amplitude(duration, truncation, samples)
    # Independent trapezoid integral of the closed-form envelope on a grid
    # 64x finer than the one calibration used.
    tt = np.linspace(0.0, duration, samples * 64 + 1)
    sigma = envelope_sigma(duration, truncation)
    g = np.exp(-0.5 * ((tt - duration / 2.0) / sigma) ** 2)
    g = (g - truncation) / (1.0 - truncation)
    area = np.trapezoid(g, tt)
    assert amp * area == pytest.approx(math.pi, rel=1e-6)


def test_calibration_rectangular_limit():
    amp = calibrate_amplitude(0.02, 1.0, 512)
    assert amp == pytest.approx(math.pi / 0.02, rel=1e-12)
    t, g = envelope_samples(0.02, 1.5, 128)
    assert np.all(g == 1.0)


def test_calibration_scales_inversely_with_duration():
    a1 = calibrate_amplitude(0.032, 0.01, 2048)
    a2 = calibrate_amplitude(0.016, 0.01, 2048)
    assert a2 == pytest.approx(2.0 * a1, rel=1e-12)


def test_calibration_flip_angle_scaling():
    a_pi = calibrate_amplitude(0.02, 0.01, 1024, nominal_flip=math.pi)
    a_half = calibrate_amplitude(0.02, 0.01, 1024, nominal_flip=math.pi / 2.0)
    assert a_pi == pytest.approx(2.0 * a_half, rel=1e-12)


def test_empty_harmonics_is_free_evolution(s3):
    duration = 0.004
    pulse = gaussian_pulse(s3, [], duration)
    u = shaped_pulse_propagator(s3, pulse)
    want = np.diag(np.exp(-1j * s3.energies * duration))
    assert np.abs(u.matrix - want).max() <= 1e-9


def test_under_resolved_pulse_rejected(s3):
    line = transition_table(s3, 0)[0].freq
    p = ShapedPulse(harmonics=((line, 1.0, 0.0),), duration=0.01, samples=64)
    with pytest.raises(ValueError, match="under-resolved"):
        shaped_pulse_propagator(s3, p)


def test_shaped_pulse_validation():
    h = ((100.0, 1.0, 0.0),)
    with pytest.raises(ValueError, match="sample count"):
        ShapedPulse(harmonics=h, duration=0.01, samples=32)
    with pytest.raises(ValueError, match="duration"):
        ShapedPulse(harmonics=h, duration=0.0, samples=64)
    with pytest.raises(ValueError, match="distinct"):
        ShapedPulse(harmonics=((100.0, 1.0, 0.0), (100.0, 0.5, 1.0)),
                    duration=0.01, samples=64)
    with pytest.raises(ValueError, match="nonnegative"):
        ShapedPulse(harmonics=((100.0, -1.0, 0.0),), duration=0.01, samples=64)


def test_gaussian_pulse_sample_rule(s2):
    p = gaussian_pulse(s2, [(500.0, 1.0, 0.0)], 0.01, per_cycle=40)
    fmax = max(s2.max_frequency, 500.0)
    assert p.samples == max(64, math.ceil(0.01 * 40 * fmax))
    tiny = gaussian_pulse(s2, [], 1e-4)
    assert tiny.samples == 64


def test_selectivity_improves_with_duration(s3):
    table = transition_table(s3, 0)
    t = next(x for x in table if x.data_pattern == "00")
    ideal = ideal_multitransition_pi(s3, [t])
    rho = thermal_state(s3)
    fids = []
    for duration in (0.008, 0.016, 0.032):
        pulse = gaussian_pulse(s3, [(t.freq, 1.0, 0.0)], duration)
        u = shaped_pulse_propagator(s3, pulse)
        fids.append(fidelity(u, ideal, rho))
    infid = [1.0 - f for f in fids]
    assert infid[0] > infid[1] > infid[2]
    assert fids[-1] >= 0.99


def test_split_operator_matches_stepwise_exponentials(s2):
    # Dense-Hamiltonian path checked against a literal per-step product of
    # matrix exponentials with the same Strang splitting.
    h = build_hamiltonian(s2)
    flipflop = (single_spin_operator(s2, 0, "x") @ single_spin_operator(s2, 1, "x")
                + single_spin_operator(s2, 0, "y") @ single_spin_operator(s2, 1, "y"))
    h = h + 2.0 * np.pi * 30.0 * flipflop
    p = ShapedPulse(harmonics=((496.0, 1.0, 0.3),), duration=0.002, samples=256)
    u = shaped_pulse_propagator(s2, p, H=h).matrix

    t, g = envelope_samples(p.duration, p.truncation, p.samples)
    amp = calibrate_amplitude(p.duration, p.truncation, p.samples)
    dt = p.duration / p.samples
    fx = collective_operator(s2, "x")
    fy = collective_operator(s2, "y")
    half = expm_hermitian(h * dt / 2.0)
    want = np.eye(s2.dim, dtype=complex)
    for k in range(p.samples):
        arg = 2.0 * np.pi * 496.0 * t[k] + 0.3
        cx = amp * g[k] * math.cos(arg)
        cy = amp * g[k] * math.sin(arg)
        v = expm_hermitian((cx * fx + cy * fy) * dt)
        want = half @ v @ half @ want
    assert np.abs(u - want).max() <= 1e-9


def test_diagonal_h_argument_matches_default(s3):
    p = gaussian_pulse(s3, [(transition_table(s3, 0)[0].freq, 1.0, 0.0)], 0.002)
    u_default = shaped_pulse_propagator(s3, p).matrix
    u_explicit = shaped_pulse_propagator(s3, p, H=build_hamiltonian(s3)).matrix
    assert np.abs(u_default - u_explicit).max() <= 1e-12


def test_function_to_harmonics(s3):
    table = transition_table(s3, 0)
    harm = function_to_harmonics(BooleanFunction("0110"), table)
    freqs = {h[0] for h in harm}
    by_pattern = {t.data_pattern: t.freq for t in table}
    assert freqs == {by_pattern["01"], by_pattern["10"]}
    assert all(h[1] == 1.0 and h[2] == 0.0 for h in harm)
    assert function_to_harmonics(BooleanFunction("0000"), table) == ()
    with pytest.raises(ValueError, match="arity"):
        function_to_harmonics(BooleanFunction("01"), table)


def test_schedule_rows_phase_law():
    p = ShapedPulse(harmonics=((100.0, 1.0, 0.5), (-50.0, 1.0, 0.0)),
                    duration=0.01, samples=64)
    header, rows = schedule_rows(p)
    assert header == ["t_s", "envelope", "phase_0", "phase_1"]
    assert len(rows) == 64
    t0 = rows[10][0]
    assert rows[10][2] == pytest.approx(2.0 * math.pi * 100.0 * t0 + 0.5)
    assert rows[10][3] == pytest.approx(2.0 * math.pi * -50.0 * t0)


@settings(max_examples=20, deadline=None)
@given(data=st.data())
def test_shaped_propagator_always_unitary(data):
    sys = SpinSystem(shifts=[400.0, -250.0], couplings=[40.0])
    nharm = data.draw(st.integers(0, 3))
    freqs = data.draw(st.lists(
        st.sampled_from([380.0, 420.0, -230.0, -270.0, 0.0]),
        min_size=nharm, max_size=nharm, unique=True))
    duration = data.draw(st.sampled_from([0.002, 0.005, 0.01]))
    pulse = gaussian_pulse(sys, [(f, 1.0, 0.0) for f in freqs], duration,
                           per_cycle=40)
    u = shaped_pulse_propagator(sys, pulse).matrix
    dev = np.abs(u.conj().T @ u - np.eye(sys.dim)).max()
    assert dev <= 1e-9


def test_fidelity_bounds(s3):
    table = transition_table(s3, 0)
    u = ideal_multitransition_pi(s3, [table[0]])
    rho = thermal_state(s3)
    assert fidelity(u, u, rho) == pytest.approx(1.0, abs=1e-12)
    v = ideal_multitransition_pi(s3, table)
    assert fidelity(u, v, rho) < 1.0
