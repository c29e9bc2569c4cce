import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from raman_qmem.errors import DomainError
from raman_qmem.numerics import integrate_samples
from raman_qmem.physical import ControlPulse, SignalWavepacket, gaussian_wavepacket
from raman_qmem.readin import input_modes, overlap, readin, readin_by_scattering

C = 2.0
M = 2001


@pytest.fixture(scope="module")
def flat():
    return ControlPulse.flat(1.0, 1.0, M)


@pytest.fixture(scope="module")
def shaped():
    tau = np.linspace(0, 1, M)
    return ControlPulse.from_intensity(tau, 0.3 + np.sin(np.pi * tau) ** 2, 2.0)


def random_signal(rng, tau, terms=6):
    c = rng.standard_normal((terms, 2)) @ [1, 1j]
    x = sum(ck * np.sin((k + 1) * np.pi * tau) for k, ck in enumerate(c))
    return SignalWavepacket.normalized(tau, x)


@pytest.mark.parametrize("which", ["flat", "shaped"])
def test_input_modes_orthonormal(d2, which, request):
    pulse = request.getfixturevalue(which)
    Phi = input_modes(d2, pulse)
    gram = integrate_samples(np.conj(Phi)[:, None, :] * Phi[None, :, :], pulse.tau, axis=2)
    k = Phi.shape[0]
    assert np.max(np.abs(gram - np.eye(k))) <= 1e-4


def test_flat_reduction(d2, flat):
    Phi = input_modes(d2, flat, num_modes=3)
    ref = np.sqrt(C) * d2.evaluate(C * (1 - flat.tau), [1, 2, 3]).T
    assert np.max(np.abs(Phi - ref)) <= 1e-10


def test_lowest_mode_signal(d2, shaped):
    Phi1 = input_modes(d2, shaped, num_modes=1)[0]
    xi = SignalWavepacket.normalized(shaped.tau, Phi1)
    r = readin(xi, d2, shaped)
    assert abs(abs(r.overlaps[0]) - 1) <= 1e-4
    assert r.efficiency == pytest.approx(d2.lambdas[0] ** 2, abs=1e-4)
    assert np.all(np.abs(r.overlaps[1:]) <= 1e-4)


def test_orthogonal_signal(d2, flat):
    Phi = input_modes(d2, flat, num_modes=2)
    xi = SignalWavepacket.normalized(flat.tau, Phi[1])
    r = readin(xi, d2, flat)
    assert abs(r.overlaps[0]) <= 1e-4
    assert r.efficiency == pytest.approx(d2.lambdas[1] ** 2, abs=1e-4)


def test_gaussian_overlap_quad(d2, flat, ref_signal):
    xi = ref_signal
    ov = overlap(xi, input_modes(d2, flat, num_modes=1)[0])
    sigma = 1 / 8 / np.sqrt(8 * np.log(2))
    amp = (2 * np.pi * sigma**2) ** -0.25

    def f(t):
        return amp * np.exp(-((t - 2 / 3) ** 2) / (4 * sigma**2)) * np.sqrt(C) * d2.evaluate(C * (1 - t), [1])[0, 0]

    ref = quad(f, 0, 1, points=[2 / 3], epsabs=1e-13, limit=200)[0]
    assert abs(ov - ref) <= 1e-6


def test_spinwave_matches_scattering(d2, flat, ref_signal):
    from raman_qmem.physical import resample_scaled
    from raman_qmem.transport import scatter
    r = readin(ref_signal, d2, flat)
    out = scatter(resample_scaled(None, flat, ref_signal.xi, C, 500))
    assert np.allclose(out.field.zeta_rule.nodes, r.zeta)
    assert np.max(np.abs(out.beta_C - r.spinwave)) <= 1e-3 * np.max(np.abs(r.spinwave))
    stored = out.field.zeta_rule.integrate(np.abs(out.beta_C) ** 2)
    assert abs(r.efficiency - stored) <= 1e-4


def test_scatter_cross_check(d2, flat, ref_signal):
    eff = readin(ref_signal, d2, flat).efficiency
    stored, transmitted = readin_by_scattering(ref_signal, d2, flat)
    assert abs(eff - stored) <= 1e-3
    assert stored + transmitted == pytest.approx(1.0, abs=1e-3)


def test_phase_invariance(d2, shaped, rng):
    xi = random_signal(rng, shaped.tau)
    a = readin(xi, d2, shaped).efficiency
    b = readin(SignalWavepacket(xi.tau, xi.xi * np.exp(1.234j)), d2, shaped).efficiency
    assert a == pytest.approx(b, rel=1e-12)


def test_bounded_by_lowest_mode(d2, shaped, rng):
    lam1 = d2.lambdas[0] ** 2
    for _ in range(100):
        r = readin(random_signal(rng, shaped.tau), d2, shaped)
        assert r.efficiency <= lam1 + 1e-8
        assert np.sum(np.abs(r.overlaps) ** 2) <= 1 + 1e-6
        assert r.efficiency + r.leakage == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_truncation_bound(d2, seed):
    rng = np.random.default_rng(seed)
    pulse = ControlPulse.flat(1.0, 1.0, 801)
    xi = random_signal(rng, pulse.tau, 12)
    r3 = readin(xi, d2, pulse, num_modes=3)
    r5 = readin(xi, d2, pulse, num_modes=5)
    assert r5.efficiency - r3.efficiency <= r3.truncation_bound + 1e-8


def test_spinwave_norm(d2, flat, ref_signal):
    r = readin(ref_signal, d2, flat)
    stored = float(np.sum(r.zeta_weights * np.abs(r.spinwave) ** 2))
    assert stored == pytest.approx(r.efficiency, rel=1e-8)


def test_resampled_signal(d2, flat):
    coarse = gaussian_wavepacket(1 / 8, 2 / 3, 1.0, 501)
    fine = gaussian_wavepacket(1 / 8, 2 / 3, 1.0, M)
    assert readin(coarse, d2, flat).efficiency == pytest.approx(readin(fine, d2, flat).efficiency, abs=1e-6)


def test_grid_mismatch(d2, flat, ref_signal):
    with pytest.raises(DomainError):
        overlap(ref_signal, np.ones(10))
    with pytest.raises(DomainError):
        overlap(ref_signal, np.ones(M), np.linspace(0, 2, M))
