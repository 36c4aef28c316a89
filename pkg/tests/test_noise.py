import math

import numpy as np
import pytest

from ssbv.circuit import Bitstring
from ssbv.noise import (NOISELESS, DeviceModel, KrausChannel, NoiseConfig,
                        amplitude_damping, dephasing, depolarizing,
                        idle_channel, idle_params, identity_channel,
                        load_profile, profile_from_text, profile_to_text,
                        readout_sample, sample_static_fields)


def completeness_defect(channel: KrausChannel) -> float:
    dim = 2 ** channel.arity
    total = sum(k.conj().T @ k for k in channel.operators)
    return float(np.linalg.norm(total - np.eye(dim)))


def test_idle_channel_zero_time_is_identity():
    assert idle_channel(100e-6, 80e-6, 0.0).is_identity()


def test_idle_channel_infinite_t1_is_pure_dephasing():
    t2 = 50e-6
    ch = idle_channel(math.inf, t2, 10e-6)
    p_ad, p_z = idle_params(math.inf, t2, 10e-6)
    assert p_ad == 0.0
    assert p_z == pytest.approx((1 - math.exp(-10e-6 / t2)) / 2)
    # operators are diagonal: no population transfer
    for k in ch.operators:
        assert abs(k[0, 1]) == 0 and abs(k[1, 0]) == 0


def test_idle_channel_device_mean_values():
    # p_ad = 1 - exp(-5.2/113.2); dephasing rate from 1/T2 - 1/(2 T1)
    t1, t2, t = 113.2e-6, 99.72e-6, 5.2e-6
    p_ad, p_z = idle_params(t1, t2, t)
    assert p_ad == pytest.approx(1 - math.exp(-5.2 / 113.2), rel=1e-12)
    assert p_ad == pytest.approx(0.0449, abs=5e-4)
    inv_tphi = 1 / t2 - 1 / (2 * t1)
    assert p_z == pytest.approx((1 - math.exp(-t * inv_tphi)) / 2, rel=1e-12)
    assert completeness_defect(idle_channel(t1, t2, t)) < 1e-12


def test_idle_channel_rejects_unphysical_t2():
    with pytest.raises(ValueError):
        idle_channel(10e-6, 25e-6, 1e-6)


def test_depolarizing_structure():
    assert depolarizing(0.0, 1).is_identity()
    assert len(depolarizing(0.1, 1).operators) == 4
    assert len(depolarizing(0.1, 2).operators) == 16
    assert completeness_defect(depolarizing(0.0135, 2)) < 1e-12


def test_all_channels_complete():
    for ch in (identity_channel(1), identity_channel(2),
               amplitude_damping(0.3), dephasing(0.2),
               idle_channel(100e-6, 120e-6, 3e-6), depolarizing(0.25, 1),
               depolarizing(0.25, 2)):
        assert completeness_defect(ch) < 1e-12


def test_readout_sample_identity_and_certain_flip():
    device = DeviceModel.homogeneous(
        3, t1_us=100, t2_us=100, ro_error=0.0, dur_1q=1, dur_2q=1,
        dur_readout=1, p_dep_1q=0, p_dep_2q=0)
    rng = np.random.default_rng(0)
    bits = Bitstring.from_str("010")
    assert readout_sample(bits, device, rng) == bits
    flip = DeviceModel.homogeneous(
        3, t1_us=100, t2_us=100, ro_error=1.0, dur_1q=1, dur_2q=1,
        dur_readout=1, p_dep_1q=0, p_dep_2q=0)
    assert readout_sample(Bitstring.from_str("000"), flip, rng).to01() == "111"


def test_readout_sample_flip_frequency_matches_rate():
    p = 0.0259
    device = DeviceModel.homogeneous(
        1, t1_us=100, t2_us=100, ro_error=p, dur_1q=1, dur_2q=1,
        dur_readout=1, p_dep_1q=0, p_dep_2q=0)
    rng = np.random.default_rng(123)
    n = 100_000
    flips = sum(readout_sample(Bitstring.from_str("0"), device, rng)[0]
                for _ in range(n))
    sigma = math.sqrt(p * (1 - p) * n)
    assert abs(flips - p * n) < 3 * sigma


def test_static_fields_zero_sigma_and_mean():
    rng = np.random.default_rng(7)
    cfg = NoiseConfig(detuning_sigma=0.0)
    assert np.all(sample_static_fields(cfg, 5, rng) == 0)
    cfg = NoiseConfig(detuning_sigma=2e5)
    draws = np.array([sample_static_fields(cfg, 1, rng)[0] for _ in range(10_000)])
    assert abs(draws.mean()) < 3 * 2e5 / math.sqrt(10_000)
    assert draws.std() == pytest.approx(2e5, rel=0.05)


def test_free_evolution_x_expectation_is_cosine():
    # single qubit between H gates: idle detuning delta for time t leaves
    # <X> = cos(delta*t), i.e. P(0) = cos^2(delta*t/2)
    from ssbv.circuit import GateEvent, GateKind, TimedCircuit
    from ssbv.oracles import ReadoutMap
    from ssbv.simulator import _exact_run, compile_program, simulate_exact

    device = DeviceModel.homogeneous(
        1, t1_us=math.inf, t2_us=math.inf, ro_error=0.0, dur_1q=10,
        dur_2q=10, dur_readout=1, p_dep_1q=0, p_dep_2q=0)
    idle = 3000
    events = (GateEvent(GateKind.H, (0,), 0, 10),
              GateEvent(GateKind.H, (0,), 10 + idle, 10))
    circ = TimedCircuit(1, events, dt=device.dt)
    delta = 2.0e5
    t = idle * float(device.dt)
    noise = NoiseConfig(detuning_sigma=delta)

    # pinned delta: closed form cos(delta*t)
    program = compile_program(circ, device, noise)
    rho = _exact_run(program, {0: delta})
    p0 = float(np.real(rho[0, 0]))
    assert 2 * p0 - 1 == pytest.approx(math.cos(delta * t), abs=1e-9)

    # Gaussian ensemble: averaged coherence exp(-(sigma t)^2 / 2)
    dist = simulate_exact(circ, device, noise, ReadoutMap((0,)), gh_nodes=21)
    want_p0 = (1 + math.exp(-(delta * t) ** 2 / 2)) / 2
    assert dist.get("0", 0.0) == pytest.approx(want_p0, abs=1e-6)


def test_device_model_validation():
    with pytest.raises(ValueError):
        DeviceModel.homogeneous(2, t1_us=10, t2_us=25, ro_error=0.0,
                                dur_1q=1, dur_2q=1, dur_readout=1,
                                p_dep_1q=0, p_dep_2q=0)
    with pytest.raises(ValueError):
        DeviceModel.homogeneous(2, t1_us=10, t2_us=10, ro_error=1.5,
                                dur_1q=1, dur_2q=1, dur_readout=1,
                                p_dep_1q=0, p_dep_2q=0)


def test_noise_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(detuning_sigma=-1.0)
    with pytest.raises(ValueError):
        NoiseConfig(flip_angle_eps=1.0)


def test_shipped_profiles_load():
    for name, t1 in (("montreal", 113.2e-6), ("cairo", 102.19e-6)):
        profile = load_profile(name)
        device = profile.device(num_qubits=4)
        assert device.t1[0] == pytest.approx(t1)
        assert device.duration_model is not None
    quiet = load_profile("noiseless")
    noise = quiet.noise()
    assert not noise.decoherence and not noise.depolarizing
    assert noise.detuning_sigma == 0.0


def test_profile_text_roundtrip():
    profile = load_profile("montreal")
    assert profile_from_text(profile_to_text(profile)) == profile


def test_profile_rejects_unknown_and_missing_fields():
    with pytest.raises(ValueError):
        profile_from_text("bogus_field 3\n")
    with pytest.raises(ValueError):
        profile_from_text("name incomplete\n")
