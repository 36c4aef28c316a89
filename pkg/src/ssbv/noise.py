"""Device parameterization and noise-channel construction.

Decoherence enters through per-qubit T1/T2 idle channels, gate errors
through depolarizing channels after every gate, low-frequency dephasing
through a quasi-static per-trajectory detuning field, crosstalk through an
always-on ZZ coupling between idle neighbors, and measurement errors
through a per-qubit readout confusion matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources

import numpy as np

from .circuit import DT_SECONDS, Bitstring, DurationModel
from .routing import CouplingGraph

COMPLETENESS_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS_1Q = (_I2, _X, _Y, _Z)


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map given by Kraus operators; completeness checked on build."""

    operators: tuple[np.ndarray, ...]
    arity: int

    def __post_init__(self) -> None:
        dim = 2 ** self.arity
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        object.__setattr__(self, "operators", ops)
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError(f"operator shape {k.shape} != ({dim},{dim})")
        total = sum(k.conj().T @ k for k in ops)
        if np.linalg.norm(total - np.eye(dim)) > COMPLETENESS_TOL:
            raise ValueError("Kraus completeness violated: "
                             f"|sum K+K - I| = {np.linalg.norm(total - np.eye(dim)):.3e}")

    def is_identity(self) -> bool:
        return len(self.operators) == 1 and \
            np.allclose(self.operators[0], np.eye(2 ** self.arity))


def identity_channel(arity: int = 1) -> KrausChannel:
    return KrausChannel((np.eye(2 ** arity, dtype=complex),), arity)


def amplitude_damping(p: float) -> KrausChannel:
    if not 0 <= p <= 1:
        raise ValueError(f"damping probability {p} outside [0,1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    return KrausChannel((k0, k1), 1)


def dephasing(p: float) -> KrausChannel:
    """Phase flip with probability p; coherences shrink by (1-2p)."""
    if not 0 <= p <= 0.5 + 1e-15:
        raise ValueError(f"dephasing probability {p} outside [0, 1/2]")
    p = min(p, 0.5)
    return KrausChannel((math.sqrt(1 - p) * _I2, math.sqrt(p) * _Z), 1)


def idle_params(t1: float, t2: float, t: float) -> tuple[float, float]:
    """(p_amplitude_damping, p_phase_flip) for an idle of t seconds.

    Pure dephasing rate from 1/T_phi = 1/T2 - 1/(2*T1); T2 <= 2*T1 required.
    """
    if t < 0:
        raise ValueError("idle duration must be nonnegative")
    if t2 > 2 * t1:
        raise ValueError(f"unphysical T2 {t2} > 2*T1 {2 * t1}")
    p_ad = 0.0 if math.isinf(t1) else 1.0 - math.exp(-t / t1)
    inv_tphi = (0.0 if math.isinf(t2) else 1.0 / t2) - \
               (0.0 if math.isinf(t1) else 1.0 / (2.0 * t1))
    inv_tphi = max(inv_tphi, 0.0)
    p_z = (1.0 - math.exp(-t * inv_tphi)) / 2.0
    return p_ad, p_z


def idle_channel(t1: float, t2: float, t: float) -> KrausChannel:
    """Amplitude damping composed with pure dephasing for an idle interval."""
    p_ad, p_z = idle_params(t1, t2, t)
    if p_ad == 0.0 and p_z == 0.0:
        return identity_channel(1)
    ad = amplitude_damping(p_ad)
    dz = dephasing(p_z)
    ops = tuple(k @ d for k in ad.operators for d in dz.operators)
    ops = tuple(k for k in ops if np.linalg.norm(k) > 0)
    return KrausChannel(ops, 1)


def depolarizing(p: float, arity: int = 1) -> KrausChannel:
    """Uniform Pauli channel over the 3 (1q) or 15 (2q) non-identity Paulis."""
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing probability {p} outside [0,1]")
    if arity not in (1, 2):
        raise ValueError("arity must be 1 or 2")
    if p == 0:
        return identity_channel(arity)
    if arity == 1:
        paulis = PAULIS_1Q
    else:
        paulis = tuple(np.kron(a, b) for a in PAULIS_1Q for b in PAULIS_1Q)
    n_err = len(paulis) - 1
    ops = [math.sqrt(1 - p) * paulis[0]]
    ops += [math.sqrt(p / n_err) * pk for pk in paulis[1:]]
    return KrausChannel(tuple(ops), arity)


@dataclass(frozen=True)
class DeviceModel:
    """Coupling graph plus per-qubit decoherence, gate and readout figures.

    Durations are in dt ticks; T1/T2 in seconds.  Per-qubit heterogeneity
    is supported through the arrays; the shipped profiles are homogeneous
    (the reference table gives only min/mean/max).
    """

    graph: CouplingGraph | None
    t1: np.ndarray
    t2: np.ndarray
    ro_p01: np.ndarray  # p(read 1 | prepared 0)
    ro_p10: np.ndarray  # p(read 0 | prepared 1)
    dur_1q: int
    dur_2q: int
    dur_readout: int
    dur_dd_pulse: int
    p_dep_1q: float
    p_dep_2q: float
    dt: Fraction | float = DT_SECONDS
    duration_model: DurationModel | None = None
    name: str = "device"

    def __post_init__(self) -> None:
        for attr in ("t1", "t2", "ro_p01", "ro_p10"):
            object.__setattr__(self, attr, np.asarray(getattr(self, attr), dtype=float))
        if np.any(self.t2 > 2 * self.t1 + 1e-12):
            raise ValueError("unphysical device: T2 > 2*T1 somewhere")
        for attr in ("ro_p01", "ro_p10"):
            v = getattr(self, attr)
            if np.any((v < 0) | (v > 1)):
                raise ValueError(f"{attr} outside [0,1]")
        for attr in ("dur_1q", "dur_2q", "dur_readout", "dur_dd_pulse"):
            if getattr(self, attr) <= 0:
                raise ValueError(f"{attr} must be positive")
        for attr in ("p_dep_1q", "p_dep_2q"):
            if not 0 <= getattr(self, attr) <= 1:
                raise ValueError(f"{attr} outside [0,1]")

    @property
    def num_qubits(self) -> int:
        return len(self.t1)

    def seconds(self, ticks: int) -> float:
        return float(self.dt) * ticks

    @classmethod
    def homogeneous(cls, num_qubits: int, *, t1_us: float, t2_us: float,
                    ro_error: float, dur_1q: int, dur_2q: int, dur_readout: int,
                    dur_dd_pulse: int | None = None, p_dep_1q: float, p_dep_2q: float,
                    graph: CouplingGraph | None = None,
                    dt: Fraction | float = DT_SECONDS,
                    duration_model: DurationModel | None = None,
                    name: str = "device") -> DeviceModel:
        ones = np.ones(num_qubits)
        return cls(graph=graph, t1=ones * t1_us * 1e-6, t2=ones * t2_us * 1e-6,
                   ro_p01=ones * ro_error, ro_p10=ones * ro_error,
                   dur_1q=dur_1q, dur_2q=dur_2q, dur_readout=dur_readout,
                   dur_dd_pulse=dur_dd_pulse if dur_dd_pulse is not None else dur_1q,
                   p_dep_1q=p_dep_1q, p_dep_2q=p_dep_2q, dt=dt,
                   duration_model=duration_model, name=name)

    def with_graph(self, graph: CouplingGraph) -> DeviceModel:
        if graph.num_physical > self.num_qubits:
            scale = graph.num_physical
            return replace(self, graph=graph,
                           t1=np.resize(self.t1, scale), t2=np.resize(self.t2, scale),
                           ro_p01=np.resize(self.ro_p01, scale),
                           ro_p10=np.resize(self.ro_p10, scale))
        return replace(self, graph=graph)


@dataclass(frozen=True)
class NoiseConfig:
    """Coherent-error knobs and per-channel enable flags."""

    detuning_sigma: float = 0.0   # rad/s, quasi-static per trajectory
    zz_rate: float = 0.0          # rad/s per coupled idle pair
    flip_angle_eps: float = 0.0   # systematic pi-pulse over-rotation
    decoherence: bool = True
    depolarizing: bool = True
    readout: bool = True
    detuning: bool = True
    zz: bool = True

    def __post_init__(self) -> None:
        if self.detuning_sigma < 0 or self.zz_rate < 0:
            raise ValueError("noise rates must be nonnegative")
        if abs(self.flip_angle_eps) >= 1:
            raise ValueError("|flip_angle_eps| must be < 1")


NOISELESS = NoiseConfig(decoherence=False, depolarizing=False, readout=False,
                        detuning=False, zz=False)


def sample_static_fields(config: NoiseConfig, num_qubits: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Per-qubit quasi-static detunings, Normal(0, sigma), one trajectory."""
    if config.detuning_sigma == 0.0 or not config.detuning:
        return np.zeros(num_qubits)
    return rng.normal(0.0, config.detuning_sigma, size=num_qubits)


def readout_sample(true_bits: Bitstring, device: DeviceModel,
                   rng: np.random.Generator, qubit_of_bit=None) -> Bitstring:
    """Independent per-qubit readout flips with the confusion probabilities."""
    out = []
    for i, b in enumerate(true_bits.bits):
        q = qubit_of_bit[i] if qubit_of_bit is not None else i
        p_flip = device.ro_p01[q] if b == 0 else device.ro_p10[q]
        out.append(b ^ (rng.random() < p_flip))
    return Bitstring(tuple(int(b) for b in out))


# -- device/noise profiles -----------------------------------------------------
#
# A profile file is line-oriented 'key value' text carrying both the device
# figures and the noise-config knobs.  Shipped profiles: montreal, cairo,
# noiseless.

_PROFILE_HEADER = "# ssbv device profile v1"

_PROFILE_FIELDS = {
    "name": str, "t1_us": float, "t2_us": float, "gate_error_1q": float,
    "gate_error_2q": float, "duration_1q_dt": int, "duration_2q_dt": int,
    "duration_readout_dt": int, "duration_dd_pulse_dt": int,
    "readout_error": float, "tts_slope_us": float, "tts_intercept_us": float,
    "detuning_sigma": float, "zz_rate": float, "flip_angle_eps": float,
    "decoherence": int, "depolarizing": int, "readout": int,
    "detuning": int, "zz": int,
}


@dataclass(frozen=True)
class Profile:
    """Parsed device/noise profile; turn into model objects via methods."""

    values: dict[str, object] = field(default_factory=dict)

    def device(self, graph: CouplingGraph | None = None,
               num_qubits: int | None = None) -> DeviceModel:
        v = self.values
        n = graph.num_physical if graph is not None else (num_qubits or 27)
        model = DurationModel.from_slope_intercept(
            v["tts_slope_us"] * 1e-6, v["tts_intercept_us"] * 1e-6)
        return DeviceModel.homogeneous(
            n, t1_us=v["t1_us"], t2_us=v["t2_us"], ro_error=v["readout_error"],
            dur_1q=v["duration_1q_dt"], dur_2q=v["duration_2q_dt"],
            dur_readout=v["duration_readout_dt"],
            dur_dd_pulse=v["duration_dd_pulse_dt"],
            p_dep_1q=v["gate_error_1q"], p_dep_2q=v["gate_error_2q"],
            graph=graph, duration_model=model, name=v["name"])

    def noise(self) -> NoiseConfig:
        v = self.values
        return NoiseConfig(
            detuning_sigma=v["detuning_sigma"], zz_rate=v["zz_rate"],
            flip_angle_eps=v["flip_angle_eps"],
            decoherence=bool(v["decoherence"]), depolarizing=bool(v["depolarizing"]),
            readout=bool(v["readout"]), detuning=bool(v["detuning"]),
            zz=bool(v["zz"]))


def profile_from_text(text: str) -> Profile:
    values: dict[str, object] = {}
    for lineno, ln in enumerate(text.splitlines(), 1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        key, _, raw = ln.partition(" ")
        if key not in _PROFILE_FIELDS:
            raise ValueError(f"line {lineno}: unknown profile field {key!r}")
        values[key] = _PROFILE_FIELDS[key](raw.strip())
    missing = set(_PROFILE_FIELDS) - set(values)
    if missing:
        raise ValueError(f"profile missing fields: {sorted(missing)}")
    return Profile(values)


def profile_to_text(profile: Profile) -> str:
    lines = [_PROFILE_HEADER]
    for key in _PROFILE_FIELDS:
        lines.append(f"{key} {profile.values[key]}")
    return "\n".join(lines) + "\n"


def load_profile(name_or_path: str) -> Profile:
    """Load a shipped profile by name (montreal, cairo, noiseless) or any
    profile file by path."""
    shipped = resources.files("ssbv") / "profiles" / f"{name_or_path}.profile"
    if shipped.is_file():
        return profile_from_text(shipped.read_text())
    with open(name_or_path) as fh:
        return profile_from_text(fh.read())
