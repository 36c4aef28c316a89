"""Two execution backends over one compiled operation stream.

``compile_program`` lowers a timed circuit plus device/noise models into an
ordered list of primitive operations (unitaries, Kraus channels, coherent
phases).  The trajectory backend samples one Kraus branch per channel
application on batched statevectors (exact in distribution); the exact
backend applies the same stream to a dense density operator, averaging the
quasi-static detuning by Gauss-Hermite quadrature.

Conventions: wire 0 is the most significant bit of serialized bitstrings;
gate errors follow their gate, idle decoherence is applied at the end of
each per-wire idle interval, and coherent detuning/ZZ phases accrue during
idles only.  The readout window contributes no idle decoherence; its
errors live in the confusion matrix.  Shot i's random stream is a pure
function of (master_seed, oracle key, i), so chunked, serial, and parallel
executions all produce identical tables.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as ker
from .circuit import GateEvent, GateKind, TimedCircuit, validate_circuit
from .decoupling import detect_gaps, pulse_unitary
from .noise import DeviceModel, NoiseConfig, idle_params
from .oracles import OracleSpec, ReadoutMap, ShotTable

EXACT_MAX_WIRES = 7
TRAJECTORY_MAX_WIRES = 21
GH_NODES_DEFAULT = 21

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULIS = (np.eye(2, dtype=complex), _X, _Y, _Z)


class SimulatorCapError(Exception):
    """Requested register exceeds the backend's qubit cap."""


@dataclass(frozen=True)
class Op:
    """One primitive step of the compiled stream."""

    kind: str                 # u1 | cnot | dep1 | dep2 | deph | damp | detune | zz
    wires: tuple[int, ...]
    p: float = 0.0            # channel probability (dep1/dep2/deph/damp)
    t: float = 0.0            # idle duration in seconds (detune)
    phase: complex = 0.0      # fixed relative phase (zz)
    matrix: np.ndarray | None = None  # u1

    @property
    def draws_uniform(self) -> bool:
        return self.kind in ("dep1", "dep2", "deph", "damp")


@dataclass(frozen=True)
class Program:
    """Compiled operation stream plus its randomness layout."""

    num_wires: int
    ops: tuple[Op, ...]
    detuned_wires: tuple[int, ...]
    n_uniform_ops: int

    @property
    def stochastic(self) -> bool:
        return self.n_uniform_ops > 0 or len(self.detuned_wires) > 0


@dataclass(frozen=True)
class TrajectoryPlan:
    """Shot budget and reproducibility contract for the trajectory backend.

    Shot i's stream is derived from Philox keyed by (master_seed, oracle
    key, i); batch_size only controls memory, never results.
    """

    shots: int
    master_seed: int
    batch_size: int | None = None
    precision: str = "double"   # double | single
    max_qubits: int = TRAJECTORY_MAX_WIRES
    assertions: bool = False

    def __post_init__(self) -> None:
        if self.shots <= 0:
            raise ValueError("shots must be positive")
        if self.precision not in ("double", "single"):
            raise ValueError("precision must be 'double' or 'single'")


def _gate_matrix(ev: GateEvent, eps: float) -> np.ndarray | None:
    if ev.kind is GateKind.H:
        return _HADAMARD
    if ev.kind is GateKind.X:
        return _X
    if ev.kind is GateKind.PHASED_PI:
        return pulse_unitary(ev.phase, eps)
    return None


def _interval_overlaps(aa: list[tuple[int, int]], bb: list[tuple[int, int]]
                       ) -> list[tuple[int, int]]:
    out = []
    for a0, a1 in aa:
        for b0, b1 in bb:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi > lo:
                out.append((lo, hi))
    return sorted(out)


def compile_program(circuit: TimedCircuit, device: DeviceModel | None,
                    noise: NoiseConfig, physical_of_wire=None) -> Program:
    """Lower a circuit to the primitive stream both backends execute.

    Ordering: operations sort by (time, phase, emission index) where idle
    ops carry phase 0 at their interval end and gates phase 1 at their
    start, so decoherence accrued before a gate is applied before it.
    """
    nw = circuit.num_qubits
    dt = float(circuit.dt)
    eps = noise.flip_angle_eps
    phys = physical_of_wire if physical_of_wire is not None else list(range(nw))

    entries: list[tuple[int, int, int, Op]] = []
    seq = 0

    def push(time: int, order: int, op: Op) -> None:
        nonlocal seq
        entries.append((time, order, seq, op))
        seq += 1

    events = sorted(circuit.events, key=lambda e: (e.start, e.qubits))
    for ev in events:
        if ev.kind is GateKind.DELAY:
            continue
        if ev.kind is GateKind.CNOT:
            push(ev.start, 1, Op("cnot", ev.qubits))
            if noise.depolarizing and device is not None and device.p_dep_2q > 0:
                push(ev.start, 1, Op("dep2", ev.qubits, p=device.p_dep_2q))
        else:
            push(ev.start, 1, Op("u1", ev.qubits, matrix=_gate_matrix(ev, eps)))
            if noise.depolarizing and device is not None and device.p_dep_1q > 0:
                push(ev.start, 1, Op("dep1", ev.qubits, p=device.p_dep_1q))

    idles = detect_gaps(circuit, include_edges=True)
    detuned: list[int] = []
    if device is not None:
        for w in range(nw):
            q = phys[w]
            t1, t2 = device.t1[q], device.t2[q]
            wire_detuned = False
            for g0, g1 in idles[w]:
                t = (g1 - g0) * dt
                if noise.decoherence:
                    p_ad, p_z = idle_params(t1, t2, t)
                    if p_ad > 0:
                        push(g1, 0, Op("damp", (w,), p=p_ad))
                    if p_z > 0:
                        push(g1, 0, Op("deph", (w,), p=p_z))
                if noise.detuning and noise.detuning_sigma > 0:
                    push(g1, 0, Op("detune", (w,), t=t))
                    wire_detuned = True
            if wire_detuned:
                detuned.append(w)

        if noise.zz and noise.zz_rate > 0 and device.graph is not None:
            wire_of = {phys[w]: w for w in range(nw)}
            for a, b in sorted(device.graph.edges):
                if a in wire_of and b in wire_of and device.graph.is_edge(a, b):
                    wa, wb = wire_of[a], wire_of[b]
                    for o0, o1 in _interval_overlaps(idles[wa], idles[wb]):
                        angle = noise.zz_rate * (o1 - o0) * dt
                        push(o1, 0, Op("zz", (wa, wb), phase=np.exp(1j * angle)))

    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    ops = tuple(op for _, _, _, op in entries)
    n_uniform = sum(1 for op in ops if op.draws_uniform)
    return Program(nw, ops, tuple(detuned), n_uniform)


# -- trajectory backend ---------------------------------------------------------

def _shot_streams(master_seed: int, oracle_key: int, lo: int, hi: int,
                  n_normals: int, n_uniforms: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-shot randomness for shots [lo, hi): Philox keyed by shot index."""
    count = hi - lo
    normals = np.empty((count, n_normals)) if n_normals else np.zeros((count, 0))
    uniforms = np.empty((count, n_uniforms))
    base = (int(master_seed) & 0xFFFFFFFFFFFFFFFF) << 64
    for i in range(count):
        key = base | ((oracle_key & 0xFFFFFFFF) << 32) | ((lo + i) & 0xFFFFFFFF)
        rng = np.random.Generator(np.random.Philox(key=key))
        if n_normals:
            normals[i] = rng.standard_normal(n_normals)
        uniforms[i] = rng.random(n_uniforms)
    return normals, uniforms


def _dep1_branches(u: np.ndarray, p: float) -> np.ndarray:
    branch = np.zeros(len(u), dtype=np.int64)
    hot = u >= 1.0 - p
    branch[hot] = 1 + np.minimum(((u[hot] - (1.0 - p)) / (p / 3.0)).astype(np.int64), 2)
    return branch


def _dep2_branches(u: np.ndarray, p: float) -> np.ndarray:
    branch = np.zeros(len(u), dtype=np.int64)
    hot = u >= 1.0 - p
    branch[hot] = 1 + np.minimum(((u[hot] - (1.0 - p)) / (p / 15.0)).astype(np.int64), 14)
    return branch


def _run_chunk(program: Program, state: np.ndarray, normals: np.ndarray,
               uniforms: np.ndarray, sigma: float, assertions: bool) -> np.ndarray:
    """Evolve one batch through the op stream; returns measurement outcomes."""
    nw = program.num_wires
    s = state.shape[0]
    wslot = {w: i for i, w in enumerate(program.detuned_wires)}
    deltas = normals * sigma if normals.size else normals
    cursor = 0

    for op in program.ops:
        if op.kind == "u1":
            w = op.wires[0]
            ker.apply_1q(state, 1 << w, 1 << (nw - 1 - w), op.matrix)
        elif op.kind == "cnot":
            c, t = op.wires
            ker.cnot(state, 1 << (nw - 1 - c), 1 << (nw - 1 - t))
        elif op.kind == "dep1":
            u = uniforms[:, cursor]
            cursor += 1
            branch = _dep1_branches(u, op.p)
            w = op.wires[0]
            a, b = 1 << w, 1 << (nw - 1 - w)
            for j in (1, 2, 3):
                rows = np.nonzero(branch == j)[0]
                if len(rows):
                    ker.apply_1q_rows(state, rows, a, b, _PAULIS[j])
        elif op.kind == "dep2":
            u = uniforms[:, cursor]
            cursor += 1
            branch = _dep2_branches(u, op.p)
            for j in range(1, 16):
                rows = np.nonzero(branch == j)[0]
                if not len(rows):
                    continue
                for w, pj in zip(op.wires, (j // 4, j % 4)):
                    if pj:
                        ker.apply_1q_rows(state, rows, 1 << w, 1 << (nw - 1 - w),
                                          _PAULIS[pj])
        elif op.kind == "deph":
            u = uniforms[:, cursor]
            cursor += 1
            rows = np.nonzero(u < op.p)[0]
            w = op.wires[0]
            ker.apply_1q_rows(state, rows, 1 << w, 1 << (nw - 1 - w), _Z)
        elif op.kind == "damp":
            u = uniforms[:, cursor]
            cursor += 1
            w = op.wires[0]
            sw = 1 << (nw - 1 - w)
            pop = ker.pop1(state, sw)
            jump = u < op.p * pop
            ker.ampdamp(state, sw, op.p, pop, jump)
        elif op.kind == "detune":
            w = op.wires[0]
            phases = np.exp(1j * deltas[:, wslot[w]] * op.t)
            ker.phase_bit_pershot(state, 1 << (nw - 1 - w), phases)
        elif op.kind == "zz":
            wa, wb = op.wires
            ker.phase_zz(state, 1 << (nw - 1 - wa), 1 << (nw - 1 - wb), op.phase)
        if assertions:
            norms = ker.norm2(state)
            if not np.allclose(norms, 1.0, atol=1e-6):
                raise AssertionError(f"norm drift after {op.kind}: "
                                     f"max |1-n| = {np.abs(1 - norms).max():.2e}")

    u_meas = uniforms[:, cursor]
    return ker.measure(state, u_meas)


def _auto_batch(shots: int, nw: int, itemsize: int) -> int:
    budget = 512 * 1024 * 1024  # bytes of state per batch
    per_shot = (1 << nw) * itemsize
    return max(1, min(shots, budget // max(per_shot, 1)))


def _apply_readout(outcomes: np.ndarray, uniforms: np.ndarray, col0: int,
                   readout: ReadoutMap, device: DeviceModel | None,
                   noise: NoiseConfig, phys, nw: int) -> list[str]:
    keys = []
    n = readout.n
    confuse = noise.readout and device is not None
    for si in range(len(outcomes)):
        bits = []
        for lq in range(n):
            w = readout.wire_of_logical[lq]
            bit = 0 if w is None else int((outcomes[si] >> (nw - 1 - w)) & 1)
            if confuse:
                q = phys[w] if w is not None else 0
                p_flip = device.ro_p01[q] if bit == 0 else device.ro_p10[q]
                if uniforms[si, col0 + lq] < p_flip:
                    bit ^= 1
            bits.append(str(bit))
        keys.append("".join(bits))
    return keys


def simulate_shots(circuit: TimedCircuit, device: DeviceModel | None,
                   noise: NoiseConfig, plan: TrajectoryPlan, oracle: OracleSpec,
                   readout: ReadoutMap | None = None,
                   physical_of_wire=None) -> ShotTable:
    """Monte Carlo trajectory sampling; deterministic given the plan."""
    nw = circuit.num_qubits
    if nw > plan.max_qubits:
        raise SimulatorCapError(f"{nw} wires exceeds trajectory cap {plan.max_qubits}")
    bad = validate_circuit(circuit)
    if bad is not None:
        raise ValueError(f"invalid circuit: {bad}")
    if readout is None:
        readout = ReadoutMap.identity(oracle.n)
    phys = physical_of_wire if physical_of_wire is not None else list(range(nw))

    program = compile_program(circuit, device, noise, phys)
    n_uniforms = program.n_uniform_ops + 1 + readout.n  # ops, measure, readout
    n_normals = len(program.detuned_wires)
    dtype = np.complex128 if plan.precision == "double" else np.complex64

    counts: dict[str, int] = {}
    if not program.stochastic:
        # Every trajectory is identical: evolve once, then draw per-shot
        # measurement and readout from the per-shot streams.
        state = np.zeros((1, 1 << nw), dtype=dtype)
        state[0, 0] = 1.0
        for op in program.ops:
            if op.kind == "u1":
                w = op.wires[0]
                ker.apply_1q(state, 1 << w, 1 << (nw - 1 - w), op.matrix)
            elif op.kind == "cnot":
                c, t = op.wires
                ker.cnot(state, 1 << (nw - 1 - c), 1 << (nw - 1 - t))
            elif op.kind == "zz":
                wa, wb = op.wires
                ker.phase_zz(state, 1 << (nw - 1 - wa), 1 << (nw - 1 - wb), op.phase)
        probs = (state[0].real.astype(float) ** 2 + state[0].imag.astype(float) ** 2)
        cum = np.cumsum(probs)
        _, uniforms = _shot_streams(plan.master_seed, oracle.key(), 0, plan.shots,
                                    0, n_uniforms)
        outcomes = np.searchsorted(cum, uniforms[:, 0] * cum[-1], side="left")
        outcomes = np.minimum(outcomes, (1 << nw) - 1)
        keys = _apply_readout(outcomes, uniforms, 1, readout, device, noise, phys, nw)
        for key in keys:
            counts[key] = counts.get(key, 0) + 1
        return ShotTable(oracle, counts, plan.shots)

    batch = plan.batch_size or _auto_batch(plan.shots, nw, np.dtype(dtype).itemsize)
    for lo in range(0, plan.shots, batch):
        hi = min(lo + batch, plan.shots)
        normals, uniforms = _shot_streams(plan.master_seed, oracle.key(), lo, hi,
                                          n_normals, n_uniforms)
        state = np.zeros((hi - lo, 1 << nw), dtype=dtype)
        state[:, 0] = 1.0
        outcomes = _run_chunk(program, state, normals, uniforms,
                              noise.detuning_sigma, plan.assertions)
        keys = _apply_readout(outcomes, uniforms, program.n_uniform_ops + 1,
                              readout, device, noise, phys, nw)
        for key in keys:
            counts[key] = counts.get(key, 0) + 1
    return ShotTable(oracle, counts, plan.shots)


def noiseless_output(circuit: TimedCircuit, readout: ReadoutMap) -> dict[str, float]:
    """Exact noiseless output distribution over the data bits."""
    nw = circuit.num_qubits
    state = np.zeros((1, 1 << nw), dtype=complex)
    state[0, 0] = 1.0
    program = compile_program(circuit, None, NoiseConfig(
        decoherence=False, depolarizing=False, readout=False,
        detuning=False, zz=False))
    for op in program.ops:
        if op.kind == "u1":
            w = op.wires[0]
            ker.apply_1q(state, 1 << w, 1 << (nw - 1 - w), op.matrix, use_numba=False)
        elif op.kind == "cnot":
            c, t = op.wires
            ker.cnot(state, 1 << (nw - 1 - c), 1 << (nw - 1 - t), use_numba=False)
    probs = np.abs(state[0]) ** 2
    return _collect_distribution(probs, readout, nw)


def _collect_distribution(probs: np.ndarray, readout: ReadoutMap, nw: int
                          ) -> dict[str, float]:
    n = readout.n
    out: dict[str, float] = {}
    for idx in np.nonzero(probs > 1e-300)[0]:
        bits = "".join(
            "0" if readout.wire_of_logical[lq] is None else
            str((int(idx) >> (nw - 1 - readout.wire_of_logical[lq])) & 1)
            for lq in range(n))
        out[bits] = out.get(bits, 0.0) + float(probs[idx])
    return out


# -- exact density-operator backend ----------------------------------------------

def _full_1q(mat: np.ndarray, w: int, nw: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(1 << w), mat), np.eye(1 << (nw - 1 - w)))


def _full_cnot(c: int, t: int, nw: int) -> np.ndarray:
    d = 1 << nw
    sc, st = 1 << (nw - 1 - c), 1 << (nw - 1 - t)
    perm = np.arange(d)
    hot = (perm & sc) > 0
    perm[hot] ^= st
    m = np.zeros((d, d))
    m[perm, np.arange(d)] = 1.0
    return m


def _full_diag_bit(w: int, nw: int, phase: complex) -> np.ndarray:
    d = 1 << nw
    idx = np.arange(d)
    diag = np.where((idx & (1 << (nw - 1 - w))) > 0, phase, 1.0)
    return np.diag(diag)


def _full_diag_zz(wa: int, wb: int, nw: int, phase: complex) -> np.ndarray:
    d = 1 << nw
    idx = np.arange(d)
    odd = ((idx & (1 << (nw - 1 - wa))) > 0) ^ ((idx & (1 << (nw - 1 - wb))) > 0)
    return np.diag(np.where(odd, phase, 1.0))


def _kraus_apply(rho: np.ndarray, ops) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in ops:
        out += k @ rho @ k.conj().T
    return out


def _exact_run(program: Program, deltas: dict[int, float]) -> np.ndarray:
    """Evolve the density operator for one fixed detuning realization."""
    nw = program.num_wires
    d = 1 << nw
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    for op in program.ops:
        if op.kind == "u1":
            m = _full_1q(op.matrix, op.wires[0], nw)
            rho = m @ rho @ m.conj().T
        elif op.kind == "cnot":
            m = _full_cnot(op.wires[0], op.wires[1], nw)
            rho = m @ rho @ m.conj().T
        elif op.kind == "dep1":
            p = op.p
            ks = [math.sqrt(1 - p) * np.eye(d)]
            ks += [math.sqrt(p / 3) * _full_1q(pm, op.wires[0], nw)
                   for pm in _PAULIS[1:]]
            rho = _kraus_apply(rho, ks)
        elif op.kind == "dep2":
            p = op.p
            wa, wb = op.wires
            ks = [math.sqrt(1 - p) * np.eye(d)]
            for i, j in itertools.product(range(4), range(4)):
                if i == 0 and j == 0:
                    continue
                m = _full_1q(_PAULIS[i], wa, nw) @ _full_1q(_PAULIS[j], wb, nw)
                ks.append(math.sqrt(p / 15) * m)
            rho = _kraus_apply(rho, ks)
        elif op.kind == "deph":
            p = op.p
            ks = [math.sqrt(1 - p) * np.eye(d),
                  math.sqrt(p) * _full_1q(_Z, op.wires[0], nw)]
            rho = _kraus_apply(rho, ks)
        elif op.kind == "damp":
            p = op.p
            k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
            k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
            rho = _kraus_apply(rho, [_full_1q(k0, op.wires[0], nw),
                                     _full_1q(k1, op.wires[0], nw)])
        elif op.kind == "detune":
            w = op.wires[0]
            m = _full_diag_bit(w, nw, np.exp(1j * deltas.get(w, 0.0) * op.t))
            rho = m @ rho @ m.conj().T
        elif op.kind == "zz":
            m = _full_diag_zz(op.wires[0], op.wires[1], nw, op.phase)
            rho = m @ rho @ m.conj().T
    return rho


def _confuse_distribution(dist: np.ndarray, n: int, p01, p10) -> np.ndarray:
    """Apply per-bit readout confusion to a 2^n distribution vector."""
    tensor = dist.reshape((2,) * n)
    for bit in range(n):
        m = np.array([[1 - p01[bit], p10[bit]], [p01[bit], 1 - p10[bit]]])
        tensor = np.moveaxis(np.tensordot(m, tensor, axes=([1], [bit])), 0, bit)
    return tensor.reshape(-1)


def simulate_exact(circuit: TimedCircuit, device: DeviceModel | None,
                   noise: NoiseConfig, readout: ReadoutMap | None = None,
                   physical_of_wire=None, cap: int = EXACT_MAX_WIRES,
                   gh_nodes: int = GH_NODES_DEFAULT) -> dict[str, float]:
    """Exact output distribution over data bitstrings (density operator).

    Quasi-static detuning is averaged with a tensor-product Gauss-Hermite
    rule over the detuned wires, so cost scales as gh_nodes**(#detuned
    wires); keep detuned registers small on this backend.
    """
    nw = circuit.num_qubits
    if nw > cap:
        raise SimulatorCapError(f"{nw} wires exceeds exact-backend cap {cap}")
    bad = validate_circuit(circuit)
    if bad is not None:
        raise ValueError(f"invalid circuit: {bad}")
    if readout is None:
        readout = ReadoutMap.identity(nw - 1 if nw > 1 else nw)
    phys = physical_of_wire if physical_of_wire is not None else list(range(nw))
    program = compile_program(circuit, device, noise, phys)

    runs: list[tuple[float, dict[int, float]]] = [(1.0, {})]
    if program.detuned_wires and noise.detuning_sigma > 0:
        x, wts = np.polynomial.hermite.hermgauss(gh_nodes)
        nodes = math.sqrt(2.0) * noise.detuning_sigma * x
        wts = wts / math.sqrt(math.pi)
        runs = []
        for combo in itertools.product(range(gh_nodes),
                                       repeat=len(program.detuned_wires)):
            weight = float(np.prod([wts[i] for i in combo]))
            deltas = {w: float(nodes[i])
                      for w, i in zip(program.detuned_wires, combo)}
            runs.append((weight, deltas))

    probs = np.zeros(1 << nw)
    for weight, deltas in runs:
        rho = _exact_run(program, deltas)
        probs += weight * np.real(np.diag(rho))
    probs = np.maximum(probs, 0.0)
    probs /= probs.sum()

    # marginalize wires onto logical data bits
    n = readout.n
    data = np.zeros(1 << n)
    for idx in range(1 << nw):
        key = 0
        for lq in range(n):
            w = readout.wire_of_logical[lq]
            bit = 0 if w is None else (idx >> (nw - 1 - w)) & 1
            key = (key << 1) | bit
        data[key] += probs[idx]

    if noise.readout and device is not None:
        p01 = [device.ro_p01[phys[readout.wire_of_logical[lq]]]
               if readout.wire_of_logical[lq] is not None else device.ro_p01[0]
               for lq in range(n)]
        p10 = [device.ro_p10[phys[readout.wire_of_logical[lq]]]
               if readout.wire_of_logical[lq] is not None else device.ro_p10[0]
               for lq in range(n)]
        data = _confuse_distribution(data, n, p01, p10)

    return {format(i, f"0{n}b"): float(data[i])
            for i in range(1 << n) if data[i] > 1e-300}


def total_variation_distance(p: dict[str, float], q: dict[str, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


# -- App-B style reduction equivalence -------------------------------------------

@dataclass(frozen=True)
class ReductionReport:
    n: int
    m: int
    k: int
    tvd: float
    passed: bool
    crosstalk_free: bool


def check_reduction_equivalence(n: int, m: int, k: int, device: DeviceModel,
                                noise: NoiseConfig, dd=None,
                                gh_nodes: int = GH_NODES_DEFAULT) -> ReductionReport:
    """Compare marginalized BV-n against direct BV-m on the exact backend.

    Uses the standard setup (unmarked qubits present with cancelling H
    pairs) on a chain coupling so ZZ crosstalk couples the marked and
    unmarked sectors.  With factorized noise (zz off) the two
    distributions agree to numerical precision; crosstalk breaks the
    equivalence and DD restores it.
    """
    from .decoupling import schedule_dd
    from .oracles import bv_logical_circuit
    from .routing import chain_graph

    if not k <= m < n:
        raise ValueError("need k <= m < n")

    def build(size: int):
        spec = OracleSpec.representative(size, k)
        circ, rmap = bv_logical_circuit(
            spec, reduced=False, dur_1q=device.dur_1q, dur_2q=device.dur_2q,
            readout_duration=device.dur_readout, dt=device.dt)
        if dd is not None:
            circ = schedule_dd(circ, dd, device.dur_dd_pulse)
        dev = device.with_graph(chain_graph(size + 1))
        return circ, rmap, dev

    circ_n, rmap_n, dev_n = build(n)
    circ_m, rmap_m, dev_m = build(m)
    dist_n = simulate_exact(circ_n, dev_n, noise, rmap_n, gh_nodes=gh_nodes)
    dist_m = simulate_exact(circ_m, dev_m, noise, rmap_m, gh_nodes=gh_nodes)
    marg: dict[str, float] = {}
    for key, pval in dist_n.items():
        head = key[:m]
        marg[head] = marg.get(head, 0.0) + pval
    tvd = total_variation_distance(marg, dist_m)
    crosstalk_free = not (noise.zz and noise.zz_rate > 0)
    passed = tvd < 1e-9 if crosstalk_free else True
    return ReductionReport(n, m, k, tvd, passed, crosstalk_free)
