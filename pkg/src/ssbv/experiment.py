"""Experiment configuration and the generate/simulate/ingest/analyze pipeline.

All randomness flows from one master seed: simulation shots use Philox
streams keyed by (seed, oracle, shot); bootstrap resampling uses the
dedicated substream keyed by (seed, BOOTSTRAP_TAG).  Given a config and a
seed, every produced report is byte-identical across runs.

Collection modes: 'direct' simulates every (n, oracle) pair; 'reduced'
simulates only the largest size and derives all smaller-n tables by
tracing out data qubits, which is exact for the representative oracles
under factorized noise and is how large-size curves are collected in
practice.
"""
from __future__ import annotations

import math
import os
import shutil
from dataclasses import dataclass, fields, replace

import numpy as np

from .analysis import (AnalysisConfig, FitResult, TTSPoint, bootstrap_lambda,
                       bootstrap_tts, classical_points, local_lambda,
                       speedup_ratio, success_matrix, tts_quantum,
                       worst_case_lambda)
from .circuit import DurationModel, circuit_duration, save_circuit
from .decoupling import schedule_dd, sequence_from_name
from .manifest import (append_entry, append_file_entry, read_manifest,
                       start_manifest)
from .noise import load_profile
from .oracles import (OracleSpec, ShotTable, all_oracles, load_counts,
                      reduce_counts, representative_oracles, save_counts)
from .routing import embed_oracle, layout_from_name, route_bv
from .simulator import TrajectoryPlan, simulate_shots

BOOTSTRAP_TAG = 0xB007


class ConfigError(Exception):
    """Invalid or unresolvable experiment configuration."""


_CONFIG_FIELDS = {
    "n_min": int, "n_max": int, "oracle_mode": str, "layout": str,
    "profile": str, "blacklist": str, "dd": str, "dd_pulse_duration_dt": int,
    "dd_fallback": str, "collection": str, "setup": str, "shots": int,
    "master_seed": int, "p_d": float, "bootstrap_b": int, "n_min_fit": int,
    "precision": str,
}


@dataclass(frozen=True)
class ExperimentConfig:
    n_min: int = 3
    n_max: int = 10
    oracle_mode: str = "representative"   # representative | all
    layout: str = "heavy-hex-27"
    profile: str = "montreal"
    blacklist: str = ""                   # comma-separated physical nodes
    dd: str = "none"                      # none | ur<n> | ur:<n>
    dd_pulse_duration_dt: int = 0         # 0 -> device DD pulse duration
    dd_fallback: str = "ladder"           # ladder | idle
    collection: str = "direct"            # direct | reduced
    setup: str = "reduced"                # reduced | standard
    shots: int = 2000
    master_seed: int = 1
    p_d: float = 0.99
    bootstrap_b: int = 100
    n_min_fit: int = 3
    precision: str = "double"

    def __post_init__(self) -> None:
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError("need 1 <= n_min <= n_max")
        if self.oracle_mode not in ("representative", "all"):
            raise ConfigError(f"unknown oracle_mode {self.oracle_mode!r}")
        if self.collection not in ("direct", "reduced"):
            raise ConfigError(f"unknown collection {self.collection!r}")
        if self.collection == "reduced" and self.oracle_mode != "representative":
            raise ConfigError("reduced collection requires representative oracles")
        if self.setup not in ("reduced", "standard"):
            raise ConfigError(f"unknown setup {self.setup!r}")
        if self.dd_fallback not in ("ladder", "idle"):
            raise ConfigError(f"unknown dd_fallback {self.dd_fallback!r}")
        if self.precision not in ("double", "single"):
            raise ConfigError(f"unknown precision {self.precision!r}")
        if self.shots <= 0:
            raise ConfigError("shots must be positive")
        try:
            sequence_from_name(self.dd)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def analysis_config(self) -> AnalysisConfig:
        return AnalysisConfig(p_d=self.p_d, bootstrap_b=self.bootstrap_b,
                              n_min=self.n_min_fit)

    def blacklist_nodes(self) -> frozenset[int]:
        if not self.blacklist.strip():
            return frozenset()
        return frozenset(int(tok) for tok in self.blacklist.split(","))


_CONFIG_HEADER = "# ssbv experiment config v1"


def config_to_text(config: ExperimentConfig) -> str:
    lines = [_CONFIG_HEADER]
    for f in fields(config):
        lines.append(f"{f.name} {getattr(config, f.name)}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, ln in enumerate(text.splitlines(), 1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        key, _, raw = ln.partition(" ")
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"line {lineno}: unknown config field {key!r}")
        try:
            values[key] = _CONFIG_FIELDS[key](raw.strip())
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return config_from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def save_config(config: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(config_to_text(config))


# -- shared setup ----------------------------------------------------------------

def _resolve(config: ExperimentConfig):
    graph = layout_from_name(config.layout, min_nodes=config.n_max + 1)
    black = config.blacklist_nodes()
    if black:
        graph = graph.with_blacklist(black)
    if config.n_max + 1 > len(graph.usable):
        raise ConfigError(f"n_max={config.n_max} needs {config.n_max + 1} usable "
                          f"nodes, layout has {len(graph.usable)}")
    try:
        profile = load_profile(config.profile)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load profile {config.profile!r}: {exc}") from None
    device = profile.device(graph)
    noise = profile.noise()
    sequence = sequence_from_name(config.dd)
    pulse = config.dd_pulse_duration_dt or device.dur_dd_pulse
    return graph, device, noise, sequence, pulse


def _oracles_for(config: ExperimentConfig, n: int) -> list[OracleSpec]:
    if config.oracle_mode == "representative":
        return representative_oracles(n)
    return all_oracles(n)


def _routed_for(config: ExperimentConfig, spec: OracleSpec, graph, device,
                sequence, pulse):
    emb = embed_oracle(spec, graph)
    routed = route_bv(spec, graph, emb, device,
                      standard=config.setup == "standard")
    circuit = routed.circuit
    if sequence is not None:
        circuit = schedule_dd(circuit, sequence, pulse, config.dd_fallback)
    return routed, circuit


def _table_name(spec: OracleSpec) -> str:
    return f"bv_n{spec.n}_b{spec.b.to01()}"


# -- commands ---------------------------------------------------------------------

def cmd_generate(config: ExperimentConfig, out_dir) -> str:
    """Write routed (and DD-dressed) circuit files for every (n, oracle)."""
    graph, device, noise, sequence, pulse = _resolve(config)
    circ_dir = os.path.join(out_dir, "circuits")
    os.makedirs(circ_dir, exist_ok=True)
    manifest = os.path.join(out_dir, "manifest.txt")
    start_manifest(manifest)
    cfg_path = os.path.join(out_dir, "config.used")
    save_config(config, cfg_path)
    append_file_entry(manifest, "config", cfg_path)

    for n in range(config.n_min, config.n_max + 1):
        for spec in _oracles_for(config, n):
            routed, circuit = _routed_for(config, spec, graph, device,
                                          sequence, pulse)
            path = os.path.join(circ_dir, _table_name(spec) + ".circuit")
            save_circuit(circuit, path)
            readout = ",".join(
                "-" if w is None else str(w)
                for w in routed.readout.wire_of_logical)
            append_file_entry(
                manifest, "circuit", path, n=n, b=spec.b.to01(),
                cnots=routed.cnot_count,
                duration_dt=circuit_duration(circuit), readout=readout)
    return manifest


def _duration_table(config: ExperimentConfig, graph, device, sequence, pulse
                    ) -> dict[int, float]:
    """t_r(n) in seconds from the full-weight (k=n) routed circuit."""
    table = {}
    for n in range(config.n_min, config.n_max + 1):
        spec = OracleSpec.representative(n, n)
        _, circuit = _routed_for(config, spec, graph, device, sequence, pulse)
        table[n] = device.seconds(circuit_duration(circuit))
    return table


def cmd_simulate(config: ExperimentConfig, out_dir) -> str:
    """Run the trajectory backend over the configured oracle grid."""
    graph, device, noise, sequence, pulse = _resolve(config)
    counts_dir = os.path.join(out_dir, "counts")
    os.makedirs(counts_dir, exist_ok=True)
    manifest = os.path.join(out_dir, "manifest.txt")
    start_manifest(manifest)
    cfg_path = os.path.join(out_dir, "config.used")
    save_config(config, cfg_path)
    append_file_entry(manifest, "config", cfg_path)

    for n, t_r in sorted(_duration_table(config, graph, device, sequence,
                                         pulse).items()):
        append_entry(manifest, "duration", n=n, seconds=repr(t_r))

    plan = TrajectoryPlan(config.shots, config.master_seed,
                          precision=config.precision)

    def write_table(table: ShotTable, derived: bool) -> None:
        path = os.path.join(counts_dir, _table_name(table.oracle) + ".counts")
        save_counts(table, path)
        append_file_entry(manifest, "counts", path, n=table.n,
                          b=table.oracle.b.to01(), shots=table.total_shots,
                          derived=int(derived))

    if config.collection == "reduced":
        n_top = config.n_max
        for spec in _oracles_for(config, n_top):
            routed, circuit = _routed_for(config, spec, graph, device,
                                          sequence, pulse)
            phys = [None] * circuit.num_qubits
            for node, w in routed.wire_of_physical.items():
                phys[w] = node
            table = simulate_shots(circuit, device, noise, plan, spec,
                                   routed.readout, phys)
            write_table(table, derived=False)
            for m in range(config.n_min, n_top):
                if spec.k <= m:
                    write_table(reduce_counts(table, m), derived=True)
    else:
        for n in range(config.n_min, config.n_max + 1):
            for spec in _oracles_for(config, n):
                routed, circuit = _routed_for(config, spec, graph, device,
                                              sequence, pulse)
                phys = [None] * circuit.num_qubits
                for node, w in routed.wire_of_physical.items():
                    phys[w] = node
                table = simulate_shots(circuit, device, noise, plan, spec,
                                       routed.readout, phys)
                write_table(table, derived=False)
    return manifest


def cmd_ingest(paths, out_dir) -> str:
    """Validate and register externally produced count files."""
    counts_dir = os.path.join(out_dir, "counts")
    os.makedirs(counts_dir, exist_ok=True)
    manifest = os.path.join(out_dir, "manifest.txt")
    start_manifest(manifest)

    files: list[str] = []
    for p in paths:
        if os.path.isdir(p):
            files.extend(sorted(os.path.join(p, f) for f in os.listdir(p)
                                if f.endswith(".counts")))
        else:
            files.append(p)
    if not files:
        raise ConfigError("nothing to ingest")
    for src in files:
        try:
            table = load_counts(src)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"{src}: {exc}") from None
        dst = os.path.join(counts_dir, _table_name(table.oracle) + ".counts")
        if os.path.abspath(src) != os.path.abspath(dst):
            shutil.copyfile(src, dst)
        append_file_entry(manifest, "counts", dst, n=table.n,
                          b=table.oracle.b.to01(), shots=table.total_shots,
                          derived=0, ingested=1)
    return manifest


@dataclass(frozen=True)
class AnalysisResult:
    points: list[TTSPoint]
    classical: list[TTSPoint]
    fit: FitResult | None
    local: dict[int, FitResult]
    speedup: object | None
    verdicts: dict[int, bool]
    duration_model: DurationModel
    report_text: str


def _load_tables(out_dir) -> tuple[dict[int, list[ShotTable]], dict[int, float]]:
    manifest = os.path.join(out_dir, "manifest.txt")
    if not os.path.exists(manifest):
        raise ConfigError(f"no manifest at {manifest}")
    base = os.path.dirname(os.path.abspath(manifest))
    tables: dict[int, list[ShotTable]] = {}
    durations: dict[int, float] = {}
    for entry in read_manifest(manifest):
        if entry["kind"] == "counts":
            table = load_counts(os.path.join(base, entry["file"]))
            tables.setdefault(table.n, []).append(table)
        elif entry["kind"] == "duration":
            durations[int(entry["n"])] = float(entry["seconds"])
    if not tables:
        raise ConfigError("manifest references no count tables")
    for n in tables:
        tables[n].sort(key=lambda t: t.oracle.b.to_int())
    return tables, durations


def _analysis_duration_model(config: ExperimentConfig,
                             durations: dict[int, float]) -> DurationModel:
    profile = load_profile(config.profile)
    base = profile.device(num_qubits=2).duration_model
    return DurationModel(base.c, base.tau_2q, base.tau_0,
                         exact_table=durations or None)


def cmd_analyze(config: ExperimentConfig, out_dir) -> AnalysisResult:
    """TTS curve, exponent fits, baseline, speedup, and BQP verdicts."""
    tables, durations = _load_tables(out_dir)
    model = _analysis_duration_model(config, durations)
    acfg = config.analysis_config()
    rng = np.random.Generator(np.random.Philox(
        key=((config.master_seed & 0xFFFFFFFFFFFFFFFF) << 64) | BOOTSTRAP_TAG))

    points: list[TTSPoint] = []
    verdicts: dict[int, bool] = {}
    for n in sorted(tables):
        point, _ = bootstrap_tts(tables[n], model, acfg, rng)
        points.append(point)
        verdicts[n] = success_matrix(tables[n]).bqp_verdict

    fit = None
    local: dict[int, FitResult] = {}
    finite_ns = [p.n for p in points if p.finite and p.n >= acfg.n_min]
    if len(finite_ns) >= 3:
        fit = bootstrap_lambda(tables, model, acfg, rng)
        for h in finite_ns:
            try:
                local[h] = local_lambda(points, h, acfg)
            except ValueError:
                continue

    classical = classical_points(sorted(tables), p_d=config.p_d)
    speedup = None
    try:
        speedup = speedup_ratio(points, classical)
    except ValueError:
        pass

    report = render_report(config, model, points, classical, fit, local,
                           speedup, verdicts)
    report_path = os.path.join(out_dir, "report.txt")
    with open(report_path, "w") as fh:
        fh.write(report)
    write_plot_data(out_dir, points, classical, local, speedup)
    manifest = os.path.join(out_dir, "manifest.txt")
    append_file_entry(manifest, "report", report_path)
    return AnalysisResult(points, classical, fit, local, speedup, verdicts,
                          model, report)


def render_report(config: ExperimentConfig, model: DurationModel,
                  points: list[TTSPoint], classical: list[TTSPoint],
                  fit: FitResult | None, local: dict[int, FitResult],
                  speedup, verdicts: dict[int, bool]) -> str:
    out = ["# ssbv analysis report v1", "", "[config]"]
    for f in fields(config):
        out.append(f"{f.name} {getattr(config, f.name)}")
    out += ["", "[duration-model]",
            f"slope_us {model.slope * 1e6:.6f}",
            f"intercept_us {model.tau_0 * 1e6:.6f}",
            f"exact_table_points {len(model.exact_table or {})}"]
    out += ["", "[tts]", "n tts_s ci_low_s ci_high_s oracles terminated"]
    for p in points:
        if p.terminated:
            out.append(f"{p.n} - - - {p.num_oracles} 1")
        else:
            out.append(f"{p.n} {p.tts_mean:.9e} {p.ci_low:.9e} "
                       f"{p.ci_high:.9e} {p.num_oracles} 0")
    out += ["", "[classical]", "n tts_s"]
    for p in classical:
        out.append(f"{p.n} {p.tts_mean:.9e}")
    out += ["", "[lambda]"]
    if fit is not None:
        out.append(f"worst_case exponent {fit.exponent:.6f} "
                   f"ci [{fit.ci_low:.6f}, {fit.ci_high:.6f}] "
                   f"window [{fit.window[0]}, {fit.window[1]}]")
        for h in sorted(local):
            out.append(f"local h={h} exponent {local[h].exponent:.6f}")
    else:
        out.append("worst_case insufficient-data")
    out += ["", "[speedup]"]
    if speedup is not None:
        out.append(f"fitted_exponent {speedup.fitted_exponent:.6f}")
        out.append("n ratio")
        for n, v in zip(speedup.ns, speedup.values):
            out.append(f"{n} {v:.9e}")
    else:
        out.append("undefined")
    out += ["", "[bqp]", "n all_oracles_above_half"]
    for n in sorted(verdicts):
        out.append(f"{n} {int(verdicts[n])}")
    return "\n".join(out) + "\n"


def write_plot_data(out_dir, points: list[TTSPoint], classical: list[TTSPoint],
                    local: dict[int, FitResult], speedup) -> None:
    """Columnar plot files, one row per finite size, header row first."""
    pdir = os.path.join(out_dir, "plotdata")
    os.makedirs(pdir, exist_ok=True)

    def write(name: str, header: str, rows) -> None:
        with open(os.path.join(pdir, name), "w") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(" ".join(str(x) for x in row) + "\n")

    write("tts_quantum.dat", "n tts_s ci_low_s ci_high_s",
          [(p.n, f"{p.tts_mean:.9e}", f"{p.ci_low:.9e}", f"{p.ci_high:.9e}")
           for p in points if p.finite])
    write("tts_classical.dat", "n tts_s",
          [(p.n, f"{p.tts_mean:.9e}") for p in classical])
    write("lambda_local.dat", "h_max exponent",
          [(h, f"{local[h].exponent:.6f}") for h in sorted(local)])
    if speedup is not None:
        write("speedup.dat", "n ratio",
              [(n, f"{v:.9e}") for n, v in zip(speedup.ns, speedup.values)])
