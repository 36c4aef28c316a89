"""Single-shot Bernstein-Vazirani speedup toolkit.

Circuit generation, routing onto sparse coupling graphs by ancilla
swapping, universally robust dynamical decoupling, Kraus-channel noisy
simulation on exact and trajectory backends, and time-to-solution /
speedup-exponent analysis with bootstrap statistics.
"""

from .analysis import (AnalysisConfig, FitResult, SpeedupCurve, SuccessMatrix,
                       TTSPoint, bootstrap_lambda, bootstrap_tts,
                       classical_points, local_lambda, mean_tts, repetitions,
                       speedup_ratio, success_matrix, success_prob,
                       tts_classical, tts_quantum, worst_case_lambda)
from .circuit import (DT_SECONDS, Bitstring, DurationModel, GateEvent,
                      GateKind, TimedCircuit, Violation, circuit_duration,
                      circuit_from_text, circuit_to_text, load_circuit,
                      run_time, save_circuit, validate_circuit)
from .decoupling import (DDSequence, GapSchedule, detect_gaps, plan_dd,
                         pulse_unitary, schedule_dd, sequence_from_name,
                         ur_phases, xy4)
from .experiment import (ConfigError, ExperimentConfig, cmd_analyze,
                         cmd_generate, cmd_ingest, cmd_simulate, load_config,
                         save_config)
from .noise import (NOISELESS, DeviceModel, KrausChannel, NoiseConfig,
                    amplitude_damping, dephasing, depolarizing, idle_channel,
                    identity_channel, load_profile, readout_sample,
                    sample_static_fields)
from .oracles import (OracleSpec, ReadoutMap, ShotTable, all_oracles,
                      bv_logical_circuit, classical_success_prob, load_counts,
                      reduce_counts, representative_oracles, save_counts)
from .routing import (CouplingGraph, Embedding, RoutedCircuit,
                      RoutingInfeasible, chain_graph, cnot_scaling,
                      complete_graph, embed_oracle, embedding_cnot_count,
                      find_embedding, heavy_hex_27, layout_from_name,
                      load_graph, naive_cnot_count, route_bv, save_graph,
                      verify_routed)
from .simulator import (ReductionReport, SimulatorCapError, TrajectoryPlan,
                        check_reduction_equivalence, compile_program,
                        noiseless_output, simulate_exact, simulate_shots,
                        total_variation_distance)

__version__ = "0.1.0"
