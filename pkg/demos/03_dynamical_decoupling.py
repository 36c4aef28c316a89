"""Universally robust DD sequences and their placement in idle gaps.

A UR_n sequence is n pi pulses about equatorial axes with quadratic phase
progression; ideal pulses compose to the identity, and the phase pattern
cancels systematic flip-angle errors order by order.
"""
import numpy as np

from ssbv import (OracleSpec, detect_gaps, embed_oracle, heavy_hex_27,
                  load_profile, plan_dd, route_bv, schedule_dd, ur_phases)
from ssbv.decoupling import pulse_unitary

for n in (4, 6, 14, 18):
    seq = ur_phases(n)
    prod = np.eye(2, dtype=complex)
    for phi in seq.phases:
        prod = pulse_unitary(phi) @ prod
    print(f"UR{n:2d}: phases/pi = {[round(p/np.pi, 3) for p in seq.phases[:6]]}"
          f"{' ...' if n > 6 else ''}  |trace(product)| = {abs(np.trace(prod)):.12f}")

# Idle gaps of a routed BV-8 circuit on the heavy-hex chip.
profile = load_profile("montreal")
graph = heavy_hex_27()
device = profile.device(graph)
spec = OracleSpec.representative(8, 8)
routed = route_bv(spec, graph, embed_oracle(spec, graph), device)
gaps = detect_gaps(routed.circuit)
total_idle = sum(g1 - g0 for v in gaps.values() for g0, g1 in v)
print(f"\nBV-8 routed: {len(routed.circuit.events)} events, "
      f"{sum(len(v) for v in gaps.values())} gaps, {total_idle} dt idle")

# One UR repetition per gap, pulse centers equally spaced; gaps too short
# for UR14 walk down the ladder toward XY4.
plans = plan_dd(routed.circuit, ur_phases(14), device.dur_dd_pulse)
by_seq = {}
for p in plans:
    by_seq[p.sequence.name] = by_seq.get(p.sequence.name, 0) + 1
print(f"gap fills by sequence: {by_seq}")

dressed = schedule_dd(routed.circuit, ur_phases(14), device.dur_dd_pulse)
pulses = len(dressed.events) - len(routed.circuit.events)
print(f"dressed circuit: {pulses} pulses inserted")
