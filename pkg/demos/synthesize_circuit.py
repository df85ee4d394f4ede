"""
Circuit analog of a finite-difference plate
===========================================

Build the inductor/capacitor lattice whose nodal equations reproduce the
discrete plate, check it against the biharmonic matrix, and realize the
negative inductors with op-amp impedance converters.
"""

from pemplate.circuit import GICRealization, build_netlist, identify_edge_admittances, verify_analog, verify_gic
from pemplate.fd import BoundaryCondition, GridSpec, assemble_biharmonic
from pemplate.params import ALUMINIUM, REFERENCE_ACTUATOR, derive_circuit_values

grid = GridSpec(9)
bc = BoundaryCondition.SIMPLY_SUPPORTED
groups = derive_circuit_values(ALUMINIUM, REFERENCE_ACTUATOR, grid.eps, actuator_capacitance=True)
print(f"alpha = {groups.alpha:.4f}, beta = {groups.beta:.4e}, node L = {groups.L:.3f} H")

# one inductance per stencil offset, one capacitor per node
values = identify_edge_admittances(grid.eps, groups.alpha, groups.R0, groups.t0)
print(values)

netlist = build_netlist(values, grid, bc)
report = verify_analog(netlist, assemble_biharmonic(grid, bc), groups.alpha)
print(f"{len(netlist.components)} components, max mismatch {report.max_mismatch:.1e}")

# diagonal and second-neighbour links are negative inductances
for name, L in (("diagonal", values.L_diag), ("second", values.L_second)):
    z = verify_gic(GICRealization.for_inductance(L))
    print(f"{name}: target {L:.4f} H, realized {float(z.inductance):.4f} H")

print(netlist.to_text()[:400])
