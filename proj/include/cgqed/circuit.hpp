#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cgqed/trotter.hpp"

namespace cgqed {

// One primitive of the emitted product-formula circuit.  Three kinds:
//   fourier-block      basis change on field registers (forward or inverse)
//   diagonal-phase     exp(-i dt f(levels / occupations)) for a named f
//   pauli-exponential  exp(-i dt (c P + c* P^dag)) on the listed qubits
struct CircuitOp {
    std::string kind;
    std::string label;  // originating Hamiltonian piece
    double dt = 0.0;
    std::vector<int> qubits;
    std::string direction;       // fourier-block: "forward" / "inverse"
    std::string phase_function;  // diagonal-phase: conjugate_quadratic /
                                 // magnetic_energy / onsite_charge
    std::string generator;       // pauli-exponential: printable string form
    int field_register = -1;     // pauli-exponential: attached register, or -1
};

// Expands a product-formula plan into the primitive sequence, step by step.
// Hermitian-conjugate term pairs are merged into a single rotation; the
// raising on-site half is folded into the lowering half's emission.  The
// per-kind totals match structural_counts(plan) times the step count.
std::vector<CircuitOp> emit_circuit(const TrotterPlan& plan);

// One JSON object per line: a header describing the register layout, then
// each primitive in order.
void write_circuit_jsonl(const TrotterPlan& plan, const std::vector<CircuitOp>& ops,
                         std::ostream& os);

}  // namespace cgqed
