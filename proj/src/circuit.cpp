#include "cgqed/circuit.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "cgqed/errors.hpp"

namespace cgqed {
namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<int> all_gauge_qubits(const SpaceLayout& lay) {
    std::vector<int> qs;
    for (int r = 0; r < lay.n_gauge_registers; ++r) {
        for (int b = 0; b < lay.grid.n_qubits; ++b) qs.push_back(lay.gauge_qubit(r, b));
    }
    return qs;
}

std::vector<int> term_support(const FermionTerm& term, const SpaceLayout& lay) {
    std::set<int> qs;
    for (const PauliFactor& f : term.op.factors) qs.insert(f.qubit);
    if (term.attach_register >= 0) {
        for (int b = 0; b < lay.grid.n_qubits; ++b) {
            qs.insert(lay.gauge_qubit(term.attach_register, b));
        }
    }
    return std::vector<int>(qs.begin(), qs.end());
}

void emit_pauli_pair(const FermionTerm& term, const SpaceLayout& lay, const std::string& label,
                     double dt, std::vector<CircuitOp>& out) {
    CircuitOp op;
    op.kind = "pauli-exponential";
    op.label = label;
    op.dt = dt;
    op.qubits = term_support(term, lay);
    op.generator = to_string(term.op);
    op.field_register = term.attach_register;
    out.push_back(std::move(op));
}

}  // namespace

std::vector<CircuitOp> emit_circuit(const TrotterPlan& plan) {
    const SpaceLayout& lay = plan.lay;
    std::vector<CircuitOp> out;
    const std::vector<int> gauge_qs = all_gauge_qubits(lay);
    std::vector<int> all_qs(lay.total_qubits);
    for (int q = 0; q < lay.total_qubits; ++q) all_qs[q] = q;

    for (int step = 0; step < plan.steps; ++step) {
        for (const TrotterPiece& piece : plan.pieces) {
            switch (piece.kind) {
                case TrotterKind::Conjugate: {
                    CircuitOp fwd;
                    fwd.kind = "fourier-block";
                    fwd.label = piece.name;
                    fwd.dt = plan.dt;
                    fwd.qubits = gauge_qs;
                    fwd.direction = "forward";
                    out.push_back(fwd);

                    CircuitOp phase;
                    phase.kind = "diagonal-phase";
                    phase.label = piece.name;
                    phase.dt = plan.dt;
                    phase.qubits = gauge_qs;
                    phase.phase_function = "conjugate_quadratic";
                    out.push_back(std::move(phase));

                    fwd.direction = "inverse";
                    out.push_back(std::move(fwd));
                    break;
                }
                case TrotterKind::GaugeDiagonal: {
                    CircuitOp phase;
                    phase.kind = "diagonal-phase";
                    phase.label = piece.name;
                    phase.dt = plan.dt;
                    phase.qubits = gauge_qs;
                    phase.phase_function = "magnetic_energy";
                    out.push_back(std::move(phase));
                    break;
                }
                case TrotterKind::FullDiagonal: {
                    if (piece.empty) break;
                    CircuitOp phase;
                    phase.kind = "diagonal-phase";
                    phase.label = piece.name;
                    phase.dt = plan.dt;
                    phase.qubits = all_qs;
                    phase.phase_function = "onsite_charge";
                    out.push_back(std::move(phase));
                    break;
                }
                case TrotterKind::HermitianPairs: {
                    for (const FermionTerm& term : piece.terms) {
                        emit_pauli_pair(term, lay, piece.name, plan.dt, out);
                    }
                    break;
                }
                case TrotterKind::OnsiteHalf: {
                    // the raising half is the adjoint of the lowering half;
                    // each merged rotation is emitted once, from the latter
                    if (piece.id.kind != PieceKind::OnsiteS12) break;
                    for (const FermionTerm& term : piece.terms) {
                        emit_pauli_pair(term, lay, piece.name, plan.dt, out);
                    }
                    break;
                }
            }
        }
    }
    return out;
}

void write_circuit_jsonl(const TrotterPlan& plan, const std::vector<CircuitOp>& ops,
                         std::ostream& os) {
    const SpaceLayout& lay = plan.lay;
    ordered_json header;
    header["schema_version"] = "cgqed-circuit-1";
    header["qubits"] = lay.total_qubits;
    header["fermion_qubits"] = lay.n_fermion_modes;
    header["gauge_registers"] = lay.n_gauge_registers;
    header["qubits_per_register"] = lay.has_gauge() ? lay.grid.n_qubits : 0;
    header["sector"] = sector_name(lay.sector);
    header["dims"] = {lay.geom.dims[0], lay.geom.dims[1], lay.geom.dims[2]};
    header["steps"] = plan.steps;
    header["dt"] = plan.dt;
    header["t_total"] = plan.t_total;
    ordered_json pieces = ordered_json::array();
    for (const TrotterPiece& piece : plan.pieces)
        if (!piece.empty) pieces.push_back(piece.name);
    header["pieces"] = std::move(pieces);
    header["op_count"] = ops.size();
    os << header.dump() << '\n';

    for (const CircuitOp& op : ops) {
        ordered_json j;
        j["kind"] = op.kind;
        j["label"] = op.label;
        j["dt"] = op.dt;
        j["qubits"] = op.qubits;
        if (op.kind == "fourier-block") j["direction"] = op.direction;
        if (op.kind == "diagonal-phase") j["phase_function"] = op.phase_function;
        if (op.kind == "pauli-exponential") {
            j["generator"] = op.generator;
            if (op.field_register >= 0) j["field_register"] = op.field_register;
        }
        os << j.dump() << '\n';
    }
}

}  // namespace cgqed
