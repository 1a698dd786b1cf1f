#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgqed/circuit.hpp"
#include "cgqed/config.hpp"
#include "cgqed/errors.hpp"
#include "cgqed/krylov.hpp"
#include "cgqed/resources.hpp"
#include "cgqed/trotter.hpp"
#include "cgqed/verify.hpp"

namespace {

using cgqed::RunConfig;
using ordered_json = nlohmann::ordered_json;

constexpr int kMaxSimSteps = 200000;
constexpr std::int64_t kMaxSimDim = std::int64_t(1) << 22;

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.params.g = 0.3;
    cfg.params.mass = 1.0;
    cfg.params.wilson = 1.0;
    return cfg;
}

int parse_int_or_auto(const std::string& s, const char* what) {
    if (s == "auto") return -1;
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw cgqed::config_error(std::string(what) + ": expected an integer or \"auto\"");
    }
}

double parse_double_or_auto(const std::string& s, const char* what) {
    if (s == "auto") return -1.0;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw cgqed::config_error(std::string(what) + ": expected a number or \"auto\"");
    }
}

// Options common to every subcommand; strings marked "auto" are resolved
// against the register bounds after parsing.
struct RawOptions {
    std::vector<int> dims;
    std::string config, sector, n_a, a_max, steps;
};

void add_common_options(CLI::App* sub, RunConfig& cfg, RawOptions& raw) {
    sub->add_option("--config", raw.config,
                    "JSON config file (applied before the flags below)");
    sub->add_option("--dims", raw.dims, "lattice extents Lx,Ly,Lz")->delimiter(',')->expected(3);
    sub->add_option("--sector", raw.sector, "coupled | fermion | gauge");
    sub->add_option("--g", cfg.params.g, "coupling constant");
    sub->add_option("--mass", cfg.params.mass, "bare fermion mass (lattice units)");
    sub->add_option("--wilson", cfg.params.wilson, "momentum-doubling suppression weight");
    sub->add_option("--n-a", raw.n_a, "qubits per field register, or \"auto\"");
    sub->add_option("--a-max", raw.a_max, "field amplitude cutoff, or \"auto\"");
    sub->add_flag("--transverse-hi,!--no-transverse-hi", cfg.params.transverse_interaction,
                  "project the current coupling onto transverse fields");
    sub->add_option("--energy", cfg.energy, "target total-energy scale");
    sub->add_option("--epsilon", cfg.epsilon, "precision target, in (0, 1)");
    sub->add_option("--time", cfg.time, "evolution time");
    sub->add_option("--steps", raw.steps, "product-formula steps, or \"auto\"");
    sub->add_option("--seed", cfg.seed, "random-state seed");
    sub->add_option("--out", cfg.out, "write the report here instead of stdout");
}

void fold_raw_options(const RawOptions& raw, RunConfig& cfg) {
    if (!raw.dims.empty()) {
        cfg.params.geom = cgqed::make_geometry(raw.dims[0], raw.dims[1], raw.dims[2]);
    }
    if (!raw.sector.empty()) cfg.params.sector = cgqed::sector_from_string(raw.sector);
    if (!raw.n_a.empty()) cfg.params.n_A = parse_int_or_auto(raw.n_a, "--n-a");
    if (!raw.a_max.empty()) cfg.params.a_max = parse_double_or_auto(raw.a_max, "--a-max");
    if (!raw.steps.empty()) cfg.steps = parse_int_or_auto(raw.steps, "--steps");
}

void write_report(const ordered_json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(out);
    if (!f) throw cgqed::config_error("cannot open output file: " + out);
    f << j.dump(2) << "\n";
}

ordered_json estimate_json(const cgqed::ResourceEstimate& est) {
    ordered_json j;
    j["volume"] = est.volume;
    j["energy"] = est.energy;
    j["shift"] = est.shift;
    j["shifted_energy"] = est.shifted_energy;
    j["epsilon"] = est.epsilon;
    j["a_max"] = est.a_max;
    j["pi_max"] = est.pi_max;
    j["n_field_qubits"] = est.n_A;
    j["fermion_qubits"] = est.fermion_qubits;
    j["gauge_qubits"] = est.gauge_qubits;
    j["total_qubits"] = est.total_qubits;
    j["kappa"] = est.kappa;
    j["x_max"] = est.x_max;
    j["source_bound"] = est.source_bound;
    j["grid_consistent"] = est.grid_consistent;
    return j;
}

int run_resources(RunConfig cfg) {
    cgqed::validate_config(cfg);
    const cgqed::ResourceEstimate est =
        cgqed::estimate_resources(cfg.params.geom, cfg.params.g, cfg.params.mass,
                                  cfg.params.wilson, cfg.energy, cfg.epsilon);

    // the step bound is evaluated at the derived cutoffs
    cgqed::HamiltonianParams at_bound = cfg.params;
    at_bound.n_A = est.n_A;
    at_bound.a_max = est.a_max;
    const double c_asym =
        cgqed::trotter_constant_asymptotic(at_bound, est.a_max, est.pi_max);
    const std::int64_t steps_asym = cgqed::trotter_step_count(c_asym, cfg.time, cfg.epsilon);

    ordered_json j;
    j["schema_version"] = "cgqed-resources-1";
    j["command"] = "resources";
    j["config"] = cgqed::config_json(cfg);
    j["estimate"] = estimate_json(est);
    ordered_json tj;
    tj["constant_asymptotic"] = c_asym;
    tj["steps_asymptotic"] = steps_asym;
    if (cfg.numeric_norms) {
        cgqed::resolve_auto(cfg);
        cgqed::validate_params(cfg.params);
        const cgqed::SpaceLayout lay = cgqed::make_layout(cfg.params);
        const double c_num = cgqed::trotter_constant_numeric(lay, cfg.params);
        tj["constant_numeric"] = c_num;
        tj["steps_numeric"] = cgqed::trotter_step_count(c_num, cfg.time, cfg.epsilon);
    }
    j["trotter"] = tj;

    const cgqed::GateCostReport gates = cgqed::gate_cost_report(cfg.params.geom, est.n_A);
    ordered_json gj;
    gj["per_step_total"] = gates.total_per_step;
    gj["entries"] = ordered_json::array();
    for (const auto& e : gates.entries) {
        ordered_json ej;
        ej["name"] = e.name;
        ej["scaling"] = e.scaling;
        ej["count"] = e.count;
        ej["additive"] = e.additive;
        gj["entries"].push_back(ej);
    }
    j["gate_costs"] = gj;

    write_report(j, cfg.out);
    return 0;
}

int run_verify(RunConfig cfg) {
    cgqed::validate_config(cfg);
    cgqed::resolve_auto(cfg);
    cgqed::validate_params(cfg.params);
    cgqed::VerifyOptions vo;
    vo.inject_fault = cfg.inject_fault;
    vo.seed = cfg.seed;
    const std::vector<cgqed::CheckResult> checks = cgqed::verify_suite(cfg.params, vo);

    ordered_json j;
    j["schema_version"] = "cgqed-verify-1";
    j["command"] = "verify";
    j["config"] = cgqed::config_json(cfg);
    j["checks"] = ordered_json::array();
    for (const auto& c : checks) {
        ordered_json cj;
        cj["name"] = c.name;
        cj["passed"] = c.passed;
        cj["value"] = c.value;
        cj["threshold"] = c.threshold;
        cj["note"] = c.note;
        j["checks"].push_back(cj);
        std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << "\n";
    }
    const bool ok = cgqed::all_passed(checks);
    j["all_passed"] = ok;
    write_report(j, cfg.out);
    return ok ? 0 : 1;
}

int run_evolve(RunConfig cfg) {
    cgqed::validate_config(cfg);
    cgqed::resolve_auto(cfg);
    cgqed::validate_params(cfg.params);
    const cgqed::SpaceLayout lay = cgqed::make_layout(cfg.params);
    if (lay.dim > kMaxSimDim) {
        throw cgqed::capability_error("state space too large to simulate; reduce the "
                                      "lattice, the sector, or the register width");
    }
    if (cfg.steps > kMaxSimSteps) {
        throw cgqed::capability_error("step count too large to simulate; pass --steps");
    }
    const cgqed::TrotterPlan plan = cgqed::build_plan(lay, cfg.params, cfg.time, cfg.steps);
    const cgqed::TrotterEvolver ev(plan);
    const Eigen::VectorXcd psi0 = cgqed::random_state(lay.dim, cfg.seed);

    const bool can_exact = lay.dim <= (std::int64_t(1) << 14) ||
                           (!lay.has_gauge() && lay.dim <= (std::int64_t(1) << 16));
    std::optional<cgqed::HamiltonianPieces> pieces;
    cgqed::SpMat h_total;
    if (can_exact) {
        pieces.emplace(cgqed::build_all(lay, cfg.params));
        h_total = cgqed::assemble_total(*pieces);
    }
    auto apply_h = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return h_total * v; };

    std::optional<cgqed::PauliSum> q_op;
    if (lay.has_fermions()) {
        const cgqed::SnakePath path = cgqed::snake_path(cfg.params.geom);
        q_op.emplace(cgqed::total_charge_strings(cfg.params.geom, path, 1.0));
    }
    auto charge_of = [&](const Eigen::VectorXcd& psi) {
        Eigen::VectorXcd img = Eigen::VectorXcd::Zero(psi.size());
        cgqed::apply_sum(*q_op, psi, img);
        return psi.dot(img).real();
    };
    auto energy_of = [&](const Eigen::VectorXcd& psi) {
        return psi.dot(h_total * psi).real();
    };

    // one record per step up to 64 records, then a fixed stride
    const int stride = std::max(1, (plan.steps + 63) / 64);

    ordered_json j;
    j["schema_version"] = "cgqed-evolve-1";
    j["command"] = "evolve";
    j["config"] = cgqed::config_json(cfg);
    ordered_json lj;
    lj["dim"] = lay.dim;
    lj["total_qubits"] = lay.total_qubits;
    lj["fermion_qubits"] = lay.n_fermion_modes;
    lj["gauge_qubits"] = lay.total_qubits - lay.n_fermion_modes;
    j["layout"] = lj;
    j["steps"] = plan.steps;
    j["dt"] = plan.dt;
    j["record_stride"] = stride;
    ordered_json pieces_j = ordered_json::array();
    for (const auto& piece : plan.pieces) {
        ordered_json pe;
        pe["name"] = piece.name;
        pe["active"] = !piece.empty;
        pieces_j.push_back(std::move(pe));
    }
    j["pieces"] = std::move(pieces_j);

    ordered_json records = ordered_json::array();
    auto make_record = [&](int step, double t, const Eigen::VectorXcd& psi,
                           const Eigen::VectorXcd* exact) {
        ordered_json r;
        r["step"] = step;
        r["time"] = t;
        if (exact) {
            r["fidelity"] = std::norm(exact->dot(psi));
            r["trotter_error"] = (psi - *exact).norm();
        } else {
            r["fidelity"] = nullptr;
            r["trotter_error"] = nullptr;
        }
        if (q_op) r["charge"] = charge_of(psi);
        if (can_exact) r["energy"] = energy_of(psi);
        records.push_back(std::move(r));
    };

    Eigen::VectorXcd psi = psi0;
    Eigen::VectorXcd exact = psi0;
    make_record(0, 0.0, psi, can_exact ? &exact : nullptr);

    if (cfg.time > 0.0) {
        int last_recorded = 0;
        for (int step = 1; step <= plan.steps; ++step) {
            psi = ev.step(std::move(psi));
            if (step % stride == 0 || step == plan.steps) {
                if (can_exact) {
                    exact = cgqed::expmv_hermitian(apply_h, exact,
                                                   plan.dt * (step - last_recorded));
                }
                make_record(step, plan.dt * step, psi, can_exact ? &exact : nullptr);
                last_recorded = step;
            }
        }
    }
    j["records"] = std::move(records);

    j["norm_drift"] = std::abs(psi.norm() - 1.0);
    if (q_op) j["charge_drift"] = std::abs(charge_of(psi) - charge_of(psi0));
    if (can_exact) {
        j["final_trotter_error"] = (psi - exact).norm();
        j["final_fidelity"] = std::norm(exact.dot(psi));
        // energy is conserved exactly along the reference evolution
        j["exact_energy_drift"] = std::abs(energy_of(exact) - energy_of(psi0));
    } else {
        j["final_trotter_error"] = nullptr;
        j["final_fidelity"] = nullptr;
    }

    write_report(j, cfg.out);
    return 0;
}

int run_emit_circuit(RunConfig cfg) {
    cgqed::validate_config(cfg);
    cgqed::resolve_auto(cfg);
    cgqed::validate_params(cfg.params);
    const cgqed::SpaceLayout lay = cgqed::make_layout(cfg.params);
    if (lay.dim > kMaxSimDim) {
        // the emitter materializes diagonal phase tables, so simulability caps apply
        throw cgqed::capability_error("state space too large to emit a concrete circuit; "
                                      "reduce the lattice, the sector, or the register width");
    }
    if (cfg.steps > kMaxSimSteps) {
        throw cgqed::capability_error("step count too large to emit; pass --steps");
    }
    const cgqed::TrotterPlan plan = cgqed::build_plan(lay, cfg.params, cfg.time, cfg.steps);
    const std::vector<cgqed::CircuitOp> ops = cgqed::emit_circuit(plan);
    const cgqed::StructuralCounts counts = cgqed::structural_counts(plan);
    if (int(ops.size()) != counts.total() * plan.steps) {
        throw cgqed::internal_error("emitted op count disagrees with the structural count");
    }
    if (cfg.out.empty()) {
        cgqed::write_circuit_jsonl(plan, ops, std::cout);
    } else {
        std::ofstream f(cfg.out);
        if (!f) throw cgqed::config_error("cannot open output file: " + cfg.out);
        cgqed::write_circuit_jsonl(plan, ops, f);
    }
    return 0;
}

std::optional<std::string> config_path_from_argv(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulator and resource estimator for lattice gauge fields coupled "
                 "to Wilson fermions in a fixed (Coulomb-like) gauge"};
    app.require_subcommand(1);

    RunConfig cfg = default_run_config();
    try {
        // the file overlays the defaults; explicit flags then overlay the file
        if (auto path = config_path_from_argv(argc, argv)) {
            cgqed::overlay_config_file(cfg, *path);
        }
    } catch (const cgqed::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    RawOptions raw_res, raw_ver, raw_evo, raw_cir;
    CLI::App* res = app.add_subcommand("resources", "register and step-count bounds");
    add_common_options(res, cfg, raw_res);
    res->add_flag("--numeric-norms", cfg.numeric_norms,
                  "also compute the exact commutator-norm step constant");
    CLI::App* ver = app.add_subcommand("verify", "structural checks on the Hamiltonian");
    add_common_options(ver, cfg, raw_ver);
    ver->add_flag("--inject-fault", cfg.inject_fault,
                  "corrupt the kinetic kernel (the positivity check must then fail)");
    CLI::App* evo = app.add_subcommand("evolve", "product-formula time evolution");
    add_common_options(evo, cfg, raw_evo);
    CLI::App* cir = app.add_subcommand("emit-circuit", "print the circuit as JSON lines");
    add_common_options(cir, cfg, raw_cir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (res->parsed()) {
            fold_raw_options(raw_res, cfg);
            return run_resources(cfg);
        }
        if (ver->parsed()) {
            fold_raw_options(raw_ver, cfg);
            return run_verify(cfg);
        }
        if (evo->parsed()) {
            fold_raw_options(raw_evo, cfg);
            return run_evolve(cfg);
        }
        fold_raw_options(raw_cir, cfg);
        return run_emit_circuit(cfg);
    } catch (const cgqed::capability_error& e) {
        std::cerr << "capability error: " << e.what() << "\n";
        return 3;
    } catch (const cgqed::internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    }
}
