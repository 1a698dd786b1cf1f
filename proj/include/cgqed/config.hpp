#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "cgqed/hamiltonian.hpp"

namespace cgqed {

// Full description of one run: model parameters plus run-level knobs.
// n_A, a_max and steps support an "auto" sentinel (-1): they are then derived
// from the closed-form register bounds / the commutator step bound.
struct RunConfig {
    HamiltonianParams params;
    double energy = 10.0;   // target total-energy scale E
    double epsilon = 0.1;   // truncation / step-count precision target
    double time = 0.5;      // evolution time
    int steps = -1;         // product-formula steps, -1 = from the step bound
    std::uint64_t seed = 20240817;
    bool numeric_norms = false;  // resources: also compute the commutator sum
    bool inject_fault = false;   // verify: corrupt the kinetic kernel
    std::string out;             // report path, "" = stdout
};

// Reads a JSON config file and overlays it on the defaults.  Unknown keys and
// malformed values raise config_error.
RunConfig load_config(const std::string& path);
// Same, but overlays onto an existing configuration.
void overlay_config_file(RunConfig& cfg, const std::string& path);
void apply_json(RunConfig& cfg, const nlohmann::ordered_json& j);

// Run-level validation (epsilon in (0,1), positive energy/time, step sanity).
// Model-parameter validation happens in validate_params.
void validate_config(const RunConfig& cfg);

// Replaces the -1 sentinels on n_A / a_max / steps with values derived from
// the register bounds at (energy + shift, epsilon).
void resolve_auto(RunConfig& cfg);

// Echo of the effective configuration, embedded in every report.
nlohmann::ordered_json config_json(const RunConfig& cfg);

}  // namespace cgqed
