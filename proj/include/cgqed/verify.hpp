#pragma once

#include <string>
#include <vector>

#include "cgqed/hamiltonian.hpp"

namespace cgqed {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
};

struct VerifyOptions {
    bool inject_fault = false;  // corrupts the kinetic kernel so psd_kinetic fails
    std::uint64_t seed = 20240817;
};

// Structural checks on the assembled Hamiltonian: hermiticity, kinetic-term
// positivity, transversality of the magnetic energy, the free-fermion
// dispersion, dual kinetic constructions, the completed-square identity,
// charge conservation, the Chebyshev truncation certificate, and the
// product-formula error slope.  Checks that do not apply to the configured
// sector or size are reported with a "skipped" note.
std::vector<CheckResult> verify_suite(const HamiltonianParams& p, const VerifyOptions& opt);

bool all_passed(const std::vector<CheckResult>& checks);

}  // namespace cgqed
