#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cgqed/hamiltonian.hpp"
#include "cgqed/trotter.hpp"

namespace cgqed {

// Closed-form register bounds for total energy E' = E + shift and target
// precision epsilon (volumes V = geom.volume()).
double a_max_bound(double e_prime, int volume, double g, double epsilon);
double pi_max_bound(double e_prime, int volume, double epsilon);
int n_A_bound(double e_prime, int volume, double g, double epsilon);  // >= 1

double chebyshev_kappa(int volume, double epsilon);  // sqrt(3 V / eps)
// Field-amplitude threshold (kappa + 1) sqrt(E' / (2 sin^2(pi / L))).
double field_threshold(double e_prime, int volume, int max_extent, double epsilon);
// Static-source bound on the longitudinal field, g L^2 / (2 pi^2).
double source_field_bound(double g, int max_extent);

struct ResourceEstimate {
    int volume = 0;
    double energy = 0.0;
    double shift = 0.0;
    double shifted_energy = 0.0;
    double epsilon = 0.0;
    double a_max = 0.0;
    double pi_max = 0.0;
    int n_A = 0;
    int fermion_qubits = 0;
    int gauge_qubits = 0;
    int total_qubits = 0;
    double kappa = 0.0;
    double x_max = 0.0;
    double source_bound = 0.0;
    bool grid_consistent = false;  // (2 a_max / delta_a) + 1 <= 2^n_A
};

ResourceEstimate estimate_resources(const LatticeGeometry& geom, double g, double mass,
                                    double wilson, double energy, double epsilon);

// First-order product-formula step constant: steps = ceil(C t^2 / epsilon).
double trotter_constant_asymptotic(const HamiltonianParams& p, double a_max, double pi_max);
// Sum of spectral norms of commutators between the applied Hermitian pieces
// (the two on-site half-classes count as one joint piece).  Requires a space
// small enough to materialize (throws capability_error otherwise).
double trotter_constant_numeric(const SpaceLayout& lay, const HamiltonianParams& p);
std::int64_t trotter_step_count(double constant, double t, double epsilon);

struct GateCostEntry {
    std::string name;
    std::string scaling;
    double count = 0.0;
    bool additive = false;  // contributes to total_per_step
};

struct GateCostReport {
    std::vector<GateCostEntry> entries;
    double total_per_step = 0.0;
};

GateCostReport gate_cost_report(const LatticeGeometry& geom, int n_A);

// Per-step operation counts of the emitted circuit.
struct StructuralCounts {
    int fourier_blocks = 0;
    int diagonal_phases = 0;
    int pauli_exponentials = 0;
    int total() const { return fourier_blocks + diagonal_phases + pauli_exponentials; }
};

StructuralCounts structural_counts(const TrotterPlan& plan);

struct ChebyshevReport {
    double mean = 0.0;
    double std_dev = 0.0;
    double threshold = 0.0;        // kappa * std_dev
    double tail_probability = 0.0; // P(|O - mean| > threshold)
    double bound = 0.0;            // 1 / kappa^2
    bool satisfied = false;
};

// Exact tail statistics of a diagonal observable in a normalized state;
// throws domain_error for unnormalized states or kappa <= 0.
ChebyshevReport chebyshev_verifier(const Eigen::VectorXcd& state,
                                   const Eigen::VectorXd& observable, double kappa);

// Probability weight retained when the observable is clipped to |O| <= window;
// throws domain_error when the window lies outside the observable's range.
double truncation_fidelity(const Eigen::VectorXcd& state, const Eigen::VectorXd& observable,
                           double window);

}  // namespace cgqed
