#include "cgqed/resources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cgqed/errors.hpp"
#include "cgqed/krylov.hpp"

namespace cgqed {

namespace {
constexpr double kPi = std::numbers::pi;

void check_bound_args(double e_prime, int volume, double epsilon) {
    if (!(e_prime > 0.0)) throw domain_error("shifted energy must be positive");
    if (volume < 1) throw domain_error("volume must be positive");
    if (!(epsilon > 0.0) || epsilon >= 1.0) throw domain_error("epsilon must lie in (0, 1)");
}
}  // namespace

double a_max_bound(double e_prime, int volume, double g, double epsilon) {
    check_bound_args(e_prime, volume, epsilon);
    if (g < 0.0) throw domain_error("coupling must be nonnegative");
    const double v = volume;
    return std::sqrt(3.0 * e_prime * std::pow(v, 5.0 / 3.0) / (2.0 * kPi * kPi * epsilon)) +
           g * std::pow(v, 2.0 / 3.0) / (2.0 * kPi * kPi);
}

double pi_max_bound(double e_prime, int volume, double epsilon) {
    check_bound_args(e_prime, volume, epsilon);
    return std::sqrt(6.0 * e_prime * volume / epsilon);
}

int n_A_bound(double e_prime, int volume, double g, double epsilon) {
    check_bound_args(e_prime, volume, epsilon);
    if (g < 0.0) throw domain_error("coupling must be nonnegative");
    const double v = volume;
    const double arg =
        6.0 * e_prime * std::pow(v, 4.0 / 3.0) / (kPi * kPi * epsilon) +
        std::sqrt(6.0) * g * std::sqrt(e_prime) * std::pow(v, 5.0 / 6.0) /
            (kPi * kPi * kPi * std::sqrt(epsilon));
    const int n = int(std::ceil(std::log2(arg)));
    return std::max(1, n);
}

double chebyshev_kappa(int volume, double epsilon) {
    if (volume < 1) throw domain_error("volume must be positive");
    if (!(epsilon > 0.0)) throw domain_error("epsilon must be positive");
    return std::sqrt(3.0 * volume / epsilon);
}

double field_threshold(double e_prime, int volume, int max_extent, double epsilon) {
    if (max_extent < 2) throw domain_error("field threshold needs an extent >= 2");
    const double kappa = chebyshev_kappa(volume, epsilon);
    const double s = std::sin(kPi / max_extent);
    return (kappa + 1.0) * std::sqrt(e_prime / (2.0 * s * s));
}

double source_field_bound(double g, int max_extent) {
    return g * double(max_extent) * double(max_extent) / (2.0 * kPi * kPi);
}

ResourceEstimate estimate_resources(const LatticeGeometry& geom, double g, double mass,
                                    double wilson, double energy, double epsilon) {
    if (energy < 0.0) throw domain_error("energy must be nonnegative");
    ResourceEstimate est;
    est.volume = geom.volume();
    est.energy = energy;
    est.shift = shift_constant(est.volume, mass, wilson);
    est.shifted_energy = energy + est.shift;
    est.epsilon = epsilon;
    est.a_max = a_max_bound(est.shifted_energy, est.volume, g, epsilon);
    est.pi_max = pi_max_bound(est.shifted_energy, est.volume, epsilon);
    est.n_A = n_A_bound(est.shifted_energy, est.volume, g, epsilon);
    est.fermion_qubits = 4 * est.volume;
    est.gauge_qubits = 3 * est.volume * est.n_A;
    est.total_qubits = est.fermion_qubits + est.gauge_qubits;
    est.kappa = chebyshev_kappa(est.volume, epsilon);
    const int max_extent = std::max({geom.dims[0], geom.dims[1], geom.dims[2]});
    est.x_max = max_extent >= 2
                    ? field_threshold(est.shifted_energy, est.volume, max_extent, epsilon)
                    : 0.0;
    est.source_bound = source_field_bound(g, max_extent);
    // levels needed at spacing pi / pi_max versus levels available
    est.grid_consistent =
        2.0 * est.a_max * est.pi_max / kPi + 1.0 <= double(std::int64_t(1) << est.n_A);
    return est;
}

double trotter_constant_asymptotic(const HamiltonianParams& p, double a_max, double pi_max) {
    const double v = p.geom.volume();
    const double mr = 1.0 + p.mass + p.wilson;
    return p.g * p.g * v * v * mr + p.g * p.g * p.g * v * v * a_max +
           p.g * v * a_max * mr + p.g * v * pi_max + std::pow(v, 5.0 / 3.0) * pi_max * a_max;
}

double trotter_constant_numeric(const SpaceLayout& lay, const HamiltonianParams& p) {
    if (lay.dim > kSparseCap)
        throw capability_error("numeric commutator norms need dim <= 2^14");
    const TrotterPlan plan = build_plan(lay, p, 1.0, 1);

    // applied Hermitian pieces: s12 + s21 merged
    std::vector<SpMat> mats;
    SpMat onsite_half;
    bool have_half = false;
    for (const auto& piece : plan.pieces) {
        if (piece.empty) continue;
        SpMat m = materialize_piece(piece, lay, p).to_sparse();
        if (piece.kind == TrotterKind::OnsiteHalf) {
            if (!have_half) {
                onsite_half = m;
                have_half = true;
            } else {
                onsite_half += m;
                mats.push_back(onsite_half);
            }
        } else {
            mats.push_back(std::move(m));
        }
    }

    double total = 0.0;
    for (size_t i = 0; i < mats.size(); ++i) {
        for (size_t j = i + 1; j < mats.size(); ++j) {
            SpMat k = SpMat(mats[i] * mats[j]) - SpMat(mats[j] * mats[i]);
            k.prune([](auto, auto, const cplx& v) { return std::abs(v) > 1e-14; });
            if (k.nonZeros() == 0) continue;
            // quick zero screen on random vectors
            bool nonzero = false;
            for (int r = 0; r < 2 && !nonzero; ++r) {
                const Eigen::VectorXcd v = random_state(lay.dim, 77 + 13 * r);
                if ((k * v).norm() > 1e-13) nonzero = true;
            }
            if (!nonzero) continue;
            const SpMat kadj = SpMat(k.adjoint());
            total += spectral_norm(
                [&k](const Eigen::VectorXcd& v) { return k * v; },
                [&kadj](const Eigen::VectorXcd& v) { return kadj * v; }, lay.dim, 90,
                0x9e3779b97f4a7c15ULL + i * 131 + j);
        }
    }
    return total;
}

std::int64_t trotter_step_count(double constant, double t, double epsilon) {
    if (!(epsilon > 0.0)) throw domain_error("epsilon must be positive");
    if (t < 0.0) throw domain_error("time must be nonnegative");
    const double raw = constant * t * t / epsilon;
    return std::max<std::int64_t>(1, std::int64_t(std::ceil(raw)));
}

GateCostReport gate_cost_report(const LatticeGeometry& geom, int n_A) {
    if (n_A < 1) throw domain_error("n_A must be positive");
    const double v = geom.volume();
    const double two_n = double(std::int64_t(1) << std::min(n_A, 40));
    const int max_extent = std::max({geom.dims[0], geom.dims[1], geom.dims[2]});
    GateCostReport report;
    report.entries = {
        {"conjugate_kernel_phase", "V^2", v * v, true},
        {"fourier_per_register", "n_A^2", double(n_A) * n_A, false},
        {"fourier_total", "6 V n_A^2", 6.0 * v * n_A * n_A, true},
        {"magnetic_phase", "V", v, true},
        {"field_local_rotations_per_site", "2^n_A", two_n, false},
        {"field_local_rotations_total", "V 2^n_A", v * two_n, true},
        {"current_coupling", "V 2^n_A", v * two_n, true},
        {"coulomb_pair_phases", "V^2", v * v, true},
        {"fermion_hopping", "V^{5/3}", std::pow(v, 5.0 / 3.0), true},
        {"jw_string_onsite", "1", 1.0, false},
        {"jw_string_worst", "L_max^2", double(max_extent) * max_extent, false},
    };
    for (const auto& e : report.entries)
        if (e.additive) report.total_per_step += e.count;
    return report;
}

StructuralCounts structural_counts(const TrotterPlan& plan) {
    StructuralCounts counts;
    for (const auto& piece : plan.pieces) {
        switch (piece.kind) {
            case TrotterKind::Conjugate:
                counts.fourier_blocks += 2;
                counts.diagonal_phases += 1;
                break;
            case TrotterKind::GaugeDiagonal:
                counts.diagonal_phases += 1;
                break;
            case TrotterKind::FullDiagonal:
                if (!piece.empty) counts.diagonal_phases += 1;
                break;
            case TrotterKind::HermitianPairs:
                counts.pauli_exponentials += int(piece.terms.size());
                break;
            case TrotterKind::OnsiteHalf:
                // merged pairs are emitted on the lowering half only
                if (piece.id.kind == PieceKind::OnsiteS12)
                    counts.pauli_exponentials += int(piece.terms.size());
                break;
        }
    }
    return counts;
}

ChebyshevReport chebyshev_verifier(const Eigen::VectorXcd& state,
                                   const Eigen::VectorXd& observable, double kappa) {
    if (state.size() != observable.size())
        throw domain_error("state and observable dimensions differ");
    if (std::abs(state.norm() - 1.0) > 1e-8) throw domain_error("state is not normalized");
    if (!(kappa > 0.0)) throw domain_error("kappa must be positive");
    ChebyshevReport rep;
    double mean = 0.0, second = 0.0;
    for (Eigen::Index i = 0; i < state.size(); ++i) {
        const double w = std::norm(state[i]);
        mean += w * observable[i];
        second += w * observable[i] * observable[i];
    }
    rep.mean = mean;
    rep.std_dev = std::sqrt(std::max(0.0, second - mean * mean));
    rep.threshold = kappa * rep.std_dev;
    double tail = 0.0;
    for (Eigen::Index i = 0; i < state.size(); ++i)
        if (std::abs(observable[i] - mean) > rep.threshold) tail += std::norm(state[i]);
    rep.tail_probability = tail;
    rep.bound = 1.0 / (kappa * kappa);
    rep.satisfied = rep.tail_probability <= rep.bound + 1e-12;
    return rep;
}

double truncation_fidelity(const Eigen::VectorXcd& state, const Eigen::VectorXd& observable,
                           double window) {
    if (state.size() != observable.size())
        throw domain_error("state and observable dimensions differ");
    if (window < 0.0) throw domain_error("window must be nonnegative");
    if (window > observable.cwiseAbs().maxCoeff())
        throw domain_error("window lies outside the observable range");
    double kept = 0.0;
    for (Eigen::Index i = 0; i < state.size(); ++i)
        if (std::abs(observable[i]) <= window) kept += std::norm(state[i]);
    return kept;
}

}  // namespace cgqed
