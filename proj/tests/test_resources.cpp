#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "cgqed/errors.hpp"
#include "cgqed/hamiltonian.hpp"
#include "cgqed/krylov.hpp"
#include "cgqed/resources.hpp"
#include "test_util.hpp"

using namespace cgqed;

namespace {

struct BoundRow {
    double e_prime;
    int volume;
    double g;
    double epsilon;
    double a_max;
    double pi_max;
    int n_a;
    int qubits;
};

// hand evaluations of the closed-form register bounds, frozen independently
const BoundRow kBoundTable[] = {
    {10, 8, 1, 0.1, 22.25579818415636, 69.2820323027551, 10, 272},
    {10, 8, 0, 0.1, 22.053155816871687, 69.2820323027551, 10, 272},
    {5, 1, 0.5, 0.3, 1.6168797268295378, 10.0, 4, 16},
    {100, 27, 1, 0.03, 351.3195058815448, 734.8469228349534, 18, 1566},
    {1, 1, 0, 0.5, 0.5513288954217921, 3.4641016151377544, 1, 7},
    {50, 64, 2, 0.1, 280.5739468419001, 438.1780460041329, 17, 3520},
    {0.5, 2, 0.25, 0.9, 0.5378519587354507, 2.581988897471611, 1, 14},
    {20, 8, 3, 0.01, 99.23263815169402, 309.83866769659335, 15, 392},
    {38.84441020371192, 2, 0.3, 0.1, 13.71459542928002, 68.27392785277137, 10, 68},
    {7, 4, 0.7, 0.2, 7.411641478393826, 28.982753492378876, 8, 112},
    {3.5, 12, 1.3, 0.05, 26.21317554420422, 70.9929573971954, 11, 444},
    {250, 125, 0.1, 0.02, 2436.6791553347907, 3061.8621784789725, 23, 9125},
    {12, 6, 2.2, 0.15, 15.88831119307397, 53.665631459994955, 10, 204},
    {0.9, 3, 0.05, 0.7, 1.109523056375058, 4.81070235442364, 2, 30},
    {60, 16, 0.6, 0.08, 107.80475814156242, 268.32815729997475, 15, 784},
    {15, 9, 1.7, 0.35, 16.2987332309057, 48.10702354423639, 9, 279},
    {8, 18, 0.9, 0.12, 35.70559982988579, 84.8528137423857, 11, 666},
    {33, 5, 2.8, 0.22, 18.671223348349702, 67.08203932499369, 10, 170},
    {4, 32, 0.4, 0.45, 21.07851338339075, 41.31182235954578, 10, 1088},
    {75, 10, 1.1, 0.06, 94.16266117436977, 273.8612787525831, 15, 490},
};

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("register bounds reproduce twenty frozen evaluations") {
    for (const BoundRow& row : kBoundTable) {
        CAPTURE(row.e_prime);
        CAPTURE(row.volume);
        CHECK(rel_err(a_max_bound(row.e_prime, row.volume, row.g, row.epsilon), row.a_max) <=
              1e-12);
        CHECK(rel_err(pi_max_bound(row.e_prime, row.volume, row.epsilon), row.pi_max) <= 1e-12);
        CHECK(n_A_bound(row.e_prime, row.volume, row.g, row.epsilon) == row.n_a);
        CHECK(3 * row.n_a * row.volume + 4 * row.volume == row.qubits);
    }
}

TEST_CASE("bounds respond monotonically to energy and precision") {
    std::mt19937 rng(31u);
    std::uniform_real_distribution<double> ue(0.5, 200.0);
    std::uniform_real_distribution<double> ueps(0.01, 0.9);
    std::uniform_real_distribution<double> ug(0.0, 3.0);
    std::uniform_int_distribution<int> uv(1, 216);
    for (int trial = 0; trial < 200; ++trial) {
        const double e = ue(rng), eps = ueps(rng), g = ug(rng);
        const int v = uv(rng);
        CHECK(a_max_bound(e * 1.5, v, g, eps) >= a_max_bound(e, v, g, eps));
        CHECK(pi_max_bound(e * 1.5, v, eps) >= pi_max_bound(e, v, eps));
        CHECK(a_max_bound(e, v, g, eps) <= a_max_bound(e, v, g, eps * 0.5));
        CHECK(pi_max_bound(e, v, eps) <= pi_max_bound(e, v, eps * 0.5));
        CHECK(n_A_bound(e, v, g, eps) >= 1);
        CHECK(n_A_bound(e, v, g, eps * 0.5) >= n_A_bound(e, v, g, eps));
    }

    SUBCASE("domain validation") {
        CHECK_THROWS_AS(a_max_bound(10.0, 8, 1.0, 0.0), domain_error);
        CHECK_THROWS_AS(a_max_bound(10.0, 8, 1.0, 1.0), domain_error);
        CHECK_THROWS_AS(a_max_bound(-1.0, 8, 1.0, 0.1), domain_error);
        CHECK_THROWS_AS(a_max_bound(10.0, 0, 1.0, 0.1), domain_error);
        CHECK_THROWS_AS(pi_max_bound(10.0, 8, -0.1), domain_error);
        CHECK_THROWS_AS(n_A_bound(10.0, 8, -1.0, 0.1), domain_error);
    }
}

TEST_CASE("estimate wires the shift into every bound") {
    const LatticeGeometry geom = make_geometry(2, 1, 1);
    const double g = 0.3, mass = 1.0, wilson = 1.0, energy = 10.0, eps = 0.1;
    const ResourceEstimate est = estimate_resources(geom, g, mass, wilson, energy, eps);

    const double shift = shift_constant(geom.volume(), mass, wilson);
    CHECK(est.volume == 2);
    CHECK(est.energy == energy);
    CHECK(est.shift == doctest::Approx(shift).epsilon(1e-14));
    CHECK(est.shifted_energy == doctest::Approx(energy + shift).epsilon(1e-14));
    CHECK(est.shifted_energy == doctest::Approx(38.84441020371192).epsilon(1e-13));

    const double e_prime = energy + shift;
    CHECK(est.a_max == doctest::Approx(a_max_bound(e_prime, 2, g, eps)).epsilon(1e-14));
    CHECK(est.pi_max == doctest::Approx(pi_max_bound(e_prime, 2, eps)).epsilon(1e-14));
    CHECK(est.n_A == n_A_bound(e_prime, 2, g, eps));
    CHECK(est.n_A == 10);
    CHECK(est.fermion_qubits == 8);
    CHECK(est.gauge_qubits == 3 * est.n_A * 2);
    CHECK(est.total_qubits == 68);
    CHECK(est.kappa == doctest::Approx(chebyshev_kappa(2, eps)).epsilon(1e-14));
    CHECK(est.source_bound == doctest::Approx(source_field_bound(g, 2)).epsilon(1e-14));
    CHECK(est.grid_consistent);
}

TEST_CASE("Chebyshev threshold helpers") {
    CHECK(chebyshev_kappa(8, 0.1) == doctest::Approx(std::sqrt(240.0)).epsilon(1e-14));
    CHECK(chebyshev_kappa(1, 0.3) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
    CHECK_THROWS_AS(chebyshev_kappa(0, 0.1), domain_error);
    CHECK_THROWS_AS(chebyshev_kappa(8, 0.0), domain_error);

    // (kappa + 1) sqrt(E' / (2 sin^2(pi/L)))
    const double kappa = chebyshev_kappa(8, 0.1);
    CHECK(field_threshold(10.0, 8, 2, 0.1) ==
          doctest::Approx((kappa + 1.0) * std::sqrt(10.0 / 2.0)).epsilon(1e-13));
    const double s4 = std::sin(3.14159265358979323846 / 4.0);
    CHECK(field_threshold(10.0, 8, 4, 0.1) ==
          doctest::Approx((kappa + 1.0) * std::sqrt(10.0 / (2.0 * s4 * s4))).epsilon(1e-13));
    CHECK_THROWS_AS(field_threshold(10.0, 8, 1, 0.1), domain_error);

    CHECK(source_field_bound(1.0, 4) ==
          doctest::Approx(16.0 / (2.0 * 3.14159265358979323846 *
                                  3.14159265358979323846)).epsilon(1e-13));
    CHECK(source_field_bound(0.0, 4) == 0.0);
}

TEST_CASE("Chebyshev verifier computes exact tail statistics") {
    Eigen::VectorXcd state(4);
    state << std::sqrt(0.5), std::sqrt(0.3), std::sqrt(0.2), 0.0;
    Eigen::VectorXd obs(4);
    obs << 0.0, 1.0, 2.0, 5.0;

    const ChebyshevReport rep = chebyshev_verifier(state, obs, 2.0);
    CHECK(rep.mean == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(rep.std_dev == doctest::Approx(std::sqrt(0.61)).epsilon(1e-13));
    CHECK(rep.threshold == doctest::Approx(2.0 * std::sqrt(0.61)).epsilon(1e-13));
    CHECK(rep.tail_probability == 0.0);
    CHECK(rep.bound == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(rep.satisfied);

    SUBCASE("a tight threshold still satisfies the inequality") {
        const ChebyshevReport tight = chebyshev_verifier(state, obs, 0.5);
        CHECK(tight.tail_probability == doctest::Approx(0.7).epsilon(1e-13));
        CHECK(tight.bound == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(tight.satisfied);  // Chebyshev is an identity-level bound
    }

    SUBCASE("input validation") {
        Eigen::VectorXcd unnorm = 2.0 * state;
        CHECK_THROWS_AS(chebyshev_verifier(unnorm, obs, 2.0), domain_error);
        CHECK_THROWS_AS(chebyshev_verifier(state, obs, 0.0), domain_error);
        CHECK_THROWS_AS(chebyshev_verifier(state, obs, -1.0), domain_error);
    }
}

TEST_CASE("truncation fidelity is the retained window weight") {
    Eigen::VectorXcd state(4);
    state << std::sqrt(0.5), std::sqrt(0.3), std::sqrt(0.2), 0.0;
    Eigen::VectorXd obs(4);
    obs << 0.0, 1.0, 2.0, 5.0;

    CHECK(truncation_fidelity(state, obs, 5.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(truncation_fidelity(state, obs, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(truncation_fidelity(state, obs, 1.5) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(truncation_fidelity(state, obs, 0.5) == doctest::Approx(0.5).epsilon(1e-14));

    // widening the window never loses weight
    double prev = 0.0;
    for (double w : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
        const double f = truncation_fidelity(state, obs, w);
        CHECK(f >= prev - 1e-15);
        prev = f;
    }

    CHECK_THROWS_AS(truncation_fidelity(state, obs, 6.0), domain_error);
    CHECK_THROWS_AS(truncation_fidelity(state, obs, -1.0), domain_error);
}

TEST_CASE("product-formula step count") {
    CHECK(trotter_step_count(10.0, 2.0, 0.5) == 80);
    CHECK(trotter_step_count(1.0, 1.0, 0.3) == 4);  // ceil(3.33)
    CHECK(trotter_step_count(1e-12, 1.0, 0.5) == 1);
    CHECK(trotter_step_count(0.0, 5.0, 0.5) == 1);
    CHECK_THROWS_AS(trotter_step_count(1.0, -1.0, 0.5), domain_error);
    CHECK_THROWS_AS(trotter_step_count(1.0, 1.0, 0.0), domain_error);
}

TEST_CASE("asymptotic step constant grows with the register windows") {
    HamiltonianParams p;
    p.geom = make_geometry(2, 2, 2);
    p.g = 0.5;
    p.mass = 1.0;
    p.wilson = 1.0;
    const double base = trotter_constant_asymptotic(p, 10.0, 20.0);
    CHECK(base > 0.0);
    CHECK(trotter_constant_asymptotic(p, 20.0, 20.0) > base);
    CHECK(trotter_constant_asymptotic(p, 10.0, 40.0) > base);
}

TEST_CASE("numeric step constant equals the commutator norm") {
    // gauge-only: exactly two applied pieces, so the constant is one norm
    HamiltonianParams p;
    p.geom = make_geometry(2, 1, 1);
    p.sector = Sector::GaugeOnly;
    p.n_A = 2;
    p.a_max = 1.0;
    const SpaceLayout lay = make_layout(p);

    const double got = trotter_constant_numeric(lay, p);
    CHECK(got > 0.0);

    // independent route: Lanczos extremes of the Hermitian i [H_Pi, H_A]
    const SpMat h_pi = build_H_Pi(lay, p).to_sparse();
    const SpMat h_a = build_H_A(lay, p).to_sparse();
    const SpMat k = SpMat(h_pi * h_a) - SpMat(h_a * h_pi);
    const cplx ii(0.0, 1.0);
    const auto apply = [&](const Eigen::VectorXcd& v) {
        return Eigen::VectorXcd(ii * (k * v));
    };
    const auto [lo, hi] = extreme_eigenvalues(apply, lay.dim, 140, 0xabcdefULL);
    const double want = std::max(std::abs(lo), std::abs(hi));
    CHECK(got == doctest::Approx(want).epsilon(1e-6));

    SUBCASE("two-level registers make the pieces commute") {
        // squared fields are constants there, so the cross terms of the two
        // pieces touch disjoint registers and the commutator vanishes
        p.n_A = 1;
        const SpaceLayout tiny = make_layout(p);
        CHECK(trotter_constant_numeric(tiny, p) <= 1e-12);
    }
}

TEST_CASE("structural gate-cost report") {
    const LatticeGeometry geom = make_geometry(2, 2, 2);
    const int n_a = 4;
    const GateCostReport rep = gate_cost_report(geom, n_a);
    REQUIRE(rep.entries.size() == 11);

    std::set<std::string> names;
    double additive = 0.0;
    for (const auto& e : rep.entries) {
        names.insert(e.name);
        CHECK(e.count >= 0.0);
        if (e.additive) additive += e.count;
    }
    CHECK(names.size() == rep.entries.size());
    CHECK(rep.total_per_step == doctest::Approx(additive).epsilon(1e-14));

    auto count_of = [&](const std::string& name) -> double {
        for (const auto& e : rep.entries)
            if (e.name == name) return e.count;
        REQUIRE_MESSAGE(false, "missing entry " << name);
        return 0.0;
    };
    const double v = 8.0;
    CHECK(count_of("conjugate_kernel_phase") == doctest::Approx(v * v));
    CHECK(count_of("fourier_total") == doctest::Approx(6.0 * v * n_a * n_a));
    CHECK(count_of("magnetic_phase") == doctest::Approx(v));
    CHECK(count_of("fermion_hopping") == doctest::Approx(std::pow(v, 5.0 / 3.0)));
    CHECK(count_of("coulomb_pair_phases") == doctest::Approx(v * v));
    CHECK(count_of("jw_string_worst") == doctest::Approx(4.0));

    CHECK_THROWS_AS(gate_cost_report(geom, 0), domain_error);
}
