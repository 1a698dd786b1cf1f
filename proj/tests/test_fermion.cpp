#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <complex>
#include <random>

#include "cgqed/errors.hpp"
#include "cgqed/hamiltonian.hpp"
#include "cgqed/lattice.hpp"
#include "cgqed/pauli.hpp"
#include "test_util.hpp"

using namespace cgqed;
using cplx_t = std::complex<double>;

namespace {

PauliString letter(int qubit, POp op, cplx_t coeff = {1.0, 0.0}) {
    PauliString s;
    s.coeff = coeff;
    s.factors.push_back({qubit, op});
    return s;
}

double dense_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("single-letter products close under multiplication") {
    const POp ops[] = {POp::X, POp::Y, POp::Z, POp::Raise, POp::Lower, POp::Occ, POp::Empty};
    std::mt19937 rng(11u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (POp a : ops) {
        for (POp b : ops) {
            const PauliString sa = letter(0, a, {u(rng), u(rng)});
            const PauliString sb = letter(0, b, {u(rng), u(rng)});
            const PauliString prod = multiply(sa, sb);
            CHECK(dense_diff(dense(prod, 1), dense(sa, 1) * dense(sb, 1)) <= 1e-14);
        }
    }

    SUBCASE("multi-qubit strings multiply factor-wise") {
        std::uniform_int_distribution<int> pick(0, 6);
        for (int trial = 0; trial < 200; ++trial) {
            PauliString sa, sb;
            sa.coeff = {u(rng), u(rng)};
            sb.coeff = {u(rng), u(rng)};
            for (int q = 0; q < 4; ++q) {
                if (rng() & 1) sa.factors.push_back({q, ops[pick(rng)]});
                if (rng() & 1) sb.factors.push_back({q, ops[pick(rng)]});
            }
            CHECK(dense_diff(dense(multiply(sa, sb), 4), dense(sa, 4) * dense(sb, 4)) <= 1e-13);
        }
    }
}

TEST_CASE("adjoint and simplify behave like matrix operations") {
    std::mt19937 rng(23u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 6);
    const POp ops[] = {POp::X, POp::Y, POp::Z, POp::Raise, POp::Lower, POp::Occ, POp::Empty};

    PauliSum sum;
    for (int t = 0; t < 6; ++t) {
        PauliString s;
        s.coeff = {u(rng), u(rng)};
        for (int q = 0; q < 3; ++q)
            if (rng() & 1) s.factors.push_back({q, ops[pick(rng)]});
        sum.push_back(std::move(s));
    }
    CHECK(dense_diff(dense(adjoint(sum), 3), dense(sum, 3).adjoint()) <= 1e-13);

    // x - x simplifies away entirely
    PauliSum cancel = add(sum, scale(sum, {-1.0, 0.0}));
    CHECK(simplify(cancel).empty());

    // self-commutator is symbolically empty
    CHECK(commutator(sum, sum).empty());
    CHECK(max_abs_coeff(commutator(sum, sum)) == 0.0);
}

TEST_CASE("commutator is symbolically exact") {
    // disjoint supports commute regardless of letters
    const PauliString a = letter(0, POp::X);
    const PauliString b = letter(1, POp::Raise);
    CHECK(commutator({a}, {b}).empty());

    // same-qubit X and Z anticommute: [X, Z] = -2iY
    const PauliSum c = commutator({letter(0, POp::X)}, {letter(0, POp::Z)});
    REQUIRE(c.size() == 1);
    CHECK(c[0].factors.size() == 1);
    CHECK(c[0].factors[0].op == POp::Y);
    CHECK(std::abs(c[0].coeff - cplx_t(0.0, -2.0)) <= 1e-15);
}

TEST_CASE("apply_string matches the dense matrix") {
    std::mt19937 rng(37u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 6);
    const POp ops[] = {POp::X, POp::Y, POp::Z, POp::Raise, POp::Lower, POp::Occ, POp::Empty};
    const int n = 8;
    const std::int64_t dim = 1 << n;

    for (int trial = 0; trial < 30; ++trial) {
        PauliString s;
        s.coeff = {u(rng), u(rng)};
        for (int q = 0; q < n; ++q)
            if (rng() & 1) s.factors.push_back({q, ops[pick(rng)]});
        const Eigen::VectorXcd v = testutil::random_unit_vector(dim, 1000 + trial);
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
        apply_string(compile_string(s), v, out);
        CHECK((out - dense(s, n) * v).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("Jordan-Wigner images match the occupation-number oracle") {
    const int n = 5;
    for (int l = 0; l < n; ++l) {
        CHECK(dense_diff(dense(jw_annihilate(l), n), testutil::oracle_annihilate(l, n)) <= 1e-14);
        CHECK(dense_diff(dense(jw_create(l), n), testutil::oracle_create(l, n)) <= 1e-14);
    }

    SUBCASE("bilinear equals creation times annihilation") {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                CHECK(dense_diff(dense(jw_bilinear(a, b), n),
                                 testutil::oracle_create(a, n) *
                                     testutil::oracle_annihilate(b, n)) <= 1e-14);
    }
}

TEST_CASE("canonical anticommutation relations on 8 modes") {
    const int n = 8;
    double worst_mixed = 0.0, worst_same = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const PauliSum ann_a{jw_annihilate(a)};
            const PauliSum ann_b{jw_annihilate(b)};
            const PauliSum cre_b{jw_create(b)};
            // {psi_a, psi^dag_b} = delta_ab
            PauliSum acomm =
                simplify(add(multiply(ann_a, cre_b), multiply(cre_b, ann_a)));
            if (a == b) {
                // normal form is Empty_a + Occ_a, which sums to the identity
                const Eigen::MatrixXcd m = dense(acomm, n);
                worst_same = std::max(
                    worst_same,
                    (m - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff());
            } else {
                worst_mixed = std::max(worst_mixed, max_abs_coeff(acomm));
            }
            // {psi_a, psi_b} = 0
            PauliSum zero =
                simplify(add(multiply(ann_a, ann_b), multiply(ann_b, ann_a)));
            worst_mixed = std::max(worst_mixed, max_abs_coeff(zero));
        }
    }
    CHECK(worst_same <= 1e-15);
    CHECK(worst_mixed <= 1e-15);
}

TEST_CASE("Dirac matrices in the Weyl basis") {
    const Eigen::Matrix4cd g0 = gamma0_matrix();
    const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();

    CHECK(dense_diff(g0, g0.adjoint()) <= 1e-15);
    CHECK(dense_diff(g0 * g0, id) <= 1e-15);
    // off-diagonal identity blocks
    CHECK(std::abs(g0(0, 2) - cplx_t(1.0, 0.0)) <= 1e-15);
    CHECK(std::abs(g0(1, 3) - cplx_t(1.0, 0.0)) <= 1e-15);
    CHECK(std::abs(g0(0, 0)) <= 1e-15);
    CHECK(std::abs(g0(0, 1)) <= 1e-15);

    for (int i = 1; i <= 3; ++i) {
        const Eigen::Matrix4cd ai = alpha_matrix(i);
        CHECK(dense_diff(ai, ai.adjoint()) <= 1e-15);
        CHECK(dense_diff(ai * g0 + g0 * ai, Eigen::Matrix4cd::Zero()) <= 1e-15);
        for (int j = 1; j <= 3; ++j) {
            const Eigen::Matrix4cd aj = alpha_matrix(j);
            const Eigen::Matrix4cd anti = ai * aj + aj * ai;
            const Eigen::Matrix4cd expect =
                i == j ? Eigen::Matrix4cd(2.0 * id) : Eigen::Matrix4cd(Eigen::Matrix4cd::Zero());
            CHECK(dense_diff(anti, expect) <= 1e-15);
        }
    }

    // alpha^3 = diag(-sigma_3, +sigma_3) = diag(-1, 1, 1, -1)
    const Eigen::Matrix4cd a3 = alpha_matrix(3);
    Eigen::Vector4cd diag3;
    diag3 << -1.0, 1.0, 1.0, -1.0;
    CHECK(dense_diff(a3, Eigen::Matrix4cd(diag3.asDiagonal())) <= 1e-15);

    CHECK_THROWS_AS(alpha_matrix(0), domain_error);
    CHECK_THROWS_AS(alpha_matrix(4), domain_error);
}

TEST_CASE("spinor-pair classes") {
    CHECK(pair_class_of(0, 0) == 11);
    CHECK(pair_class_of(2, 2) == 11);
    CHECK(pair_class_of(0, 1) == 12);
    CHECK(pair_class_of(1, 0) == 12);
    CHECK(pair_class_of(2, 3) == 12);
    CHECK(pair_class_of(0, 2) == 13);
    CHECK(pair_class_of(3, 1) == 13);
    CHECK_THROWS_AS(pair_class_of(0, 3), internal_error);
    CHECK_THROWS_AS(pair_class_of(1, 2), internal_error);

    // lowering half: daggered index in {0,3}, partner in {1,2}
    int lower_count = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (in_lowering_half(a, b)) {
                ++lower_count;
                CHECK((a == 0 || a == 3));
                CHECK((b == 1 || b == 2));
                CHECK_FALSE(in_lowering_half(b, a));
            }
    CHECK(lower_count == 4);
}

TEST_CASE("charge and current bilinears on the snake layout") {
    const LatticeGeometry g = make_geometry(2, 1, 1);
    const SnakePath path = snake_path(g);
    const int n = 4 * g.volume();
    const std::int64_t dim = std::int64_t(1) << n;

    SUBCASE("charge density counts site occupation") {
        for (int site = 0; site < g.volume(); ++site) {
            const Eigen::MatrixXcd rho = dense(charge_density(site, path), n);
            for (std::int64_t b = 0; b < dim; ++b) {
                int occ = 0;
                for (int alpha = 0; alpha < 4; ++alpha)
                    occ += int((b >> path.mode(site, alpha)) & 1);
                CHECK(std::abs(rho(b, b) - cplx_t(double(occ), 0.0)) <= 1e-13);
            }
            // diagonal operator: no off-diagonal entries
            Eigen::MatrixXcd off = rho;
            off.diagonal().setZero();
            CHECK(off.cwiseAbs().maxCoeff() <= 1e-13);
        }
    }

    SUBCASE("total charge is g times the summed density") {
        const double coupling = 0.7;
        const Eigen::MatrixXcd q = dense(total_charge_strings(g, path, coupling), n);
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(dim, dim);
        for (int site = 0; site < g.volume(); ++site)
            expect += coupling * dense(charge_density(site, path), n);
        CHECK(dense_diff(q, expect) <= 1e-12);
    }

    SUBCASE("current component matches the oracle assembly") {
        for (int site = 0; site < g.volume(); ++site) {
            for (int j = 1; j <= 3; ++j) {
                const Eigen::MatrixXcd cur = dense(current_component(site, j, path), n);
                const Eigen::Matrix4cd aj = alpha_matrix(j);
                Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(dim, dim);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        if (std::abs(aj(a, b)) < 1e-15) continue;
                        expect += aj(a, b) *
                                  testutil::oracle_create(path.mode(site, a), n) *
                                  testutil::oracle_annihilate(path.mode(site, b), n);
                    }
                CHECK(dense_diff(cur, expect) <= 1e-12);
            }
        }
    }
}

TEST_CASE("fermion term catalogue covers the expected classes") {
    const LatticeGeometry g = make_geometry(2, 2, 2);
    const SnakePath path = snake_path(g);
    const auto terms = enumerate_fermion_terms(g, path, 0.8, 1.0, 1.0, true);

    int hop = 0, s11 = 0, s12 = 0, s21 = 0, attached = 0;
    for (const auto& t : terms) {
        switch (t.piece.kind) {
            case PieceKind::Hop: ++hop; break;
            case PieceKind::OnsiteS11: ++s11; break;
            case PieceKind::OnsiteS12: ++s12; break;
            case PieceKind::OnsiteS21: ++s21; break;
            default: break;
        }
        if (t.attach_register >= 0) {
            ++attached;
            CHECK(t.attach_register >= 0);
            CHECK(t.attach_register < 3 * g.volume());
        }
        if (t.piece.kind == PieceKind::Hop) {
            CHECK(t.piece.axis >= 0);
            CHECK(t.piece.axis < 3);
            CHECK((t.piece.parity == 0 || t.piece.parity == 1));
            CHECK((t.piece.pair_class == 11 || t.piece.pair_class == 12 ||
                   t.piece.pair_class == 13));
        }
    }
    CHECK(hop > 0);
    CHECK(s11 > 0);
    CHECK(s12 > 0);
    CHECK(s21 == s12);  // raising terms mirror the lowering ones
    CHECK(attached > 0);

    // with currents disabled no term attaches a field register
    for (const auto& t : enumerate_fermion_terms(g, path, 0.8, 1.0, 1.0, false))
        CHECK(t.attach_register == -1);
}
