#include "cgqed/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "cgqed/errors.hpp"
#include "cgqed/gauge_basis.hpp"
#include "cgqed/krylov.hpp"
#include "cgqed/resources.hpp"
#include "cgqed/trotter.hpp"

namespace cgqed {
namespace {

constexpr std::int64_t kVerifySparseCap = 1 << 14;
constexpr std::int64_t kVerifyBlockEntryCap = 1 << 24;

CheckResult skipped(std::string name, std::string why) {
    CheckResult r;
    r.name = std::move(name);
    r.passed = true;
    r.note = "skipped: " + std::move(why);
    return r;
}

std::string format_value(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

CheckResult check_hermiticity(const HamiltonianPieces& pieces) {
    CheckResult r;
    r.name = "hermiticity";
    r.threshold = 1e-10;
    double worst = 0.0;
    int counted = 0;
    for (const OperatorMatrix* op : pieces.active()) {
        worst = std::max(worst, op->hermiticity_error());
        ++counted;
    }
    r.value = worst;
    r.passed = worst <= r.threshold;
    r.note = "max deviation from self-adjointness across " + std::to_string(counted) +
             " pieces";
    return r;
}

CheckResult check_psd_kinetic(const HamiltonianParams& p, const VerifyOptions& opt) {
    CheckResult r;
    r.name = "psd_kinetic";
    r.threshold = -1e-9;
    Eigen::MatrixXd w = conjugate_weight_matrix(p.geom);
    if (opt.inject_fault) w(0, 0) -= 2.0;
    const double wmin =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w).eigenvalues().minCoeff();

    HamiltonianParams q = p;
    q.g = 0.0;
    q.sector = Sector::GaugeOnly;
    const SpaceLayout glay = make_layout(q);
    double opmin = 0.0;
    if (glay.dim <= kVerifySparseCap) {
        const OperatorMatrix hpi = build_conjugate_quadratic(glay, w);
        auto apply = [&](const Eigen::VectorXcd& v) { return hpi.apply(v); };
        opmin = extreme_eigenvalues(apply, glay.dim, 120, opt.seed).first;
    }
    r.value = std::min(wmin, opmin);
    r.passed = r.value >= r.threshold;
    r.note = "weight-kernel floor " + format_value(wmin) + ", operator floor " +
             format_value(opmin);
    if (opt.inject_fault) r.note += " (fault injected)";
    return r;
}

CheckResult check_transversality(const HamiltonianParams& p, const VerifyOptions& opt) {
    CheckResult r;
    r.name = "transversality_classical";
    r.threshold = 1e-10;
    const LatticeGeometry& geom = p.geom;
    const Eigen::MatrixXd wperp = transverse_weight_matrix(geom);
    const Eigen::MatrixXd kl = longitudinal_kernel(geom);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd chi(geom.volume());
        for (int s = 0; s < geom.volume(); ++s) chi[s] = u(rng);
        const Eigen::VectorXd grad = discrete_gradient(chi, geom);
        worst = std::max(worst, std::abs(magnetic_energy(grad, geom)));
        worst = std::max(worst, (wperp * grad).cwiseAbs().maxCoeff());
        worst = std::max(worst, (kl * grad - grad).cwiseAbs().maxCoeff());
    }
    r.value = worst;
    r.passed = worst <= r.threshold;
    r.note = "50 random gradient fields: magnetic energy, transverse kernel, and "
             "longitudinal projector residuals";
    return r;
}

CheckResult check_dispersion(const HamiltonianParams& p) {
    CheckResult r;
    r.name = "dispersion_match";
    r.threshold = 1e-10;
    if (4 * p.geom.volume() > 16) {
        return skipped(r.name, "one-body extraction exceeds the state-space cap");
    }
    HamiltonianParams q = p;
    q.g = 0.0;
    q.sector = Sector::FermionOnly;
    const SpaceLayout flay = make_layout(q);
    const OperatorMatrix hf = build_H_f(flay, q);
    const Eigen::MatrixXcd kernel = one_body_kernel(hf, flay);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(kernel);
    const Eigen::VectorXd got = es.eigenvalues();

    std::vector<double> want;
    for (const MomentumMode& mode : momentum_modes(p.geom)) {
        const double e = dispersion(mode, p.mass, p.wilson);
        want.insert(want.end(), {-e, -e, e, e});
    }
    std::sort(want.begin(), want.end());
    double worst = 0.0;
    for (int i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    r.value = worst;
    r.passed = worst <= r.threshold;
    r.note = "one-body spectrum vs +-sqrt(sum sin^2 p + (m + 2 r sum sin^2 p/2)^2)";
    return r;
}

CheckResult check_dual_construction(const HamiltonianParams& p) {
    CheckResult r;
    r.name = "dual_construction";
    r.threshold = 1e-10;
    HamiltonianParams q = p;
    q.g = 0.0;
    q.sector = Sector::GaugeOnly;
    const SpaceLayout glay = make_layout(q);
    if (glay.dim > kVerifySparseCap) {
        return skipped(r.name, "gauge space exceeds the explicit-matrix cap");
    }
    const OperatorMatrix direct = build_H_Pi(glay, q);
    const OperatorMatrix momentum = build_H_Pi_momentum_form(glay, q);
    r.value = max_abs_diff(direct, momentum);
    r.passed = r.value <= r.threshold;
    r.note = "projector-kernel form vs per-mode register-sum form";
    return r;
}

CheckResult check_kernel_comparison(const HamiltonianParams& p) {
    CheckResult r;
    r.name = "kinetic_kernel_comparison";
    r.threshold = 0.0;
    HamiltonianParams q = p;
    q.g = 0.0;
    q.sector = Sector::GaugeOnly;
    const SpaceLayout glay = make_layout(q);
    if (glay.dim > kVerifySparseCap) {
        return skipped(r.name, "gauge space exceeds the explicit-matrix cap");
    }
    const OperatorMatrix direct = build_H_Pi(glay, q);
    const OperatorMatrix literal = build_H_Pi_coulomb_kernel(glay, q);
    r.value = max_abs_diff(direct, literal);
    r.passed = true;
    r.note = "informational: deviation of the 1/(4 pi r) distance-kernel variant from "
             "the projector form (reported, not asserted)";
    return r;
}

std::pair<CheckResult, CheckResult> check_completed_square(const SpaceLayout& lay,
                                                           const HamiltonianParams& p) {
    CheckResult ident, psd;
    ident.name = "square_identity";
    ident.threshold = 1e-9;
    psd.name = "square_psd";
    psd.threshold = -1e-9;
    if (!lay.has_gauge() || !lay.has_fermions()) {
        return {skipped(ident.name, "needs the coupled sector"),
                skipped(psd.name, "needs the coupled sector")};
    }
    if (lay.gauge_dim * lay.fermion_dim * lay.fermion_dim > kVerifyBlockEntryCap) {
        return {skipped(ident.name, "block decomposition exceeds the memory cap"),
                skipped(psd.name, "block decomposition exceeds the memory cap")};
    }

    const OperatorMatrix cs = build_completed_square(lay, p);
    const std::vector<Eigen::MatrixXcd>& blocks = cs.blocks();
    const OperatorMatrix h_a = build_H_A(lay, p);
    const Eigen::VectorXd& a_diag = h_a.diagonal_values();
    const Eigen::MatrixXcd ct = counterterm_fermion_matrix(lay, p);

    std::vector<Eigen::MatrixXcd> hi_blocks;
    if (p.g != 0.0) {
        hi_blocks = gauge_blocks_of(build_H_I(lay, p).to_sparse(), lay.gauge_dim,
                                    lay.fermion_dim);
    }
    std::vector<Eigen::MatrixXcd> rem_blocks;
    if (!p.transverse_interaction && p.g != 0.0) {
        rem_blocks = build_zero_mode_remainder(lay, p).blocks();
    }

    double worst = 0.0;
    double min_eig = 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    for (std::int64_t gi = 0; gi < lay.gauge_dim; ++gi) {
        Eigen::MatrixXcd expect =
            hi_blocks.empty() ? Eigen::MatrixXcd::Zero(lay.fermion_dim, lay.fermion_dim)
                              : hi_blocks[gi];
        expect += ct;
        expect.diagonal().array() += a_diag[gi * lay.fermion_dim];
        if (!rem_blocks.empty()) expect += rem_blocks[gi];
        worst = std::max(worst, (blocks[gi] - expect).cwiseAbs().maxCoeff());
        es.compute(blocks[gi], Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    ident.value = worst;
    ident.passed = worst <= ident.threshold;
    ident.note = p.transverse_interaction
                     ? "square = magnetic + coupling + counterterm, blockwise"
                     : "square = magnetic + coupling + counterterm + zero-mode "
                       "remainder, blockwise";
    psd.value = min_eig;
    psd.passed = min_eig >= psd.threshold;
    psd.note = "least eigenvalue over all gauge blocks of the completed square";
    return {ident, psd};
}

CheckResult check_charge_conservation(const HamiltonianParams& p) {
    CheckResult r;
    r.name = "charge_conservation";
    r.threshold = 1e-12;
    const SnakePath path = snake_path(p.geom);
    const PauliSum q_op = total_charge_strings(p.geom, path, 1.0);
    const std::vector<FermionTerm> terms =
        enumerate_fermion_terms(p.geom, path, 1.0, p.mass, p.wilson, true);
    double worst = 0.0;
    for (const FermionTerm& term : terms) {
        PauliSum op{term.op};
        if (term.add_adjoint) op.push_back(adjoint(term.op));
        worst = std::max(worst, max_abs_coeff(simplify(commutator(op, q_op))));
    }
    r.value = worst;
    r.passed = worst <= r.threshold;
    r.note = "symbolic commutators of all " + std::to_string(terms.size()) +
             " fermion bilinears with the total charge (field attachments are "
             "gauge-diagonal and commute trivially)";
    return r;
}

CheckResult check_chebyshev(const VerifyOptions& opt) {
    (void)opt;
    CheckResult r;
    r.name = "chebyshev_truncation";
    const FieldGrid grid = make_field_grid(40.0, 8);
    const Eigen::VectorXd avals = field_values(grid);
    const Eigen::MatrixXcd pi_op = conjugate_operator(grid);
    Eigen::MatrixXcd h = 0.5 * (pi_op * pi_op);
    h.diagonal() += (0.5 * avals.array().square()).matrix().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXcd ground = es.eigenvectors().col(0);
    const double e0 = es.eigenvalues()(0);

    const double eps = 0.1;
    const int vol = 8;
    const double kappa = chebyshev_kappa(vol, eps);
    const ChebyshevReport rep = chebyshev_verifier(ground, avals, kappa);
    const double window =
        std::min((kappa + 1.0) * std::sqrt(2.0 * e0), avals.cwiseAbs().maxCoeff());
    const double fid = truncation_fidelity(ground, avals, window);

    r.value = rep.tail_probability;
    r.threshold = rep.bound;
    r.passed = rep.satisfied && (1.0 - fid) <= rep.bound;
    r.note = "single-mode oscillator ground state: tail beyond kappa*sigma and weight "
             "lost at the (kappa+1)-energy window both within 1/kappa^2 = eps/(3V)";
    return r;
}

CheckResult check_trotter_slope(const SpaceLayout& lay, const HamiltonianParams& p,
                                const HamiltonianPieces& pieces, const VerifyOptions& opt) {
    CheckResult r;
    r.name = "trotter_slope";
    if (!lay.has_gauge() || !lay.has_fermions() || p.g == 0.0) {
        return skipped(r.name, "needs the coupled sector with g > 0");
    }
    if (lay.dim > kVerifySparseCap) {
        return skipped(r.name, "state space exceeds the explicit-matrix cap");
    }
    const double t = 0.5;
    const Eigen::VectorXcd psi0 = random_state(lay.dim, opt.seed);
    const Eigen::VectorXcd exact = exact_evolve(pieces, psi0, t);
    const std::vector<int> ns = {8, 16, 32};
    std::vector<double> errs;
    for (int n : ns) {
        const TrotterPlan plan = build_plan(lay, p, t, n);
        const TrotterEvolver ev(plan);
        errs.push_back((ev.evolve(psi0) - exact).norm());
    }
    // least-squares slope of log(err) against log(N)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double x = std::log(double(ns[i]));
        const double y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(ns.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.value = slope;
    r.threshold = -1.0;
    const bool decreasing = errs[0] > errs[1] && errs[1] > errs[2];
    r.passed = decreasing && slope >= -1.35 && slope <= -0.65;
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << "errors at N=8,16,32: " << errs[0] << ", " << errs[1] << ", "
       << errs[2] << "; first-order formula wants slope -1.0 +- 0.35";
    r.note = os.str();
    return r;
}

CheckResult check_charge_drift(const SpaceLayout& lay, const HamiltonianParams& p,
                               const VerifyOptions& opt) {
    CheckResult r;
    r.name = "charge_drift";
    r.threshold = 1e-8;
    if (!lay.has_fermions()) return skipped(r.name, "needs fermions");
    if (lay.dim > (std::int64_t(1) << 16)) {
        return skipped(r.name, "state space exceeds the evolution cap");
    }
    const SnakePath path = snake_path(p.geom);
    const PauliSum q_op = total_charge_strings(p.geom, path, 1.0);
    auto charge_of = [&](const Eigen::VectorXcd& psi) {
        Eigen::VectorXcd img = Eigen::VectorXcd::Zero(psi.size());
        apply_sum(q_op, psi, img);
        return psi.dot(img).real();
    };
    const Eigen::VectorXcd psi0 = random_state(lay.dim, opt.seed + 1);
    const TrotterPlan plan = build_plan(lay, p, 1.0, 16);
    const TrotterEvolver ev(plan);
    const Eigen::VectorXcd psi1 = ev.evolve(psi0);
    r.value = std::abs(charge_of(psi1) - charge_of(psi0));
    r.passed = r.value <= r.threshold;
    r.note = "total-charge expectation drift over a 16-step product formula at t=1";
    return r;
}

}  // namespace

std::vector<CheckResult> verify_suite(const HamiltonianParams& p, const VerifyOptions& opt) {
    validate_params(p);
    const SpaceLayout lay = make_layout(p);
    const HamiltonianPieces pieces = build_all(lay, p);

    std::vector<CheckResult> out;
    out.push_back(check_hermiticity(pieces));
    out.push_back(lay.has_gauge() ? check_psd_kinetic(p, opt)
                                  : skipped("psd_kinetic", "needs gauge registers"));
    out.push_back(check_transversality(p, opt));
    out.push_back(lay.has_fermions() ? check_dispersion(p)
                                     : skipped("dispersion_match", "needs fermions"));
    out.push_back(lay.has_gauge() ? check_dual_construction(p)
                                  : skipped("dual_construction", "needs gauge registers"));
    out.push_back(lay.has_gauge() ? check_kernel_comparison(p)
                                  : skipped("kinetic_kernel_comparison",
                                            "needs gauge registers"));
    auto [sq_ident, sq_psd] = check_completed_square(lay, p);
    out.push_back(std::move(sq_ident));
    out.push_back(std::move(sq_psd));
    out.push_back(lay.has_fermions() ? check_charge_conservation(p)
                                     : skipped("charge_conservation", "needs fermions"));
    out.push_back(check_chebyshev(opt));
    out.push_back(check_trotter_slope(lay, p, pieces, opt));
    out.push_back(check_charge_drift(lay, p, opt));
    return out;
}

bool all_passed(const std::vector<CheckResult>& checks) {
    for (const CheckResult& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

}  // namespace cgqed
