#include "cgqed/hamiltonian.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "cgqed/errors.hpp"

namespace cgqed {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

std::array<std::complex<double>, 3> difference_symbol(const MomentumMode& mode) {
    // d_i = e^{i p_i} - 1
    return {std::polar(1.0, mode.p[0]) - 1.0, std::polar(1.0, mode.p[1]) - 1.0,
            std::polar(1.0, mode.p[2]) - 1.0};
}

// Per-gauge-state field configuration on link registers.
Eigen::VectorXd field_of_state(std::int64_t g, const SpaceLayout& lay) {
    Eigen::VectorXd field(lay.n_gauge_registers);
    for (int m = 0; m < lay.n_gauge_registers; ++m)
        field[m] = lay.grid.value(lay.gauge_level(g, m));
    return field;
}

Eigen::VectorXd replicate_gauge_diag(const Eigen::VectorXd& gd, const SpaceLayout& lay) {
    Eigen::VectorXd full(lay.dim);
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g)
        full.segment(g * lay.fermion_dim, lay.fermion_dim).setConstant(gd[g]);
    return full;
}

Eigen::VectorXd tile_fermion_diag(const Eigen::VectorXd& fd, const SpaceLayout& lay) {
    Eigen::VectorXd full(lay.dim);
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g)
        full.segment(g * lay.fermion_dim, lay.fermion_dim) = fd;
    return full;
}

SpMat expand_gauge_to_full(const SpMat& gop, const SpaceLayout& lay) {
    if (lay.fermion_dim == 1) return gop;
    std::vector<Triplet> t;
    t.reserve(std::size_t(gop.nonZeros()) * lay.fermion_dim);
    for (int k = 0; k < gop.outerSize(); ++k)
        for (SpMat::InnerIterator it(gop, k); it; ++it)
            for (std::int64_t f = 0; f < lay.fermion_dim; ++f)
                t.emplace_back(it.row() * lay.fermion_dim + f, it.col() * lay.fermion_dim + f,
                               it.value());
    SpMat full(lay.dim, lay.dim);
    full.setFromTriplets(t.begin(), t.end());
    return full;
}

// (1/2) sum_{m,m'} W_{mm'} Pi_m Pi_m' on the gauge factor.
SpMat conjugate_quadratic_gauge(const Eigen::MatrixXd& w, const SpaceLayout& lay) {
    const int nreg = lay.n_gauge_registers;
    const int nlev = lay.grid.levels;
    const Eigen::MatrixXcd pi_op = conjugate_operator(lay.grid);
    const Eigen::MatrixXcd pi_sq = pi_op * pi_op;
    std::vector<Triplet> t;
    for (int m = 0; m < nreg; ++m) {
        for (int mp = 0; mp < nreg; ++mp) {
            const double wmm = 0.5 * w(m, mp);
            if (wmm == 0.0) continue;
            if (m == mp) {
                for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                    const int k = lay.gauge_level(g, m);
                    for (int a = 0; a < nlev; ++a) {
                        const cplx v = wmm * pi_sq(a, k);
                        if (std::abs(v) > 1e-15)
                            t.emplace_back(lay.set_gauge_level(g, m, a), g, v);
                    }
                }
            } else {
                for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                    const int k = lay.gauge_level(g, m);
                    const int kp = lay.gauge_level(g, mp);
                    for (int a = 0; a < nlev; ++a) {
                        const cplx va = wmm * pi_op(a, k);
                        if (std::abs(va) < 1e-15) continue;
                        const std::int64_t ga = lay.set_gauge_level(g, m, a);
                        for (int b = 0; b < nlev; ++b) {
                            const cplx v = va * pi_op(b, kp);
                            if (std::abs(v) > 1e-15)
                                t.emplace_back(lay.set_gauge_level(ga, mp, b), g, v);
                        }
                    }
                }
            }
        }
    }
    SpMat out(lay.gauge_dim, lay.gauge_dim);
    out.setFromTriplets(t.begin(), t.end());
    out.prune([](auto, auto, const cplx& v) { return std::abs(v) > 1e-14; });
    return out;
}

// Embedded conjugate operator on one register (gauge factor).
SpMat single_register_conjugate(int reg, const SpaceLayout& lay) {
    const Eigen::MatrixXcd pi_op = conjugate_operator(lay.grid);
    std::vector<Triplet> t;
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
        const int k = lay.gauge_level(g, reg);
        for (int a = 0; a < lay.grid.levels; ++a)
            if (std::abs(pi_op(a, k)) > 1e-15)
                t.emplace_back(lay.set_gauge_level(g, reg, a), g, pi_op(a, k));
    }
    SpMat out(lay.gauge_dim, lay.gauge_dim);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

void require_gauge(const SpaceLayout& lay, const char* what) {
    if (!lay.has_gauge()) throw config_error(std::string(what) + " requires a gauge sector");
}
void require_fermions(const SpaceLayout& lay, const char* what) {
    if (!lay.has_fermions()) throw config_error(std::string(what) + " requires a fermion sector");
}
void require_coupled(const SpaceLayout& lay, const char* what) {
    if (lay.sector != Sector::Coupled)
        throw config_error(std::string(what) + " requires the coupled sector");
}

// Transverse-projected momentum-space current  J_j(p) = sum_{x,i} V^{-1/2}
// e^{-i p x} P_{ji}(p) J^i(x)  as a dense fermion matrix (g included); the
// literal variant drops the projector.
Eigen::MatrixXcd fourier_current(const MomentumMode& mode, int j, const SpaceLayout& lay,
                                 const HamiltonianParams& p, bool transverse) {
    const int vol = lay.geom.volume();
    const double root_v = std::sqrt(double(vol));
    Eigen::Matrix3cd proj = Eigen::Matrix3cd::Identity();
    if (transverse) proj = transverse_projector(mode);
    PauliSum sum;
    for (int x = 0; x < vol; ++x) {
        const Coord c = site_coords(x, lay.geom);
        const cplx phase =
            std::polar(1.0 / root_v, -(mode.p[0] * c[0] + mode.p[1] * c[1] + mode.p[2] * c[2]));
        for (int i = 0; i < 3; ++i) {
            const cplx w = phase * proj(j, i) * p.g;
            if (std::abs(w) < 1e-15) continue;
            PauliSum cur = current_component(x, i + 1, lay.path);
            for (auto& s : cur) s.coeff *= w;
            sum.insert(sum.end(), cur.begin(), cur.end());
        }
    }
    return dense(simplify(std::move(sum)), lay.n_fermion_modes);
}

}  // namespace

void validate_params(const HamiltonianParams& p) {
    for (int i = 0; i < 3; ++i)
        if (p.geom.dims[i] < 1) throw config_error("lattice extents must be positive");
    if (p.g < 0.0) throw config_error("coupling g must be nonnegative");
    if (p.mass < 0.0) throw config_error("mass must be nonnegative");
    if (p.wilson < 0.0) throw config_error("wilson parameter must be nonnegative");
    if (p.sector != Sector::FermionOnly) {
        if (!(p.a_max > 0.0)) throw config_error("a_max must be positive");
        if (p.n_A < 1 || p.n_A > 20) throw config_error("n_A must lie in [1, 20]");
    }
}

SpaceLayout make_layout(const HamiltonianParams& p) {
    validate_params(p);
    return make_layout(p.geom, p.sector, p.n_A, p.a_max);
}

Eigen::Matrix4cd gamma0_matrix() {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 2) = m(1, 3) = m(2, 0) = m(3, 1) = 1.0;
    return m;
}

Eigen::Matrix4cd alpha_matrix(int j) {
    Eigen::Matrix2cd sigma = Eigen::Matrix2cd::Zero();
    switch (j) {
        case 1: sigma << 0, 1, 1, 0; break;
        case 2: sigma << 0, -kI, kI, 0; break;
        case 3: sigma << 1, 0, 0, -1; break;
        default: throw domain_error("alpha_matrix index must be 1..3");
    }
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m.block<2, 2>(0, 0) = -sigma;
    m.block<2, 2>(2, 2) = sigma;
    return m;
}

double dispersion(const MomentumMode& mode, double mass, double wilson) {
    double s = 0.0, w = mass;
    for (int i = 0; i < 3; ++i) {
        const double si = std::sin(mode.p[i]);
        s += si * si;
        const double h = std::sin(0.5 * mode.p[i]);
        w += 2.0 * wilson * h * h;
    }
    return std::sqrt(s + w * w);
}

double dispersion_bound(double mass, double wilson) {
    return std::sqrt(3.0 + mass * mass + 12.0 * mass * wilson + 36.0 * wilson * wilson);
}

double shift_constant(int volume, double mass, double wilson) {
    return 2.0 * volume * dispersion_bound(mass, wilson);
}

Eigen::Matrix3cd transverse_projector(const MomentumMode& mode) {
    if (mode.is_zero) throw domain_error("transverse projector undefined at the zero mode");
    const auto d = difference_symbol(mode);
    const double d2 = std::norm(d[0]) + std::norm(d[1]) + std::norm(d[2]);
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) -= d[i] * std::conj(d[j]) / d2;
    return m;
}

Eigen::MatrixXd longitudinal_kernel(const LatticeGeometry& geom) {
    const int vol = geom.volume();
    const int n = 3 * vol;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    for (const MomentumMode& mode : momentum_modes(geom)) {
        if (mode.is_zero) continue;
        const auto d = difference_symbol(mode);
        const double d2 = std::norm(d[0]) + std::norm(d[1]) + std::norm(d[2]);
        Eigen::VectorXcd v(n);
        for (int x = 0; x < vol; ++x) {
            const Coord c = site_coords(x, geom);
            const cplx phase = std::polar(
                1.0 / std::sqrt(double(vol) * d2),
                mode.p[0] * c[0] + mode.p[1] * c[1] + mode.p[2] * c[2]);
            for (int i = 0; i < 3; ++i) v[3 * x + i] = phase * d[i];
        }
        acc += v * v.adjoint();
    }
    return acc.real();
}

Eigen::MatrixXd conjugate_weight_matrix(const LatticeGeometry& geom) {
    const int n = 3 * geom.volume();
    return Eigen::MatrixXd::Identity(n, n) - longitudinal_kernel(geom);
}

Eigen::MatrixXd transverse_weight_matrix(const LatticeGeometry& geom) {
    const int vol = geom.volume();
    const int n = 3 * vol;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    for (const MomentumMode& mode : momentum_modes(geom)) {
        if (mode.is_zero) continue;
        const Eigen::Matrix3cd proj = transverse_projector(mode);
        for (int x = 0; x < vol; ++x) {
            const Coord cx = site_coords(x, geom);
            for (int y = 0; y < vol; ++y) {
                const Coord cy = site_coords(y, geom);
                const cplx phase = std::polar(
                    1.0 / vol, mode.p[0] * (cx[0] - cy[0]) + mode.p[1] * (cx[1] - cy[1]) +
                                   mode.p[2] * (cx[2] - cy[2]));
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        acc(3 * x + i, 3 * y + j) += phase * proj(i, j);
            }
        }
    }
    return acc.real();
}

double magnetic_energy(const Eigen::VectorXd& field, const LatticeGeometry& geom) {
    const int vol = geom.volume();
    if (field.size() != 3 * vol) throw domain_error("field vector has wrong length");
    double energy = 0.0;
    for (int x = 0; x < vol; ++x) {
        const Coord c = site_coords(x, geom);
        for (int i = 0; i < 3; ++i) {
            const int xi = site_index(neighbor(c, i, +1, geom), geom);
            for (int j = i + 1; j < 3; ++j) {
                const int xj = site_index(neighbor(c, j, +1, geom), geom);
                const double curl = (field[3 * xi + j] - field[3 * x + j]) -
                                    (field[3 * xj + i] - field[3 * x + i]);
                energy += 0.5 * curl * curl;
            }
        }
    }
    return energy;
}

Eigen::VectorXd discrete_gradient(const Eigen::VectorXd& site_function,
                                  const LatticeGeometry& geom) {
    const int vol = geom.volume();
    if (site_function.size() != vol) throw domain_error("site function has wrong length");
    Eigen::VectorXd grad(3 * vol);
    for (int x = 0; x < vol; ++x) {
        const Coord c = site_coords(x, geom);
        for (int i = 0; i < 3; ++i) {
            const int xi = site_index(neighbor(c, i, +1, geom), geom);
            grad[3 * x + i] = site_function[xi] - site_function[x];
        }
    }
    return grad;
}

PauliSum charge_density(int site, const SnakePath& path) {
    PauliSum sum;
    for (int a = 0; a < 4; ++a) {
        PauliString s = jw_bilinear(path.mode(site, a), path.mode(site, a));
        sum.push_back(std::move(s));
    }
    return sum;
}

PauliSum current_component(int site, int j, const SnakePath& path) {
    const Eigen::Matrix4cd alpha = alpha_matrix(j);
    PauliSum sum;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (std::abs(alpha(a, b)) < 1e-15) continue;
            PauliString s = jw_bilinear(path.mode(site, a), path.mode(site, b));
            s.coeff *= alpha(a, b);
            sum.push_back(std::move(s));
        }
    return sum;
}

PauliSum total_charge_strings(const LatticeGeometry& geom, const SnakePath& path, double g) {
    PauliSum sum;
    for (int x = 0; x < geom.volume(); ++x) {
        PauliSum rho = charge_density(x, path);
        for (auto& s : rho) s.coeff *= g;
        sum.insert(sum.end(), rho.begin(), rho.end());
    }
    return sum;
}

int pair_class_of(int a, int b) {
    if (a == b) return 11;
    const int lo = std::min(a, b), hi = std::max(a, b);
    if ((lo == 0 && hi == 1) || (lo == 2 && hi == 3)) return 12;
    if ((lo == 0 && hi == 2) || (lo == 1 && hi == 3)) return 13;
    throw internal_error("bilinear outside the allowed spinor-pair classes");
}

bool in_lowering_half(int a, int b) {
    return (a == 0 || a == 3) && (b == 1 || b == 2);
}

std::string piece_name(const PieceId& id) {
    switch (id.kind) {
        case PieceKind::KineticConjugate: return "H_Pi";
        case PieceKind::Magnetic: return "H_A";
        case PieceKind::OnsiteS11: return "onsite_s11";
        case PieceKind::OnsiteS12: return "onsite_s12";
        case PieceKind::OnsiteS21: return "onsite_s21";
        case PieceKind::Hop: {
            const char* axis = id.axis == 0 ? "x" : id.axis == 1 ? "y" : "z";
            return std::string("hop_") + (id.parity == 0 ? "even" : "odd") + "_" + axis + "_" +
                   std::to_string(id.pair_class);
        }
    }
    throw internal_error("bad piece id");
}

std::vector<FermionTerm> enumerate_fermion_terms(const LatticeGeometry& geom,
                                                 const SnakePath& path, double g, double mass,
                                                 double wilson, bool include_currents) {
    std::vector<FermionTerm> terms;
    const int vol = geom.volume();
    const Eigen::Matrix4cd g0 = gamma0_matrix();

    int active_axes = 0;
    for (int j = 0; j < 3; ++j)
        if (geom.dims[j] >= 2) ++active_axes;

    // Hopping: one directed bond x -> x+j per site and active axis, entering
    // as T + T^dag with matrix -(i/2) alpha^j - (r/2) gamma^0.
    for (int x = 0; x < vol; ++x) {
        const Coord c = site_coords(x, geom);
        for (int axis = 0; axis < 3; ++axis) {
            if (geom.dims[axis] < 2) continue;
            const int y = site_index(neighbor(c, axis, +1, geom), geom);
            const Eigen::Matrix4cd hop =
                -0.5 * kI * alpha_matrix(axis + 1) - 0.5 * wilson * g0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    if (std::abs(hop(a, b)) < 1e-15) continue;
                    FermionTerm t;
                    t.op = jw_bilinear(path.mode(x, a), path.mode(y, b));
                    t.op.coeff *= hop(a, b);
                    t.add_adjoint = true;
                    t.site = x;
                    t.piece = {PieceKind::Hop, axis, c[axis] & 1, pair_class_of(a, b)};
                    terms.push_back(std::move(t));
                }
        }
    }

    // On-site mass + Wilson restoration term (one r per active axis).
    const double onsite = mass + wilson * active_axes;
    if (onsite != 0.0) {
        for (int x = 0; x < vol; ++x) {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    if (std::abs(g0(a, b)) < 1e-15) continue;
                    FermionTerm t;
                    t.op = jw_bilinear(path.mode(x, a), path.mode(x, b));
                    t.op.coeff *= onsite * g0(a, b);
                    t.site = x;
                    t.piece.kind =
                        in_lowering_half(a, b) ? PieceKind::OnsiteS12 : PieceKind::OnsiteS21;
                    terms.push_back(std::move(t));
                }
        }
    }

    // Current-field couplings -J^j(x) A_j(x); the field factor is attached at
    // assembly time through attach_register.
    if (include_currents && g != 0.0) {
        for (int x = 0; x < vol; ++x) {
            for (int j = 1; j <= 3; ++j) {
                const Eigen::Matrix4cd alpha = alpha_matrix(j);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        if (std::abs(alpha(a, b)) < 1e-15) continue;
                        FermionTerm t;
                        t.op = jw_bilinear(path.mode(x, a), path.mode(x, b));
                        t.op.coeff *= -g * alpha(a, b);
                        t.attach_register = 3 * x + (j - 1);
                        t.site = x;
                        if (a == b)
                            t.piece.kind = PieceKind::OnsiteS11;
                        else
                            t.piece.kind = in_lowering_half(a, b) ? PieceKind::OnsiteS12
                                                                  : PieceKind::OnsiteS21;
                        terms.push_back(std::move(t));
                    }
            }
        }
    }
    return terms;
}

OperatorMatrix build_H_Pi(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_gauge(lay, "H_Pi");
    return build_conjugate_quadratic(lay, conjugate_weight_matrix(lay.geom));
}

OperatorMatrix build_conjugate_quadratic(const SpaceLayout& lay, const Eigen::MatrixXd& weights) {
    require_gauge(lay, "conjugate quadratic form");
    if (weights.rows() != lay.n_gauge_registers || weights.cols() != lay.n_gauge_registers) {
        throw domain_error("weight matrix shape does not match the register count");
    }
    return OperatorMatrix::sparse(expand_gauge_to_full(conjugate_quadratic_gauge(weights, lay), lay));
}

OperatorMatrix build_H_Pi_momentum_form(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_gauge(lay, "H_Pi");
    const int vol = lay.geom.volume();
    SpMat acc(lay.gauge_dim, lay.gauge_dim);
    std::vector<SpMat> reg_pi(lay.n_gauge_registers);
    for (int m = 0; m < lay.n_gauge_registers; ++m) {
        reg_pi[m] = single_register_conjugate(m, lay);
        acc += SpMat(0.5 * reg_pi[m] * reg_pi[m]);
    }
    for (const MomentumMode& mode : momentum_modes(lay.geom)) {
        if (mode.is_zero) continue;
        const auto d = difference_symbol(mode);
        const double d2 = std::norm(d[0]) + std::norm(d[1]) + std::norm(d[2]);
        SpMat q(lay.gauge_dim, lay.gauge_dim);
        for (int x = 0; x < vol; ++x) {
            const Coord c = site_coords(x, lay.geom);
            const cplx phase = std::polar(
                1.0 / std::sqrt(double(vol) * d2),
                -(mode.p[0] * c[0] + mode.p[1] * c[1] + mode.p[2] * c[2]));
            for (int i = 0; i < 3; ++i) {
                const cplx coeff = phase * std::conj(d[i]);
                if (std::abs(coeff) > 1e-15) q += SpMat(coeff * reg_pi[3 * x + i]);
            }
        }
        acc -= SpMat(0.5 * SpMat(q.adjoint()) * q);
    }
    acc.prune([](auto, auto, const cplx& v) { return std::abs(v) > 1e-13; });
    return OperatorMatrix::sparse(expand_gauge_to_full(acc, lay));
}

OperatorMatrix build_H_Pi_coulomb_kernel(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_gauge(lay, "H_Pi");
    const int vol = lay.geom.volume();
    const int n = 3 * vol;
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Identity(n, n);
    for (int x = 0; x < vol; ++x) {
        const Coord cx = site_coords(x, lay.geom);
        for (int y = 0; y < vol; ++y) {
            const Coord cy = site_coords(y, lay.geom);
            const double dist = min_image_distance(cx, cy, lay.geom);
            if (dist == 0.0) continue;
            const double c = 1.0 / (4.0 * std::numbers::pi * dist);
            for (int i = 0; i < 3; ++i) {
                const Coord yi = neighbor(cy, i, +1, lay.geom);
                for (int j = 0; j < 3; ++j) {
                    const int yj = site_index(neighbor(cy, j, +1, lay.geom), lay.geom);
                    const int yij = site_index(neighbor(yi, j, +1, lay.geom), lay.geom);
                    kernel(3 * x + i, 3 * yij + j) += c;
                    kernel(3 * x + i, 3 * site_index(yi, lay.geom) + j) -= c;
                    kernel(3 * x + i, 3 * yj + j) -= c;
                    kernel(3 * x + i, 3 * y + j) += c;
                }
            }
        }
    }
    return OperatorMatrix::sparse(
        expand_gauge_to_full(conjugate_quadratic_gauge(kernel, lay), lay));
}

OperatorMatrix build_H_A(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_gauge(lay, "H_A");
    Eigen::VectorXd gd(lay.gauge_dim);
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g)
        gd[g] = magnetic_energy(field_of_state(g, lay), lay.geom);
    return OperatorMatrix::diagonal(replicate_gauge_diag(gd, lay));
}

OperatorMatrix build_H_A_laplacian(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_gauge(lay, "H_A");
    const int vol = lay.geom.volume();
    Eigen::VectorXd gd(lay.gauge_dim);
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
        const Eigen::VectorXd field = field_of_state(g, lay);
        double e = 0.0;
        for (int x = 0; x < vol; ++x) {
            const Coord c = site_coords(x, lay.geom);
            for (int j = 0; j < 3; ++j) {
                double lap = 0.0;
                for (int i = 0; i < 3; ++i) {
                    const int xp = site_index(neighbor(c, i, +1, lay.geom), lay.geom);
                    const int xm = site_index(neighbor(c, i, -1, lay.geom), lay.geom);
                    lap += field[3 * xp + j] - 2.0 * field[3 * x + j] + field[3 * xm + j];
                }
                e -= 0.5 * field[3 * x + j] * lap;
            }
        }
        gd[g] = e;
    }
    return OperatorMatrix::diagonal(replicate_gauge_diag(gd, lay));
}

namespace {

// Field weight seen by a current at register m: transverse-projected column
// or the raw register value.
Eigen::VectorXd attachment_diagonal(int reg, const SpaceLayout& lay, bool transverse,
                                    const Eigen::MatrixXd* w_perp) {
    Eigen::VectorXd d(lay.gauge_dim);
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
        if (!transverse) {
            d[g] = lay.grid.value(lay.gauge_level(g, reg));
        } else {
            double acc = 0.0;
            for (int m = 0; m < lay.n_gauge_registers; ++m) {
                const double wv = (*w_perp)(reg, m);
                if (wv != 0.0) acc += wv * lay.grid.value(lay.gauge_level(g, m));
            }
            d[g] = acc;
        }
    }
    return d;
}

}  // namespace

OperatorMatrix build_H_I(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_coupled(lay, "H_I");
    const auto terms =
        enumerate_fermion_terms(lay.geom, lay.path, p.g, p.mass, p.wilson, true);
    Eigen::MatrixXd w_perp;
    if (p.transverse_interaction) w_perp = transverse_weight_matrix(lay.geom);

    std::unordered_map<int, Eigen::VectorXd> attach_cache;
    std::vector<Triplet> t;
    for (const auto& term : terms) {
        if (term.attach_register < 0) continue;
        auto it = attach_cache.find(term.attach_register);
        if (it == attach_cache.end())
            it = attach_cache
                     .emplace(term.attach_register,
                              attachment_diagonal(term.attach_register, lay,
                                                  p.transverse_interaction, &w_perp))
                     .first;
        const Eigen::VectorXd& dvec = it->second;
        const CompiledString cs = compile_string(term.op);
        for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
            const double wv = dvec[g];
            if (wv == 0.0) continue;
            const std::int64_t base = g * lay.fermion_dim;
            for (std::int64_t f = 0; f < lay.fermion_dim; ++f) {
                const auto uf = std::uint64_t(f);
                if ((uf & cs.require_mask) != cs.require_value) continue;
                const double sign = (std::popcount(uf & cs.z_mask) & 1) ? -1.0 : 1.0;
                t.emplace_back(base + std::int64_t(uf ^ cs.flip_mask), base + f,
                               cs.base * sign * wv);
            }
        }
    }
    return OperatorMatrix::sparse(lay.dim, t);
}

OperatorMatrix build_H_C(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_fermions(lay, "H_C");
    const int vol = lay.geom.volume();
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(vol, vol);
    for (int x = 0; x < vol; ++x)
        for (int y = 0; y < vol; ++y) {
            if (x == y) continue;
            kernel(x, y) = coulomb_kernel(site_coords(x, lay.geom), site_coords(y, lay.geom),
                                          lay.geom);
        }
    Eigen::VectorXd fd(lay.fermion_dim);
    std::vector<int> rho(vol);
    for (std::int64_t f = 0; f < lay.fermion_dim; ++f) {
        for (int x = 0; x < vol; ++x)
            rho[x] = std::popcount(std::uint64_t(f) >> (4 * lay.path.path_position[x]) & 0xFULL);
        double e = 0.0;
        for (int x = 0; x < vol; ++x)
            for (int y = 0; y < vol; ++y)
                if (kernel(x, y) != 0.0) e += rho[x] * rho[y] * kernel(x, y);
        fd[f] = 0.5 * p.g * p.g * e;
    }
    return OperatorMatrix::diagonal(tile_fermion_diag(fd, lay));
}

OperatorMatrix build_H_f(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_fermions(lay, "H_f");
    const auto terms =
        enumerate_fermion_terms(lay.geom, lay.path, p.g, p.mass, p.wilson, false);
    PauliSum sum;
    for (const auto& term : terms) {
        if (term.attach_register >= 0) continue;
        sum.push_back(term.op);
        if (term.add_adjoint) sum.push_back(adjoint(term.op));
    }
    return OperatorMatrix::strings(lay.dim, simplify(std::move(sum)));
}

OperatorMatrix build_completed_square(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_coupled(lay, "completed square");
    if (lay.fermion_dim > kDenseCap || lay.dim > kSparseCap)
        throw capability_error("completed square exceeds block materialization caps");
    const int vol = lay.geom.volume();
    const double root_v = std::sqrt(double(vol));
    std::vector<Eigen::MatrixXcd> blocks(
        lay.gauge_dim, Eigen::MatrixXcd::Zero(lay.fermion_dim, lay.fermion_dim));
    const Eigen::MatrixXcd id =
        Eigen::MatrixXcd::Identity(lay.fermion_dim, lay.fermion_dim);

    for (const MomentumMode& mode : momentum_modes(lay.geom)) {
        if (mode.is_zero) continue;
        const double s = 0.25 * laplacian_symbol(mode);
        Eigen::Matrix3cd proj = Eigen::Matrix3cd::Identity();
        if (p.transverse_interaction) proj = transverse_projector(mode);
        for (int j = 0; j < 3; ++j) {
            if (proj.row(j).norm() < 1e-14) continue;
            // gauge coefficients of the Fourier field component
            Eigen::VectorXcd cvec = Eigen::VectorXcd::Zero(lay.n_gauge_registers);
            for (int x = 0; x < vol; ++x) {
                const Coord c = site_coords(x, lay.geom);
                const cplx phase = std::polar(
                    1.0 / root_v,
                    -(mode.p[0] * c[0] + mode.p[1] * c[1] + mode.p[2] * c[2]));
                for (int i = 0; i < 3; ++i) cvec[3 * x + i] = phase * proj(j, i);
            }
            const Eigen::MatrixXcd jmat =
                fourier_current(mode, j, lay, p, p.transverse_interaction) / (4.0 * s);
            const Eigen::MatrixXcd jj = jmat.adjoint() * jmat;
            for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                cplx a(0.0, 0.0);
                for (int m = 0; m < lay.n_gauge_registers; ++m)
                    a += cvec[m] * lay.grid.value(lay.gauge_level(g, m));
                blocks[g] += 2.0 * s *
                             (std::norm(a) * id - std::conj(a) * jmat - a * jmat.adjoint() + jj);
            }
        }
    }
    return OperatorMatrix::gauge_blocks(lay.gauge_dim, std::move(blocks));
}

Eigen::MatrixXcd counterterm_fermion_matrix(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_coupled(lay, "counterterm");
    if (lay.fermion_dim > kDenseCap)
        throw capability_error("counterterm exceeds dense fermion cap");
    Eigen::MatrixXcd ct = Eigen::MatrixXcd::Zero(lay.fermion_dim, lay.fermion_dim);
    for (const MomentumMode& mode : momentum_modes(lay.geom)) {
        if (mode.is_zero) continue;
        const double s = 0.25 * laplacian_symbol(mode);
        for (int j = 0; j < 3; ++j) {
            const Eigen::MatrixXcd jmat =
                fourier_current(mode, j, lay, p, p.transverse_interaction);
            ct += jmat.adjoint() * jmat / (8.0 * s);
        }
    }
    return ct;
}

OperatorMatrix build_zero_mode_remainder(const SpaceLayout& lay, const HamiltonianParams& p) {
    require_coupled(lay, "zero-mode remainder");
    if (lay.fermion_dim > kDenseCap || lay.dim > kSparseCap)
        throw capability_error("zero-mode remainder exceeds block materialization caps");
    const int vol = lay.geom.volume();
    const double root_v = std::sqrt(double(vol));
    // J_j(0) = V^{-1/2} sum_x J^j(x)
    std::array<Eigen::MatrixXcd, 3> j0;
    for (int j = 0; j < 3; ++j) {
        PauliSum sum;
        for (int x = 0; x < vol; ++x) {
            PauliSum cur = current_component(x, j + 1, lay.path);
            for (auto& s : cur) s.coeff *= p.g / root_v;
            sum.insert(sum.end(), cur.begin(), cur.end());
        }
        j0[j] = dense(simplify(std::move(sum)), lay.n_fermion_modes);
    }
    std::vector<Eigen::MatrixXcd> blocks(
        lay.gauge_dim, Eigen::MatrixXcd::Zero(lay.fermion_dim, lay.fermion_dim));
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
        for (int j = 0; j < 3; ++j) {
            double beta = 0.0;
            for (int x = 0; x < vol; ++x)
                beta += lay.grid.value(lay.gauge_level(g, 3 * x + j));
            blocks[g] += (beta / root_v) * j0[j];
        }
    }
    return OperatorMatrix::gauge_blocks(lay.gauge_dim, std::move(blocks));
}

std::vector<const OperatorMatrix*> HamiltonianPieces::active() const {
    std::vector<const OperatorMatrix*> out;
    if (has_gauge) {
        out.push_back(&h_pi);
        out.push_back(&h_a);
    }
    if (has_coupling) out.push_back(&h_i);
    if (has_fermions) {
        out.push_back(&h_c);
        out.push_back(&h_f);
    }
    return out;
}

HamiltonianPieces build_all(const SpaceLayout& lay, const HamiltonianParams& p) {
    HamiltonianPieces pieces;
    pieces.has_gauge = lay.has_gauge();
    pieces.has_fermions = lay.has_fermions();
    pieces.has_coupling = lay.sector == Sector::Coupled && p.g != 0.0;
    pieces.shift = lay.has_fermions() ? shift_constant(lay.geom.volume(), p.mass, p.wilson) : 0.0;
    if (pieces.has_gauge) {
        pieces.h_pi = build_H_Pi(lay, p);
        pieces.h_a = build_H_A(lay, p);
    } else {
        pieces.h_pi = OperatorMatrix::zero(lay.dim);
        pieces.h_a = OperatorMatrix::zero(lay.dim);
    }
    if (pieces.has_coupling)
        pieces.h_i = build_H_I(lay, p);
    else
        pieces.h_i = OperatorMatrix::zero(lay.dim);
    if (pieces.has_fermions) {
        // the Coulomb term descends from the gauge constraint: coupled sector only
        pieces.h_c = lay.sector == Sector::Coupled ? build_H_C(lay, p)
                                                   : OperatorMatrix::zero(lay.dim);
        pieces.h_f = build_H_f(lay, p);
    } else {
        pieces.h_c = OperatorMatrix::zero(lay.dim);
        pieces.h_f = OperatorMatrix::zero(lay.dim);
    }
    return pieces;
}

SpMat assemble_total(const HamiltonianPieces& pieces) {
    return sparse_sum(pieces.active());
}

Eigen::MatrixXcd one_body_kernel(const OperatorMatrix& h_f, const SpaceLayout& lay) {
    const int n = lay.n_fermion_modes;
    Eigen::MatrixXcd kernel(n, n);
    Eigen::VectorXcd basis = Eigen::VectorXcd::Zero(lay.dim);
    for (int l = 0; l < n; ++l) {
        const std::int64_t idx = std::int64_t(1) << l;
        basis[idx] = 1.0;
        const Eigen::VectorXcd image = h_f.apply(basis);
        basis[idx] = 0.0;
        for (int lp = 0; lp < n; ++lp) kernel(lp, l) = image[std::int64_t(1) << lp];
    }
    return kernel;
}

}  // namespace cgqed
