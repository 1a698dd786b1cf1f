#include "cgqed/trotter.hpp"

#include <bit>
#include <cmath>
#include <complex>

#include "cgqed/errors.hpp"
#include "cgqed/krylov.hpp"

namespace cgqed {

namespace {

Eigen::VectorXd full_diag_from_terms(const std::vector<FermionTerm>& terms,
                                     const SpaceLayout& lay, const HamiltonianParams& p,
                                     const Eigen::MatrixXd* w_perp) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(lay.dim);
    for (const auto& term : terms) {
        const CompiledString cs = compile_string(term.op);
        if (cs.flip_mask != 0) throw internal_error("diagonal class contains non-diagonal term");
        Eigen::VectorXd attach;
        if (term.attach_register >= 0) {
            attach.resize(lay.gauge_dim);
            for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                if (p.transverse_interaction) {
                    double acc = 0.0;
                    for (int m = 0; m < lay.n_gauge_registers; ++m) {
                        const double wv = (*w_perp)(term.attach_register, m);
                        if (wv != 0.0) acc += wv * lay.grid.value(lay.gauge_level(g, m));
                    }
                    attach[g] = acc;
                } else {
                    attach[g] = lay.grid.value(lay.gauge_level(g, term.attach_register));
                }
            }
        }
        for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
            const double w = term.attach_register >= 0 ? attach[g] : 1.0;
            if (w == 0.0) continue;
            const std::int64_t base = g * lay.fermion_dim;
            for (std::int64_t f = 0; f < lay.fermion_dim; ++f) {
                const auto uf = std::uint64_t(f);
                if ((uf & cs.require_mask) != cs.require_value) continue;
                const double sign = (std::popcount(uf & cs.z_mask) & 1) ? -1.0 : 1.0;
                diag[base + f] += std::real(cs.base) * sign * w;
            }
        }
    }
    return diag;
}

}  // namespace

TrotterPlan build_plan(const SpaceLayout& lay, const HamiltonianParams& p, double t, int steps) {
    if (steps < 1) throw config_error("step count must be at least 1");
    if (lay.has_fermions())
        for (int j = 0; j < 3; ++j)
            if (lay.geom.dims[j] >= 3 && lay.geom.dims[j] % 2 != 0)
                throw config_error(
                    "hopping bonds on an odd extent >= 3 are not two-colorable");

    TrotterPlan plan;
    plan.lay = lay;
    plan.params = p;
    plan.steps = steps;
    plan.t_total = t;
    plan.dt = t / steps;

    if (lay.has_gauge()) {
        TrotterPiece pi;
        pi.name = "H_Pi";
        pi.kind = TrotterKind::Conjugate;
        pi.id.kind = PieceKind::KineticConjugate;
        pi.conj_weights = conjugate_weight_matrix(lay.geom);
        pi.empty = false;
        plan.pieces.push_back(std::move(pi));

        TrotterPiece ma;
        ma.name = "H_A";
        ma.kind = TrotterKind::GaugeDiagonal;
        ma.id.kind = PieceKind::Magnetic;
        ma.diag = build_H_A(lay, p).diagonal_values();
        ma.empty = false;
        plan.pieces.push_back(std::move(ma));
    }

    if (lay.has_fermions()) {
        const bool currents = lay.sector == Sector::Coupled && p.g != 0.0;
        const auto terms =
            enumerate_fermion_terms(lay.geom, lay.path, p.g, p.mass, p.wilson, currents);

        for (int parity = 0; parity < 2; ++parity)
            for (int axis = 0; axis < 3; ++axis) {
                if (lay.geom.dims[axis] < 2) continue;  // no bonds along a unit extent
                for (int cls : {11, 12, 13}) {
                    TrotterPiece hop;
                    hop.id = {PieceKind::Hop, axis, parity, cls};
                    hop.name = piece_name(hop.id);
                    hop.kind = TrotterKind::HermitianPairs;
                    for (const auto& term : terms)
                        if (term.piece.kind == PieceKind::Hop && term.piece.axis == axis &&
                            term.piece.parity == parity && term.piece.pair_class == cls)
                            hop.terms.push_back(term);
                    hop.empty = hop.terms.empty();
                    plan.pieces.push_back(std::move(hop));
                }
            }

        Eigen::MatrixXd w_perp;
        if (p.transverse_interaction && lay.sector == Sector::Coupled)
            w_perp = transverse_weight_matrix(lay.geom);

        TrotterPiece s11;
        s11.name = "onsite_s11";
        s11.kind = TrotterKind::FullDiagonal;
        s11.id.kind = PieceKind::OnsiteS11;
        std::vector<FermionTerm> diag_terms;
        for (const auto& term : terms)
            if (term.piece.kind == PieceKind::OnsiteS11) diag_terms.push_back(term);
        s11.diag = full_diag_from_terms(diag_terms, lay, p, &w_perp);
        if (lay.sector == Sector::Coupled)  // Coulomb diagonal rides with this piece
            s11.diag += build_H_C(lay, p).diagonal_values();
        s11.terms = std::move(diag_terms);
        s11.empty = s11.terms.empty() && s11.diag.cwiseAbs().maxCoeff() <= 1e-15;
        plan.pieces.push_back(std::move(s11));

        for (PieceKind kind : {PieceKind::OnsiteS12, PieceKind::OnsiteS21}) {
            TrotterPiece half;
            half.name = kind == PieceKind::OnsiteS12 ? "onsite_s12" : "onsite_s21";
            half.kind = TrotterKind::OnsiteHalf;
            half.id.kind = kind;
            for (const auto& term : terms)
                if (term.piece.kind == kind) half.terms.push_back(term);
            half.empty = half.terms.empty();
            plan.pieces.push_back(std::move(half));
        }
    }
    return plan;
}

std::vector<std::pair<std::string, bool>> plan_piece_names(const LatticeGeometry& geom,
                                                           Sector sector) {
    std::vector<std::pair<std::string, bool>> out;
    const bool gauge = sector != Sector::FermionOnly;
    const bool fermions = sector != Sector::GaugeOnly;
    if (gauge) {
        out.emplace_back("H_Pi", false);
        out.emplace_back("H_A", false);
    }
    if (fermions) {
        // nominal couplings: emptiness here is structural, not parametric
        const SnakePath path = snake_path(geom);
        const auto terms = enumerate_fermion_terms(geom, path, 1.0, 1.0, 1.0, gauge);
        auto count_of = [&](const PieceId& id) {
            int n = 0;
            for (const auto& term : terms)
                if (term.piece.kind == id.kind && term.piece.axis == id.axis &&
                    term.piece.parity == id.parity && term.piece.pair_class == id.pair_class)
                    ++n;
            return n;
        };
        for (int parity = 0; parity < 2; ++parity)
            for (int axis = 0; axis < 3; ++axis) {
                if (geom.dims[axis] < 2) continue;  // no bonds along a unit extent
                for (int cls : {11, 12, 13}) {
                    const PieceId id{PieceKind::Hop, axis, parity, cls};
                    out.emplace_back(piece_name(id), count_of(id) == 0);
                }
            }
        int s11 = 0, s12 = 0, s21 = 0;
        for (const auto& term : terms) {
            if (term.piece.kind == PieceKind::OnsiteS11) ++s11;
            if (term.piece.kind == PieceKind::OnsiteS12) ++s12;
            if (term.piece.kind == PieceKind::OnsiteS21) ++s21;
        }
        out.emplace_back("onsite_s11", s11 == 0);
        out.emplace_back("onsite_s12", s12 == 0);
        out.emplace_back("onsite_s21", s21 == 0);
    }
    return out;
}

OperatorMatrix materialize_piece(const TrotterPiece& piece, const SpaceLayout& lay,
                                 const HamiltonianParams& p) {
    switch (piece.kind) {
        case TrotterKind::Conjugate:
            return build_H_Pi(lay, p);
        case TrotterKind::GaugeDiagonal:
        case TrotterKind::FullDiagonal:
            return OperatorMatrix::diagonal(piece.diag.size() == lay.dim
                                                ? piece.diag
                                                : Eigen::VectorXd::Zero(lay.dim));
        case TrotterKind::HermitianPairs:
        case TrotterKind::OnsiteHalf: {
            bool any_attached = false;
            for (const auto& term : piece.terms)
                if (term.attach_register >= 0) any_attached = true;
            if (!any_attached) {
                // no field factors: matrix-free strings, valid at any dimension
                PauliSum sum;
                for (const auto& term : piece.terms) {
                    sum.push_back(term.op);
                    if (term.add_adjoint) sum.push_back(adjoint(term.op));
                }
                return OperatorMatrix::strings(lay.dim, std::move(sum));
            }
            Eigen::MatrixXd w_perp;
            if (p.transverse_interaction && lay.sector == Sector::Coupled)
                w_perp = transverse_weight_matrix(lay.geom);
            std::vector<Triplet> t;
            for (const auto& term : piece.terms) {
                Eigen::VectorXd attach;
                if (term.attach_register >= 0) {
                    attach.resize(lay.gauge_dim);
                    for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                        if (p.transverse_interaction) {
                            double acc = 0.0;
                            for (int m = 0; m < lay.n_gauge_registers; ++m) {
                                const double wv = w_perp(term.attach_register, m);
                                if (wv != 0.0)
                                    acc += wv * lay.grid.value(lay.gauge_level(g, m));
                            }
                            attach[g] = acc;
                        } else {
                            attach[g] =
                                lay.grid.value(lay.gauge_level(g, term.attach_register));
                        }
                    }
                }
                for (int pass = 0; pass < (term.add_adjoint ? 2 : 1); ++pass) {
                    const CompiledString cs =
                        compile_string(pass == 0 ? term.op : adjoint(term.op));
                    for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                        const double w = term.attach_register >= 0 ? attach[g] : 1.0;
                        if (w == 0.0) continue;
                        const std::int64_t base = g * lay.fermion_dim;
                        for (std::int64_t f = 0; f < lay.fermion_dim; ++f) {
                            const auto uf = std::uint64_t(f);
                            if ((uf & cs.require_mask) != cs.require_value) continue;
                            const double sign =
                                (std::popcount(uf & cs.z_mask) & 1) ? -1.0 : 1.0;
                            t.emplace_back(base + std::int64_t(uf ^ cs.flip_mask), base + f,
                                           cs.base * sign * w);
                        }
                    }
                }
            }
            return OperatorMatrix::sparse(lay.dim, t);
        }
    }
    throw internal_error("bad trotter piece kind");
}

TrotterEvolver::TrotterEvolver(const TrotterPlan& plan) : plan_(plan) {
    const SpaceLayout& lay = plan_.lay;
    const double dt = plan_.dt;

    if (lay.has_gauge()) {
        dft_ = centered_dft(lay.grid.n_qubits);
        dft_adj_ = dft_.adjoint();
    }

    Eigen::MatrixXd w_perp;
    if (plan_.params.transverse_interaction && lay.sector == Sector::Coupled)
        w_perp = transverse_weight_matrix(lay.geom);

    std::map<int, SiteJoint> joint_by_site;
    for (const auto& piece : plan_.pieces) {
        switch (piece.kind) {
            case TrotterKind::Conjugate: {
                // quadratic phase over conjugate-basis levels
                const ConjugateGrid cg = make_conjugate_grid(lay.grid);
                Eigen::VectorXcd phases(lay.gauge_dim);
                const int nreg = lay.n_gauge_registers;
                for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                    double e = 0.0;
                    for (int m = 0; m < nreg; ++m) {
                        const double pm = cg.value(lay.gauge_level(g, m));
                        for (int mp = 0; mp < nreg; ++mp) {
                            const double w = piece.conj_weights(m, mp);
                            if (w != 0.0) e += 0.5 * w * pm * cg.value(lay.gauge_level(g, mp));
                        }
                    }
                    phases[g] = std::polar(1.0, -dt * e);
                }
                conj_phases_ = std::move(phases);
                break;
            }
            case TrotterKind::GaugeDiagonal:
            case TrotterKind::FullDiagonal: {
                Eigen::VectorXcd phases(lay.dim);
                for (std::int64_t i = 0; i < lay.dim; ++i)
                    phases[i] = std::polar(1.0, -dt * piece.diag[i]);
                diag_phases_[piece.name] = std::move(phases);
                break;
            }
            case TrotterKind::HermitianPairs: {
                std::vector<PairRotation> rots;
                for (const auto& term : piece.terms) {
                    PairRotation r;
                    r.cs = compile_string(term.op);
                    r.magnitude = std::abs(r.cs.base);
                    rots.push_back(r);
                }
                pair_rotations_[piece.name] = std::move(rots);
                break;
            }
            case TrotterKind::OnsiteHalf: {
                for (const auto& term : piece.terms) {
                    SiteJoint& joint = joint_by_site[term.site];
                    joint.site = term.site;
                    if (joint.constant.size() == 0)
                        joint.constant = Eigen::MatrixXcd::Zero(16, 16);
                    // shift the on-site string into the 4-qubit nibble
                    PauliString local = term.op;
                    const int base_q = 4 * lay.path.path_position[term.site];
                    for (auto& f : local.factors) f.qubit -= base_q;
                    const Eigen::MatrixXcd m = dense(local, 4);
                    if (term.attach_register < 0) {
                        joint.constant += m;
                    } else {
                        Eigen::VectorXd dvec(lay.gauge_dim);
                        for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
                            if (plan_.params.transverse_interaction) {
                                double acc = 0.0;
                                for (int mm = 0; mm < lay.n_gauge_registers; ++mm) {
                                    const double wv = w_perp(term.attach_register, mm);
                                    if (wv != 0.0)
                                        acc += wv * lay.grid.value(lay.gauge_level(g, mm));
                                }
                                dvec[g] = acc;
                            } else {
                                dvec[g] =
                                    lay.grid.value(lay.gauge_level(g, term.attach_register));
                            }
                        }
                        // merge generators sharing a register
                        bool merged = false;
                        for (size_t k = 0; k < joint.attached.size(); ++k) {
                            if (joint.attached[k].first == term.attach_register) {
                                joint.attached[k].second += m;
                                merged = true;
                                break;
                            }
                        }
                        if (!merged) {
                            joint.attached.emplace_back(term.attach_register, m);
                            joint.attach_diagonals.push_back(std::move(dvec));
                        }
                    }
                }
                has_joint_ = true;
                break;
            }
        }
    }
    for (auto& [site, joint] : joint_by_site) joints_.push_back(std::move(joint));
}

namespace {

// In-place dense matrix on one gauge register of the state tensor.
void apply_register_matrix(Eigen::VectorXcd& state, const SpaceLayout& lay, int reg,
                           const Eigen::MatrixXcd& m) {
    const int levels = lay.grid.levels;
    const std::int64_t stride = lay.fermion_dim << (lay.grid.n_qubits * reg);
    const std::int64_t block = stride * levels;
    Eigen::VectorXcd scratch(levels);
    for (std::int64_t base = 0; base < state.size(); base += block) {
        for (std::int64_t off = 0; off < stride; ++off) {
            for (int k = 0; k < levels; ++k) scratch[k] = state[base + off + k * stride];
            scratch = m * scratch;
            for (int k = 0; k < levels; ++k) state[base + off + k * stride] = scratch[k];
        }
    }
}

}  // namespace

void TrotterEvolver::apply_conjugate(const TrotterPiece& piece, Eigen::VectorXcd& state) const {
    const SpaceLayout& lay = plan_.lay;
    for (int m = 0; m < lay.n_gauge_registers; ++m) apply_register_matrix(state, lay, m, dft_);
    for (std::int64_t g = 0; g < lay.gauge_dim; ++g)
        state.segment(g * lay.fermion_dim, lay.fermion_dim) *= conj_phases_[g];
    for (int m = 0; m < lay.n_gauge_registers; ++m)
        apply_register_matrix(state, lay, m, dft_adj_);
}

void TrotterEvolver::apply_diagonal(const Eigen::VectorXcd& phases,
                                    Eigen::VectorXcd& state) const {
    state.array() *= phases.array();
}

void TrotterEvolver::apply_pairs(const TrotterPiece& piece, Eigen::VectorXcd& state) const {
    const double dt = plan_.dt;
    const auto& rots = pair_rotations_.at(piece.name);
    for (const auto& r : rots) {
        if (r.magnitude == 0.0) continue;
        const double c = std::cos(r.magnitude * dt);
        const double s = std::sin(r.magnitude * dt);
        const std::complex<double> mi(0.0, -1.0);
        for (std::int64_t b = 0; b < state.size(); ++b) {
            const auto ub = std::uint64_t(b);
            if ((ub & r.cs.require_mask) != r.cs.require_value) continue;
            const double sign = (std::popcount(ub & r.cs.z_mask) & 1) ? -1.0 : 1.0;
            const std::complex<double> phi = r.cs.base * sign;
            const std::complex<double> u = phi / r.magnitude;
            const std::int64_t bp = std::int64_t(ub ^ r.cs.flip_mask);
            const std::complex<double> vb = state[b];
            const std::complex<double> vbp = state[bp];
            state[b] = c * vb + mi * s * std::conj(u) * vbp;
            state[bp] = mi * s * u * vb + c * vbp;
        }
    }
}

void TrotterEvolver::apply_joint_onsite(Eigen::VectorXcd& state) const {
    const SpaceLayout& lay = plan_.lay;
    const double dt = plan_.dt;
    for (const auto& joint : joints_) {
        const int shift = 4 * lay.path.path_position[joint.site];
        const std::int64_t nib_mask = std::int64_t(0xF) << shift;
        Eigen::VectorXcd scratch(16);
        for (std::int64_t g = 0; g < lay.gauge_dim; ++g) {
            std::vector<double> key(joint.attached.size());
            for (size_t k = 0; k < joint.attached.size(); ++k)
                key[k] = joint.attach_diagonals[k][g];
            auto it = joint.cache.find(key);
            if (it == joint.cache.end()) {
                Eigen::MatrixXcd gen = joint.constant;
                for (size_t k = 0; k < joint.attached.size(); ++k)
                    gen += key[k] * joint.attached[k].second;
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gen);
                Eigen::VectorXcd phases(16);
                for (int i = 0; i < 16; ++i)
                    phases[i] = std::polar(1.0, -dt * es.eigenvalues()[i]);
                const Eigen::MatrixXcd u = es.eigenvectors() * phases.asDiagonal() *
                                           es.eigenvectors().adjoint();
                it = joint.cache.emplace(std::move(key), u).first;
            }
            const Eigen::MatrixXcd& u = it->second;
            const std::int64_t base = g * lay.fermion_dim;
            // iterate over fermion configurations with the nibble cleared
            for (std::int64_t f = 0; f < lay.fermion_dim; ++f) {
                if (f & nib_mask) continue;
                for (int k = 0; k < 16; ++k)
                    scratch[k] = state[base + (f | (std::int64_t(k) << shift))];
                scratch = u * scratch;
                for (int k = 0; k < 16; ++k)
                    state[base + (f | (std::int64_t(k) << shift))] = scratch[k];
            }
        }
    }
}

Eigen::VectorXcd TrotterEvolver::step(Eigen::VectorXcd state) const {
    for (const auto& piece : plan_.pieces) {
        switch (piece.kind) {
            case TrotterKind::Conjugate:
                apply_conjugate(piece, state);
                break;
            case TrotterKind::GaugeDiagonal:
            case TrotterKind::FullDiagonal:
                apply_diagonal(diag_phases_.at(piece.name), state);
                break;
            case TrotterKind::HermitianPairs:
                if (!piece.empty) apply_pairs(piece, state);
                break;
            case TrotterKind::OnsiteHalf:
                // s12 and s21 are exponentiated jointly on the first of the two
                if (piece.id.kind == PieceKind::OnsiteS12 && has_joint_)
                    apply_joint_onsite(state);
                break;
        }
    }
    return state;
}

Eigen::VectorXcd TrotterEvolver::evolve(Eigen::VectorXcd state) const {
    for (int s = 0; s < plan_.steps; ++s) state = step(std::move(state));
    return state;
}

Eigen::VectorXcd exact_evolve(const HamiltonianPieces& pieces, Eigen::VectorXcd state,
                              double t) {
    const SpMat h = assemble_total(pieces);
    return expmv_hermitian([&h](const Eigen::VectorXcd& v) { return h * v; }, std::move(state),
                           t);
}

}  // namespace cgqed
