#include "cgqed/operator_matrix.hpp"

#include <bit>
#include <cmath>

#include "cgqed/errors.hpp"

namespace cgqed {

OperatorMatrix OperatorMatrix::sparse(std::int64_t dim, const std::vector<Triplet>& entries) {
    if (dim > kSparseCap) throw capability_error("sparse operator exceeds 2^14 limit");
    SpMat m(dim, dim);
    m.setFromTriplets(entries.begin(), entries.end());
    m.prune([](auto, auto, const cplx& v) { return std::abs(v) > 1e-15; });
    return sparse(std::move(m));
}

OperatorMatrix OperatorMatrix::sparse(SpMat m) {
    if (m.rows() > kSparseCap) throw capability_error("sparse operator exceeds 2^14 limit");
    OperatorMatrix op;
    op.dim_ = m.rows();
    op.storage_ = Storage::Sparse;
    op.sp_ = std::move(m);
    op.sp_.makeCompressed();
    return op;
}

OperatorMatrix OperatorMatrix::diagonal(Eigen::VectorXd d) {
    OperatorMatrix op;
    op.dim_ = d.size();
    op.storage_ = Storage::Diagonal;
    op.diag_ = std::move(d);
    return op;
}

OperatorMatrix OperatorMatrix::strings(std::int64_t dim, PauliSum sum) {
    OperatorMatrix op;
    op.dim_ = dim;
    op.storage_ = Storage::Strings;
    op.strings_ = std::move(sum);
    op.compiled_.reserve(op.strings_.size());
    for (const auto& s : op.strings_) op.compiled_.push_back(compile_string(s));
    return op;
}

OperatorMatrix OperatorMatrix::gauge_blocks(std::int64_t gauge_dim,
                                            std::vector<Eigen::MatrixXcd> blocks) {
    if (std::int64_t(blocks.size()) != gauge_dim)
        throw internal_error("gauge block count mismatch");
    OperatorMatrix op;
    op.gauge_dim_ = gauge_dim;
    op.fermion_dim_ = blocks.empty() ? 0 : blocks.front().rows();
    op.dim_ = op.gauge_dim_ * op.fermion_dim_;
    op.storage_ = Storage::GaugeBlocks;
    op.blocks_ = std::move(blocks);
    return op;
}

OperatorMatrix OperatorMatrix::zero(std::int64_t dim) {
    return diagonal(Eigen::VectorXd::Zero(dim));
}

Eigen::VectorXcd OperatorMatrix::apply(const Eigen::VectorXcd& v) const {
    if (v.size() != dim_) throw internal_error("operator/vector dimension mismatch");
    switch (storage_) {
        case Storage::Sparse: return sp_ * v;
        case Storage::Diagonal: return diag_.cast<cplx>().cwiseProduct(v);
        case Storage::Strings: {
            Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim_);
            for (const auto& cs : compiled_) apply_string(cs, v, out);
            return out;
        }
        case Storage::GaugeBlocks: {
            Eigen::VectorXcd out(dim_);
            for (std::int64_t g = 0; g < gauge_dim_; ++g)
                out.segment(g * fermion_dim_, fermion_dim_) =
                    blocks_[g] * v.segment(g * fermion_dim_, fermion_dim_);
            return out;
        }
    }
    throw internal_error("bad storage");
}

SpMat OperatorMatrix::to_sparse() const {
    if (dim_ > kSparseCap) throw capability_error("operator exceeds sparse materialization cap");
    switch (storage_) {
        case Storage::Sparse: return sp_;
        case Storage::Diagonal: {
            std::vector<Triplet> t;
            t.reserve(dim_);
            for (std::int64_t i = 0; i < dim_; ++i)
                if (diag_[i] != 0.0) t.emplace_back(i, i, cplx(diag_[i], 0.0));
            SpMat m(dim_, dim_);
            m.setFromTriplets(t.begin(), t.end());
            return m;
        }
        case Storage::Strings: {
            std::vector<Triplet> t;
            for (const auto& cs : compiled_) {
                for (std::int64_t b = 0; b < dim_; ++b) {
                    const auto ub = std::uint64_t(b);
                    if ((ub & cs.require_mask) != cs.require_value) continue;
                    const double sign = (std::popcount(ub & cs.z_mask) & 1) ? -1.0 : 1.0;
                    t.emplace_back(std::int64_t(ub ^ cs.flip_mask), b, cs.base * sign);
                }
            }
            SpMat m(dim_, dim_);
            m.setFromTriplets(t.begin(), t.end());
            m.prune([](auto, auto, const cplx& v) { return std::abs(v) > 1e-15; });
            return m;
        }
        case Storage::GaugeBlocks: {
            std::vector<Triplet> t;
            for (std::int64_t g = 0; g < gauge_dim_; ++g)
                for (std::int64_t c = 0; c < fermion_dim_; ++c)
                    for (std::int64_t r = 0; r < fermion_dim_; ++r)
                        if (std::abs(blocks_[g](r, c)) > 1e-15)
                            t.emplace_back(g * fermion_dim_ + r, g * fermion_dim_ + c,
                                           blocks_[g](r, c));
            SpMat m(dim_, dim_);
            m.setFromTriplets(t.begin(), t.end());
            return m;
        }
    }
    throw internal_error("bad storage");
}

Eigen::MatrixXcd OperatorMatrix::to_dense() const {
    if (dim_ > kDenseCap) throw capability_error("operator exceeds dense materialization cap");
    return Eigen::MatrixXcd(to_sparse());
}

const Eigen::VectorXd& OperatorMatrix::diagonal_values() const {
    if (storage_ != Storage::Diagonal) throw internal_error("not diagonal storage");
    return diag_;
}

const PauliSum& OperatorMatrix::string_terms() const {
    if (storage_ != Storage::Strings) throw internal_error("not string storage");
    return strings_;
}

const std::vector<Eigen::MatrixXcd>& OperatorMatrix::blocks() const {
    if (storage_ != Storage::GaugeBlocks) throw internal_error("not gauge-block storage");
    return blocks_;
}

double OperatorMatrix::hermiticity_error() const {
    switch (storage_) {
        case Storage::Diagonal: return 0.0;
        case Storage::GaugeBlocks: {
            double err = 0.0;
            for (const auto& b : blocks_)
                err = std::max(err, (b - b.adjoint().eval()).cwiseAbs().maxCoeff());
            return err;
        }
        case Storage::Strings: {
            PauliSum diff = strings_;
            PauliSum adj = adjoint(strings_);
            for (auto& s : adj) s.coeff = -s.coeff;
            diff.insert(diff.end(), adj.begin(), adj.end());
            return max_abs_coeff(simplify(std::move(diff)));
        }
        case Storage::Sparse: {
            SpMat d = SpMat(sp_ - SpMat(sp_.adjoint()));
            return max_abs(d);
        }
    }
    throw internal_error("bad storage");
}

SpMat sparse_sum(const std::vector<const OperatorMatrix*>& terms) {
    if (terms.empty()) throw internal_error("empty operator sum");
    SpMat total = terms.front()->to_sparse();
    for (size_t i = 1; i < terms.size(); ++i) total += terms[i]->to_sparse();
    return total;
}

double expectation_real(const OperatorMatrix& op, const Eigen::VectorXcd& v) {
    return std::real(v.dot(op.apply(v)));
}

double max_abs(const SpMat& m) {
    double mx = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
    return mx;
}

double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b) {
    return max_abs(SpMat(a.to_sparse() - b.to_sparse()));
}

std::vector<Eigen::MatrixXcd> gauge_blocks_of(const SpMat& m, std::int64_t gauge_dim,
                                              std::int64_t fermion_dim) {
    std::vector<Eigen::MatrixXcd> blocks(gauge_dim,
                                         Eigen::MatrixXcd::Zero(fermion_dim, fermion_dim));
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SpMat::InnerIterator it(m, k); it; ++it) {
            const std::int64_t gr = it.row() / fermion_dim;
            const std::int64_t gc = it.col() / fermion_dim;
            if (gr != gc) throw internal_error("operator couples distinct gauge states");
            blocks[gr](it.row() % fermion_dim, it.col() % fermion_dim) += it.value();
        }
    }
    return blocks;
}

}  // namespace cgqed
