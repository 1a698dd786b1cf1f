#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <vector>

#include "cgqed/pauli.hpp"

namespace cgqed {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

// Materialization limits: dense matrices up to 2^12, sparse up to 2^14.
inline constexpr std::int64_t kDenseCap = std::int64_t(1) << 12;
inline constexpr std::int64_t kSparseCap = std::int64_t(1) << 14;

// A linear operator on the simulation space with one of four storages:
//  Sparse       explicit sparse matrix (dim <= kSparseCap)
//  Diagonal     real diagonal (any dim that fits a vector)
//  Strings      Pauli-string sum, applied matrix-free
//  GaugeBlocks  one dense fermion-space block per gauge basis state
class OperatorMatrix {
  public:
    enum class Storage { Sparse, Diagonal, Strings, GaugeBlocks };

    static OperatorMatrix sparse(std::int64_t dim, const std::vector<Triplet>& entries);
    static OperatorMatrix sparse(SpMat m);
    static OperatorMatrix diagonal(Eigen::VectorXd d);
    static OperatorMatrix strings(std::int64_t dim, PauliSum sum);
    static OperatorMatrix gauge_blocks(std::int64_t gauge_dim,
                                       std::vector<Eigen::MatrixXcd> blocks);
    static OperatorMatrix zero(std::int64_t dim);

    std::int64_t dim() const { return dim_; }
    Storage storage() const { return storage_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

    // Conversions; throw capability_error beyond the materialization caps.
    SpMat to_sparse() const;
    Eigen::MatrixXcd to_dense() const;

    const Eigen::VectorXd& diagonal_values() const;
    const PauliSum& string_terms() const;
    const std::vector<Eigen::MatrixXcd>& blocks() const;

    // max |entry| of (M - M^dag); 0 exactly for Diagonal storage.
    double hermiticity_error() const;

    bool is_diagonal_storage() const { return storage_ == Storage::Diagonal; }

  private:
    std::int64_t dim_ = 0;
    Storage storage_ = Storage::Sparse;
    SpMat sp_;
    Eigen::VectorXd diag_;
    PauliSum strings_;
    std::vector<CompiledString> compiled_;
    std::int64_t gauge_dim_ = 0;
    std::int64_t fermion_dim_ = 0;
    std::vector<Eigen::MatrixXcd> blocks_;
};

// Sum of operators materialized as a sparse matrix (dim <= kSparseCap).
SpMat sparse_sum(const std::vector<const OperatorMatrix*>& terms);

double expectation_real(const OperatorMatrix& op, const Eigen::VectorXcd& v);

// max |entry| of the difference between two materializable operators.
double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b);
double max_abs(const SpMat& m);

// Splits a sparse operator on a coupled space into per-gauge-state fermion
// blocks; throws internal_error if any entry couples distinct gauge states.
std::vector<Eigen::MatrixXcd> gauge_blocks_of(const SpMat& m, std::int64_t gauge_dim,
                                              std::int64_t fermion_dim);

}  // namespace cgqed
