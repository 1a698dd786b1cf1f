#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace cgqed {

using ApplyFn = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

// exp(-i t H) v for Hermitian H, via Lanczos with full reorthogonalization
// and adaptive substepping.  Relative accuracy ~tol.
Eigen::VectorXcd expmv_hermitian(const ApplyFn& apply, Eigen::VectorXcd v, double t,
                                 double tol = 1e-11, int max_krylov = 48);

// (lambda_min, lambda_max) of a Hermitian operator by Lanczos from a seeded
// random start vector.
std::pair<double, double> extreme_eigenvalues(const ApplyFn& apply, std::int64_t dim,
                                              int iterations = 80,
                                              std::uint64_t seed = 0x5eed);

// ||M||_2 for a general operator, via power iteration on M^dag M.
double spectral_norm(const ApplyFn& apply, const ApplyFn& apply_adjoint, std::int64_t dim,
                     int iterations = 120, std::uint64_t seed = 0x5eed);

Eigen::VectorXcd random_state(std::int64_t dim, std::uint64_t seed);

}  // namespace cgqed
