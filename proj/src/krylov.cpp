#include "cgqed/krylov.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "cgqed/errors.hpp"

namespace cgqed {

namespace {

using cplx = std::complex<double>;

struct LanczosBasis {
    std::vector<Eigen::VectorXcd> v;
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;  // beta[j] couples v[j] and v[j+1]
    int size = 0;
    bool breakdown = false;
};

LanczosBasis lanczos(const ApplyFn& apply, const Eigen::VectorXcd& start, int m) {
    LanczosBasis basis;
    basis.alpha.resize(m);
    basis.beta.resize(m);
    basis.v.reserve(m + 1);
    basis.v.push_back(start.normalized());
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXcd w = apply(basis.v[j]);
        const double a = std::real(basis.v[j].dot(w));
        basis.alpha[j] = a;
        w -= a * basis.v[j];
        if (j > 0) w -= basis.beta[j - 1] * basis.v[j - 1];
        // full reorthogonalization for numerical stability
        for (int r = 0; r <= j; ++r) w -= basis.v[r].dot(w) * basis.v[r];
        const double b = w.norm();
        basis.size = j + 1;
        if (b < 1e-13) {
            basis.breakdown = true;
            break;
        }
        basis.beta[j] = b;
        basis.v.push_back(w / b);
    }
    return basis;
}

Eigen::MatrixXd tridiagonal(const LanczosBasis& basis, int k) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        t(i, i) = basis.alpha[i];
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = basis.beta[i];
    }
    return t;
}

// exp(-i tau T) e_1 in the Krylov basis.
Eigen::VectorXcd krylov_coefficients(const Eigen::MatrixXd& t, double tau) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& u = es.eigenvectors();
    Eigen::VectorXcd phases(lam.size());
    for (int i = 0; i < lam.size(); ++i) phases[i] = std::polar(1.0, -tau * lam[i]);
    return u.cast<cplx>() * phases.cwiseProduct(u.row(0).transpose().cast<cplx>());
}

}  // namespace

Eigen::VectorXcd random_state(std::int64_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXcd v(dim);
    for (std::int64_t i = 0; i < dim; ++i) {
        const double re = dist(rng);
        const double im = dist(rng);
        v[i] = cplx(re, im);
    }
    v.normalize();
    return v;
}

Eigen::VectorXcd expmv_hermitian(const ApplyFn& apply, Eigen::VectorXcd v, double t, double tol,
                                 int max_krylov) {
    if (t == 0.0) return v;
    const double norm0 = v.norm();
    if (norm0 == 0.0) return v;

    double remaining = std::abs(t);
    const double sign = t < 0.0 ? -1.0 : 1.0;
    double tau = remaining;
    int guard = 0;
    while (remaining > 1e-15 * std::abs(t)) {
        if (++guard > 10000) throw internal_error("expmv failed to converge");
        const double step = std::min(tau, remaining);
        const LanczosBasis basis = lanczos(apply, v, max_krylov);
        const int m = basis.size;
        Eigen::VectorXcd coeff = krylov_coefficients(tridiagonal(basis, m), sign * step);
        bool ok = basis.breakdown;
        if (!ok && m >= 2) {
            const Eigen::VectorXcd prev =
                krylov_coefficients(tridiagonal(basis, m - 1), sign * step);
            double diff = 0.0;
            for (int i = 0; i < m; ++i) {
                const cplx p = i < m - 1 ? prev[i] : cplx(0, 0);
                diff += std::norm(coeff[i] - p);
            }
            ok = std::sqrt(diff) < tol;
        }
        if (!ok) {
            tau = step / 2.0;
            continue;
        }
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(v.size());
        for (int i = 0; i < m; ++i) next += coeff[i] * basis.v[i];
        v = next * v.norm();  // basis was built from normalized v
        remaining -= step;
    }
    return v;
}

std::pair<double, double> extreme_eigenvalues(const ApplyFn& apply, std::int64_t dim,
                                              int iterations, std::uint64_t seed) {
    const int m = int(std::min<std::int64_t>(iterations, dim));
    const LanczosBasis basis = lanczos(apply, random_state(dim, seed), m);
    const Eigen::MatrixXd t = tridiagonal(basis, basis.size);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

double spectral_norm(const ApplyFn& apply, const ApplyFn& apply_adjoint, std::int64_t dim,
                     int iterations, std::uint64_t seed) {
    Eigen::VectorXcd v = random_state(dim, seed);
    double lambda = 0.0;
    for (int i = 0; i < iterations; ++i) {
        Eigen::VectorXcd w = apply_adjoint(apply(v));
        const double n = w.norm();
        if (n < 1e-300) return 0.0;
        lambda = n;
        v = w / n;
    }
    return std::sqrt(lambda);
}

}  // namespace cgqed
