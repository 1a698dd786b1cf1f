#include "cgqed/gauge_basis.hpp"

#include <cmath>
#include <numbers>

#include "cgqed/errors.hpp"

namespace cgqed {

FieldGrid make_field_grid(double a_max, int n_qubits) {
    if (!(a_max > 0.0)) throw domain_error("field grid requires a_max > 0");
    if (n_qubits < 1) throw domain_error("field grid requires at least one qubit");
    if (n_qubits > 20) throw domain_error("field grid register too wide");
    FieldGrid grid;
    grid.a_max = a_max;
    grid.n_qubits = n_qubits;
    grid.levels = 1 << n_qubits;
    grid.delta_a = 2.0 * a_max / (grid.levels - 1);
    return grid;
}

ConjugateGrid make_conjugate_grid(const FieldGrid& grid) {
    ConjugateGrid cg;
    cg.levels = grid.levels;
    cg.pi_max = std::numbers::pi / grid.delta_a;
    cg.spacing = 2.0 * cg.pi_max / (cg.levels - 1);
    return cg;
}

Eigen::MatrixXcd centered_dft(int n_qubits) {
    if (n_qubits < 1) throw domain_error("centered_dft requires at least one qubit");
    const int n = 1 << n_qubits;
    const double c = 0.5 * (n - 1);
    const double norm = 1.0 / std::sqrt(double(n));
    Eigen::MatrixXcd f(n, n);
    for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
            const double phase = -2.0 * std::numbers::pi * (l - c) * (k - c) / n;
            f(l, k) = norm * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return f;
}

Eigen::VectorXd field_values(const FieldGrid& grid) {
    Eigen::VectorXd v(grid.levels);
    for (int k = 0; k < grid.levels; ++k) v[k] = grid.value(k);
    return v;
}

Eigen::MatrixXcd conjugate_operator(const FieldGrid& grid) {
    const ConjugateGrid cg = make_conjugate_grid(grid);
    const Eigen::MatrixXcd f = centered_dft(grid.n_qubits);
    Eigen::VectorXd d(cg.levels);
    for (int k = 0; k < cg.levels; ++k) d[k] = cg.value(k);
    return f.adjoint() * d.asDiagonal() * f;
}

}  // namespace cgqed
