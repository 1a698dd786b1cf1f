#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cgqed {

// Uniform grid of 2^n_qubits field values centered on zero:
// value(k) = -a_max + k * delta_a, spacing delta_a = 2 a_max / (2^n - 1).
struct FieldGrid {
    double a_max = 0.0;
    int n_qubits = 0;
    int levels = 0;
    double delta_a = 0.0;

    double value(int k) const { return -a_max + k * delta_a; }
};

FieldGrid make_field_grid(double a_max, int n_qubits);

// Conjugate-variable grid induced by a FieldGrid under the centered discrete
// Fourier transform: pi_max = pi / delta_a, same level count, uniform spacing.
struct ConjugateGrid {
    double pi_max = 0.0;
    int levels = 0;
    double spacing = 0.0;

    double value(int k) const { return -pi_max + k * spacing; }
};

ConjugateGrid make_conjugate_grid(const FieldGrid& grid);

// Centered unitary DFT: F[l,k] = exp(-2*pi*i*(l-c)*(k-c)/N) / sqrt(N),
// c = (N-1)/2.  Maps the field eigenbasis to the conjugate eigenbasis.
Eigen::MatrixXcd centered_dft(int n_qubits);

// Field values as a vector (the diagonal of the field operator).
Eigen::VectorXd field_values(const FieldGrid& grid);

// Conjugate operator in the field basis: F^dag * diag(conjugate values) * F.
// Hermitian; exactly diagonal after conjugation by F.
Eigen::MatrixXcd conjugate_operator(const FieldGrid& grid);

}  // namespace cgqed
