#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cgqed {

// Single-qubit letters closed under multiplication up to a phase in
// {+1,-1,+i,-i} or annihilation.  In the computational basis (|0>,|1>),
// bit 1 means "mode occupied":
//   Raise = |1><0|, Lower = |0><1|, Occ = |1><1|, Empty = |0><0|.
enum class POp : std::uint8_t { X, Y, Z, Raise, Lower, Occ, Empty };

const char* pop_name(POp op);

struct PauliFactor {
    int qubit = 0;
    POp op = POp::Z;
};

// A scaled tensor product of single-qubit letters on distinct qubits,
// sorted by qubit index.  Identity letters are never stored.
struct PauliString {
    std::complex<double> coeff{1.0, 0.0};
    std::vector<PauliFactor> factors;

    bool is_zero() const { return std::abs(coeff) == 0.0; }
};

using PauliSum = std::vector<PauliString>;

// Exact symbolic product; returns a string with coeff 0 if the product
// annihilates (e.g. Raise*Raise on the same qubit).
PauliString multiply(const PauliString& a, const PauliString& b);
PauliString adjoint(const PauliString& s);

PauliSum multiply(const PauliSum& a, const PauliSum& b);
PauliSum adjoint(const PauliSum& s);

// Combine strings with identical factor lists; drop coefficients below tol.
PauliSum simplify(PauliSum sum, double tol = 1e-14);

PauliSum add(PauliSum a, const PauliSum& b);
PauliSum scale(PauliSum s, std::complex<double> c);

// a*b - b*a, simplified.  Empty result means the operators commute exactly,
// independent of register dimension.
PauliSum commutator(const PauliSum& a, const PauliSum& b);
double max_abs_coeff(const PauliSum& s);

// Jordan-Wigner images of annihilation / creation of fermion mode l
// (Z strings on all modes below l along the ordering).
PauliString jw_annihilate(int mode);
PauliString jw_create(int mode);

// psi^dag_a psi_b as a Pauli string (single string for any a, b).
PauliString jw_bilinear(int mode_a, int mode_b);

// Precompiled basis-state action: a string maps basis state b to
// phase * |b ^ flip_mask> when (b & require_mask) == require_value,
// and to zero otherwise; phase = base * (-1)^popcount(b & z_mask).
struct CompiledString {
    std::complex<double> base;
    std::uint64_t require_mask = 0;
    std::uint64_t require_value = 0;
    std::uint64_t flip_mask = 0;
    std::uint64_t z_mask = 0;
};

CompiledString compile_string(const PauliString& s);

// out += (string) * in, both of length 2^n_qubits.
void apply_string(const CompiledString& cs, const Eigen::VectorXcd& in,
                  Eigen::VectorXcd& out);
void apply_sum(const PauliSum& sum, const Eigen::VectorXcd& in,
               Eigen::VectorXcd& out);

Eigen::MatrixXcd dense(const PauliString& s, int n_qubits);
Eigen::MatrixXcd dense(const PauliSum& sum, int n_qubits);

int highest_qubit(const PauliSum& sum);  // -1 for pure scalars

std::string to_string(const PauliString& s);

}  // namespace cgqed
