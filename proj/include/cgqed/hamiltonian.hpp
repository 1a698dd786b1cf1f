#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cgqed/layout.hpp"
#include "cgqed/operator_matrix.hpp"
#include "cgqed/pauli.hpp"

namespace cgqed {

struct HamiltonianParams {
    LatticeGeometry geom = make_geometry(2, 1, 1);
    double g = 0.0;
    double mass = 0.0;
    double wilson = 1.0;
    int n_A = 1;
    double a_max = 1.0;
    // When true the vector potential entering the current coupling is
    // transverse-projected (zero mode dropped); when false the coupling uses
    // the raw link field.
    bool transverse_interaction = true;
    Sector sector = Sector::Coupled;
};

void validate_params(const HamiltonianParams& p);  // throws config_error
SpaceLayout make_layout(const HamiltonianParams& p);

// Dirac structure (Weyl basis): gamma0 off-diagonal identity blocks,
// alpha^j = gamma0 * gamma^j = diag(-sigma_j, +sigma_j), j in 1..3.
Eigen::Matrix4cd gamma0_matrix();
Eigen::Matrix4cd alpha_matrix(int j);

// Single-particle energy of the Wilson fermion at a lattice momentum:
// sqrt(sum_i sin^2 p_i + (m + 2 r sum_i sin^2(p_i/2))^2).
double dispersion(const MomentumMode& mode, double mass, double wilson);
double dispersion_bound(double mass, double wilson);  // sqrt(3 + m^2 + 12 m r + 36 r^2)
double shift_constant(int volume, double mass, double wilson);

// Momentum-space transverse projector delta_ij - d_i d_j^* / |d|^2 with
// d_i = e^{i p_i} - 1.  Hermitian, idempotent; throws on the zero mode.
Eigen::Matrix3cd transverse_projector(const MomentumMode& mode);

// Position-space kernels on link registers m = 3*site + dir (3V x 3V, real
// symmetric).  longitudinal_kernel is the projector onto discrete gradients
// (zero mode excluded); conjugate_weight_matrix = I - longitudinal_kernel;
// transverse_weight_matrix is the position transform of the transverse
// projector with the zero mode dropped.
Eigen::MatrixXd longitudinal_kernel(const LatticeGeometry& geom);
Eigen::MatrixXd conjugate_weight_matrix(const LatticeGeometry& geom);
Eigen::MatrixXd transverse_weight_matrix(const LatticeGeometry& geom);

// Classical field functionals; `field` is indexed by register m = 3*site+dir.
double magnetic_energy(const Eigen::VectorXd& field, const LatticeGeometry& geom);
Eigen::VectorXd discrete_gradient(const Eigen::VectorXd& site_function,
                                  const LatticeGeometry& geom);

// Fermion-space bilinears as Pauli-string sums (coupling factors excluded).
PauliSum charge_density(int site, const SnakePath& path);           // psi^dag psi
PauliSum current_component(int site, int j, const SnakePath& path); // psi^dag alpha^j psi
PauliSum total_charge_strings(const LatticeGeometry& geom, const SnakePath& path, double g);

// --- shared term catalogue -------------------------------------------------
//
// Every fermionic term of the Hamiltonian (hopping, on-site mass/Wilson, and
// current-field couplings) is enumerated once; builders and the product-
// formula partition both consume this list, so the partition is complete by
// construction.

enum class PieceKind { KineticConjugate, Magnetic, Hop, OnsiteS11, OnsiteS12, OnsiteS21 };

struct PieceId {
    PieceKind kind = PieceKind::Hop;
    int axis = -1;        // 0..2 for hops
    int parity = -1;      // 0 even / 1 odd bonds (tail coordinate along axis)
    int pair_class = 0;   // 11, 12 or 13 for hops
};

std::string piece_name(const PieceId& id);

struct FermionTerm {
    PauliString op;            // includes its coefficient
    bool add_adjoint = false;  // term enters as op + op^dag
    int attach_register = -1;  // link register whose field multiplies op, or -1
    int site = -1;             // owning site (for on-site grouping)
    PieceId piece;
};

std::vector<FermionTerm> enumerate_fermion_terms(const LatticeGeometry& geom,
                                                 const SnakePath& path, double g,
                                                 double mass, double wilson,
                                                 bool include_currents);

// Spinor-pair class of a bilinear (a,b), 0-indexed components: 11 diagonal,
// 12 within an upper/lower Weyl pair, 13 across pairs.
int pair_class_of(int a, int b);
bool in_lowering_half(int a, int b);  // daggered component in {0,3}, other in {1,2}

// --- Hamiltonian pieces on the layout's space ------------------------------

// Conjugate-field quadratic form (1/2) sum_{m,m'} W_{mm'} Pi_m Pi_m' with
// W = I - longitudinal kernel.  Positive semidefinite.
OperatorMatrix build_H_Pi(const SpaceLayout& lay, const HamiltonianParams& p);
// Same quadratic form for an arbitrary symmetric register weight matrix.
OperatorMatrix build_conjugate_quadratic(const SpaceLayout& lay, const Eigen::MatrixXd& weights);
// Same operator assembled per momentum mode from weighted register sums
// (independent construction used for cross-checks).
OperatorMatrix build_H_Pi_momentum_form(const SpaceLayout& lay, const HamiltonianParams& p);
// Literal double-difference form with the 1/(4 pi r) kernel (coincident
// points excluded); retained for comparison reports.
OperatorMatrix build_H_Pi_coulomb_kernel(const SpaceLayout& lay, const HamiltonianParams& p);

// Magnetic energy: diagonal in the field basis, (1/2) sum of squared
// forward-difference curls.  Vanishes exactly on discrete gradients.
OperatorMatrix build_H_A(const SpaceLayout& lay, const HamiltonianParams& p);
// First (Laplacian) part only; used by the literal-coupling square identity.
OperatorMatrix build_H_A_laplacian(const SpaceLayout& lay, const HamiltonianParams& p);

// Current-field coupling -sum_{x,i} J^i(x) A_i(x), with A transverse-
// projected when params.transverse_interaction is set.
OperatorMatrix build_H_I(const SpaceLayout& lay, const HamiltonianParams& p);

// Charge-charge Coulomb term (g^2/2) sum_{x != y} rho(x) rho(y) k(x,y).
OperatorMatrix build_H_C(const SpaceLayout& lay, const HamiltonianParams& p);

// Wilson fermion kinetic + mass term.
OperatorMatrix build_H_f(const SpaceLayout& lay, const HamiltonianParams& p);

// Completed square sum_{p != 0, j} 2 s(p) M^dag M with
// M = A_j(p) - J_j(p) / (4 s(p)); positive semidefinite, block-diagonal in
// the gauge index.  Obeys  CS = H_A + H_I + CT  (transverse coupling), or
// CS = H_A_laplacian + H_I + CT + R with the zero-mode remainder R (literal).
OperatorMatrix build_completed_square(const SpaceLayout& lay, const HamiltonianParams& p);
// Fermion-space counterterm (1/8) sum_{p != 0, j} J^dag J / s(p).
Eigen::MatrixXcd counterterm_fermion_matrix(const SpaceLayout& lay, const HamiltonianParams& p);
// Zero-mode remainder sum_j J_j(0) A_j(0) (literal-coupling identity only).
OperatorMatrix build_zero_mode_remainder(const SpaceLayout& lay, const HamiltonianParams& p);

struct HamiltonianPieces {
    OperatorMatrix h_pi, h_a, h_i, h_c, h_f;
    double shift = 0.0;
    bool has_gauge = false, has_fermions = false, has_coupling = false;

    std::vector<const OperatorMatrix*> active() const;
};

HamiltonianPieces build_all(const SpaceLayout& lay, const HamiltonianParams& p);
SpMat assemble_total(const HamiltonianPieces& pieces);

// One-body kernel of H_f (4V x 4V) extracted by applying the operator to
// single-particle states; eigenvalues come in +-dispersion pairs.
Eigen::MatrixXcd one_body_kernel(const OperatorMatrix& h_f, const SpaceLayout& lay);

}  // namespace cgqed
