#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cgqed/hamiltonian.hpp"
#include "cgqed/layout.hpp"
#include "cgqed/operator_matrix.hpp"

namespace cgqed {

enum class TrotterKind { Conjugate, GaugeDiagonal, FullDiagonal, HermitianPairs, OnsiteHalf };

// One exactly-exponentiable piece of the product-formula partition.  All
// terms within a piece commute, so its exponential factorizes term by term.
struct TrotterPiece {
    std::string name;
    TrotterKind kind = TrotterKind::FullDiagonal;
    PieceId id;
    bool empty = true;
    std::vector<FermionTerm> terms;  // HermitianPairs / OnsiteHalf
    Eigen::VectorXd diag;            // GaugeDiagonal / FullDiagonal (full dim)
    Eigen::MatrixXd conj_weights;    // Conjugate
};

struct TrotterPlan {
    SpaceLayout lay;
    HamiltonianParams params;
    std::vector<TrotterPiece> pieces;
    int steps = 1;
    double t_total = 0.0;
    double dt = 0.0;
};

// Fixed piece order: conjugate kinetic, magnetic, even hops (axis-major, pair
// class inner), odd hops, then the on-site diagonal / lowering / raising
// classes.  Axes of extent 1 carry no bonds and drop their descriptors;
// structurally empty classes on live axes are kept as descriptors flagged
// empty.  Throws config_error when a fermionic axis has odd extent >= 3
// (bonds are not two-colorable) or steps < 1.
TrotterPlan build_plan(const SpaceLayout& lay, const HamiltonianParams& p, double t, int steps);

// Descriptor-level piece list in plan order, with structural emptiness, built
// from the term catalogue alone (no state space).  Usable on lattices far too
// large to simulate; 2 gauge + 18 hop + 3 on-site descriptors when coupled
// with every extent >= 2, fewer when an axis has extent 1.
std::vector<std::pair<std::string, bool>> plan_piece_names(const LatticeGeometry& geom,
                                                           Sector sector);

// The piece as an explicit operator (for completeness and commutator checks).
OperatorMatrix materialize_piece(const TrotterPiece& piece, const SpaceLayout& lay,
                                 const HamiltonianParams& p);

// Applies one first-order product-formula step with exact per-piece
// exponentials.  The two on-site lowering/raising half-classes are applied
// jointly as per-site unitaries (their sum is Hermitian; sites commute).
class TrotterEvolver {
  public:
    TrotterEvolver(const TrotterPlan& plan);

    Eigen::VectorXcd step(Eigen::VectorXcd state) const;
    Eigen::VectorXcd evolve(Eigen::VectorXcd state) const;  // all plan steps

    const TrotterPlan& plan() const { return plan_; }

  private:
    struct PairRotation {
        CompiledString cs;
        double magnitude;
    };
    struct SiteJoint {
        int site = 0;
        Eigen::MatrixXcd constant;                       // 16 x 16 nibble generator
        std::vector<std::pair<int, Eigen::MatrixXcd>> attached;  // (register, generator)
        std::vector<Eigen::VectorXd> attach_diagonals;   // per attached entry, gauge_dim
        mutable std::map<std::vector<double>, Eigen::MatrixXcd> cache;
    };

    void apply_conjugate(const TrotterPiece& piece, Eigen::VectorXcd& state) const;
    void apply_diagonal(const Eigen::VectorXcd& phases, Eigen::VectorXcd& state) const;
    void apply_pairs(const TrotterPiece& piece, Eigen::VectorXcd& state) const;
    void apply_joint_onsite(Eigen::VectorXcd& state) const;

    TrotterPlan plan_;
    Eigen::MatrixXcd dft_, dft_adj_;
    Eigen::VectorXcd conj_phases_;                 // per gauge state
    std::map<std::string, Eigen::VectorXcd> diag_phases_;
    std::map<std::string, std::vector<PairRotation>> pair_rotations_;
    std::vector<SiteJoint> joints_;
    bool has_joint_ = false;
};

// Exact evolution exp(-i t H) via sparse assembly + Krylov.
Eigen::VectorXcd exact_evolve(const HamiltonianPieces& pieces, Eigen::VectorXcd state, double t);

}  // namespace cgqed
