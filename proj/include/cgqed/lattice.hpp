#pragma once

#include <array>
#include <vector>

namespace cgqed {

using Coord = std::array<int, 3>;

// Periodic anisotropic lattice (L_x, L_y, L_z), sites indexed row-major with x fastest.
struct LatticeGeometry {
    Coord dims;

    int volume() const { return dims[0] * dims[1] * dims[2]; }
    int extent(int axis) const { return dims[axis]; }
};

LatticeGeometry make_geometry(int lx, int ly, int lz);

int site_index(const Coord& x, const LatticeGeometry& geom);
Coord site_coords(int index, const LatticeGeometry& geom);

// Nearest neighbor with periodic wrap; step = +1 or -1 along axis.
Coord neighbor(const Coord& x, int axis, int step, const LatticeGeometry& geom);

// One reciprocal-lattice mode p_i = 2*pi*l_i / L_i, l_i in {0,...,L_i-1}.
struct MomentumMode {
    Coord l;
    std::array<double, 3> p;
    bool is_zero;
};

// All V modes in row-major order of l (zero mode first).
std::vector<MomentumMode> momentum_modes(const LatticeGeometry& geom);

// Momentum-space kernel of the lattice inverse Laplacian: -1/(4 sum_i sin^2(p_i/2)).
// The zero mode is excluded (fields are transverse; the constant mode carries no energy).
double inverse_laplacian(const MomentumMode& p);

// 4 sum_i sin^2(p_i/2); zero exactly on the zero mode.
double laplacian_symbol(const MomentumMode& p);

// Minimum-image Euclidean distance between two sites under periodic wrap.
double min_image_distance(const Coord& x, const Coord& y, const LatticeGeometry& geom);

// 1/(4*pi*d) with d the minimum-image distance; coincident points are a domain error.
double coulomb_kernel(const Coord& x, const Coord& y, const LatticeGeometry& geom);

// Boustrophedon ordering of sites used for the fermion qubit layout.
// Mode (site, spinor a in {0..3}) sits at position 4*n + a where n is the site's
// position along the path; consecutive path sites are lattice-adjacent.
struct SnakePath {
    std::vector<int> site_order;    // path position n -> site index
    std::vector<int> path_position; // site index -> path position n

    int mode(int site, int alpha) const { return 4 * path_position[site] + alpha; }
};

SnakePath snake_path(const LatticeGeometry& geom);

} // namespace cgqed
