#include "cgqed/lattice.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cgqed/errors.hpp"

namespace cgqed {

LatticeGeometry make_geometry(int lx, int ly, int lz) {
    if (lx < 1 || ly < 1 || lz < 1)
        throw domain_error("lattice dims must all be >= 1, got (" + std::to_string(lx) + "," +
                           std::to_string(ly) + "," + std::to_string(lz) + ")");
    return LatticeGeometry{{lx, ly, lz}};
}

int site_index(const Coord& x, const LatticeGeometry& geom) {
    for (int i = 0; i < 3; ++i)
        if (x[i] < 0 || x[i] >= geom.dims[i])
            throw domain_error("site coordinate " + std::to_string(x[i]) + " out of range on axis " +
                               std::to_string(i));
    return x[0] + geom.dims[0] * (x[1] + geom.dims[1] * x[2]);
}

Coord site_coords(int index, const LatticeGeometry& geom) {
    if (index < 0 || index >= geom.volume())
        throw domain_error("site index out of range: " + std::to_string(index));
    Coord x;
    x[0] = index % geom.dims[0];
    index /= geom.dims[0];
    x[1] = index % geom.dims[1];
    x[2] = index / geom.dims[1];
    return x;
}

Coord neighbor(const Coord& x, int axis, int step, const LatticeGeometry& geom) {
    Coord y = x;
    int l = geom.dims[axis];
    y[axis] = ((x[axis] + step) % l + l) % l;
    return y;
}

std::vector<MomentumMode> momentum_modes(const LatticeGeometry& geom) {
    std::vector<MomentumMode> modes;
    modes.reserve(geom.volume());
    for (int lz = 0; lz < geom.dims[2]; ++lz)
        for (int ly = 0; ly < geom.dims[1]; ++ly)
            for (int lx = 0; lx < geom.dims[0]; ++lx) {
                MomentumMode m;
                m.l = {lx, ly, lz};
                for (int i = 0; i < 3; ++i)
                    m.p[i] = 2.0 * std::numbers::pi * m.l[i] / geom.dims[i];
                m.is_zero = (lx == 0 && ly == 0 && lz == 0);
                modes.push_back(m);
            }
    return modes;
}

double laplacian_symbol(const MomentumMode& p) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        double h = std::sin(0.5 * p.p[i]);
        s += h * h;
    }
    return 4.0 * s;
}

double inverse_laplacian(const MomentumMode& p) {
    if (p.is_zero) throw domain_error("inverse Laplacian is undefined on the zero momentum mode");
    return -1.0 / laplacian_symbol(p);
}

double min_image_distance(const Coord& x, const Coord& y, const LatticeGeometry& geom) {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        int l = geom.dims[i];
        int d = ((x[i] - y[i]) % l + l) % l;
        if (2 * d > l) d -= l;
        d2 += double(d) * double(d);
    }
    return std::sqrt(d2);
}

double coulomb_kernel(const Coord& x, const Coord& y, const LatticeGeometry& geom) {
    double d = min_image_distance(x, y, geom);
    if (d == 0.0) throw domain_error("Coulomb kernel is undefined at coincident points");
    return 1.0 / (4.0 * std::numbers::pi * d);
}

SnakePath snake_path(const LatticeGeometry& geom) {
    SnakePath path;
    path.site_order.reserve(geom.volume());
    path.path_position.assign(geom.volume(), -1);

    // Raster with x direction flipping after each row and y direction after each
    // plane, so consecutive sites are always one lattice step apart.
    int x = 0, y = 0, xdir = 1, ydir = 1;
    for (int z = 0; z < geom.dims[2]; ++z) {
        for (int row = 0; row < geom.dims[1]; ++row) {
            for (int col = 0; col < geom.dims[0]; ++col) {
                int s = site_index({x, y, z}, geom);
                path.path_position[s] = int(path.site_order.size());
                path.site_order.push_back(s);
                if (col < geom.dims[0] - 1) x += xdir;
            }
            if (row < geom.dims[1] - 1) {
                xdir = -xdir;
                y += ydir;
            }
        }
        if (z < geom.dims[2] - 1) {
            xdir = -xdir;
            ydir = -ydir;
        }
    }
    return path;
}

} // namespace cgqed
