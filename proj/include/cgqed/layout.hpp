#pragma once

#include <cstdint>

#include "cgqed/gauge_basis.hpp"
#include "cgqed/lattice.hpp"

namespace cgqed {

enum class Sector { Coupled, FermionOnly, GaugeOnly };

Sector sector_from_string(const std::string& name);
const char* sector_name(Sector s);

// Simulation Hilbert space: fermion occupation register (4 modes per site,
// ordered along the snake path) tensored with one field register of n_A
// qubits per link direction per site.  Global basis index is
// gauge_index * fermion_dim + fermion_index; within the gauge index,
// register m = 3*site + dir occupies bits [n_A*m, n_A*(m+1)).
struct SpaceLayout {
    LatticeGeometry geom;
    Sector sector = Sector::Coupled;
    FieldGrid grid;          // per-register grid (uniform across registers)
    SnakePath path;

    int n_fermion_modes = 0;     // 4 * volume, or 0 in the gauge-only sector
    int n_gauge_registers = 0;   // 3 * volume, or 0 in the fermion-only sector
    std::int64_t fermion_dim = 1;
    std::int64_t gauge_dim = 1;
    std::int64_t dim = 1;
    int total_qubits = 0;

    bool has_fermions() const { return sector != Sector::GaugeOnly; }
    bool has_gauge() const { return sector != Sector::FermionOnly; }

    int gauge_register(int site, int dir) const { return 3 * site + dir; }

    int gauge_level(std::int64_t gauge_index, int reg) const {
        return int((gauge_index >> (grid.n_qubits * reg)) & (grid.levels - 1));
    }

    std::int64_t set_gauge_level(std::int64_t gauge_index, int reg, int level) const {
        const int shift = grid.n_qubits * reg;
        const std::int64_t mask = std::int64_t(grid.levels - 1) << shift;
        return (gauge_index & ~mask) | (std::int64_t(level) << shift);
    }

    // Fermion mode index of spinor component alpha at a site (snake order).
    int fermion_mode(int site, int alpha) const { return path.mode(site, alpha); }

    // Circuit qubit numbering: fermion mode l -> qubit l; bit b of gauge
    // register r -> qubit n_fermion_modes + n_A*r + b (b = 0 least
    // significant within the register value).
    int gauge_qubit(int reg, int bit) const {
        return n_fermion_modes + grid.n_qubits * reg + bit;
    }
};

// Throws config_error for invalid inputs and capability_error when the
// state vector would exceed the explicit-simulation limit (2^24 amplitudes).
SpaceLayout make_layout(const LatticeGeometry& geom, Sector sector, int n_A, double a_max);

}  // namespace cgqed
