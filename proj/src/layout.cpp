#include "cgqed/layout.hpp"

#include <string>

#include "cgqed/errors.hpp"

namespace cgqed {

Sector sector_from_string(const std::string& name) {
    if (name == "coupled") return Sector::Coupled;
    if (name == "fermion") return Sector::FermionOnly;
    if (name == "gauge") return Sector::GaugeOnly;
    throw config_error("unknown sector: " + name);
}

const char* sector_name(Sector s) {
    switch (s) {
        case Sector::Coupled: return "coupled";
        case Sector::FermionOnly: return "fermion";
        case Sector::GaugeOnly: return "gauge";
    }
    return "?";
}

SpaceLayout make_layout(const LatticeGeometry& geom, Sector sector, int n_A, double a_max) {
    SpaceLayout lay;
    lay.geom = geom;
    lay.sector = sector;
    lay.path = snake_path(geom);
    const int volume = geom.volume();

    if (sector != Sector::FermionOnly) {
        if (n_A < 1) throw config_error("gauge sectors require n_A >= 1");
        lay.grid = make_field_grid(a_max, n_A);
        lay.n_gauge_registers = 3 * volume;
    }
    if (sector != Sector::GaugeOnly) lay.n_fermion_modes = 4 * volume;

    const int gauge_qubits = lay.n_gauge_registers * (sector != Sector::FermionOnly ? n_A : 0);
    lay.total_qubits = lay.n_fermion_modes + gauge_qubits;
    if (lay.total_qubits > 62)
        throw capability_error("state space beyond addressable range");

    lay.fermion_dim = std::int64_t(1) << lay.n_fermion_modes;
    lay.gauge_dim = std::int64_t(1) << gauge_qubits;
    lay.dim = lay.fermion_dim * lay.gauge_dim;
    if (lay.total_qubits > 24)
        throw capability_error("state vector exceeds explicit-simulation limit (2^24)");
    return lay;
}

}  // namespace cgqed
