#include "cgqed/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "cgqed/errors.hpp"
#include "cgqed/resources.hpp"

namespace cgqed {
namespace {

using ordered_json = nlohmann::ordered_json;

int int_or_auto(const ordered_json& v, const char* key) {
    if (v.is_string()) {
        if (v.get<std::string>() == "auto") return -1;
        throw config_error(std::string(key) + ": expected an integer or \"auto\"");
    }
    if (!v.is_number_integer()) {
        throw config_error(std::string(key) + ": expected an integer or \"auto\"");
    }
    return v.get<int>();
}

double number_or_auto(const ordered_json& v, const char* key) {
    if (v.is_string()) {
        if (v.get<std::string>() == "auto") return -1.0;
        throw config_error(std::string(key) + ": expected a number or \"auto\"");
    }
    if (!v.is_number()) {
        throw config_error(std::string(key) + ": expected a number or \"auto\"");
    }
    return v.get<double>();
}

template <typename T>
T typed(const ordered_json& v, const char* key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw config_error(std::string(key) + ": unexpected value type");
    }
}

}  // namespace

void apply_json(RunConfig& cfg, const ordered_json& j) {
    if (!j.is_object()) throw config_error("config root must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "dims") {
            if (!value.is_array() || value.size() != 3) {
                throw config_error("dims: expected an array of three extents");
            }
            cfg.params.geom = make_geometry(typed<int>(value[0], "dims"),
                                            typed<int>(value[1], "dims"),
                                            typed<int>(value[2], "dims"));
        } else if (key == "sector") {
            cfg.params.sector = sector_from_string(typed<std::string>(value, "sector"));
        } else if (key == "g") {
            cfg.params.g = typed<double>(value, "g");
        } else if (key == "mass") {
            cfg.params.mass = typed<double>(value, "mass");
        } else if (key == "wilson") {
            cfg.params.wilson = typed<double>(value, "wilson");
        } else if (key == "n_field_qubits") {
            cfg.params.n_A = int_or_auto(value, "n_field_qubits");
        } else if (key == "a_max") {
            cfg.params.a_max = number_or_auto(value, "a_max");
        } else if (key == "transverse_interaction") {
            cfg.params.transverse_interaction = typed<bool>(value, "transverse_interaction");
        } else if (key == "energy") {
            cfg.energy = typed<double>(value, "energy");
        } else if (key == "epsilon") {
            cfg.epsilon = typed<double>(value, "epsilon");
        } else if (key == "time") {
            cfg.time = typed<double>(value, "time");
        } else if (key == "steps") {
            cfg.steps = int_or_auto(value, "steps");
        } else if (key == "seed") {
            cfg.seed = typed<std::uint64_t>(value, "seed");
        } else if (key == "numeric_norms") {
            cfg.numeric_norms = typed<bool>(value, "numeric_norms");
        } else if (key == "inject_fault") {
            cfg.inject_fault = typed<bool>(value, "inject_fault");
        } else if (key == "out") {
            cfg.out = typed<std::string>(value, "out");
        } else {
            throw config_error("unknown configuration key: " + key);
        }
    }
}

void overlay_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("malformed config file " + path + ": " + e.what());
    }
    apply_json(cfg, j);
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    overlay_config_file(cfg, path);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
        throw config_error("epsilon must lie in (0, 1)");
    }
    if (!(cfg.energy > 0.0) || !std::isfinite(cfg.energy)) {
        throw config_error("energy must be positive and finite");
    }
    if (!(cfg.time >= 0.0) || !std::isfinite(cfg.time)) {
        throw config_error("time must be nonnegative and finite");
    }
    if (cfg.steps != -1 && cfg.steps < 1) {
        throw config_error("steps must be >= 1 (or \"auto\")");
    }
}

void resolve_auto(RunConfig& cfg) {
    const int vol = cfg.params.geom.volume();
    const double shift = shift_constant(vol, cfg.params.mass, cfg.params.wilson);
    const double e_prime = cfg.energy + shift;
    if (cfg.params.a_max <= 0.0) {
        cfg.params.a_max = a_max_bound(e_prime, vol, cfg.params.g, cfg.epsilon);
    }
    if (cfg.params.n_A < 1) {
        cfg.params.n_A = n_A_bound(e_prime, vol, cfg.params.g, cfg.epsilon);
    }
    if (cfg.steps < 1) {
        const double pm = pi_max_bound(e_prime, vol, cfg.epsilon);
        const double c = trotter_constant_asymptotic(cfg.params, cfg.params.a_max, pm);
        const std::int64_t n = trotter_step_count(c, cfg.time, cfg.epsilon);
        if (n > std::numeric_limits<int>::max()) {
            throw capability_error("derived step count exceeds the simulable range; "
                                   "pass an explicit step count");
        }
        cfg.steps = int(n);
    }
}

nlohmann::ordered_json config_json(const RunConfig& cfg) {
    ordered_json j;
    j["dims"] = {cfg.params.geom.dims[0], cfg.params.geom.dims[1], cfg.params.geom.dims[2]};
    j["sector"] = sector_name(cfg.params.sector);
    j["g"] = cfg.params.g;
    j["mass"] = cfg.params.mass;
    j["wilson"] = cfg.params.wilson;
    if (cfg.params.n_A < 1) {
        j["n_field_qubits"] = "auto";
    } else {
        j["n_field_qubits"] = cfg.params.n_A;
    }
    if (cfg.params.a_max <= 0.0) {
        j["a_max"] = "auto";
    } else {
        j["a_max"] = cfg.params.a_max;
    }
    j["transverse_interaction"] = cfg.params.transverse_interaction;
    j["energy"] = cfg.energy;
    j["epsilon"] = cfg.epsilon;
    j["time"] = cfg.time;
    if (cfg.steps < 1) {
        j["steps"] = "auto";
    } else {
        j["steps"] = cfg.steps;
    }
    j["seed"] = cfg.seed;
    j["numeric_norms"] = cfg.numeric_norms;
    j["inject_fault"] = cfg.inject_fault;
    return j;
}

}  // namespace cgqed
