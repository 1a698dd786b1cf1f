#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace testutil {

// --- minimal structural JSON-schema checker ---------------------------------
//
// Supports the subset used by the schemas shipped in schemas/: type (string or
// array of strings), enum, required, properties, items.  Returns false and
// fills `err` with the offending path on the first mismatch.

inline bool type_matches(const std::string& t, const nlohmann::json& v) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
}

inline bool schema_check(const nlohmann::json& schema, const nlohmann::json& value,
                         std::string& err, const std::string& path = "$") {
    if (schema.contains("enum")) {
        for (const auto& allowed : schema["enum"]) {
            if (allowed == value) return true;
        }
        err = path + ": value not in enum";
        return false;
    }
    if (schema.contains("type")) {
        const auto& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(t.get<std::string>(), value);
        } else {
            for (const auto& opt : t) ok = ok || type_matches(opt.get<std::string>(), value);
        }
        if (!ok) {
            err = path + ": type mismatch";
            return false;
        }
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema["required"]) {
                if (!value.contains(key.get<std::string>())) {
                    err = path + ": missing required key " + key.get<std::string>();
                    return false;
                }
            }
        }
        if (schema.contains("properties")) {
            for (const auto& [key, sub] : schema["properties"].items()) {
                if (value.contains(key) &&
                    !schema_check(sub, value[key], err, path + "." + key)) {
                    return false;
                }
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (!schema_check(schema["items"], value[i], err,
                              path + "[" + std::to_string(i) + "]")) {
                return false;
            }
        }
    }
    return true;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

// --- CLI driver --------------------------------------------------------------

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string temp_dir() {
    char tmpl[] = "/tmp/cgqed_test_XXXXXX";
    const char* d = mkdtemp(tmpl);
    if (!d) throw std::runtime_error("mkdtemp failed");
    return std::string(d);
}

#ifdef CGQED_CLI_PATH
inline CliResult run_cli(const std::string& args) {
    const std::string dir = temp_dir();
    const std::string out = dir + "/out", err = dir + "/err";
    const std::string cmd =
        std::string(CGQED_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out);
    r.err = slurp(err);
    std::remove(out.c_str());
    std::remove(err.c_str());
    rmdir(dir.c_str());
    return r;
}
#endif

// --- independent fermion oracle ----------------------------------------------
//
// Dense annihilation operator from the textbook occupation-number rules: bit l
// of the basis index is the occupation of mode l, and the sign is the parity
// of the occupied modes below l.  Written from scratch as a cross-check on the
// string-encoded operators.

inline Eigen::MatrixXcd oracle_annihilate(int mode, int n_modes) {
    const std::int64_t dim = std::int64_t(1) << n_modes;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    const std::int64_t below = (std::int64_t(1) << mode) - 1;
    for (std::int64_t b = 0; b < dim; ++b) {
        if (!(b >> mode & 1)) continue;
        const int parity = __builtin_popcountll(b & below) & 1;
        m(b ^ (std::int64_t(1) << mode), b) = parity ? -1.0 : 1.0;
    }
    return m;
}

inline Eigen::MatrixXcd oracle_create(int mode, int n_modes) {
    return oracle_annihilate(mode, n_modes).adjoint();
}

// --- misc ---------------------------------------------------------------------

inline Eigen::VectorXcd random_unit_vector(std::int64_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd v(dim);
    for (std::int64_t i = 0; i < dim; ++i) v[i] = std::complex<double>(u(rng), u(rng));
    return v / v.norm();
}

}  // namespace testutil
