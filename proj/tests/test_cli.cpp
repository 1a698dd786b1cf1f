#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "test_util.hpp"

using nlohmann::json;
using testutil::CliResult;
using testutil::run_cli;

namespace {

json schema(const char* name) {
    return testutil::load_json_file(std::string(CGQED_SCHEMA_DIR) + "/" + name);
}

void require_schema(const json& sch, const json& value) {
    std::string err;
    const bool ok = testutil::schema_check(sch, value, err);
    REQUIRE_MESSAGE(ok, err);
}

std::vector<json> parse_jsonl(const std::string& text) {
    std::vector<json> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(json::parse(line));
    }
    return lines;
}

std::string write_temp_file(const std::string& contents) {
    const std::string dir = testutil::temp_dir();
    const std::string path = dir + "/config.json";
    std::ofstream f(path);
    f << contents;
    return path;
}

}  // namespace

TEST_CASE("help exits cleanly; argument errors exit 2") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("resources --help").exit_code == 0);

    CHECK(run_cli("").exit_code == 2);             // a subcommand is required
    CHECK(run_cli("frobnicate").exit_code == 2);   // unknown subcommand
    CHECK(run_cli("resources --bogus 1").exit_code == 2);
    CHECK(run_cli("resources --dims 2,1").exit_code == 2);  // needs three extents

    CHECK(run_cli("resources --epsilon 2").exit_code == 2);
    CHECK(run_cli("resources --epsilon 0").exit_code == 2);
    CHECK(run_cli("resources --dims 0,1,1").exit_code == 2);
    CHECK(run_cli("resources --n-a bogus").exit_code == 2);
    CHECK(run_cli("evolve --dims 2,1,1 --sector fermion --steps 0").exit_code == 2);
    CHECK(run_cli("verify --sector nonsense").exit_code == 2);
}

TEST_CASE("resources: schema, frozen bounds, and byte determinism") {
    const std::string args =
        "resources --dims 2,1,1 --g 0.3 --mass 1 --wilson 1 --energy 10 --epsilon 0.1";
    const CliResult r = run_cli(args);
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    require_schema(schema("resource_report.schema.json"), j);

    CHECK(j["config"]["dims"] == json::array({2, 1, 1}));
    CHECK(j["config"]["sector"] == "coupled");
    CHECK(j["config"]["g"] == doctest::Approx(0.3));
    CHECK(j["config"]["steps"] == "auto");  // default sentinel echoed verbatim

    const json& est = j["estimate"];
    CHECK(est["volume"] == 2);
    CHECK(est["shifted_energy"].get<double>() ==
          doctest::Approx(38.84441020371192).epsilon(1e-12));
    CHECK(est["a_max"].get<double>() == doctest::Approx(13.71459542928002).epsilon(1e-12));
    CHECK(est["pi_max"].get<double>() == doctest::Approx(68.27392785277137).epsilon(1e-12));
    CHECK(est["n_field_qubits"] == 10);
    CHECK(est["fermion_qubits"] == 8);
    CHECK(est["gauge_qubits"] == 60);
    CHECK(est["total_qubits"] == 68);
    CHECK(est["grid_consistent"] == true);

    CHECK(j["trotter"]["constant_asymptotic"].get<double>() > 0.0);
    CHECK(j["trotter"]["steps_asymptotic"].get<std::int64_t>() >= 1);
    CHECK(!j["trotter"].contains("constant_numeric"));  // only with --numeric-norms

    const json& gates = j["gate_costs"];
    REQUIRE(gates["entries"].size() == 11);
    double additive = 0.0;
    for (const json& e : gates["entries"]) {
        CHECK(e["count"].get<double>() >= 0.0);
        if (e["additive"].get<bool>()) additive += e["count"].get<double>();
    }
    CHECK(gates["per_step_total"].get<double>() == doctest::Approx(additive).epsilon(1e-12));

    // identical invocations must produce identical bytes
    const CliResult again = run_cli(args);
    REQUIRE(again.exit_code == 0);
    CHECK(r.out == again.out);
}

TEST_CASE("resources: auto sentinels echo verbatim") {
    const CliResult r =
        run_cli("resources --dims 2,1,1 --n-a auto --a-max auto --steps auto");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    require_schema(schema("resource_report.schema.json"), j);
    CHECK(j["config"]["n_field_qubits"] == "auto");
    CHECK(j["config"]["a_max"] == "auto");
    CHECK(j["config"]["steps"] == "auto");
}

TEST_CASE("resources: --numeric-norms adds the commutator constant") {
    const CliResult r = run_cli(
        "resources --dims 2,1,1 --sector gauge --n-a 2 --a-max 1 --steps 2 "
        "--numeric-norms --time 0.25");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    require_schema(schema("resource_report.schema.json"), j);
    CHECK(j["config"]["numeric_norms"] == true);
    REQUIRE(j["trotter"].contains("constant_numeric"));
    CHECK(j["trotter"]["constant_numeric"].get<double>() > 0.0);
    CHECK(j["trotter"]["steps_numeric"].get<std::int64_t>() >= 1);
}

TEST_CASE("verify: clean pass, and an injected fault flips the exit code") {
    const std::string base = "verify --dims 1,1,1 --sector gauge --n-a 2 --a-max 1.0";
    const CliResult ok = run_cli(base);
    REQUIRE(ok.exit_code == 0);
    const json j = json::parse(ok.out);
    require_schema(schema("verify_report.schema.json"), j);
    CHECK(j["all_passed"] == true);
    REQUIRE(j["checks"].size() >= 10);
    for (const json& c : j["checks"]) CHECK(c["passed"] == true);
    CHECK(ok.err.find("PASS hermiticity") != std::string::npos);

    const CliResult bad = run_cli(base + " --inject-fault");
    CHECK(bad.exit_code == 1);
    const json jb = json::parse(bad.out);
    require_schema(schema("verify_report.schema.json"), jb);
    CHECK(jb["all_passed"] == false);
    bool kinetic_failed = false;
    for (const json& c : jb["checks"]) {
        if (c["name"] == "psd_kinetic") kinetic_failed = !c["passed"].get<bool>();
    }
    CHECK(kinetic_failed);
    CHECK(bad.err.find("FAIL psd_kinetic") != std::string::npos);
}

TEST_CASE("config file overlays defaults and explicit flags win") {
    const std::string path = write_temp_file(
        R"({"g": 0.7, "mass": 0.5, "time": 0.25, "dims": [2, 1, 1], "sector": "fermion"})");
    const CliResult r = run_cli("resources --config " + path + " --g 0.9");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["config"]["g"] == doctest::Approx(0.9));    // flag beats file
    CHECK(j["config"]["mass"] == doctest::Approx(0.5)); // file beats default
    CHECK(j["config"]["time"] == doctest::Approx(0.25));
    CHECK(j["config"]["sector"] == "fermion");
    CHECK(j["config"]["dims"] == json::array({2, 1, 1}));
    std::remove(path.c_str());

    SUBCASE("bad configuration files exit 2") {
        const std::string unknown = write_temp_file(R"({"coupling": 1.0})");
        const CliResult ru = run_cli("resources --config " + unknown);
        CHECK(ru.exit_code == 2);
        CHECK(ru.err.find("unknown configuration key") != std::string::npos);
        std::remove(unknown.c_str());

        const std::string malformed = write_temp_file("{ this is not json");
        CHECK(run_cli("resources --config " + malformed).exit_code == 2);
        std::remove(malformed.c_str());

        CHECK(run_cli("resources --config /nonexistent/cfg.json").exit_code == 2);
    }
}

TEST_CASE("requests beyond the simulable range exit 3") {
    const CliResult r =
        run_cli("evolve --dims 2,2,2 --sector coupled --n-a 2 --a-max 1 --steps 1");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("capability error") != std::string::npos);

    CHECK(run_cli("emit-circuit --dims 2,2,2 --sector coupled --n-a 2 --a-max 1 --steps 1")
              .exit_code == 3);
}

TEST_CASE("evolve: zero time produces the single identity record") {
    const CliResult r = run_cli(
        "evolve --dims 2,1,1 --sector fermion --mass 1 --wilson 1 --time 0 --steps 1 "
        "--seed 7");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    require_schema(schema("evolve_report.schema.json"), j);

    REQUIRE(j["records"].size() == 1);
    const json& rec = j["records"][0];
    CHECK(rec["step"] == 0);
    CHECK(rec["time"].get<double>() == 0.0);
    CHECK(rec["fidelity"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec["trotter_error"].get<double>() <= 1e-12);
    CHECK(rec.contains("charge"));
    CHECK(rec.contains("energy"));
    CHECK(j["final_fidelity"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j["norm_drift"].get<double>() <= 1e-12);
    CHECK(j["exact_energy_drift"].get<double>() <= 1e-12);
}

TEST_CASE("evolve: schema, piece log, error halving, and conservation") {
    const std::string base =
        "evolve --dims 2,1,1 --sector coupled --n-a 1 --a-max 1 --g 0.3 --mass 1 "
        "--wilson 1 --time 0.5 --seed 11";
    const CliResult r8 = run_cli(base + " --steps 8");
    const CliResult r16 = run_cli(base + " --steps 16");
    REQUIRE(r8.exit_code == 0);
    REQUIRE(r16.exit_code == 0);
    const json j8 = json::parse(r8.out);
    const json j16 = json::parse(r16.out);
    require_schema(schema("evolve_report.schema.json"), j8);
    require_schema(schema("evolve_report.schema.json"), j16);

    CHECK(j8["steps"] == 8);
    CHECK(j8["dt"].get<double>() == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(j8["record_stride"] == 1);
    REQUIRE(j8["records"].size() == 9);  // step 0 plus one record per step
    CHECK(j8["records"].back()["step"] == 8);

    // the descriptor log names every piece; the structurally empty hopping
    // classes on this lattice are flagged inactive
    REQUIRE(j8["pieces"].size() == 11);
    int active = 0;
    for (const json& p : j8["pieces"]) {
        CHECK(p.contains("name"));
        if (p["active"].get<bool>()) ++active;
        if (p["name"] == "hop_even_x_11" || p["name"] == "hop_odd_x_11") {
            CHECK(p["active"] == false);
        }
    }
    CHECK(active == 9);

    // first-order product formula: doubling the step count halves the error
    const double e8 = j8["final_trotter_error"].get<double>();
    const double e16 = j16["final_trotter_error"].get<double>();
    CHECK(e8 > 0.0);
    const double ratio = e8 / e16;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);
    // and the higher-resolution run is more faithful
    CHECK(j16["final_fidelity"].get<double>() >= j8["final_fidelity"].get<double>());

    CHECK(j8["norm_drift"].get<double>() <= 1e-12);
    CHECK(j8["charge_drift"].get<double>() <= 1e-10);
    CHECK(j8["exact_energy_drift"].get<double>() <= 1e-8);

    // the final record agrees with the summary fields
    CHECK(j8["records"].back()["trotter_error"].get<double>() ==
          doctest::Approx(e8).epsilon(1e-12));

    SUBCASE("report lands in --out unchanged") {
        const std::string dir = testutil::temp_dir();
        const std::string out = dir + "/report.json";
        const CliResult rf = run_cli(base + " --steps 8 --out " + out);
        REQUIRE(rf.exit_code == 0);
        CHECK(rf.out.empty());
        const json jf = json::parse(testutil::slurp(out));
        CHECK(jf == j8);
        std::remove(out.c_str());
        rmdir(dir.c_str());
    }

    SUBCASE("dropping the gauge field leaves an exactly commuting plan") {
        // on a two-site axis both hopping colors join the same site pair and
        // the free theory splits into commuting pieces: the product formula
        // is then exact to roundoff
        const CliResult rf = run_cli(
            "evolve --dims 2,1,1 --sector fermion --mass 1 --wilson 1 --time 0.5 "
            "--steps 8 --seed 11");
        REQUIRE(rf.exit_code == 0);
        const json jf = json::parse(rf.out);
        CHECK(jf["final_trotter_error"].get<double>() <= 1e-10);
        bool s11_active = true;
        for (const json& p : jf["pieces"]) {
            if (p["name"] == "onsite_s11") s11_active = p["active"].get<bool>();
        }
        CHECK(!s11_active);  // no on-site diagonal without the gauge constraint
    }
}

TEST_CASE("emit-circuit: single-site gauge sector gives the four-op step") {
    const std::string base =
        "emit-circuit --dims 1,1,1 --sector gauge --n-a 1 --a-max 1 --time 0.5";
    const CliResult r = run_cli(base + " --steps 1");
    REQUIRE(r.exit_code == 0);
    const std::vector<json> lines = parse_jsonl(r.out);
    REQUIRE(lines.size() == 5);  // header + 4 operations

    const json circuit_schema = schema("circuit_ir.schema.json");
    const json& header_schema = circuit_schema["definitions"]["header"];
    const json& op_schema = circuit_schema["definitions"]["operation"];

    const json& h = lines[0];
    require_schema(header_schema, h);
    CHECK(h["qubits"] == 3);
    CHECK(h["fermion_qubits"] == 0);
    CHECK(h["gauge_registers"] == 3);
    CHECK(h["qubits_per_register"] == 1);
    CHECK(h["sector"] == "gauge");
    CHECK(h["steps"] == 1);
    CHECK(h["dt"].get<double>() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(h["pieces"] == json::array({"H_Pi", "H_A"}));
    CHECK(h["op_count"] == 4);

    const std::vector<std::string> kinds = {"fourier-block", "diagonal-phase",
                                            "fourier-block", "diagonal-phase"};
    for (int i = 0; i < 4; ++i) {
        const json& op = lines[i + 1];
        require_schema(op_schema, op);
        CHECK(op["kind"] == kinds[i]);
        CHECK(op["qubits"] == json::array({0, 1, 2}));
    }
    CHECK(lines[1]["direction"] == "forward");
    CHECK(lines[3]["direction"] == "inverse");
    CHECK(lines[2]["phase_function"] == "conjugate_quadratic");
    CHECK(lines[4]["phase_function"] == "magnetic_energy");

    SUBCASE("operation count is linear in the step count") {
        const CliResult r3 = run_cli(base + " --steps 3");
        REQUIRE(r3.exit_code == 0);
        const std::vector<json> l3 = parse_jsonl(r3.out);
        REQUIRE(l3.size() == 13);
        CHECK(l3[0]["op_count"] == 12);
        CHECK(l3[0]["dt"].get<double>() == doctest::Approx(0.5 / 3.0).epsilon(1e-14));
        for (std::size_t i = 1; i < l3.size(); ++i) {
            CHECK(l3[i]["kind"] == kinds[(i - 1) % 4]);
        }
    }
}

TEST_CASE("emit-circuit: fermion sector is pure string rotations") {
    const CliResult r = run_cli(
        "emit-circuit --dims 2,1,1 --sector fermion --mass 1 --wilson 1 --g 0.5 "
        "--time 0.5 --steps 1");
    REQUIRE(r.exit_code == 0);
    const std::vector<json> lines = parse_jsonl(r.out);
    REQUIRE(lines.size() >= 2);

    const json circuit_schema = schema("circuit_ir.schema.json");
    const json& h = lines[0];
    require_schema(circuit_schema["definitions"]["header"], h);
    CHECK(h["fermion_qubits"] == 8);
    CHECK(h["gauge_registers"] == 0);
    CHECK(h["qubits_per_register"] == 0);
    CHECK(h["op_count"] == int(lines.size()) - 1);
    for (const json& name : h["pieces"]) {
        CHECK(name != "hop_even_x_11");  // empty classes never reach the header
        CHECK(name != "hop_odd_x_11");
    }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const json& op = lines[i];
        require_schema(circuit_schema["definitions"]["operation"], op);
        CHECK(op["kind"] == "pauli-exponential");
        CHECK(!op.contains("field_register"));  // no field factors in this sector
        CHECK(op["generator"].is_string());
        CHECK(!op["generator"].get<std::string>().empty());
    }
}
