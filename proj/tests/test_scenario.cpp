#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mclink/errors.hpp"
#include "mclink/export.hpp"
#include "mclink/pipeline.hpp"
#include "mclink/transport.hpp"

using namespace mclink;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = MCLINK_SCENARIO_DIR;

const char* kRxDoc = R"(schema_version: 1
name: rx_probe
env:
  v_eff_m_per_s: 2.0e-3
  D_m2_per_s: 1.0e-9
  D_eff_m2_per_s: 1.0e-8
rx:
  L_T_m: 80.0e-6
  L_C_m: 20.0e-6
  L_4_m: 520.0e-6
  L_5_m: 470.0e-6
  k_m3_per_mol_s: 400.0
  C_ThL_VI_mol_per_m3: 0.5
  C_Amp_VII_mol_per_m3: 9.0
  received_pulse: {C0_mol_s_per_m3: 3.0, mu_s: 2.0, sigma2_s2: 0.25}
)";

int error_line(const std::string& text) {
    try {
        parse_scenario_text(text, "doc");
    } catch (const ScenarioError& e) {
        return e.line();
    }
    return -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mclink_test_" + name);
    fs::remove_all(dir);
    return dir;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(LINKCLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("FNV-1a reference vectors") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("every bundled scenario validates") {
    for (const char* name : {"rect_channel", "gauss_channel", "reaction1", "tx_designs", "delta_t", "rx_threshold",
                             "rx_amp", "end2end"}) {
        CAPTURE(name);
        const auto sc = load_scenario(kScenarios / (std::string(name) + ".yaml"));
        CHECK(sc.name == name);
    }
}

TEST_CASE("parse errors carry the offending line") {
    const std::string doc = kRxDoc;
    CHECK(error_line(doc) == -1);

    std::string bad = doc;
    bad.replace(bad.find("v_eff_m_per_s: 2.0e-3"), 21, "v_eff_m_per_s: -2.0");
    CHECK(error_line(bad) == 4);

    bad = doc;
    bad.replace(bad.find("L_4_m: 520.0e-6"), 15, "L_4_m: lots");
    CHECK(error_line(bad) == 10);

    bad = doc + "  colour: blue\n";
    CHECK(error_line(bad) == 16);

    bad = doc;
    bad.replace(bad.find("  received_pulse"), std::string::npos, "");
    CHECK(error_line(bad) > 0);

    CHECK(error_line("name: [unterminated\n") == 2);
    CHECK(error_line("name: only\nenv:\n  v_eff_m_per_s: 1e-3\n  D_m2_per_s: 1e-9\n"
                     "  D_eff_m2_per_s: 1e-8\n") > 0);
}

TEST_CASE("bit onsets must increase strictly") {
    const std::string doc = std::string(kRxDoc) +
                            "bit_stream:\n  - {onset_s: 1.0, T_on_s: 2.0}\n  - {onset_s: 1.0, T_on_s: 2.0}\n";
    CHECK(error_line(doc) == 18);
}

TEST_CASE("overrides address scalar fields only") {
    const auto sc = parse_scenario_text(kRxDoc, "doc", {{"rx.C_ThL_VI_mol_per_m3", 0.25}});
    CHECK(sc.rx->design.C_ThL_VI == 0.25);
    CHECK(sc.name == "rx_probe");
    CHECK_THROWS_AS(parse_scenario_text(kRxDoc, "doc", {{"rx", 1.0}}), ScenarioError);
    CHECK_THROWS_AS(parse_scenario_text(kRxDoc, "doc", {{"rx.missing", 1.0}}), ScenarioError);
    CHECK_THROWS_AS(parse_scenario_text(kRxDoc, "doc", {{"rx.received_pulse", 1.0}}), ScenarioError);
}

TEST_CASE("Taylor-Aris environment resolves D_eff from the cross-section") {
    std::string doc = kRxDoc;
    doc.replace(doc.find("  D_eff_m2_per_s: 1.0e-8\n"), 25,
                "  taylor_aris: {width_m: 20.0e-6, height_m: 10.0e-6}\n");
    const auto sc = parse_scenario_text(doc, "doc");
    CHECK(sc.env.D_eff == doctest::Approx(taylor_aris_deff(1e-9, 2e-3, 10e-6, 20e-6)));
}

TEST_CASE("trace CSV layout") {
    const auto t = time_grid(0.0, 0.002, 1e-3);
    const Probe p{"demo", {TimeSeries(t, Eigen::ArrayXd::Constant(3, 0.5), 1e-4, Source::oracle, "Y")}};
    std::ostringstream os;
    write_probe_csv(os, p);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# schema: mclink-trace/1; probe: demo");
    std::getline(in, line);
    CHECK(line.rfind("# series:", 0) == 0);
    std::getline(in, line);
    CHECK(line == "t_seconds,species,concentration_mol_per_m3,source");
    std::getline(in, line);
    CHECK(line == "0,Y,5.000000000e-01,oracle");
}

TEST_CASE("rect_channel scenario reproduces the product traces") {
    const auto sc = load_scenario(kScenarios / "rect_channel.yaml");
    const auto rec = run_scenario(sc);
    REQUIRE(rec.probes.size() == 3);
    const Probe& p = rec.probes[2];
    CHECK(p.name == "channel_L540um");
    const TimeSeries& ab = p.series[1];
    REQUIRE(ab.species() == "AB");
    const RectPulse rect{1.5, 2.0, 0.0};
    const ReactionSpec rx{400.0, 1.5};
    for (Eigen::Index i = 0; i < ab.size(); i += 97)
        CHECK(ab.c()[i] == rect_product(540e-6, ab.t()[i], sc.env, rect, rx));
    CHECK(rec.metrics.at("channel.L540um.peak_AB_mol_per_m3") == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("empty bit stream exports all-zero traces") {
    std::string doc = slurp(kScenarios / "delta_t.yaml");
    doc = doc.substr(0, doc.find("bit_stream:"));
    const auto rec = run_scenario(parse_scenario_text(doc, "doc"));
    REQUIRE(!rec.probes.empty());
    for (const auto& p : rec.probes)
        for (const auto& s : p.series) CHECK(s.peak() == 0.0);
}

TEST_CASE("exports are byte-identical across reruns") {
    const auto sc = load_scenario(kScenarios / "rx_threshold.yaml");
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    const auto files_a = export_run(run_scenario(sc), a);
    const auto files_b = export_run(run_scenario(sc), b);
    REQUIRE(files_a.size() == files_b.size());
    for (std::size_t i = 0; i < files_a.size(); ++i) CHECK(slurp(files_a[i]) == slurp(files_b[i]));

    const auto summary = nlohmann::ordered_json::parse(slurp(a / "summary.json"));
    std::vector<std::string> keys;
    for (const auto& [k, v] : summary.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"schema", "scenario", "scenario_hash", "tool_version",
                                           "tolerances", "metrics", "probes", "warnings"});
    CHECK(summary["scenario_hash"] == fnv1a_hex(sc.source_text));
}

TEST_CASE("sweeps produce one row per value") {
    const auto single = sweep(kScenarios / "rx_amp.yaml", "rx.C_Amp_VII_mol_per_m3", {6.0});
    REQUIRE(single.runs.size() == 1);
    std::ostringstream os;
    write_sweep_csv(os, single);
    std::istringstream in(os.str());
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 2);
    CHECK(single.runs[0].metrics.at("rx.output.plateau_mol_per_m3") == 2.0);

    const auto widths = sweep(kScenarios / "rx_threshold.yaml", "rx.C_ThL_VI_mol_per_m3", {0.25, 0.5, 1.0});
    CHECK(widths.runs[0].metrics.at("rx.output.width_s") > widths.runs[1].metrics.at("rx.output.width_s"));
    CHECK(widths.runs[1].metrics.at("rx.output.width_s") > widths.runs[2].metrics.at("rx.output.width_s"));
    CHECK(widths.runs[0].scenario_hash != widths.runs[1].scenario_hash);
}

TEST_CASE("command-line exit codes") {
    const fs::path out = scratch("cli");
    const std::string o = "-o " + out.string() + " ";
    const std::string rx = (kScenarios / "rx_amp.yaml").string();
    CHECK(cli(o + "validate " + rx) == 0);
    CHECK(cli(o + "run " + rx) == 0);
    CHECK(fs::exists(out / "rx_amp" / "rx_output.csv"));
    CHECK(fs::exists(out / "rx_amp" / "summary.json"));
    CHECK(cli(o + "sweep " + rx + " --param rx.C_Amp_VII_mol_per_m3 --values 3,6") == 0);
    CHECK(fs::exists(out / "rx_amp_sweep" / "sweep.csv"));
    CHECK(cli(o + "sweep " + rx + " --param rx --values 3") == 2);
    CHECK(cli(o + "run " + (out / "missing.yaml").string()) == 2);
    CHECK(cli("frobnicate") == 2);

    const fs::path bad = out / "bad.yaml";
    std::ofstream(bad) << "name: bad\nenv: {v_eff_m_per_s: 0.0, D_m2_per_s: 1e-9, D_eff_m2_per_s: 1e-8}\n";
    CHECK(cli(o + "validate " + bad.string()) == 2);

    // A quadrature tolerance far below double precision cannot be met.
    std::string doc = kRxDoc;
    doc += "  method: appro2\n  quadrature: {tol_mol_per_m3: 1.0e-30}\ngrid: {sample_dt_s: 0.1}\n";
    const fs::path hard = out / "hard.yaml";
    std::ofstream(hard) << doc;
    CHECK(cli(o + "run " + hard.string()) == 3);
}

TEST_CASE("output directory comes from the environment when no flag is given") {
    const fs::path out = scratch("env");
    const std::string cmd = "MCLINK_OUTPUT_DIR=" + out.string() + " " + LINKCLI_PATH + " run " +
                            (kScenarios / "rx_amp.yaml").string() + " >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(out / "rx_amp" / "summary.json"));
}
