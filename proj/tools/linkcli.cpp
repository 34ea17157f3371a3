#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mclink/errors.hpp"
#include "mclink/export.hpp"
#include "mclink/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr const char* kOutEnv = "MCLINK_OUTPUT_DIR";

fs::path output_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') return env;
    return "mclink_out";
}

void report(const mclink::RunRecord& rec, const std::vector<fs::path>& files) {
    std::cout << rec.scenario << " [" << rec.scenario_hash << "]\n";
    for (const auto& [k, v] : rec.metrics) std::cout << "  " << k << " = " << v << '\n';
    for (const auto& w : rec.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : files) std::cout << "  wrote " << f.string() << '\n';
}

int run_verb(const std::string& path, const fs::path& out, bool oracle_check) {
    const auto sc = mclink::load_scenario(path);
    const auto rec = mclink::run_scenario(sc, {oracle_check});
    const fs::path dir = out / (oracle_check ? sc.name + "_oracle_check" : sc.name);
    report(rec, mclink::export_run(rec, dir, sc.probes));
    return 0;
}

int sweep_verb(const std::string& path, const fs::path& out, const std::string& param,
               const std::vector<double>& values) {
    const auto sc = mclink::load_scenario(path);
    const auto result = mclink::sweep(path, param, values);
    const fs::path dir = out / (sc.name + "_sweep");
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto files =
            mclink::export_run(result.runs[i], dir / ("value_" + std::to_string(i)), sc.probes);
        report(result.runs[i], files);
    }
    fs::create_directories(dir);
    const fs::path table = dir / "sweep.csv";
    std::ofstream csv(table, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("export: cannot write " + table.string());
    mclink::write_sweep_csv(csv, result);
    std::cout << "wrote " << table.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Microfluidic molecular communication link simulator"};
    app.set_version_flag("--version", std::string(mclink::tool_version()));
    app.require_subcommand(1);
    std::string out_flag;
    app.add_option("-o,--out", out_flag,
                   std::string("output directory (default: $") + kOutEnv + " or ./mclink_out)");

    std::string scenario;
    auto* run = app.add_subcommand("run", "run a scenario and export traces");
    run->add_option("scenario", scenario, "scenario file")->required();

    auto* validate = app.add_subcommand("validate", "parse and validate a scenario");
    validate->add_option("scenario", scenario, "scenario file")->required();

    auto* check = app.add_subcommand("oracle-check", "pair analytical traces with oracle solves");
    check->add_option("scenario", scenario, "scenario file")->required();

    std::string param;
    std::vector<double> values;
    auto* sw = app.add_subcommand("sweep", "rerun a scenario over values of one scalar field");
    sw->add_option("scenario", scenario, "scenario file")->required();
    sw->add_option("--param", param, "dotted path of the field, e.g. rx.C_ThL_VI_mol_per_m3")
        ->required();
    sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    const fs::path out = output_root(out_flag);
    try {
        if (*run) return run_verb(scenario, out, false);
        if (*check) return run_verb(scenario, out, true);
        if (*sw) return sweep_verb(scenario, out, param, values);
        const auto sc = mclink::load_scenario(scenario);
        std::cout << sc.origin << ": ok (" << sc.name << ", hash " << mclink::fnv1a_hex(sc.source_text)
                  << ")\n";
        return 0;
    } catch (const mclink::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mclink::ConfigError& e) {
        std::cerr << "error: " << scenario << ": " << e.what() << '\n';
        return kExitConfig;
    } catch (const mclink::DomainError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const mclink::AccuracyError& e) {
        std::cerr << "numerical error: " << e.what() << " (achieved bound " << e.achieved_bound()
                  << ")\n";
        return kExitNumerical;
    } catch (const mclink::NoCrossingError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const mclink::SearchError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const mclink::StabilityError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
