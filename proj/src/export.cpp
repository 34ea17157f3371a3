#include "mclink/export.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "mclink/errors.hpp"

namespace mclink {

namespace {

std::string fmt(const char* spec, double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("export: cannot write " + path.string());
    return out;
}

}  // namespace

void write_probe_csv(std::ostream& out, const Probe& probe) {
    out << "# schema: " << kTraceSchema << "; probe: " << probe.name << '\n';
    for (const auto& s : probe.series)
        out << "# series: species=" << s.species() << " source=" << to_string(s.source())
            << " station_m=" << fmt("%.9e", s.station()) << '\n';
    out << "t_seconds,species,concentration_mol_per_m3,source\n";
    for (const auto& s : probe.series) {
        const std::string tail = "," + std::string(to_string(s.source())) + "\n";
        for (Eigen::Index i = 0; i < s.size(); ++i)
            out << fmt("%.9g", s.t()[i]) << ',' << s.species() << ',' << fmt("%.9e", s.c()[i]) << tail;
    }
}

void write_summary_json(std::ostream& out, const RunRecord& record) {
    nlohmann::ordered_json j;
    j["schema"] = kSummarySchema;
    j["scenario"] = record.scenario;
    j["scenario_hash"] = record.scenario_hash;
    j["tool_version"] = record.tool_version;
    j["tolerances"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : record.tolerances) j["tolerances"][k] = v;
    j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : record.metrics) j["metrics"][k] = v;
    j["probes"] = nlohmann::ordered_json::array();
    for (const auto& p : record.probes) {
        nlohmann::ordered_json entry;
        entry["name"] = p.name;
        entry["file"] = p.name + ".csv";
        entry["series"] = nlohmann::ordered_json::array();
        for (const auto& s : p.series)
            entry["series"].push_back({{"species", s.species()},
                                       {"source", std::string(to_string(s.source()))},
                                       {"station_m", s.station()},
                                       {"samples", s.size()},
                                       {"peak_mol_per_m3", s.peak()}});
        j["probes"].push_back(std::move(entry));
    }
    j["warnings"] = record.warnings;
    out << j.dump(2) << '\n';
}

std::vector<std::filesystem::path> export_run(const RunRecord& record,
                                              const std::filesystem::path& dir,
                                              const std::vector<std::string>& selected) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    RunRecord kept = record;
    if (!selected.empty()) {
        std::vector<Probe> probes;
        for (const auto& name : selected) {
            bool found = false;
            for (const auto& p : record.probes)
                if (p.name == name) {
                    probes.push_back(p);
                    found = true;
                }
            if (!found) kept.warnings.push_back("requested probe '" + name + "' was not produced");
        }
        kept.probes = std::move(probes);
    }
    for (const auto& p : kept.probes) {
        const auto path = dir / (p.name + ".csv");
        auto out = open_out(path);
        write_probe_csv(out, p);
        written.push_back(path);
    }
    const auto summary = dir / "summary.json";
    auto out = open_out(summary);
    write_summary_json(out, kept);
    written.push_back(summary);
    return written;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    std::set<std::string> columns;
    for (const auto& r : result.runs)
        for (const auto& [k, v] : r.metrics)
            if (k.rfind("sweep.", 0) != 0) columns.insert(k);
    out << "# schema: " << kSweepSchema << "; parameter: " << result.parameter << '\n';
    out << result.parameter;
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        out << fmt("%.17g", result.values[i]);
        for (const auto& c : columns) {
            out << ',';
            const auto it = result.runs[i].metrics.find(c);
            if (it != result.runs[i].metrics.end()) out << fmt("%.17g", it->second);
        }
        out << '\n';
    }
}

}  // namespace mclink
