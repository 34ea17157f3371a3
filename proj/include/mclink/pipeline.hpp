#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mclink/scenario.hpp"

namespace mclink {

/// Traces recorded at one named station; analytical and oracle series share a probe.
struct Probe {
    std::string name;
    std::vector<TimeSeries> series;
};

struct RunRecord {
    std::string scenario;
    std::string scenario_hash;  ///< FNV-1a of the scenario text after overrides
    std::string tool_version;
    std::map<std::string, double> tolerances;
    std::vector<Probe> probes;
    std::map<std::string, double> metrics;
    std::vector<std::string> warnings;
};

struct RunOptions {
    bool oracle_check = false;  ///< pair every analytical trace with an oracle solve
};

/// Executes the pipelines requested by the scenario's sections.
RunRecord run_scenario(const Scenario& sc, const RunOptions& opts = {});

struct SweepResult {
    std::string parameter;
    std::vector<double> values;
    std::vector<RunRecord> runs;
};

/// One run per value with the scalar at `parameter` replaced.
SweepResult sweep(const std::filesystem::path& scenario, const std::string& parameter,
                  const std::vector<double>& values, const RunOptions& opts = {});

std::string fnv1a_hex(std::string_view bytes);
std::string_view tool_version();

}  // namespace mclink
