#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "mclink/pipeline.hpp"

namespace mclink {

inline constexpr const char* kTraceSchema = "mclink-trace/1";
inline constexpr const char* kSummarySchema = "mclink-summary/1";
inline constexpr const char* kSweepSchema = "mclink-sweep/1";

/// Long-format trace table: schema comment, header, one row per sample.
void write_probe_csv(std::ostream& out, const Probe& probe);

/// Summary document with a fixed key order.
void write_summary_json(std::ostream& out, const RunRecord& record);

/// Writes <dir>/<probe>.csv for the selected probes and <dir>/summary.json.
/// `selected` filters by probe name; empty keeps all. Returns the files written.
std::vector<std::filesystem::path> export_run(const RunRecord& record,
                                              const std::filesystem::path& dir,
                                              const std::vector<std::string>& selected = {});

/// Metric table with one row per swept value; columns are the union of metric names.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace mclink
