#pragma once

// File formats: graph and sampling-plan JSON, CSV tables, snapshot windows.
// Every writer goes through write_atomic (temp file + rename).

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "wsngsp/dataset.hpp"
#include "wsngsp/graph.hpp"
#include "wsngsp/learn.hpp"
#include "wsngsp/lifetime.hpp"
#include "wsngsp/sampling.hpp"

namespace wsngsp::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double value);

// {"n": int, "edges": [[i, j, w], ...]} with 0-based i < j and w > 0.
nlohmann::json graph_to_json(const Graph& g);
/// Rejects duplicate edges, out-of-range or unordered indices and w <= 0.
Graph graph_from_json(const nlohmann::json& j);

// {"epsilon", "node_order", "sets", "set_rmse", "last_set_incomplete"}
nlohmann::json plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const nlohmann::json& j);

std::string convergence_csv(const ConvergenceTrace& trace);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string duty_csv(const std::vector<DutyCycleReport>& reports);
std::string schedule_csv(const ScheduleTrace& trace);

nlohmann::json rejects_to_json(const RejectsReport& report);

/// Header "epoch,<mote ids...>", one row per epoch, empty cell = no value.
std::string snapshots_csv(const SnapshotWindow& window);
/// Same shape, 1 where the cell is a genuine receipt, 0 otherwise.
std::string snapshot_mask_csv(const SnapshotWindow& window);

/// Reads a snapshot CSV and, if given, its mask companion. Without a mask
/// every finite cell counts as observed.
SnapshotWindow read_snapshots(const std::filesystem::path& values_path,
                              const std::filesystem::path& mask_path = {});

}  // namespace wsngsp::io
