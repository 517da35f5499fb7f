#pragma once

// Intel Berkeley Lab sensor log ingestion, loss-aware snapshot assembly and
// synthetic smooth-signal fixtures.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wsngsp/graph.hpp"
#include "wsngsp/signal_matrix.hpp"

namespace wsngsp {

struct MeasurementRecord {
  std::chrono::year_month_day date;
  std::int64_t time_us = 0;  // microseconds since midnight
  std::int64_t epoch = 0;
  int mote_id = 0;
  double temperature = 0.0;  // degrees C
  double humidity = 0.0;
  double light = 0.0;
  double voltage = 0.0;

  bool operator==(const MeasurementRecord&) const = default;
};

struct IngestOptions {
  int min_mote = 1;
  int max_mote = 54;
  double min_temperature = -20.0;
  double max_temperature = 60.0;
};

/// Reasons a row is dropped, in report order.
enum class RejectReason { field_count, malformed, mote_out_of_range, implausible_temperature };
std::string to_string(RejectReason reason);

struct RejectsReport {
  std::int64_t total_rows = 0;
  std::int64_t accepted = 0;
  std::map<RejectReason, std::int64_t> rejected;

  std::int64_t rejected_total() const;
};

struct ParsedLog {
  std::vector<MeasurementRecord> records;
  RejectsReport rejects;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses one whitespace-separated row:
///   date time epoch mote_id temperature humidity light voltage
/// Returns the reject reason instead of a record when the row is dropped.
std::variant<MeasurementRecord, RejectReason> parse_intel_line(std::string_view line,
                                                               const IngestOptions& options = {});

/// Parses a whole stream. Blank lines are ignored. Throws ParseError when no
/// row is accepted.
ParsedLog parse_intel(std::istream& in, const IngestOptions& options = {});
/// Throws ParseError when the file cannot be opened.
ParsedLog parse_intel(const std::filesystem::path& path, const IngestOptions& options = {});

/// Inverse of parse_intel_line for accepted records (doubles in shortest
/// round-trip form, time with microsecond precision).
std::string format_intel_line(const MeasurementRecord& record);

struct FillPolicy {
  enum class Kind { none, forward_fill };
  Kind kind = Kind::forward_fill;
  int max_gap = 10;  // epochs

  static FillPolicy none() { return {Kind::none, 0}; }
  static FillPolicy forward(int max_gap) { return {Kind::forward_fill, max_gap}; }
};

struct EpochRange {
  std::int64_t first = 0;
  std::int64_t last = 0;  // inclusive
};

struct SnapshotWindow {
  std::vector<std::int64_t> epochs;
  std::vector<int> motes;         // column -> mote id
  std::vector<int> silent_motes;  // requested but never heard in the window
  SignalMatrix X;                 // observed = genuine receipt; fills are unobserved
  FillPolicy fill;
};

/// One row per epoch in `range`, one column per mote of `universe` that
/// reported at least once in the window. Duplicate (epoch, mote) rows: the
/// later record wins. Forward fill carries the last receipt for up to
/// max_gap epochs.
SnapshotWindow assemble_snapshots(const std::vector<MeasurementRecord>& records, EpochRange range,
                                  const std::vector<int>& universe, FillPolicy fill = {});

/// Motes min_mote..max_mote.
std::vector<int> mote_universe(const IngestOptions& options = {});

/// T snapshots, each U[:, :k] c + noise with c ~ N(0, I) and noise
/// ~ N(0, sigma^2), drawn from a generator seeded with `seed`.
SignalMatrix synth_smooth(const Graph& g, int k, double noise_sigma, int T, std::uint64_t seed);

/// Random geometric graph on the unit square: vertices within `radius` are
/// joined with weight exp(-d^2 / (2 * (radius/2)^2)). Used as a planted
/// topology for fixtures.
Graph planted_geometric_graph(int n, double radius, std::uint64_t seed);

}  // namespace wsngsp
