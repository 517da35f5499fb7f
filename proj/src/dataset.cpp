#include "wsngsp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

namespace wsngsp {

namespace {

constexpr std::size_t kIntelFieldCount = 8;

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_date(std::string_view text, std::chrono::year_month_day& out) {
  // YYYY-MM-DD
  const auto dash1 = text.find('-');
  const auto dash2 = text.find('-', dash1 == std::string_view::npos ? dash1 : dash1 + 1);
  if (dash1 == std::string_view::npos || dash2 == std::string_view::npos) return false;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (!parse_number(text.substr(0, dash1), y) ||
      !parse_number(text.substr(dash1 + 1, dash2 - dash1 - 1), m) ||
      !parse_number(text.substr(dash2 + 1), d)) {
    return false;
  }
  out = std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  return out.ok();
}

bool parse_time(std::string_view text, std::int64_t& micros) {
  // HH:MM:SS[.ffffff...]
  if (text.size() < 8 || text[2] != ':' || text[5] != ':') return false;
  int h = 0;
  int m = 0;
  int s = 0;
  if (!parse_number(text.substr(0, 2), h) || !parse_number(text.substr(3, 2), m) ||
      !parse_number(text.substr(6, 2), s)) {
    return false;
  }
  if (h > 23 || m > 59 || s > 60 || h < 0 || m < 0 || s < 0) return false;
  std::int64_t frac = 0;
  if (text.size() > 8) {
    if (text[8] != '.' || text.size() == 9) return false;
    std::string_view digits = text.substr(9);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return false;
    }
    for (std::size_t i = 0; i < 6; ++i) {
      frac = frac * 10 + (i < digits.size() ? digits[i] - '0' : 0);
    }
  }
  micros = ((static_cast<std::int64_t>(h) * 60 + m) * 60 + s) * 1000000 + frac;
  return true;
}

void append_double(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::field_count: return "field_count";
    case RejectReason::malformed: return "malformed";
    case RejectReason::mote_out_of_range: return "mote_out_of_range";
    case RejectReason::implausible_temperature: return "implausible_temperature";
  }
  return "unknown";
}

std::int64_t RejectsReport::rejected_total() const {
  std::int64_t total = 0;
  for (const auto& [reason, count] : rejected) total += count;
  return total;
}

std::variant<MeasurementRecord, RejectReason> parse_intel_line(std::string_view line,
                                                               const IngestOptions& options) {
  const auto fields = split_whitespace(line);
  if (fields.size() != kIntelFieldCount) return RejectReason::field_count;

  MeasurementRecord r;
  if (!parse_date(fields[0], r.date) || !parse_time(fields[1], r.time_us) ||
      !parse_number(fields[2], r.epoch) || !parse_number(fields[3], r.mote_id) ||
      !parse_number(fields[4], r.temperature) || !parse_number(fields[5], r.humidity) ||
      !parse_number(fields[6], r.light) || !parse_number(fields[7], r.voltage) || r.epoch < 0) {
    return RejectReason::malformed;
  }
  if (r.mote_id < options.min_mote || r.mote_id > options.max_mote) {
    return RejectReason::mote_out_of_range;
  }
  if (!std::isfinite(r.temperature) || r.temperature < options.min_temperature ||
      r.temperature > options.max_temperature) {
    return RejectReason::implausible_temperature;
  }
  return r;
}

ParsedLog parse_intel(std::istream& in, const IngestOptions& options) {
  ParsedLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (split_whitespace(line).empty()) continue;
    ++log.rejects.total_rows;
    auto parsed = parse_intel_line(line, options);
    if (auto* record = std::get_if<MeasurementRecord>(&parsed)) {
      log.records.push_back(*record);
      ++log.rejects.accepted;
    } else {
      ++log.rejects.rejected[std::get<RejectReason>(parsed)];
    }
  }
  if (log.records.empty()) {
    throw ParseError("parse_intel: no rows accepted (" + std::to_string(log.rejects.total_rows) +
                     " rows read)");
  }
  return log;
}

ParsedLog parse_intel(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("parse_intel: cannot open " + path.string());
  return parse_intel(in, options);
}

std::string format_intel_line(const MeasurementRecord& r) {
  char buf[64];
  const std::int64_t seconds = r.time_us / 1000000;
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld.%06lld",
                static_cast<int>(r.date.year()), static_cast<unsigned>(r.date.month()),
                static_cast<unsigned>(r.date.day()), static_cast<long long>(seconds / 3600),
                static_cast<long long>((seconds / 60) % 60), static_cast<long long>(seconds % 60),
                static_cast<long long>(r.time_us % 1000000));
  std::string out(buf);
  out += ' ' + std::to_string(r.epoch) + ' ' + std::to_string(r.mote_id) + ' ';
  append_double(out, r.temperature);
  out += ' ';
  append_double(out, r.humidity);
  out += ' ';
  append_double(out, r.light);
  out += ' ';
  append_double(out, r.voltage);
  return out;
}

std::vector<int> mote_universe(const IngestOptions& options) {
  std::vector<int> motes(static_cast<std::size_t>(std::max(0, options.max_mote - options.min_mote + 1)));
  std::iota(motes.begin(), motes.end(), options.min_mote);
  return motes;
}

SnapshotWindow assemble_snapshots(const std::vector<MeasurementRecord>& records, EpochRange range,
                                  const std::vector<int>& universe, FillPolicy fill) {
  if (range.last < range.first) throw std::invalid_argument("assemble_snapshots: empty epoch range");
  if (universe.empty()) throw std::invalid_argument("assemble_snapshots: empty node universe");
  if (fill.kind == FillPolicy::Kind::forward_fill && fill.max_gap < 0) {
    throw std::invalid_argument("assemble_snapshots: max_gap must be >= 0");
  }

  std::unordered_map<int, int> column_of;
  for (std::size_t c = 0; c < universe.size(); ++c) {
    if (!column_of.emplace(universe[c], static_cast<int>(c)).second) {
      throw std::invalid_argument("assemble_snapshots: duplicate mote id in universe");
    }
  }
  const auto rows = static_cast<Eigen::Index>(range.last - range.first + 1);
  const auto cols = static_cast<Eigen::Index>(universe.size());
  Matrix values = Matrix::Constant(rows, cols, std::numeric_limits<double>::quiet_NaN());
  BoolMatrix seen = BoolMatrix::Constant(rows, cols, false);
  for (const MeasurementRecord& r : records) {
    if (r.epoch < range.first || r.epoch > range.last) continue;
    auto it = column_of.find(r.mote_id);
    if (it == column_of.end()) continue;
    const auto t = static_cast<Eigen::Index>(r.epoch - range.first);
    values(t, it->second) = r.temperature;
    seen(t, it->second) = true;
  }

  if (fill.kind == FillPolicy::Kind::forward_fill) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Eigen::Index last_seen = -1;
      for (Eigen::Index t = 0; t < rows; ++t) {
        if (seen(t, c)) {
          last_seen = t;
        } else if (last_seen >= 0 && t - last_seen <= fill.max_gap) {
          values(t, c) = values(last_seen, c);
        }
      }
    }
  }

  SnapshotWindow window;
  window.fill = fill;
  for (std::int64_t e = range.first; e <= range.last; ++e) window.epochs.push_back(e);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (seen.col(c).any()) {
      keep.push_back(c);
      window.motes.push_back(universe[static_cast<std::size_t>(c)]);
    } else {
      window.silent_motes.push_back(universe[static_cast<std::size_t>(c)]);
    }
  }
  Matrix kept_values(rows, static_cast<Eigen::Index>(keep.size()));
  BoolMatrix kept_seen(rows, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kept_values.col(static_cast<Eigen::Index>(k)) = values.col(keep[k]);
    kept_seen.col(static_cast<Eigen::Index>(k)) = seen.col(keep[k]);
  }
  window.X = SignalMatrix(std::move(kept_values), std::move(kept_seen));
  return window;
}

SignalMatrix synth_smooth(const Graph& g, int k, double noise_sigma, int T, std::uint64_t seed) {
  const int n = g.size();
  if (k < 1 || k > n) throw std::out_of_range("synth_smooth: k outside [1, n]");
  if (T < 1) throw std::invalid_argument("synth_smooth: need at least one snapshot");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synth_smooth: noise sigma must be >= 0");

  const SpectralBasis basis = spectral_decompose(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix values(T, n);
  Vector coeffs(k);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < k; ++j) coeffs(j) = normal(rng);
    values.row(t) = (basis.eigenvectors.leftCols(k) * coeffs).transpose();
    if (noise_sigma > 0.0) {
      for (int i = 0; i < n; ++i) values(t, i) += noise_sigma * normal(rng);
    }
  }
  return SignalMatrix::fully_observed(std::move(values));
}

Graph planted_geometric_graph(int n, double radius, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("planted_geometric_graph: need at least two vertices");
  if (!(radius > 0.0)) throw std::invalid_argument("planted_geometric_graph: radius must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix points(n, 2);
  for (int i = 0; i < n; ++i) {
    points(i, 0) = unit(rng);
    points(i, 1) = unit(rng);
  }
  // Grow the radius until the graph is connected.
  for (double r = radius;; r *= 1.1) {
    const double sigma = r / 2.0;
    Matrix w = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        const double d2 = (points.row(i) - points.row(j)).squaredNorm();
        if (d2 <= r * r) {
          w(i, j) = std::exp(-d2 / (2.0 * sigma * sigma));
          w(j, i) = w(i, j);
        }
      }
    }
    std::vector<int> stack{0};
    std::vector<bool> reached(static_cast<std::size_t>(n), false);
    reached[0] = true;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (w(u, v) > 0.0 && !reached[static_cast<std::size_t>(v)]) {
          reached[static_cast<std::size_t>(v)] = true;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count == n) return build_graph(w);
  }
}

}  // namespace wsngsp
