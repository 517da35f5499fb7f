#include "wsngsp/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>

namespace wsngsp::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  for (auto& c : cells) {
    if (!c.empty() && c.back() == '\r') c.pop_back();
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& where) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double value = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return value;
  } catch (const std::exception&) {
    throw FormatError("non-numeric cell '" + cell + "' in " + where);
  }
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  const Matrix& w = g.weights();
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      if (w(i, j) > 0.0) edges.push_back({i, j, w(i, j)});
    }
  }
  return {{"n", g.size()}, {"edges", std::move(edges)}};
}

Graph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges")) {
    throw FormatError("graph JSON needs \"n\" and \"edges\"");
  }
  const int n = j.at("n").get<int>();
  if (n < 0) throw FormatError("graph JSON: negative vertex count");
  Matrix w = Matrix::Zero(n, n);
  std::set<std::pair<int, int>> seen;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3) throw FormatError("graph JSON: edge must be [i, j, w]");
    const int a = e[0].get<int>();
    const int b = e[1].get<int>();
    const double weight = e[2].get<double>();
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw FormatError("graph JSON: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") out of range");
    }
    if (a >= b) throw FormatError("graph JSON: edge indices must satisfy i < j");
    if (!(weight > 0.0) || !std::isfinite(weight)) {
      throw FormatError("graph JSON: edge weight must be positive and finite");
    }
    if (!seen.emplace(a, b).second) {
      throw FormatError("graph JSON: duplicate edge (" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
    }
    w(a, b) = weight;
    w(b, a) = weight;
  }
  return build_graph(w);
}

nlohmann::json plan_to_json(const SamplingPlan& plan) {
  nlohmann::json rmse = nlohmann::json::array();
  for (double r : plan.set_rmse) rmse.push_back(r);
  return {{"epsilon", plan.epsilon},
          {"node_order", plan.node_order},
          {"sets", plan.sets},
          {"set_rmse", std::move(rmse)},
          {"last_set_incomplete", plan.last_set_incomplete}};
}

SamplingPlan plan_from_json(const nlohmann::json& j) {
  SamplingPlan plan;
  try {
    plan.epsilon = j.at("epsilon").get<double>();
    plan.node_order = j.at("node_order").get<std::vector<int>>();
    plan.sets = j.at("sets").get<std::vector<std::vector<int>>>();
    for (const auto& r : j.at("set_rmse")) {
      plan.set_rmse.push_back(r.is_null() ? std::numeric_limits<double>::infinity()
                                          : r.get<double>());
    }
    plan.last_set_incomplete = j.at("last_set_incomplete").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("sampling plan JSON: ") + e.what());
  }
  if (plan.set_rmse.size() != plan.sets.size()) {
    throw FormatError("sampling plan JSON: set_rmse and sets differ in length");
  }
  return plan;
}

std::string convergence_csv(const ConvergenceTrace& trace) {
  std::string out = "snapshots_seen,rel_change\n";
  for (const auto& e : trace.entries) {
    out += fmt::format("{},{}\n", e.snapshots_seen, format_double(e.rel_change));
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "epsilon,n_sets,max_rmse,last_set_incomplete\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{}\n", format_double(r.epsilon), r.n_sets,
                       format_double(r.max_rmse), r.last_set_incomplete ? 1 : 0);
  }
  return out;
}

std::string duty_csv(const std::vector<DutyCycleReport>& reports) {
  std::string out = "n_sets,duty_pct\n";
  for (const auto& r : reports) out += fmt::format("{},{}\n", r.n_sets, r.rendered());
  return out;
}

std::string schedule_csv(const ScheduleTrace& trace) {
  std::string out = "snapshot,round,set,rmse\n";
  for (const auto& s : trace.steps) {
    out += fmt::format("{},{},{},{}\n", s.snapshot, s.round, s.set, format_double(s.rmse));
  }
  return out;
}

nlohmann::json rejects_to_json(const RejectsReport& report) {
  nlohmann::json reasons = nlohmann::json::object();
  for (RejectReason r : {RejectReason::field_count, RejectReason::malformed,
                         RejectReason::mote_out_of_range, RejectReason::implausible_temperature}) {
    auto it = report.rejected.find(r);
    reasons[to_string(r)] = it == report.rejected.end() ? 0 : it->second;
  }
  return {{"total_rows", report.total_rows},
          {"accepted", report.accepted},
          {"rejected_total", report.rejected_total()},
          {"rejected", std::move(reasons)}};
}

std::string snapshots_csv(const SnapshotWindow& window) {
  std::string out = "epoch";
  for (int m : window.motes) out += fmt::format(",{}", m);
  out += '\n';
  const Matrix& v = window.X.values();
  for (int t = 0; t < window.X.snapshots(); ++t) {
    out += std::to_string(window.epochs[static_cast<std::size_t>(t)]);
    for (int c = 0; c < window.X.nodes(); ++c) {
      out += ',';
      if (std::isfinite(v(t, c))) out += format_double(v(t, c));
    }
    out += '\n';
  }
  return out;
}

std::string snapshot_mask_csv(const SnapshotWindow& window) {
  std::string out = "epoch";
  for (int m : window.motes) out += fmt::format(",{}", m);
  out += '\n';
  for (int t = 0; t < window.X.snapshots(); ++t) {
    out += std::to_string(window.epochs[static_cast<std::size_t>(t)]);
    for (int c = 0; c < window.X.nodes(); ++c) out += window.X.observed()(t, c) ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

SnapshotWindow read_snapshots(const std::filesystem::path& values_path,
                              const std::filesystem::path& mask_path) {
  auto load = [](const std::filesystem::path& path, std::vector<int>& motes,
                 std::vector<std::int64_t>& epochs) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "epoch") {
      throw FormatError(path.string() + ": header must start with 'epoch'");
    }
    motes.clear();
    for (std::size_t c = 1; c < header.size(); ++c) motes.push_back(std::stoi(header[c]));
    std::vector<std::vector<double>> rows;
    epochs.clear();
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != header.size()) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " cells");
      }
      epochs.push_back(std::stoll(cells[0]));
      std::vector<double> row;
      for (std::size_t c = 1; c < cells.size(); ++c) {
        row.push_back(parse_cell(cells[c], path.string() + ":" + std::to_string(line_no)));
      }
      rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(motes.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < motes.size(); ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return m;
  };

  SnapshotWindow window;
  Matrix values = load(values_path, window.motes, window.epochs);
  if (mask_path.empty()) {
    window.X = SignalMatrix::from_finite(std::move(values));
    return window;
  }
  std::vector<int> mask_motes;
  std::vector<std::int64_t> mask_epochs;
  const Matrix mask = load(mask_path, mask_motes, mask_epochs);
  if (mask_motes != window.motes || mask_epochs != window.epochs) {
    throw FormatError("snapshot mask does not match the value file");
  }
  window.X = SignalMatrix(std::move(values), mask.array() > 0.5);
  return window;
}

}  // namespace wsngsp::io
