#pragma once

// Plain comma-separated files: datasets, sweep rows and trajectories.
// Doubles are written in the shortest form that parses back to the same bits.

#include <Eigen/Dense>

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/harness.hpp"
#include "polyak_rates/objective.hpp"
#include "polyak_rates/optimizers.hpp"

namespace polyak::io {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view chomp(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

[[noreturn]] inline void bad_row(std::size_t row, const std::string& what) {
  throw ParseError("row " + std::to_string(row) + ": " + what, row);
}

inline double parse_double(std::string_view f, std::size_t row, const char* field) {
  double v = 0.0;
  const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc() || res.ptr != f.data() + f.size())
    bad_row(row, std::string("field '") + field + "' is not a number: '" + std::string(f) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view f, std::size_t row, const char* field) {
  Int v{};
  const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc() || res.ptr != f.data() + f.size())
    bad_row(row, std::string("field '") + field + "' is not an integer: '" + std::string(f) + "'");
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

// ---- sweep rows ------------------------------------------------------------

inline constexpr std::string_view kSweepHeader =
    "n,trial,method,min_dist,argmin_k,iters_to_radius,last_dist,wall_ms,failed";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << r.trial << ',' << to_string(r.method) << ',' << format_double(r.min_dist) << ','
        << r.argmin_k << ',';
    if (r.iters_to_radius) out << *r.iters_to_radius;
    out << ',' << format_double(r.last_dist) << ',' << format_double(r.wall_ms) << ',' << (r.failed ? "true" : "false")
        << '\n';
  }
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = detail::open_out(path);
  write_sweep_csv(out, rows);
  detail::finish(out, path);
}

/// Row numbers in errors count the header as row 1.
inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("row 1: missing header", 1);
  if (detail::chomp(line) != kSweepHeader) throw ParseError("row 1: unexpected header '" + line + "'", 1);
  std::vector<SweepRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view body = detail::chomp(line);
    if (body.empty()) continue;
    const auto f = detail::split_fields(body);
    if (f.size() != 9) detail::bad_row(row, "expected 9 fields, got " + std::to_string(f.size()));
    SweepRow r;
    r.n = detail::parse_int<std::size_t>(f[0], row, "n");
    r.trial = detail::parse_int<int>(f[1], row, "trial");
    try {
      r.method = parse_method(std::string(f[2]));
    } catch (const ConfigError&) {
      detail::bad_row(row, "unknown method '" + std::string(f[2]) + "'");
    }
    r.min_dist = detail::parse_double(f[3], row, "min_dist");
    r.argmin_k = detail::parse_int<std::size_t>(f[4], row, "argmin_k");
    if (!f[5].empty()) r.iters_to_radius = detail::parse_int<std::size_t>(f[5], row, "iters_to_radius");
    r.last_dist = detail::parse_double(f[6], row, "last_dist");
    r.wall_ms = detail::parse_double(f[7], row, "wall_ms");
    if (f[8] == "true" || f[8] == "1") {
      r.failed = true;
    } else if (f[8] == "false" || f[8] == "0") {
      r.failed = false;
    } else {
      detail::bad_row(row, "field 'failed' must be true or false");
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  auto in = detail::open_in(path);
  return read_sweep_csv(in);
}

// ---- datasets --------------------------------------------------------------

/// Covariates plus, for regression models, the responses.
struct DatasetTable {
  RowMatrix X;
  std::optional<Eigen::VectorXd> Y;
};

inline void write_dataset_csv(std::ostream& out, const RowMatrix& X, const Eigen::VectorXd* Y = nullptr) {
  if (Y && Y->size() != X.rows()) throw ContractViolation("write_dataset_csv: X and Y row counts differ");
  for (Eigen::Index j = 0; j < X.cols(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
  if (Y) out << ",y";
  out << '\n';
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) out << (j ? "," : "") << format_double(X(i, j));
    if (Y) out << ',' << format_double((*Y)[i]);
    out << '\n';
  }
}

inline void write_dataset_csv(const std::string& path, const RowMatrix& X, const Eigen::VectorXd* Y = nullptr) {
  auto out = detail::open_out(path);
  write_dataset_csv(out, X, Y);
  detail::finish(out, path);
}

inline DatasetTable read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("row 1: missing header", 1);
  const auto head = detail::split_fields(detail::chomp(line));
  const bool has_y = !head.empty() && head.back() == "y";
  const std::size_t d = head.size() - (has_y ? 1 : 0);
  if (d < 1) throw ParseError("row 1: no covariate columns", 1);
  for (std::size_t j = 0; j < d; ++j)
    if (head[j] != "x" + std::to_string(j + 1)) throw ParseError("row 1: expected column x" + std::to_string(j + 1), 1);
  std::vector<double> xs, ys;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view body = detail::chomp(line);
    if (body.empty()) continue;
    const auto f = detail::split_fields(body);
    if (f.size() != head.size())
      detail::bad_row(row, "expected " + std::to_string(head.size()) + " fields, got " + std::to_string(f.size()));
    for (std::size_t j = 0; j < d; ++j) xs.push_back(detail::parse_double(f[j], row, "x"));
    if (has_y) ys.push_back(detail::parse_double(f[d], row, "y"));
  }
  DatasetTable t;
  const auto n = static_cast<Eigen::Index>(xs.size() / d);
  t.X = Eigen::Map<const RowMatrix>(xs.data(), n, static_cast<Eigen::Index>(d));
  if (has_y) t.Y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  return t;
}

inline DatasetTable read_dataset_csv(const std::string& path) {
  auto in = detail::open_in(path);
  return read_dataset_csv(in);
}

// ---- trajectories ----------------------------------------------------------

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index d = traj.empty() ? 0 : traj.iterates.front().size();
  out << "k,value,grad_norm,dist";
  for (Eigen::Index j = 0; j < d; ++j) out << ",theta" << (j + 1);
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << k << ',' << format_double(traj.values[k]) << ',' << format_double(traj.grad_norms[k]) << ',';
    if (traj.distances) out << format_double((*traj.distances)[k]);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(traj.iterates[k][j]);
    out << '\n';
  }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = detail::open_out(path);
  write_trajectory_csv(out, traj);
  detail::finish(out, path);
}

}  // namespace polyak::io
