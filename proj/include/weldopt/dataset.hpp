#ifndef WELDOPT_DATASET_HPP
#define WELDOPT_DATASET_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "weldopt/error.hpp"
#include "weldopt/rng.hpp"

namespace weldopt {

/// One experimental observation: factor settings in declaration order plus the measured response.
/// For the AA6262 data the factors are (rpm, traverse mm/min, plan depth mm) and the response is
/// nugget-zone hardness.
struct Run {
  std::vector<double> factors;
  double response = 0.0;

  friend bool operator==(const Run&, const Run&) = default;
};

/// Immutable, validated run collection. Run order is kept exactly as supplied; every operation in
/// the library iterates runs in this order.
class Dataset {
 public:
  Dataset(std::vector<std::string> factor_names, std::string response_name, std::vector<Run> runs)
      : factor_names_(std::move(factor_names)),
        response_name_(std::move(response_name)),
        runs_(std::move(runs)) {
    if (factor_names_.empty()) throw argument_error("dataset needs at least one factor");
    if (runs_.size() < 2) {
      throw insufficient_data_error("dataset needs at least 2 runs, got " +
                                    std::to_string(runs_.size()));
    }
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      const Run& r = runs_[i];
      if (r.factors.size() != factor_names_.size()) {
        throw argument_error("run " + std::to_string(i + 1) + " has " +
                             std::to_string(r.factors.size()) + " factors, expected " +
                             std::to_string(factor_names_.size()));
      }
      for (std::size_t j = 0; j < r.factors.size(); ++j) {
        if (!(std::isfinite(r.factors[j]) && r.factors[j] > 0.0)) {
          throw domain_error("run " + std::to_string(i + 1) + ": " + factor_names_[j] +
                             " must be positive and finite");
        }
      }
      if (!(std::isfinite(r.response) && r.response > 0.0)) {
        throw domain_error("run " + std::to_string(i + 1) + ": " + response_name_ +
                           " must be positive and finite");
      }
    }
  }

  const std::vector<std::string>& factor_names() const noexcept { return factor_names_; }
  const std::string& response_name() const noexcept { return response_name_; }
  const std::vector<Run>& runs() const noexcept { return runs_; }
  std::size_t size() const noexcept { return runs_.size(); }
  std::size_t arity() const noexcept { return factor_names_.size(); }

  std::vector<double> factor_column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(runs_.size());
    for (const Run& r : runs_) out.push_back(r.factors.at(j));
    return out;
  }

  std::vector<double> responses() const {
    std::vector<double> out;
    out.reserve(runs_.size());
    for (const Run& r : runs_) out.push_back(r.response);
    return out;
  }

  /// Row-major feature matrix (size() x arity()).
  std::vector<double> feature_matrix() const {
    std::vector<double> out;
    out.reserve(runs_.size() * arity());
    for (const Run& r : runs_) out.insert(out.end(), r.factors.begin(), r.factors.end());
    return out;
  }

  /// Subset in the order given by `indices` (duplicates allowed).
  Dataset subset(const std::vector<std::size_t>& indices) const {
    std::vector<Run> picked;
    picked.reserve(indices.size());
    for (std::size_t i : indices) picked.push_back(runs_.at(i));
    return Dataset(factor_names_, response_name_, std::move(picked));
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::string> factor_names_;
  std::string response_name_;
  std::vector<Run> runs_;
};

// ---------------------------------------------------------------------------------------------
// CSV

/// Column names a CSV file must carry. Columns may appear in any order; nothing else is allowed.
struct CsvSchema {
  std::vector<std::string> factor_columns{"rpm", "traverse_mm_min", "plan_depth_mm"};
  std::string response_column{"hardness"};
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline std::optional<double> parse_decimal(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string render_decimal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parses CSV text. Accepts LF or CRLF line endings, a leading UTF-8 BOM and blank trailing lines.
inline Dataset parse_csv(std::string_view text, const CsvSchema& schema = {}) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw schema_error("missing header row");

  const auto header = detail::split_fields(lines.front());
  const auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw schema_error("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> factor_cols;
  for (const auto& name : schema.factor_columns) factor_cols.push_back(column_of(name));
  const std::size_t response_col = column_of(schema.response_column);
  if (header.size() != schema.factor_columns.size() + 1) {
    for (const auto& h : header) {
      const bool known = h == schema.response_column ||
                         std::find(schema.factor_columns.begin(), schema.factor_columns.end(),
                                   h) != schema.factor_columns.end();
      if (!known) throw schema_error("unexpected column '" + std::string(h) + "'");
    }
    throw schema_error("duplicate column in header");
  }

  std::vector<Run> runs;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li;
    const auto fields = detail::split_fields(lines[li]);
    if (fields.size() != header.size()) {
      throw parse_error("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        row, fields.size());
    }
    const auto cell = [&](std::size_t col) {
      const auto v = detail::parse_decimal(fields[col]);
      if (!v) {
        throw parse_error("row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                              " ('" + std::string(header[col]) + "'): not a number: '" +
                              std::string(fields[col]) + "'",
                          row, col + 1);
      }
      return *v;
    };
    Run r;
    for (std::size_t c : factor_cols) r.factors.push_back(cell(c));
    r.response = cell(response_col);
    runs.push_back(std::move(r));
  }
  if (runs.size() < 2) {
    throw insufficient_data_error("need at least 2 data rows, got " + std::to_string(runs.size()));
  }
  return Dataset(schema.factor_columns, schema.response_column, std::move(runs));
}

inline Dataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

/// Renders a dataset as CSV (LF endings, shortest round-trip decimals).
inline std::string to_csv(const Dataset& d) {
  std::string out;
  for (const auto& name : d.factor_names()) out += name + ",";
  out += d.response_name() + "\n";
  for (const Run& r : d.runs()) {
    for (double v : r.factors) out += detail::render_decimal(v) + ",";
    out += detail::render_decimal(r.response) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Embedded data

/// The nine friction-stir-welded AA6262 samples, in sample-ID order.
/// Alloy: Si 0.4-0.8, Fe 0-0.7, Cu 0.4-1.4, Cr 0-0.2, Mn 0-0.15, Mg 0.8-1.2, Zn 0-0.25 (wt %).
inline Dataset builtin_aa6262() {
  return Dataset({"rpm", "traverse_mm_min", "plan_depth_mm"}, "hardness",
                 {
                     {{800, 40, 0.1}, 65.8},
                     {{800, 50, 0.2}, 65.78},
                     {{800, 60, 0.3}, 67.4},
                     {{1000, 40, 0.2}, 64.3},
                     {{1000, 50, 0.3}, 69.9},
                     {{1000, 60, 0.1}, 74.2},
                     {{1200, 40, 0.3}, 58.3},
                     {{1200, 50, 0.2}, 60.5},
                     {{1200, 60, 0.1}, 64.6},
                 });
}

// ---------------------------------------------------------------------------------------------
// Summary statistics

/// Column-wise descriptive statistics over factors followed by the response.
/// Standard deviation uses the population divisor n.
struct SummaryStats {
  std::vector<std::string> columns;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> mean;
  std::vector<double> stddev;
  /// Pearson correlation; nullopt where either column has zero variance.
  std::vector<std::vector<std::optional<double>>> correlation;
};

inline SummaryStats summarize(const Dataset& d) {
  SummaryStats s;
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < d.arity(); ++j) {
    s.columns.push_back(d.factor_names()[j]);
    cols.push_back(d.factor_column(j));
  }
  s.columns.push_back(d.response_name());
  cols.push_back(d.responses());

  const double n = static_cast<double>(d.size());
  for (const auto& c : cols) {
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    s.min.push_back(*lo);
    s.max.push_back(*hi);
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    s.mean.push_back(mean);
    s.stddev.push_back(std::sqrt(ss / n));
  }

  const std::size_t m = cols.size();
  s.correlation.assign(m, std::vector<std::optional<double>>(m));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      if (s.stddev[a] == 0.0 || s.stddev[b] == 0.0) continue;
      if (a == b) {
        s.correlation[a][a] = 1.0;
        continue;
      }
      double cov = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        cov += (cols[a][i] - s.mean[a]) * (cols[b][i] - s.mean[b]);
      }
      const double r = std::clamp(cov / n / (s.stddev[a] * s.stddev[b]), -1.0, 1.0);
      s.correlation[a][b] = r;
      s.correlation[b][a] = r;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------------------------
// Resampling

struct FoldPlan {
  std::size_t k = 0;
  /// assignments[run] = fold index in [0, k).
  std::vector<std::size_t> assignments;

  /// Run indices of fold f, ascending.
  std::vector<std::size_t> fold(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] == f) out.push_back(i);
    }
    return out;
  }

  /// Run indices outside fold f, ascending.
  std::vector<std::size_t> complement(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] != f) out.push_back(i);
    }
    return out;
  }
};

/// Fisher-Yates shuffle of 0..n-1 under `seed`, then round-robin fold assignment.
/// k == n is leave-one-out.
inline FoldPlan kfold_plan(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw argument_error("kfold_plan: need 2 <= k <= n (k=" + std::to_string(k) +
                         ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  FoldPlan plan{k, std::vector<std::size_t>(n)};
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignments[order[pos]] = pos % k;
  return plan;
}

/// n indices drawn uniformly with replacement from [0, n).
inline std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw argument_error("bootstrap_indices: n must be positive");
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = static_cast<std::size_t>(rng.below(n));
  return out;
}

}  // namespace weldopt

#endif  // WELDOPT_DATASET_HPP
