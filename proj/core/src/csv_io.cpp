#include "inflection/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "inflection/errors.hpp"

namespace inflection {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

/// Header check naming the first mismatching columns.
void expect_header(std::istream& in, std::string_view expected, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaMismatchError(std::string(what) + " CSV is empty (expected header '" +
                              std::string(expected) + "')");
  }
  strip_cr(line);
  if (line == expected) return;
  const auto got = split(line);
  const auto want = split(expected);
  std::string detail;
  for (std::size_t i = 0; i < std::max(got.size(), want.size()); ++i) {
    const std::string g = i < got.size() ? std::string(got[i]) : "<missing>";
    const std::string w = i < want.size() ? std::string(want[i]) : "<none>";
    if (g != w) {
      if (!detail.empty()) detail += "; ";
      detail += "column " + std::to_string(i + 1) + " is '" + g + "', expected '" + w + "'";
    }
  }
  throw SchemaMismatchError(std::string(what) + " CSV header mismatch: " + detail);
}

class RowParser {
 public:
  RowParser(const std::string& line, std::size_t row, std::size_t expected_fields,
            std::string_view header)
      : fields_(split(line)), row_(row), names_(split(header)) {
    if (fields_.size() != expected_fields) {
      throw InvariantViolationError("row " + std::to_string(row) + ": expected " +
                                        std::to_string(expected_fields) + " fields, got " +
                                        std::to_string(fields_.size()),
                                    row);
    }
  }

  template <class T>
  T integer(std::size_t i) const {
    T v{};
    const auto f = fields_[i];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) bad(i);
    return v;
  }

  double real(std::size_t i) const {
    double v = 0.0;
    const auto f = fields_[i];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) bad(i);
    return v;
  }

  int flag(std::size_t i) const {
    const int v = integer<int>(i);
    if (v != 0 && v != 1) violation(std::string(names_[i]) + " must be 0 or 1");
    return v;
  }

  [[noreturn]] void violation(const std::string& msg) const {
    throw InvariantViolationError("row " + std::to_string(row_) + ": " + msg, row_);
  }

 private:
  [[noreturn]] void bad(std::size_t i) const {
    violation("cannot parse " + std::string(names_[i]) + " value '" +
              std::string(fields_[i]) + "'");
  }

  std::vector<std::string_view> fields_;
  std::size_t row_;
  std::vector<std::string_view> names_;
};

template <class F>
void for_each_row(std::istream& in, F&& f) {
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    f(line, ++row);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidConfigError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfigError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_panel_csv(std::ostream& out, const Panel& panel) {
  out << kPanelHeader << '\n';
  for (const auto& r : panel) {
    out << r.worker_id << ',' << r.market_id << ',' << r.month_index << ',' << r.treat << ','
        << r.post35 << ',' << r.post40 << ',' << r.fjobnum << ',' << g17(r.fjobearn) << ','
        << g17(r.fjobratio) << ',' << r.tenure << ',' << r.us << ',' << r.experienced
        << '\n';
  }
}

void write_demand_csv(std::ostream& out, const std::vector<DemandRow>& rows) {
  out << kDemandHeader << '\n';
  for (const auto& r : rows) {
    out << r.market_id << ',' << r.week_index << ',' << r.postnum << ',' << r.treat << ','
        << r.post << '\n';
  }
}

void write_covariates_csv(std::ostream& out, const std::vector<WorkerCovariates>& rows) {
  out << kCovariatesHeader << '\n';
  for (const auto& r : rows) {
    out << r.worker_id << ',' << r.market_id << ',' << r.treat << ','
        << g17(r.log_acc_fjobnum) << ',' << g17(r.log_experience) << ','
        << g17(r.log_avg_fjobprice) << ',' << g17(r.log_avg_fhourprice) << ','
        << g17(r.avg_fjobrating) << '\n';
  }
}

void write_panel_csv(const std::filesystem::path& path, const Panel& panel) {
  auto out = open_out(path);
  write_panel_csv(out, panel);
}

void write_demand_csv(const std::filesystem::path& path, const std::vector<DemandRow>& rows) {
  auto out = open_out(path);
  write_demand_csv(out, rows);
}

void write_covariates_csv(const std::filesystem::path& path,
                          const std::vector<WorkerCovariates>& rows) {
  auto out = open_out(path);
  write_covariates_csv(out, rows);
}

Panel ingest_panel_csv(std::istream& in) {
  expect_header(in, kPanelHeader, "panel");
  Panel panel;
  std::set<std::pair<std::int64_t, int>> seen;
  for_each_row(in, [&](const std::string& line, std::size_t row) {
    const RowParser p(line, row, 12, kPanelHeader);
    PanelRow r;
    r.worker_id = p.integer<std::int64_t>(0);
    r.market_id = p.integer<int>(1);
    r.month_index = p.integer<int>(2);
    r.treat = p.flag(3);
    r.post35 = p.flag(4);
    r.post40 = p.flag(5);
    r.fjobnum = p.integer<std::int64_t>(6);
    r.fjobearn = p.real(7);
    r.fjobratio = p.real(8);
    r.tenure = p.integer<int>(9);
    r.us = p.flag(10);
    r.experienced = p.flag(11);

    if (r.worker_id <= 0) p.violation("worker_id must be positive");
    if (r.month_index < 0) p.violation("month_index must be nonnegative");
    if (r.post40 && !r.post35) p.violation("post40=1 requires post35=1");
    if (r.fjobnum < 0) p.violation("fjobnum must be nonnegative");
    if (r.fjobearn < 0.0) p.violation("fjobearn must be nonnegative");
    if (r.fjobnum == 0 && r.fjobearn != 0.0) p.violation("fjobnum=0 requires fjobearn=0");
    if (r.fjobratio < 0.0 || r.fjobratio > 1.0) p.violation("fjobratio must lie in [0, 1]");
    if (r.fjobnum == 0 && r.fjobratio != 0.0) p.violation("fjobnum=0 requires fjobratio=0");
    if (r.tenure < 0) p.violation("tenure must be nonnegative");
    if (!seen.emplace(r.worker_id, r.month_index).second) {
      p.violation("duplicate (worker_id, month_index)");
    }
    panel.push_back(r);
  });
  return panel;
}

Panel ingest_panel_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return ingest_panel_csv(in);
}

std::vector<DemandRow> ingest_demand_csv(std::istream& in) {
  expect_header(in, kDemandHeader, "demand");
  std::vector<DemandRow> rows;
  for_each_row(in, [&](const std::string& line, std::size_t row) {
    const RowParser p(line, row, 5, kDemandHeader);
    DemandRow r;
    r.market_id = p.integer<int>(0);
    r.week_index = p.integer<int>(1);
    r.postnum = p.integer<std::int64_t>(2);
    r.treat = p.flag(3);
    r.post = p.flag(4);
    if (r.week_index < 0) p.violation("week_index must be nonnegative");
    if (r.postnum < 0) p.violation("postnum must be nonnegative");
    rows.push_back(r);
  });
  return rows;
}

std::vector<DemandRow> ingest_demand_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return ingest_demand_csv(in);
}

std::vector<WorkerCovariates> ingest_covariates_csv(std::istream& in) {
  expect_header(in, kCovariatesHeader, "covariates");
  std::vector<WorkerCovariates> rows;
  for_each_row(in, [&](const std::string& line, std::size_t row) {
    const RowParser p(line, row, 8, kCovariatesHeader);
    WorkerCovariates r;
    r.worker_id = p.integer<std::int64_t>(0);
    r.market_id = p.integer<int>(1);
    r.treat = p.flag(2);
    r.log_acc_fjobnum = p.real(3);
    r.log_experience = p.real(4);
    r.log_avg_fjobprice = p.real(5);
    r.log_avg_fhourprice = p.real(6);
    r.avg_fjobrating = p.real(7);
    rows.push_back(r);
  });
  return rows;
}

std::vector<WorkerCovariates> ingest_covariates_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return ingest_covariates_csv(in);
}

}  // namespace inflection
