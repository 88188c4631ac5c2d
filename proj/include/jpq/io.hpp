#pragma once

// CSV formats for traces, flux maps and squeezing data, plus whole-file
// reads and atomic (temp file + rename) writes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "jpq/error.hpp"
#include "jpq/flux_fit.hpp"
#include "jpq/squeezing.hpp"
#include "jpq/trace.hpp"

namespace jpq {

// ---------------------------------------------------------------------------
// Generic CSV

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> cells;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

namespace detail {

inline std::vector<std::string> split_cells(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

}  // namespace detail

/// Splits UTF-8 CSV bytes (LF or CRLF) into a header and data rows. Blank
/// lines are skipped; a leading byte-order mark is ignored.
inline CsvTable parse_csv(std::string_view bytes) {
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  CsvTable t;
  std::size_t pos = 0, line_no = 0;
  bool have_header = false;
  while (pos <= bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (!have_header) {
      t.header = detail::split_cells(line);
      have_header = true;
    } else {
      t.rows.push_back({line_no, detail::split_cells(line)});
    }
  }
  if (!have_header) throw ParseError("csv: empty input (no header line)", 1, 0);
  return t;
}

/// Strict decimal-point float; rejects empty cells, trailing characters and
/// non-finite values.
inline double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  if (b != e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (cell.empty() || ec != std::errc{} || ptr != e || !std::isfinite(v)) {
    std::ostringstream os;
    os << "csv: row " << row << ", column " << col << ": '" << cell << "' is not a finite number";
    throw ParseError(os.str(), row, col);
  }
  return v;
}

namespace detail {

inline void check_header(const CsvTable& t, const std::vector<std::vector<std::string>>& accepted) {
  for (const auto& h : accepted)
    if (t.header == h) return;
  std::ostringstream os;
  os << "csv: malformed header '" << join(t.header) << "', expected '" << join(accepted.front()) << "'";
  for (std::size_t i = 1; i < accepted.size(); ++i) os << " or '" << join(accepted[i]) << "'";
  // Point at the first differing column of the primary header.
  std::size_t col = 1;
  const auto& want = accepted.front();
  while (col <= std::min(want.size(), t.header.size()) && want[col - 1] == t.header[col - 1]) ++col;
  throw ParseError(os.str(), 1, col);
}

inline void check_width(const CsvRow& r, std::size_t width) {
  if (r.cells.size() != width) {
    std::ostringstream os;
    os << "csv: row " << r.line << " has " << r.cells.size() << " columns, expected " << width;
    throw ParseError(os.str(), r.line, std::min(r.cells.size(), width) + 1);
  }
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Traces: frequency_hz,s21_real,s21_imag

inline const std::vector<std::string> trace_csv_header{"frequency_hz", "s21_real", "s21_imag"};

struct TraceCsv {
  ComplexTrace trace;
  std::vector<std::string> warnings;
};

inline TraceCsv parse_trace_csv(std::string_view bytes) {
  const CsvTable t = parse_csv(bytes);
  detail::check_header(t, {trace_csv_header});
  struct Row {
    double f;
    Complex s;
    std::size_t line;
  };
  std::vector<Row> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    detail::check_width(r, 3);
    rows.push_back({parse_number(r.cells[0], r.line, 1),
                    {parse_number(r.cells[1], r.line, 2), parse_number(r.cells[2], r.line, 3)},
                    r.line});
  }
  if (rows.size() < 3) {
    std::ostringstream os;
    os << "csv: trace has " << rows.size() << " data rows, at least 3 required";
    throw ParseError(os.str(), rows.empty() ? 1 : rows.back().line, 0);
  }
  TraceCsv out;
  const bool sorted = std::is_sorted(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.f < b.f; });
  if (!sorted) {
    std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.f < b.f; });
    out.warnings.push_back("trace rows were not in ascending frequency order and have been sorted");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].f == rows[i - 1].f) {
      std::ostringstream os;
      os << "csv: duplicate frequency " << detail::format_number(rows[i].f) << " Hz on rows "
         << std::min(rows[i - 1].line, rows[i].line) << " and " << std::max(rows[i - 1].line, rows[i].line);
      throw ParseError(os.str(), std::max(rows[i - 1].line, rows[i].line), 1);
    }
  }
  for (const auto& r : rows) {
    out.trace.frequencies.push_back(r.f);
    out.trace.samples.push_back(r.s);
  }
  out.trace.validate();
  return out;
}

inline std::string format_trace_csv(const ComplexTrace& t) {
  std::string s = detail::join(trace_csv_header) + "\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    s += detail::format_number(t.frequencies[i]) + "," + detail::format_number(t.samples[i].real()) + "," +
         detail::format_number(t.samples[i].imag()) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Flux maps: control_value,f0_hz[,f0_err_hz]

inline std::vector<FluxMapPoint> parse_flux_csv(std::string_view bytes) {
  const CsvTable t = parse_csv(bytes);
  const std::vector<std::string> h2{"control_value", "f0_hz"};
  const std::vector<std::string> h3{"control_value", "f0_hz", "f0_err_hz"};
  detail::check_header(t, {h2, h3});
  const std::size_t width = t.header.size();
  std::vector<FluxMapPoint> out;
  for (const auto& r : t.rows) {
    detail::check_width(r, width);
    FluxMapPoint p;
    p.control = parse_number(r.cells[0], r.line, 1);
    p.f0 = parse_number(r.cells[1], r.line, 2);
    if (!(p.f0 > 0.0)) throw ParseError("csv: row " + std::to_string(r.line) + ": f0_hz must be positive", r.line, 2);
    if (width == 3) {
      p.f0_err = parse_number(r.cells[2], r.line, 3);
      if (!(*p.f0_err > 0.0))
        throw ParseError("csv: row " + std::to_string(r.line) + ": f0_err_hz must be positive", r.line, 3);
    }
    out.push_back(p);
  }
  if (out.empty()) throw ParseError("csv: flux map has no data rows", 1, 0);
  return out;
}

inline std::string format_flux_csv(const std::vector<FluxMapPoint>& pts) {
  const bool with_err = !pts.empty() && std::all_of(pts.begin(), pts.end(), [](auto& p) { return p.f0_err.has_value(); });
  std::string s = with_err ? "control_value,f0_hz,f0_err_hz\n" : "control_value,f0_hz\n";
  for (const auto& p : pts) {
    s += detail::format_number(p.control) + "," + detail::format_number(p.f0);
    if (with_err) s += "," + detail::format_number(*p.f0_err);
    s += "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Squeezing data: pump_power_dbm,squeezing_db,purity

inline std::vector<SqueezingPoint> parse_squeezing_csv(std::string_view bytes) {
  const CsvTable t = parse_csv(bytes);
  detail::check_header(t, {{"pump_power_dbm", "squeezing_db", "purity"}});
  std::vector<SqueezingPoint> out;
  for (const auto& r : t.rows) {
    detail::check_width(r, 3);
    out.push_back({parse_number(r.cells[0], r.line, 1), parse_number(r.cells[1], r.line, 2),
                   parse_number(r.cells[2], r.line, 3)});
  }
  if (out.empty()) throw ParseError("csv: squeezing data has no data rows", 1, 0);
  return out;
}

inline std::string format_squeezing_csv(const std::vector<SqueezingPoint>& pts) {
  std::string s = "pump_power_dbm,squeezing_db,purity\n";
  for (const auto& p : pts)
    s += detail::format_number(p.pump_power_dbm) + "," + detail::format_number(p.squeezing_db) + "," +
         detail::format_number(p.purity) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::io, "error while reading '" + path.string() + "'");
  return ss.str();
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.empty()) throw Error(ErrorKind::io, "output path is empty");
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::io, "error while writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace jpq
