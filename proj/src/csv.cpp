#include "msvar/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace msvar {

namespace {

bool all_digits(const std::string& s, size_t from, size_t to) {
  if (to > s.size()) return false;
  for (size_t i = from; i < to; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

int to_int(const std::string& s, size_t from, size_t to) {
  int v = 0;
  for (size_t i = from; i < to; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

// -1 when the label does not have the YYYY-MM shape.
int try_month(const std::string& label) {
  if (label.size() != 7 || label[4] != '-') return -1;
  if (!all_digits(label, 0, 4) || !all_digits(label, 5, 7)) return -1;
  const int month = to_int(label, 5, 7);
  if (month < 1 || month > 12) return -1;
  return to_int(label, 0, 4) * 12 + month - 1;
}

int try_quarter(const std::string& label) {
  if (label.size() != 7 || label[4] != '-' || label[5] != 'Q') return -1;
  if (!all_digits(label, 0, 4) || !all_digits(label, 6, 7)) return -1;
  const int q = to_int(label, 6, 7);
  if (q < 1 || q > 4) return -1;
  return to_int(label, 0, 4) * 4 + q - 1;
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void parse_fail(const std::string& source, int line,
                             const std::string& what) {
  fail("ParseError", source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

int parse_month_label(const std::string& label) {
  const int idx = try_month(label);
  if (idx < 0) fail("ParseError", "bad month label '" + label + "' (want YYYY-MM)");
  return idx;
}

int parse_quarter_label(const std::string& label) {
  const int idx = try_quarter(label);
  if (idx < 0)
    fail("ParseError", "bad quarter label '" + label + "' (want YYYY-Qn)");
  return idx;
}

std::string month_label(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", index / 12, index % 12 + 1);
  return buf;
}

std::string quarter_label(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-Q%d", index / 4, index % 4 + 1);
  return buf;
}

SeriesFile parse_series_csv(const std::string& text, Frequency frequency,
                            const std::string& source_name) {
  SeriesFile out;
  out.frequency = frequency;
  out.path = source_name;

  std::istringstream stream(text);
  std::string line;
  int line_no = 0;

  // Header.
  if (!std::getline(stream, line)) parse_fail(source_name, 1, "empty file");
  ++line_no;
  std::vector<std::string> header = split_fields(line);
  if (header.size() < 2) parse_fail(source_name, 1, "need period column plus at least one series");
  out.columns.assign(header.begin() + 1, header.end());
  for (const auto& c : out.columns)
    if (c.empty()) parse_fail(source_name, 1, "empty column name");
  const int n_cols = static_cast<int>(out.columns.size());

  std::vector<std::vector<double>> rows;
  int prev_index = 0;
  bool first_row = true;
  while (std::getline(stream, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != n_cols + 1)
      parse_fail(source_name, line_no,
                 "expected " + std::to_string(n_cols + 1) + " fields, got " +
                     std::to_string(fields.size()));

    const std::string& label = fields[0];
    const int idx = frequency == Frequency::High ? try_month(label)
                                                 : try_quarter(label);
    if (idx < 0) {
      const int other = frequency == Frequency::High ? try_quarter(label)
                                                     : try_month(label);
      if (other >= 0)
        fail("FrequencyMismatch",
             source_name + ":" + std::to_string(line_no) + ": period '" +
                 label + "' has the other frequency's format");
      parse_fail(source_name, line_no, "bad period label '" + label + "'");
    }
    if (!first_row) {
      if (idx <= prev_index)
        parse_fail(source_name, line_no, "periods not strictly increasing at '" + label + "'");
      if (idx != prev_index + 1) {
        const std::string missing = frequency == Frequency::High
                                        ? month_label(prev_index + 1)
                                        : quarter_label(prev_index + 1);
        fail("PeriodGap", source_name + ": missing period " + missing);
      }
    }
    prev_index = idx;
    first_row = false;
    out.periods.push_back(label);

    std::vector<double> row(n_cols);
    for (int j = 0; j < n_cols; ++j) {
      const std::string& f = fields[j + 1];
      if (f.empty()) {
        row[j] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double v = 0.0;
      const auto* begin = f.data();
      const auto* end = f.data() + f.size();
      auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc() || res.ptr != end)
        parse_fail(source_name, line_no, "bad numeric value '" + f + "'");
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }

  out.values.resize(static_cast<Eigen::Index>(rows.size()), n_cols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < n_cols; ++j) out.values(static_cast<Eigen::Index>(i), j) = rows[i][j];
  return out;
}

SeriesFile read_series_csv(const std::string& path, Frequency frequency) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("ParseError", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_series_csv(buf.str(), frequency, path);
}

void write_series_csv(const std::string& path, const SeriesFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("InvalidArgument", "cannot write " + path);
  out << "period";
  for (const auto& c : file.columns) out << "," << c;
  out << "\n";
  char buf[40];
  for (int i = 0; i < file.rows(); ++i) {
    out << file.periods[i];
    for (Eigen::Index j = 0; j < file.values.cols(); ++j) {
      const double v = file.values(i, j);
      if (std::isnan(v)) {
        out << ",";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << "," << buf;
      }
    }
    out << "\n";
  }
  if (!out) fail("InvalidArgument", "write failed for " + path);
}

}  // namespace msvar
