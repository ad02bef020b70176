#pragma once

#include "msvar/types.hpp"

#include <string>
#include <vector>

namespace msvar {

enum class Frequency { High, Low };

// One parsed CSV of time series: header row, first column the period label,
// remaining columns numeric series. High-frequency labels are YYYY-MM,
// low-frequency labels YYYY-Qn; quarter Q covers months 3Q-2..3Q. Periods are
// strictly increasing with no gaps. Empty cells parse to NaN (missing).
struct SeriesFile {
  Frequency frequency = Frequency::High;
  std::string path;
  std::vector<std::string> columns;
  std::vector<std::string> periods;
  Matrix values;  // rows x columns

  int rows() const { return static_cast<int>(values.rows()); }
};

// Throws ParseError (with line number), FrequencyMismatch (label of the other
// frequency), PeriodGap (first missing period).
SeriesFile parse_series_csv(const std::string& text, Frequency frequency,
                            const std::string& source_name);
SeriesFile read_series_csv(const std::string& path, Frequency frequency);

// Writes with 17 significant digits so values round-trip bit-exactly.
void write_series_csv(const std::string& path, const SeriesFile& file);

// Period-label arithmetic. Month index = year*12 + (month-1); quarter index
// = year*4 + (quarter-1). Quarter q's months are 3q, 3q+1, 3q+2 in index
// terms.
int parse_month_label(const std::string& label);
int parse_quarter_label(const std::string& label);
std::string month_label(int index);
std::string quarter_label(int index);

}  // namespace msvar
