#pragma once

#include "msvar/csv.hpp"
#include "msvar/dataset.hpp"
#include "msvar/layout.hpp"
#include "msvar/structural.hpp"
#include "msvar/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace msvar {

enum class ColumnTransform { Level, Log, Diff, PctChange };
ColumnTransform transform_from_name(const std::string& name);

struct ExogSpec {
  std::string name;
  std::vector<int> lags{0};  // low-frequency lags of the per-slot block
};

struct IdentificationConfig {
  std::string preset;  // cholesky | recursive-slots | recursive-slots-adjacent
  std::string hypothesis;               // named overidentified variant
  std::vector<std::string> a_pattern;   // row-major grids, override preset
  std::vector<std::string> b_pattern;

  bool configured() const {
    return !preset.empty() || !hypothesis.empty() || !a_pattern.empty();
  }
};

struct BootstrapConfig {
  int n = 999;
  double level = 0.90;
  int horizon = 20;
};

struct McConfig {
  std::string dgp;
  std::string alt_dgp;  // optional pair for size-power output
  int reps = 1000;
  std::string test_scheme = "first";
  int test_p = 1;
};

// One committed configuration file per run; command-line flags override
// individual keys. Documented in docs/config.md.
struct RunConfig {
  int m = 3;
  int p = 1;

  std::string high_path;
  std::string low_path;
  std::vector<std::string> high_vars;
  std::vector<std::string> low_vars;
  std::vector<ExogSpec> exog;
  std::map<std::string, ColumnTransform> transforms;

  IdentificationConfig identification;
  std::vector<std::string> schemes{"first"};
  BootstrapConfig bootstrap;
  McConfig mc;

  std::uint64_t seed = 1;
  int workers = 0;
  std::string out_dir = "out";
  std::string start_period = "1990-Q1";  // synthetic-data export origin
  int sim_T = 109;

  FrequencyLayout layout() const;

  static RunConfig from_json_text(const std::string& text,
                                  const std::string& source_name);
  static RunConfig from_file(const std::string& path);
  std::string to_json_text() const;  // resolved echo for the run manifest
};

// Stacks the two series files into the estimation sample: endogenous
// high-frequency variables in slot-major order, low-frequency variables
// last; each exogenous (variable, lag) pair expands into m per-slot columns.
// The window is the largest contiguous run of low-frequency periods with
// complete, finite coverage after transforms; trimming warns on stderr.
StackedDataset ingest(const SeriesFile& high, const SeriesFile& low,
                      const RunConfig& config);

// Structural restrictions from the identification block.
AbRestrictions build_identification(const RunConfig& config,
                                    const FrequencyLayout& layout);

}  // namespace msvar
