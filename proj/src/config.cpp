#include "msvar/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace msvar {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  fail("InvalidArgument", "config " + where + ": " + what);
}

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

int get_int(const json& obj, const char* key, int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) config_fail(key, "expected an integer");
  return v->get<int>();
}

double get_double(const json& obj, const char* key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) config_fail(key, "expected a number");
  return v->get<double>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) config_fail(key, "expected a string");
  return v->get<std::string>();
}

std::vector<std::string> get_string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  const json* v = find(obj, key);
  if (!v) return out;
  if (!v->is_array()) config_fail(key, "expected a list of strings");
  for (const auto& e : *v) {
    if (!e.is_string()) config_fail(key, "expected a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

ColumnTransform transform_from_name(const std::string& name) {
  if (name == "level") return ColumnTransform::Level;
  if (name == "log") return ColumnTransform::Log;
  if (name == "diff") return ColumnTransform::Diff;
  if (name == "pct-change") return ColumnTransform::PctChange;
  fail("InvalidArgument", "unknown transform '" + name +
                              "' (level, log, diff, pct-change)");
}

namespace {

std::string transform_name(ColumnTransform t) {
  switch (t) {
    case ColumnTransform::Level: return "level";
    case ColumnTransform::Log: return "log";
    case ColumnTransform::Diff: return "diff";
    case ColumnTransform::PctChange: return "pct-change";
  }
  return "?";
}

}  // namespace

FrequencyLayout RunConfig::layout() const {
  FrequencyLayout lay;
  lay.n_low = static_cast<int>(low_vars.size());
  lay.n_high = static_cast<int>(high_vars.size());
  lay.m = m;
  lay.p = p;
  lay.validate();
  return lay;
}

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::string& source_name) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded())
    fail("ParseError", source_name + ": malformed JSON");
  if (!root.is_object()) fail("ParseError", source_name + ": expected an object");

  RunConfig c;
  if (const json* lay = find(root, "layout")) {
    c.m = get_int(*lay, "m", c.m);
    c.p = get_int(*lay, "p", c.p);
  }
  if (const json* data = find(root, "data")) {
    c.high_path = get_string(*data, "high", c.high_path);
    c.low_path = get_string(*data, "low", c.low_path);
    c.start_period = get_string(*data, "start", c.start_period);
    c.sim_T = get_int(*data, "sim_T", c.sim_T);
  }
  if (const json* vars = find(root, "variables")) {
    c.high_vars = get_string_list(*vars, "high");
    c.low_vars = get_string_list(*vars, "low");
    if (const json* ex = find(*vars, "exog")) {
      if (!ex->is_array()) config_fail("variables.exog", "expected a list");
      for (const auto& e : *ex) {
        ExogSpec spec;
        if (e.is_string()) {
          spec.name = e.get<std::string>();
        } else if (e.is_object()) {
          spec.name = get_string(e, "name", "");
          if (spec.name.empty()) config_fail("variables.exog", "missing name");
          if (const json* lags = find(e, "lags")) {
            if (!lags->is_array()) config_fail("variables.exog.lags", "expected a list");
            spec.lags.clear();
            for (const auto& l : *lags) {
              if (!l.is_number_integer() || l.get<int>() < 0)
                config_fail("variables.exog.lags", "lags are integers >= 0");
              spec.lags.push_back(l.get<int>());
            }
            if (spec.lags.empty()) config_fail("variables.exog.lags", "empty");
          }
        } else {
          config_fail("variables.exog", "entries are names or objects");
        }
        c.exog.push_back(std::move(spec));
      }
    }
    if (const json* tr = find(*vars, "transforms")) {
      if (!tr->is_object()) config_fail("variables.transforms", "expected an object");
      for (auto it = tr->begin(); it != tr->end(); ++it) {
        if (!it.value().is_string())
          config_fail("variables.transforms", "values are transform names");
        c.transforms[it.key()] = transform_from_name(it.value().get<std::string>());
      }
    }
  }
  if (const json* id = find(root, "identification")) {
    c.identification.preset = get_string(*id, "preset", "");
    c.identification.hypothesis = get_string(*id, "hypothesis", "");
    c.identification.a_pattern = get_string_list(*id, "a_pattern");
    c.identification.b_pattern = get_string_list(*id, "b_pattern");
  }
  if (const json* sch = find(root, "schemes")) {
    if (!sch->is_array()) config_fail("schemes", "expected a list");
    c.schemes = get_string_list(root, "schemes");
    if (c.schemes.empty()) config_fail("schemes", "empty list");
  }
  if (const json* bs = find(root, "bootstrap")) {
    c.bootstrap.n = get_int(*bs, "n", c.bootstrap.n);
    c.bootstrap.level = get_double(*bs, "level", c.bootstrap.level);
    c.bootstrap.horizon = get_int(*bs, "horizon", c.bootstrap.horizon);
  }
  if (const json* mc = find(root, "mc")) {
    c.mc.dgp = get_string(*mc, "dgp", c.mc.dgp);
    c.mc.alt_dgp = get_string(*mc, "alt_dgp", c.mc.alt_dgp);
    c.mc.reps = get_int(*mc, "reps", c.mc.reps);
    c.mc.test_scheme = get_string(*mc, "test_scheme", c.mc.test_scheme);
    c.mc.test_p = get_int(*mc, "test_p", c.mc.test_p);
  }
  if (const json* v = find(root, "seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer())
      config_fail("seed", "expected a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  c.workers = get_int(root, "workers", c.workers);
  c.out_dir = get_string(root, "out", c.out_dir);
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("ParseError", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

std::string RunConfig::to_json_text() const {
  ordered_json root;
  root["layout"] = {{"m", m}, {"p", p}};
  root["data"] = {{"high", high_path},
                  {"low", low_path},
                  {"start", start_period},
                  {"sim_T", sim_T}};
  ordered_json vars;
  vars["high"] = high_vars;
  vars["low"] = low_vars;
  ordered_json ex = ordered_json::array();
  for (const auto& e : exog) ex.push_back({{"name", e.name}, {"lags", e.lags}});
  vars["exog"] = ex;
  ordered_json tr;
  for (const auto& [k, v] : transforms) tr[k] = transform_name(v);
  vars["transforms"] = tr;
  root["variables"] = vars;
  root["identification"] = {{"preset", identification.preset},
                            {"hypothesis", identification.hypothesis},
                            {"a_pattern", identification.a_pattern},
                            {"b_pattern", identification.b_pattern}};
  root["schemes"] = schemes;
  root["bootstrap"] = {{"n", bootstrap.n},
                       {"level", bootstrap.level},
                       {"horizon", bootstrap.horizon}};
  root["mc"] = {{"dgp", mc.dgp},
                {"alt_dgp", mc.alt_dgp},
                {"reps", mc.reps},
                {"test_scheme", mc.test_scheme},
                {"test_p", mc.test_p}};
  root["seed"] = seed;
  root["workers"] = workers;
  root["out"] = out_dir;
  return root.dump(2);
}

namespace {

int column_of(const SeriesFile& file, const std::string& name,
              const char* role) {
  for (size_t j = 0; j < file.columns.size(); ++j)
    if (file.columns[j] == name) return static_cast<int>(j);
  fail("InvalidArgument", std::string(role) + " variable '" + name +
                              "' not found in " + file.path);
}

std::vector<double> transformed_column(const SeriesFile& file, int col,
                                       ColumnTransform t) {
  const int n = file.rows();
  std::vector<double> out(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < n; ++i) {
    const double x = file.values(i, col);
    switch (t) {
      case ColumnTransform::Level:
        out[i] = x;
        break;
      case ColumnTransform::Log:
        if (!std::isnan(x) && x <= 0.0)
          fail("InvalidArgument", "log transform of non-positive value in '" +
                                      file.columns[col] + "' at " +
                                      file.periods[i]);
        out[i] = std::isnan(x) ? nan : std::log(x);
        break;
      case ColumnTransform::Diff:
        out[i] = i == 0 ? nan : x - file.values(i - 1, col);
        break;
      case ColumnTransform::PctChange: {
        if (i == 0) {
          out[i] = nan;
          break;
        }
        const double prev = file.values(i - 1, col);
        if (prev == 0.0)
          fail("InvalidArgument", "pct-change over a zero value in '" +
                                      file.columns[col] + "' at " +
                                      file.periods[i]);
        out[i] = 100.0 * (x - prev) / prev;
        break;
      }
    }
  }
  return out;
}

}  // namespace

StackedDataset ingest(const SeriesFile& high, const SeriesFile& low,
                      const RunConfig& config) {
  if (high.frequency != Frequency::High || low.frequency != Frequency::Low)
    fail("FrequencyMismatch", "ingest takes one high- and one low-frequency file");
  if (config.m != 3)
    fail("InvalidArgument", "monthly/quarterly ingestion requires m = 3");
  if (config.high_vars.empty() && config.low_vars.empty())
    fail("InvalidArgument", "no endogenous variables configured");
  if (high.rows() == 0 || low.rows() == 0)
    fail("PeriodGap", "empty series file");

  auto transform_of = [&](const std::string& name) {
    auto it = config.transforms.find(name);
    return it == config.transforms.end() ? ColumnTransform::Level : it->second;
  };

  const int n_high = static_cast<int>(config.high_vars.size());
  const int n_low = static_cast<int>(config.low_vars.size());

  std::vector<std::vector<double>> hcols(n_high);
  for (int v = 0; v < n_high; ++v)
    hcols[v] = transformed_column(high, column_of(high, config.high_vars[v], "high"),
                                  transform_of(config.high_vars[v]));
  std::vector<std::vector<double>> lcols(n_low);
  for (int v = 0; v < n_low; ++v)
    lcols[v] = transformed_column(low, column_of(low, config.low_vars[v], "low"),
                                  transform_of(config.low_vars[v]));
  std::vector<std::vector<double>> xcols(config.exog.size());
  for (size_t v = 0; v < config.exog.size(); ++v)
    xcols[v] = transformed_column(high, column_of(high, config.exog[v].name, "exog"),
                                  transform_of(config.exog[v].name));

  const int month0 = parse_month_label(high.periods.front());
  const int n_months = high.rows();
  auto month_ok = [&](int month, const std::vector<std::vector<double>>& cols) {
    const int row = month - month0;
    if (row < 0 || row >= n_months) return false;
    for (const auto& c : cols)
      if (std::isnan(c[row])) return false;
    return true;
  };

  const int q0 = parse_quarter_label(low.periods.front());
  const int n_quarters = low.rows();
  std::vector<bool> ok(n_quarters, true);
  for (int i = 0; i < n_quarters; ++i) {
    for (const auto& c : lcols)
      if (std::isnan(c[i])) ok[i] = false;
    const int q = q0 + i;
    for (int s = 0; s < 3 && ok[i]; ++s)
      if (!month_ok(3 * q + s, hcols)) ok[i] = false;
    for (size_t v = 0; v < config.exog.size() && ok[i]; ++v) {
      std::vector<std::vector<double>> one{xcols[v]};
      for (int lag : config.exog[v].lags)
        for (int s = 0; s < 3 && ok[i]; ++s)
          if (!month_ok(3 * (q - lag) + s, one)) ok[i] = false;
    }
  }

  // Largest contiguous run of complete quarters.
  int best_lo = -1, best_len = 0, cur_lo = -1, cur_len = 0;
  for (int i = 0; i < n_quarters; ++i) {
    if (ok[i]) {
      if (cur_len == 0) cur_lo = i;
      ++cur_len;
      if (cur_len > best_len) {
        best_len = cur_len;
        best_lo = cur_lo;
      }
    } else {
      cur_len = 0;
    }
  }
  if (best_len == 0) {
    for (int i = 0; i < n_quarters; ++i)
      if (!ok[i])
        fail("PeriodGap", "no complete coverage; first offending period " +
                              low.periods[i]);
    fail("PeriodGap", "no usable low-frequency periods");
  }
  if (best_len < n_quarters)
    std::fprintf(stderr,
                 "note: analysis window trimmed to %s..%s (%d of %d periods)\n",
                 low.periods[best_lo].c_str(),
                 low.periods[best_lo + best_len - 1].c_str(), best_len,
                 n_quarters);

  const int T = best_len;
  StackedDataset out;
  out.Y.resize(T, 3 * n_high + n_low);
  int z_cols = 0;
  for (const auto& e : config.exog) z_cols += 3 * static_cast<int>(e.lags.size());
  out.Z.resize(T, z_cols);

  for (int t = 0; t < T; ++t) {
    const int q = q0 + best_lo + t;
    for (int s = 0; s < 3; ++s)
      for (int v = 0; v < n_high; ++v)
        out.Y(t, s * n_high + v) = hcols[v][3 * q + s - month0];
    for (int v = 0; v < n_low; ++v)
      out.Y(t, 3 * n_high + v) = lcols[v][best_lo + t];
    int zc = 0;
    for (size_t v = 0; v < config.exog.size(); ++v)
      for (int lag : config.exog[v].lags)
        for (int s = 0; s < 3; ++s)
          out.Z(t, zc++) = xcols[v][3 * (q - lag) + s - month0];
    out.periods.push_back(low.periods[best_lo + t]);
  }

  for (int s = 1; s <= 3; ++s)
    for (int v = 0; v < n_high; ++v)
      out.y_labels.push_back(config.high_vars[v] + "_s" + std::to_string(s));
  for (int v = 0; v < n_low; ++v) out.y_labels.push_back(config.low_vars[v]);
  for (const auto& e : config.exog)
    for (int lag : e.lags)
      for (int s = 1; s <= 3; ++s)
        out.z_labels.push_back(e.name + "_l" + std::to_string(lag) + "_s" +
                               std::to_string(s));
  return out;
}

AbRestrictions build_identification(const RunConfig& config,
                                    const FrequencyLayout& layout) {
  const IdentificationConfig& id = config.identification;
  if (!id.a_pattern.empty() || !id.b_pattern.empty()) {
    if (id.a_pattern.empty() || id.b_pattern.empty())
      fail("InvalidArgument", "pattern identification needs both a_pattern and b_pattern");
    return ab_from_patterns(id.a_pattern, id.b_pattern, layout.stacked_dim());
  }
  if (!id.hypothesis.empty()) return hypothesis_preset(id.hypothesis, layout);
  if (id.preset.empty() || id.preset == "cholesky")
    return cholesky_scheme(layout.stacked_dim());
  if (id.preset == "recursive-slots") return recursive_slot_scheme(layout, true);
  if (id.preset == "recursive-slots-adjacent")
    return recursive_slot_scheme(layout, false);
  fail("InvalidArgument", "unknown identification preset '" + id.preset + "'");
}

}  // namespace msvar
