#include "CLI11.hpp"
#include "json.hpp"

#include "msvar/config.hpp"
#include "msvar/csv.hpp"
#include "msvar/dynamics.hpp"
#include "msvar/equivalence.hpp"
#include "msvar/montecarlo.hpp"
#include "msvar/numerics.hpp"
#include "msvar/reduced_form.hpp"
#include "msvar/structural.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using msvar::fail;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Flag values that override config keys when present on the command line.
struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::string scheme;
  std::string dgp;
  std::string horizons;
  std::uint64_t seed = 0;
  int workers = -1;
  int boot = -1;
  int reps = -1;
  int pmax = 0;
  double level = -1.0;
  bool seed_set = false;
  bool out_set = false;
  bool level_set = false;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "configuration file (JSON)");
  cmd->add_option("--seed", ov.seed, "random seed")->each([&](const std::string&) {
    ov.seed_set = true;
  });
  cmd->add_option("--workers", ov.workers, "worker threads (0 = all cores)");
  cmd->add_option("--out", ov.out_dir, "output directory")
      ->each([&](const std::string&) { ov.out_set = true; });
}

msvar::RunConfig resolve_config(const Overrides& ov) {
  msvar::RunConfig cfg = ov.config_path.empty()
                             ? msvar::RunConfig()
                             : msvar::RunConfig::from_file(ov.config_path);
  if (ov.seed_set) cfg.seed = ov.seed;
  if (ov.workers >= 0) cfg.workers = ov.workers;
  if (ov.out_set) cfg.out_dir = ov.out_dir;
  if (!ov.scheme.empty()) {
    cfg.schemes = {ov.scheme};
    cfg.mc.test_scheme = ov.scheme;
  }
  if (!ov.dgp.empty()) cfg.mc.dgp = ov.dgp;
  if (ov.boot >= 0) cfg.bootstrap.n = ov.boot;
  if (ov.reps >= 0) cfg.mc.reps = ov.reps;
  if (ov.level_set) cfg.bootstrap.level = ov.level;
  return cfg;
}

std::vector<int> parse_horizons(const std::string& text, int fallback_max) {
  std::vector<int> out;
  if (text.empty()) {
    for (int h = 0; h <= fallback_max; ++h) out.push_back(h);
    return out;
  }
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) fail("InvalidArgument", "bad --horizons list");
    for (char c : cur)
      if (c < '0' || c > '9') fail("InvalidArgument", "bad horizon '" + cur + "'");
    out.push_back(std::stoi(cur));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',')
      flush();
    else
      cur.push_back(c);
  }
  flush();
  if (out.empty()) fail("InvalidArgument", "empty --horizons list");
  return out;
}

struct LoadedData {
  msvar::StackedDataset data;
  msvar::FrequencyLayout layout;
  std::string source;
  std::string dgp_note;
};

LoadedData load_data(const msvar::RunConfig& cfg) {
  LoadedData out;
  if (!cfg.high_path.empty() || !cfg.low_path.empty()) {
    if (cfg.high_path.empty() || cfg.low_path.empty())
      fail("InvalidArgument", "config needs both data.high and data.low");
    msvar::SeriesFile high =
        msvar::read_series_csv(cfg.high_path, msvar::Frequency::High);
    msvar::SeriesFile low =
        msvar::read_series_csv(cfg.low_path, msvar::Frequency::Low);
    out.data = msvar::ingest(high, low, cfg);
    out.layout = cfg.layout();
    out.source = cfg.high_path + " + " + cfg.low_path;
    return out;
  }
  if (cfg.mc.dgp.empty())
    fail("InvalidArgument",
         "no data source: set data.high/data.low or pass --dgp");
  msvar::DgpSpec dgp = msvar::builtin_dgp(cfg.mc.dgp);
  dgp.T = cfg.sim_T;
  msvar::RngStream rng(cfg.seed, 1);
  out.data = msvar::simulate(dgp, rng);
  const int q0 = msvar::parse_quarter_label(cfg.start_period);
  for (int t = 0; t < out.data.T(); ++t)
    out.data.periods.push_back(msvar::quarter_label(q0 + t));
  out.layout = dgp.layout;
  out.layout.p = cfg.p;
  out.source = "simulated:" + dgp.name;
  out.dgp_note = dgp.note;
  return out;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("InvalidArgument", "cannot write " + path.string());
  return out;
}

void write_manifest(const msvar::RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs,
                    const nlohmann::ordered_json& extra) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["seed"] = cfg.seed;
  m["workers"] = cfg.workers;
  m["config"] = nlohmann::ordered_json::parse(cfg.to_json_text());
  m["outputs"] = outputs;
  if (!extra.is_null()) m["run"] = extra;
  auto out = open_output(fs::path(cfg.out_dir) / "manifest.json");
  out << m.dump(2) << "\n";
}

std::vector<std::string> regressor_names(const msvar::ReducedFormFit& fit,
                                         const msvar::StackedDataset& data) {
  std::vector<std::string> names;
  if (fit.intercept) names.push_back("const");
  for (int lag = 1; lag <= fit.p; ++lag)
    for (const auto& v : data.y_labels)
      names.push_back("L" + std::to_string(lag) + "." + v);
  for (const auto& z : data.z_labels) names.push_back(z);
  return names;
}

// ---- estimate ----------------------------------------------------------

int cmd_estimate(const msvar::RunConfig& cfg, int pmax) {
  LoadedData loaded = load_data(cfg);
  fs::create_directories(cfg.out_dir);
  msvar::ReducedFormFit fit =
      msvar::estimate_ols(loaded.data, loaded.layout, cfg.p);
  std::vector<std::string> outputs;

  {
    auto out = open_output(fs::path(cfg.out_dir) / "reduced_coefficients.csv");
    out << "equation,regressor,value\n";
    const msvar::Matrix theta = fit.coefficient_matrix();
    const auto names = regressor_names(fit, loaded.data);
    for (Eigen::Index c = 0; c < theta.cols(); ++c)
      for (Eigen::Index r = 0; r < theta.rows(); ++r)
        out << loaded.data.y_labels[c] << "," << names[r] << ","
            << fmt17(theta(r, c)) << "\n";
    outputs.push_back("reduced_coefficients.csv");
  }
  {
    auto out = open_output(fs::path(cfg.out_dir) / "sigma_u.csv");
    out << "var_i,var_j,value\n";
    for (Eigen::Index i = 0; i < fit.sigma_u.rows(); ++i)
      for (Eigen::Index j = 0; j < fit.sigma_u.cols(); ++j)
        out << loaded.data.y_labels[i] << "," << loaded.data.y_labels[j] << ","
            << fmt17(fit.sigma_u(i, j)) << "\n";
    outputs.push_back("sigma_u.csv");
  }
  if (pmax > 0) {
    auto rows = msvar::information_criteria(loaded.data, loaded.layout, pmax);
    auto out = open_output(fs::path(cfg.out_dir) / "criteria.csv");
    out << "p,aic,bic,loglik,n_params\n";
    for (const auto& r : rows)
      out << r.p << "," << fmt17(r.aic) << "," << fmt17(r.bic) << ","
          << fmt17(r.loglik) << "," << r.n_params << "\n";
    outputs.push_back("criteria.csv");
  }

  nlohmann::ordered_json extra;
  extra["source"] = loaded.source;
  extra["effective_T"] = fit.effective_T;
  extra["loglik"] = fit.loglik;
  extra["loglik_excl_const"] = fit.loglik_excl_const;
  extra["n_free_coeffs"] = fit.n_free_coeffs;
  extra["companion_spectral_radius"] = msvar::companion_spectral_radius(fit);

  if (cfg.identification.configured()) {
    msvar::AbRestrictions restr =
        msvar::build_identification(cfg, loaded.layout);
    msvar::IdentificationReport ident =
        msvar::check_identification(restr, fit.sigma_u);
    msvar::AbStructure ab = msvar::estimate_ml(fit, restr);
    for (const char* which : {"a", "b"}) {
      const msvar::Matrix& M = which[0] == 'a' ? ab.A : ab.B;
      auto out = open_output(fs::path(cfg.out_dir) /
                             (std::string("structural_") + which + ".csv"));
      out << "row,col,value\n";
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
          out << i << "," << j << "," << fmt17(M(i, j)) << "\n";
      outputs.push_back(std::string("structural_") + which + ".csv");
    }
    extra["structural"] = {{"loglik", ab.loglik},
                           {"converged", ab.converged},
                           {"iterations", ab.iterations},
                           {"gradient_norm", ab.gradient_norm},
                           {"identified", ident.identified},
                           {"jacobian_rank", ident.jacobian_rank},
                           {"required_rank", ident.required_rank},
                           {"free_params", ident.free_params},
                           {"overid_dof", ident.overid_dof}};
  }

  outputs.push_back("manifest.json");
  write_manifest(cfg, "estimate", outputs, extra);
  return 0;
}

// ---- test-equivalence --------------------------------------------------

int cmd_test_equivalence(const msvar::RunConfig& cfg) {
  LoadedData loaded = load_data(cfg);
  fs::create_directories(cfg.out_dir);

  msvar::AbRestrictions maintained;
  const bool structural = cfg.identification.configured();
  if (structural) maintained = msvar::build_identification(cfg, loaded.layout);

  auto out = open_output(fs::path(cfg.out_dir) / "equivalence.csv");
  out << "scheme,test,statistic,dof,pvalue,loglik_restricted,loglik_unrestricted\n";
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& name : cfg.schemes) {
    msvar::AggregationScheme scheme = msvar::AggregationScheme::from_name(name);
    msvar::EquivalenceReport rep = msvar::run_equivalence(
        loaded.data, loaded.layout, cfg.p, scheme,
        structural ? &maintained : nullptr);
    out << name << ",reduced," << fmt17(rep.reduced.statistic) << ","
        << rep.reduced.dof << "," << fmt17(rep.reduced.pvalue) << ","
        << fmt17(rep.reduced.l_restricted) << ","
        << fmt17(rep.reduced.l_unrestricted) << "\n";
    nlohmann::ordered_json j;
    j["scheme"] = name;
    j["reduced_dof"] = rep.counts.reduced;
    if (rep.structural) {
      out << name << ",structural," << fmt17(rep.structural->statistic) << ","
          << rep.structural->dof << "," << fmt17(rep.structural->pvalue) << ","
          << fmt17(rep.structural->l_restricted) << ","
          << fmt17(rep.structural->l_unrestricted) << "\n";
      j["structural_raw_dof"] = rep.counts.structural_raw;
      j["structural_net_dof"] = rep.counts.structural_net;
    }
    runs.push_back(j);
  }
  nlohmann::ordered_json extra;
  extra["source"] = loaded.source;
  extra["schemes"] = runs;
  write_manifest(cfg, "test-equivalence", {"equivalence.csv", "manifest.json"},
                 extra);
  return 0;
}

// ---- irf / fevd --------------------------------------------------------

int cmd_irf(const msvar::RunConfig& cfg, const std::string& horizons_flag) {
  LoadedData loaded = load_data(cfg);
  fs::create_directories(cfg.out_dir);
  std::vector<int> horizons =
      parse_horizons(horizons_flag, cfg.bootstrap.horizon);
  int hmax = 0;
  for (int h : horizons) hmax = std::max(hmax, h);

  msvar::AbRestrictions restr = msvar::build_identification(cfg, loaded.layout);
  msvar::IrfSet irf;
  if (cfg.bootstrap.n > 0) {
    msvar::BootstrapOptions opt;
    opt.horizon = hmax;
    opt.n_boot = cfg.bootstrap.n;
    opt.level = cfg.bootstrap.level;
    opt.seed = cfg.seed;
    opt.workers = cfg.workers;
    irf = msvar::bootstrap_bands(loaded.data, loaded.layout, cfg.p, restr, opt);
  } else {
    msvar::ReducedFormFit fit =
        msvar::estimate_ols(loaded.data, loaded.layout, cfg.p);
    msvar::AbStructure ab = msvar::estimate_ml(fit, restr);
    irf = msvar::structural_irf(msvar::vma_from_var(fit.lag_coeffs, hmax), ab);
  }

  auto out = open_output(fs::path(cfg.out_dir) / "irf.csv");
  out << "h,variable,shock,point,lower,upper\n";
  const auto nn = irf.point[0].rows();
  for (int h : horizons) {
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index j = 0; j < nn; ++j) {
        out << h << "," << loaded.data.y_labels[i] << ",shock"
            << (j + 1) << "," << fmt17(irf.point[h](i, j)) << ",";
        if (irf.has_bands())
          out << fmt17(irf.lower[h](i, j)) << "," << fmt17(irf.upper[h](i, j));
        else
          out << ",";
        out << "\n";
      }
    }
  }
  nlohmann::ordered_json extra;
  extra["source"] = loaded.source;
  extra["level"] = irf.level;
  extra["bootstrap_used"] = irf.n_boot_used;
  extra["bootstrap_failed"] = irf.n_boot_failed;
  write_manifest(cfg, "irf", {"irf.csv", "manifest.json"}, extra);
  return 0;
}

int cmd_fevd(const msvar::RunConfig& cfg, const std::string& horizons_flag) {
  LoadedData loaded = load_data(cfg);
  fs::create_directories(cfg.out_dir);
  std::vector<int> horizons =
      parse_horizons(horizons_flag, cfg.bootstrap.horizon);
  int hmax = 0;
  for (int h : horizons) hmax = std::max(hmax, h);

  msvar::AbRestrictions restr = msvar::build_identification(cfg, loaded.layout);
  msvar::ReducedFormFit fit =
      msvar::estimate_ols(loaded.data, loaded.layout, cfg.p);
  msvar::AbStructure ab = msvar::estimate_ml(fit, restr);
  msvar::FevdTable table =
      msvar::fevd(msvar::vma_from_var(fit.lag_coeffs, hmax), ab, hmax);

  auto out = open_output(fs::path(cfg.out_dir) / "fevd.csv");
  out << "h,variable,shock,share\n";
  const auto nn = table.shares[0].rows();
  for (int h : horizons)
    for (Eigen::Index i = 0; i < nn; ++i)
      for (Eigen::Index j = 0; j < nn; ++j)
        out << h << "," << loaded.data.y_labels[i] << ",shock" << (j + 1)
            << "," << fmt17(table.shares[h](i, j)) << "\n";
  nlohmann::ordered_json extra;
  extra["source"] = loaded.source;
  write_manifest(cfg, "fevd", {"fevd.csv", "manifest.json"}, extra);
  return 0;
}

// ---- simulate ----------------------------------------------------------

int cmd_simulate(const msvar::RunConfig& cfg) {
  if (cfg.mc.dgp.empty()) fail("InvalidArgument", "simulate needs --dgp");
  msvar::DgpSpec dgp = msvar::builtin_dgp(cfg.mc.dgp);
  dgp.T = cfg.sim_T;
  msvar::RngStream rng(cfg.seed, 1);
  msvar::StackedDataset data = msvar::simulate(dgp, rng);
  fs::create_directories(cfg.out_dir);

  const int q0 = msvar::parse_quarter_label(cfg.start_period);
  const int nh = dgp.layout.n_high;
  const int nl = dgp.layout.n_low;

  msvar::SeriesFile high;
  high.frequency = msvar::Frequency::High;
  for (int v = 1; v <= nh; ++v) high.columns.push_back("xh" + std::to_string(v));
  high.values.resize(static_cast<Eigen::Index>(data.T()) * dgp.layout.m, nh);
  for (int t = 0; t < data.T(); ++t) {
    for (int s = 0; s < dgp.layout.m; ++s) {
      high.periods.push_back(msvar::month_label(3 * (q0 + t) + s));
      for (int v = 0; v < nh; ++v)
        high.values(t * dgp.layout.m + s, v) = data.Y(t, s * nh + v);
    }
  }
  msvar::SeriesFile low;
  low.frequency = msvar::Frequency::Low;
  for (int v = 1; v <= nl; ++v) low.columns.push_back("xl" + std::to_string(v));
  low.values.resize(data.T(), nl);
  for (int t = 0; t < data.T(); ++t) {
    low.periods.push_back(msvar::quarter_label(q0 + t));
    for (int v = 0; v < nl; ++v) low.values(t, v) = data.Y(t, dgp.layout.m * nh + v);
  }

  msvar::write_series_csv(
      (fs::path(cfg.out_dir) / "simulated_high.csv").string(), high);
  msvar::write_series_csv(
      (fs::path(cfg.out_dir) / "simulated_low.csv").string(), low);

  nlohmann::ordered_json extra;
  extra["dgp"] = dgp.name;
  extra["note"] = dgp.note;
  extra["approximate_h0"] = dgp.approximate_h0;
  extra["T"] = data.T();
  write_manifest(cfg, "simulate",
                 {"simulated_high.csv", "simulated_low.csv", "manifest.json"},
                 extra);
  return 0;
}

// ---- mc ----------------------------------------------------------------

void write_pvalues(const fs::path& path, const msvar::McResult& result) {
  auto out = open_output(path);
  out << "replication,pvalue\n";
  for (size_t i = 0; i < result.pvalues.size(); ++i)
    out << result.replication_ids[i] << "," << fmt17(result.pvalues[i]) << "\n";
}

nlohmann::ordered_json mc_summary(const msvar::McResult& result,
                                  const msvar::DgpSpec& dgp) {
  nlohmann::ordered_json j;
  j["dgp"] = result.dgp;
  j["note"] = dgp.note;
  j["approximate_h0"] = dgp.approximate_h0;
  j["requested"] = result.requested;
  j["failures"] = result.failures;
  j["rejection_rates"] = {
      {"0.01", msvar::rejection_rate(result, 0.01)},
      {"0.05", msvar::rejection_rate(result, 0.05)},
      {"0.10", msvar::rejection_rate(result, 0.10)}};
  return j;
}

int cmd_mc(const msvar::RunConfig& cfg) {
  if (cfg.mc.dgp.empty()) fail("InvalidArgument", "mc needs --dgp");
  msvar::DgpSpec dgp = msvar::builtin_dgp(cfg.mc.dgp);
  dgp.T = cfg.sim_T;
  msvar::McTestSpec test;
  test.scheme = msvar::AggregationScheme::from_name(cfg.mc.test_scheme);
  test.p = cfg.mc.test_p;

  msvar::McResult result =
      msvar::run_experiment(dgp, cfg.mc.reps, test, cfg.seed, cfg.workers);
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> outputs;

  write_pvalues(fs::path(cfg.out_dir) / "mc_pvalues.csv", result);
  outputs.push_back("mc_pvalues.csv");

  msvar::EdfCurve edf = msvar::pvalue_plot(result);
  {
    auto out = open_output(fs::path(cfg.out_dir) / "mc_edf.csv");
    out << "grid,edf\n";
    for (size_t i = 0; i < edf.grid.size(); ++i)
      out << fmt17(edf.grid[i]) << "," << fmt17(edf.edf[i]) << "\n";
    outputs.push_back("mc_edf.csv");
  }

  nlohmann::ordered_json extra;
  extra["null"] = mc_summary(result, dgp);

  if (!cfg.mc.alt_dgp.empty()) {
    msvar::DgpSpec alt = msvar::builtin_dgp(cfg.mc.alt_dgp);
    alt.T = cfg.sim_T;
    msvar::McResult alt_result =
        msvar::run_experiment(alt, cfg.mc.reps, test, cfg.seed, cfg.workers);
    write_pvalues(fs::path(cfg.out_dir) / "mc_pvalues_alt.csv", alt_result);
    outputs.push_back("mc_pvalues_alt.csv");
    msvar::SizePowerCurve curve = msvar::size_power_curve(result, alt_result);
    auto out = open_output(fs::path(cfg.out_dir) / "mc_size_power.csv");
    out << "grid,edf_null,edf_alt\n";
    for (size_t i = 0; i < curve.grid.size(); ++i)
      out << fmt17(curve.grid[i]) << "," << fmt17(curve.size[i]) << ","
          << fmt17(curve.power[i]) << "\n";
    outputs.push_back("mc_size_power.csv");
    extra["alt"] = mc_summary(alt_result, alt);
  }

  outputs.push_back("manifest.json");
  write_manifest(cfg, "mc", outputs, extra);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-frequency structural VAR toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides ov;
  std::string horizons_flag;
  int pmax = 0;

  CLI::App* est = app.add_subcommand("estimate", "fit the stacked model");
  add_common_flags(est, ov);
  est->add_option("--dgp", ov.dgp, "simulate a built-in design instead of loading data");
  est->add_option("--pmax", pmax, "also write AIC/BIC for p = 1..pmax");

  CLI::App* teq = app.add_subcommand("test-equivalence",
                                     "LR tests of aggregation compatibility");
  add_common_flags(teq, ov);
  teq->add_option("--dgp", ov.dgp, "simulate a built-in design instead of loading data");
  teq->add_option("--scheme", ov.scheme, "aggregation scheme to test");

  CLI::App* irf = app.add_subcommand("irf", "structural impulse responses");
  add_common_flags(irf, ov);
  irf->add_option("--dgp", ov.dgp, "simulate a built-in design instead of loading data");
  irf->add_option("--horizons", horizons_flag, "comma list of horizons");
  irf->add_option("--boot", ov.boot, "bootstrap replications (0 = no bands)");
  irf->add_option("--level", ov.level, "band confidence level")
      ->each([&](const std::string&) { ov.level_set = true; });

  CLI::App* fev = app.add_subcommand("fevd", "forecast-error variance shares");
  add_common_flags(fev, ov);
  fev->add_option("--dgp", ov.dgp, "simulate a built-in design instead of loading data");
  fev->add_option("--horizons", horizons_flag, "comma list of horizons");

  CLI::App* sim = app.add_subcommand("simulate", "export a simulated dataset");
  add_common_flags(sim, ov);
  sim->add_option("--dgp", ov.dgp, "built-in design name");

  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo size/power experiment");
  add_common_flags(mc, ov);
  mc->add_option("--dgp", ov.dgp, "built-in design name");
  mc->add_option("--reps", ov.reps, "replications");
  mc->add_option("--scheme", ov.scheme, "test aggregation scheme");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto t0 = std::chrono::steady_clock::now();
    msvar::RunConfig cfg = resolve_config(ov);
    int rc = 1;
    if (est->parsed()) rc = cmd_estimate(cfg, pmax);
    if (teq->parsed()) rc = cmd_test_equivalence(cfg);
    if (irf->parsed()) rc = cmd_irf(cfg, horizons_flag);
    if (fev->parsed()) rc = cmd_fevd(cfg, horizons_flag);
    if (sim->parsed()) rc = cmd_simulate(cfg);
    if (mc->parsed()) rc = cmd_mc(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    std::fprintf(stderr, "done in %.3fs\n",
                 std::chrono::duration<double>(t1 - t0).count());
    return rc;
  } catch (const msvar::Error& e) {
    nlohmann::ordered_json err;
    err["error"] = e.category();
    err["message"] = e.what();
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 2;
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = "Internal";
    err["message"] = e.what();
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 3;
  }
}
