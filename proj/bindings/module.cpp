#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msvar/config.hpp"
#include "msvar/csv.hpp"
#include "msvar/dynamics.hpp"
#include "msvar/equivalence.hpp"
#include "msvar/montecarlo.hpp"
#include "msvar/numerics.hpp"
#include "msvar/reduced_form.hpp"
#include "msvar/structural.hpp"

namespace py = pybind11;
using namespace msvar;

PYBIND11_MODULE(_msvar, m) {
  m.doc() = "mixed-frequency structural VAR toolkit";

  static py::exception<Error> exc(m, "MsvarError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object o = py::cast(std::string(e.category()) + ": " + e.what());
      PyErr_SetObject(exc.ptr(), o.ptr());
    }
  });

  py::class_<FrequencyLayout>(m, "FrequencyLayout")
      .def(py::init<>())
      .def(py::init([](int n_low, int n_high, int mm, int pp) {
             FrequencyLayout l{n_low, n_high, mm, pp};
             l.validate();
             return l;
           }),
           py::arg("n_low"), py::arg("n_high"), py::arg("m") = 3,
           py::arg("p") = 1)
      .def_readwrite("n_low", &FrequencyLayout::n_low)
      .def_readwrite("n_high", &FrequencyLayout::n_high)
      .def_readwrite("m", &FrequencyLayout::m)
      .def_readwrite("p", &FrequencyLayout::p)
      .def("stacked_dim", &FrequencyLayout::stacked_dim)
      .def("high_index", &FrequencyLayout::high_index)
      .def("low_index", &FrequencyLayout::low_index);

  py::class_<AggregationScheme>(m, "AggregationScheme")
      .def_static("from_name", &AggregationScheme::from_name)
      .def("name", &AggregationScheme::name)
      .def("__eq__", [](const AggregationScheme& a, const AggregationScheme& b) {
        return a == b;
      });

  py::class_<StackedDataset>(m, "StackedDataset")
      .def(py::init<>())
      .def_readwrite("Y", &StackedDataset::Y)
      .def_readwrite("Z", &StackedDataset::Z)
      .def_readwrite("y_labels", &StackedDataset::y_labels)
      .def_readwrite("z_labels", &StackedDataset::z_labels)
      .def_readwrite("periods", &StackedDataset::periods)
      .def("T", &StackedDataset::T);

  py::class_<ReducedFormFit>(m, "ReducedFormFit")
      .def_readonly("p", &ReducedFormFit::p)
      .def_readonly("c", &ReducedFormFit::c)
      .def_readonly("lag_coeffs", &ReducedFormFit::lag_coeffs)
      .def_readonly("exog_coeffs", &ReducedFormFit::exog_coeffs)
      .def_readonly("residuals", &ReducedFormFit::residuals)
      .def_readonly("sigma_u", &ReducedFormFit::sigma_u)
      .def_readonly("loglik", &ReducedFormFit::loglik)
      .def_readonly("effective_T", &ReducedFormFit::effective_T)
      .def_readonly("n_free_coeffs", &ReducedFormFit::n_free_coeffs);

  py::class_<AbRestrictions>(m, "AbRestrictions")
      .def_readonly("nn", &AbRestrictions::nn)
      .def("q_A", &AbRestrictions::q_A)
      .def("q_B", &AbRestrictions::q_B);

  py::class_<AbStructure>(m, "AbStructure")
      .def_readonly("A", &AbStructure::A)
      .def_readonly("B", &AbStructure::B)
      .def_readonly("loglik", &AbStructure::loglik)
      .def_readonly("converged", &AbStructure::converged)
      .def_readonly("iterations", &AbStructure::iterations)
      .def_readonly("gradient_norm", &AbStructure::gradient_norm);

  py::class_<IdentificationReport>(m, "IdentificationReport")
      .def_readonly("jacobian_rank", &IdentificationReport::jacobian_rank)
      .def_readonly("required_rank", &IdentificationReport::required_rank)
      .def_readonly("identified", &IdentificationReport::identified)
      .def_readonly("free_params", &IdentificationReport::free_params)
      .def_readonly("overid_dof", &IdentificationReport::overid_dof);

  py::class_<LrTestResult>(m, "LrTestResult")
      .def_readonly("statistic", &LrTestResult::statistic)
      .def_readonly("dof", &LrTestResult::dof)
      .def_readonly("pvalue", &LrTestResult::pvalue)
      .def_readonly("l_restricted", &LrTestResult::l_restricted)
      .def_readonly("l_unrestricted", &LrTestResult::l_unrestricted);

  py::class_<VmaCoefficients>(m, "VmaCoefficients")
      .def_readonly("C", &VmaCoefficients::C)
      .def("horizon", &VmaCoefficients::horizon);

  py::class_<IrfSet>(m, "IrfSet")
      .def_readonly("point", &IrfSet::point)
      .def_readonly("lower", &IrfSet::lower)
      .def_readonly("upper", &IrfSet::upper)
      .def_readonly("level", &IrfSet::level)
      .def_readonly("n_boot_used", &IrfSet::n_boot_used)
      .def_readonly("n_boot_failed", &IrfSet::n_boot_failed);

  py::class_<FevdTable>(m, "FevdTable").def_readonly("shares", &FevdTable::shares);

  py::class_<DgpSpec>(m, "DgpSpec")
      .def_readonly("name", &DgpSpec::name)
      .def_readonly("layout", &DgpSpec::layout)
      .def_readonly("lag_coeffs", &DgpSpec::lag_coeffs)
      .def_readonly("intercept", &DgpSpec::intercept)
      .def_readonly("sigma_u", &DgpSpec::sigma_u)
      .def_readwrite("T", &DgpSpec::T)
      .def_readonly("approximate_h0", &DgpSpec::approximate_h0)
      .def_readonly("note", &DgpSpec::note);

  py::class_<McResult>(m, "McResult")
      .def_readonly("dgp", &McResult::dgp)
      .def_readonly("seed", &McResult::seed)
      .def_readonly("requested", &McResult::requested)
      .def_readonly("failures", &McResult::failures)
      .def_readonly("pvalues", &McResult::pvalues)
      .def_readonly("replication_ids", &McResult::replication_ids);

  py::class_<EdfCurve>(m, "EdfCurve")
      .def_readonly("grid", &EdfCurve::grid)
      .def_readonly("edf", &EdfCurve::edf);

  py::class_<SizePowerCurve>(m, "SizePowerCurve")
      .def_readonly("grid", &SizePowerCurve::grid)
      .def_readonly("size", &SizePowerCurve::size)
      .def_readonly("power", &SizePowerCurve::power);

  // numerics
  m.def("cholesky", &cholesky);
  m.def("kron", &kron);
  m.def("duplication_pinv", &duplication_pinv);
  m.def("chi2_sf", &chi2_sf);
  m.def("numerical_rank", py::overload_cast<const Matrix&>(&numerical_rank));
  m.def("spectral_radius", &spectral_radius);

  // estimation
  m.def("estimate_ols", &estimate_ols, py::arg("data"), py::arg("layout"),
        py::arg("p"), py::arg("intercept") = true);
  m.def("information_criteria", &information_criteria, py::arg("data"),
        py::arg("layout"), py::arg("p_max"), py::arg("intercept") = true);
  m.def("companion_spectral_radius",
        py::overload_cast<const std::vector<Matrix>&>(&companion_spectral_radius));

  py::class_<CriterionRow>(m, "CriterionRow")
      .def_readonly("p", &CriterionRow::p)
      .def_readonly("aic", &CriterionRow::aic)
      .def_readonly("bic", &CriterionRow::bic)
      .def_readonly("loglik", &CriterionRow::loglik)
      .def_readonly("n_params", &CriterionRow::n_params);

  // structural
  m.def("cholesky_scheme", &cholesky_scheme);
  m.def("recursive_slot_scheme", &recursive_slot_scheme, py::arg("layout"),
        py::arg("full_recursion") = true);
  m.def("ab_from_patterns", &ab_from_patterns);
  m.def("hypothesis_preset", &hypothesis_preset);
  m.def("hypothesis_preset_names", &hypothesis_preset_names);
  m.def("check_identification", &check_identification);
  m.def("estimate_ml",
        [](const ReducedFormFit& fit, const AbRestrictions& restr) {
          return estimate_ml(fit, restr);
        });
  m.def("estimate_ml_from_sigma",
        [](const Matrix& sigma, int effective_T, const AbRestrictions& restr) {
          return estimate_ml_from_sigma(sigma, effective_T, restr);
        });
  m.def("lr_test", &lr_test);
  m.def("ab_objective", &ab_objective);
  m.def("ab_gradient", &ab_gradient);

  // dynamics
  m.def("vma_from_var", &vma_from_var);
  m.def("structural_irf", &structural_irf);
  m.def("fevd", &fevd);
  m.def("bootstrap_bands",
        [](const StackedDataset& data, const FrequencyLayout& layout, int p,
           const AbRestrictions& restr, int horizon, int n_boot, double level,
           std::uint64_t seed, int workers) {
          BootstrapOptions opt;
          opt.horizon = horizon;
          opt.n_boot = n_boot;
          opt.level = level;
          opt.seed = seed;
          opt.workers = workers;
          return bootstrap_bands(data, layout, p, restr, opt);
        },
        py::arg("data"), py::arg("layout"), py::arg("p"), py::arg("restr"),
        py::arg("horizon") = 20, py::arg("n_boot") = 999,
        py::arg("level") = 0.90, py::arg("seed") = 1, py::arg("workers") = 0);

  // equivalence
  m.def("test_reduced_equivalence", &test_reduced_equivalence, py::arg("data"),
        py::arg("layout"), py::arg("p"), py::arg("scheme"),
        py::arg("n_exog_vars") = -1);
  m.def("test_structural_equivalence",
        [](const StackedDataset& data, const FrequencyLayout& layout, int p,
           const AggregationScheme& scheme, const AbRestrictions& maintained) {
          return test_structural_equivalence(data, layout, p, scheme, maintained);
        });

  // monte carlo
  m.def("builtin_dgp", &builtin_dgp);
  m.def("builtin_dgp_names", &builtin_dgp_names);
  m.def("simulate",
        [](const DgpSpec& dgp, std::uint64_t seed, std::uint64_t stream) {
          RngStream rng(seed, stream);
          return simulate(dgp, rng);
        },
        py::arg("dgp"), py::arg("seed"), py::arg("stream") = 1);
  m.def("run_experiment",
        [](const DgpSpec& dgp, int R, const std::string& scheme, int p,
           std::uint64_t seed, int workers) {
          McTestSpec test;
          test.scheme = AggregationScheme::from_name(scheme);
          test.p = p;
          return run_experiment(dgp, R, test, seed, workers);
        },
        py::arg("dgp"), py::arg("reps"), py::arg("scheme") = "first",
        py::arg("p") = 1, py::arg("seed") = 1, py::arg("workers") = 0);
  m.def("rejection_rate", &rejection_rate);
  m.def("pvalue_plot", &pvalue_plot);
  m.def("size_power_curve", &size_power_curve);
  m.def("pvalue_grid", &pvalue_grid);
  m.def("dkw_halfwidth", &dkw_halfwidth);

  // io
  m.def("read_series_csv", &read_series_csv);
  m.def("parse_series_csv", &parse_series_csv);
  py::enum_<Frequency>(m, "Frequency")
      .value("High", Frequency::High)
      .value("Low", Frequency::Low);
  py::class_<SeriesFile>(m, "SeriesFile")
      .def_readonly("columns", &SeriesFile::columns)
      .def_readonly("periods", &SeriesFile::periods)
      .def_readonly("values", &SeriesFile::values);

  m.attr("__version__") = "0.1.0";
}
