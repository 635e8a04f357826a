#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cghd/io.hpp"
#include "cghd/version.hpp"

namespace py = pybind11;

namespace {

std::vector<std::vector<double>> matrix_to_lists(const cghd::SquareMatrix& m) {
  std::vector<std::vector<double>> out(m.size(), std::vector<double>(m.size()));
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) out[i][j] = m(i, j);
  return out;
}

cghd::SquareMatrix matrix_from_lists(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  cghd::SquareMatrix m(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw std::invalid_argument("matrix must be square");
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phase estimation under coarse-grained homodyne detection";
  m.attr("__version__") = cghd::kVersion;
  m.attr("DEFAULT_MASTER_SEED") = cghd::kDefaultMasterSeed;

  py::register_exception<cghd::SaturationError>(m, "SaturationError");

  // quadrature model -------------------------------------------------------
  py::class_<cghd::InterferometerConfig>(m, "InterferometerConfig")
      .def(py::init([](double alpha, double r) {
             cghd::InterferometerConfig cfg{alpha, r};
             cfg.validate();
             return cfg;
           }),
           py::arg("alpha"), py::arg("r"))
      .def_readonly("alpha", &cghd::InterferometerConfig::alpha)
      .def_readonly("r", &cghd::InterferometerConfig::r)
      .def("__repr__", [](const cghd::InterferometerConfig& cfg) {
        return "InterferometerConfig(alpha=" + std::to_string(cfg.alpha) +
               ", r=" + std::to_string(cfg.r) + ")";
      });

  m.def("deg_to_rad", &cghd::deg_to_rad, py::arg("deg"));
  m.def("rad_to_deg", &cghd::rad_to_deg, py::arg("rad"));
  m.def("squeezing_db_to_r", &cghd::squeezing_db_to_r, py::arg("db"));
  m.def("r_to_squeezing_db", &cghd::r_to_squeezing_db, py::arg("r"));

  m.def(
      "moments",
      [](const cghd::InterferometerConfig& cfg, double phi) {
        const auto mom = cghd::moments(cfg, phi);
        return py::make_tuple(mom.mean, mom.variance);
      },
      py::arg("cfg"), py::arg("phi"), "Mean and variance of the dark-port quadrature");
  m.def("pdf", &cghd::pdf, py::arg("cfg"), py::arg("phi"), py::arg("p"));
  m.def("ideal_fisher", &cghd::ideal_fisher, py::arg("cfg"));
  m.def("qfi", &cghd::qfi, py::arg("cfg"));
  m.def(
      "reference_limits",
      [](double n_tot) {
        const auto lim = cghd::reference_limits(n_tot);
        return py::make_tuple(lim.hl, lim.sql);
      },
      py::arg("n_tot"), "Heisenberg and standard quantum limits (hl, sql)");

  // coarse graining --------------------------------------------------------
  py::enum_<cghd::OuterMode>(m, "OuterMode")
      .value("FINITE", cghd::OuterMode::Finite)
      .value("INFINITE", cghd::OuterMode::Infinite);
  py::enum_<cghd::Binning>(m, "Binning")
      .value("EQUAL", cghd::Binning::Equal)
      .value("OPTIMAL", cghd::Binning::Optimal);

  py::class_<cghd::BinScheme>(m, "BinScheme")
      .def(py::init([](std::vector<double> boundaries, double range,
                       cghd::OuterMode mode) {
             cghd::BinScheme scheme{std::move(boundaries), range, mode};
             scheme.validate();
             return scheme;
           }),
           py::arg("boundaries"), py::arg("range"),
           py::arg("outer_mode") = cghd::OuterMode::Finite)
      .def_readonly("boundaries", &cghd::BinScheme::boundaries)
      .def_readonly("range", &cghd::BinScheme::range)
      .def_readonly("outer_mode", &cghd::BinScheme::outer_mode)
      .def_property_readonly("bins", &cghd::BinScheme::bins)
      .def("to_json", [](const cghd::BinScheme& s) { return cghd::bin_scheme_to_json(s); })
      .def_static("from_json", &cghd::bin_scheme_from_json, py::arg("text"));

  m.def("default_range", &cghd::default_range, py::arg("cfg"));
  m.def("equal_bins", &cghd::equal_bins, py::arg("M"), py::arg("R"),
        py::arg("outer_mode") = cghd::OuterMode::Finite);
  m.def("scaled_boundaries", &cghd::scaled_boundaries, py::arg("scheme"), py::arg("r"));
  m.def("bin_probabilities", &cghd::bin_probabilities, py::arg("cfg"), py::arg("phi"),
        py::arg("scheme"));
  m.def("bin_prob_derivative", &cghd::bin_prob_derivative, py::arg("cfg"),
        py::arg("phi"), py::arg("scheme"));

  py::class_<cghd::CoarseFisher>(m, "CoarseFisher")
      .def_readonly("value", &cghd::CoarseFisher::value)
      .def_readonly("excluded_bins", &cghd::CoarseFisher::excluded_bins);
  m.def("coarse_fisher", &cghd::coarse_fisher, py::arg("cfg"), py::arg("phi"),
        py::arg("scheme"));

  m.def(
      "fisher_ratio",
      [](const std::vector<double>& scaled, cghd::OuterMode mode) {
        return cghd::fisher_ratio(std::span<const double>(scaled), mode);
      },
      py::arg("scaled"), py::arg("outer_mode") = cghd::OuterMode::Finite,
      "Fisher-information ratio from scaled boundaries c_k = e^r b_k / sqrt(2)");
  m.def(
      "fisher_ratio_of_scheme",
      [](const cghd::BinScheme& scheme) { return cghd::fisher_ratio(scheme); },
      py::arg("scheme"));

  py::class_<cghd::OptimizedBins>(m, "OptimizedBins")
      .def_readonly("scheme", &cghd::OptimizedBins::scheme)
      .def_readonly("ratio", &cghd::OptimizedBins::ratio)
      .def_readonly("converged", &cghd::OptimizedBins::converged);
  m.def("optimize_bins", &cghd::optimize_bins, py::arg("M"), py::arg("R"),
        py::arg("outer_mode") = cghd::OuterMode::Finite);
  m.def("make_scheme", &cghd::make_scheme, py::arg("M"), py::arg("R"),
        py::arg("binning"), py::arg("outer_mode") = cghd::OuterMode::Finite);

  py::class_<cghd::ScalingRow>(m, "ScalingRow")
      .def_readonly("n_tot", &cghd::ScalingRow::n_tot)
      .def_readonly("dphi_ideal", &cghd::ScalingRow::dphi_ideal)
      .def_readonly("dphi_M", &cghd::ScalingRow::dphi_M)
      .def_readonly("hl", &cghd::ScalingRow::hl)
      .def_readonly("sql", &cghd::ScalingRow::sql);
  m.def(
      "scaling_sweep",
      [](const std::vector<double>& grid, int M, cghd::Binning binning, int nu) {
        return cghd::scaling_sweep(std::span<const double>(grid), M, binning, nu);
      },
      py::arg("n_grid"), py::arg("M"), py::arg("binning"), py::arg("nu") = 1);

  // method-of-moments estimator --------------------------------------------
  m.def(
      "covariance",
      [](const std::vector<double>& p) {
        return matrix_to_lists(cghd::covariance(p));
      },
      py::arg("p"));
  m.def(
      "pseudoinverse_closed_form",
      [](const std::vector<double>& p) {
        return matrix_to_lists(cghd::pseudoinverse_closed_form(p));
      },
      py::arg("p"));
  m.def(
      "pseudoinverse_svd",
      [](const std::vector<std::vector<double>>& rows, double cutoff_rel) {
        return matrix_to_lists(cghd::pseudoinverse_svd(matrix_from_lists(rows), cutoff_rel));
      },
      py::arg("matrix"), py::arg("cutoff_rel") = 1e-12);
  m.def(
      "optimal_weight",
      [](const std::vector<double>& p, const std::vector<double>& dp) {
        return cghd::optimal_weight(p, dp);
      },
      py::arg("p"), py::arg("dp"));
  m.def(
      "optimal_weight_from_covariance",
      [](const std::vector<std::vector<double>>& gamma, const std::vector<double>& dp) {
        return cghd::optimal_weight_from_covariance(matrix_from_lists(gamma), dp);
      },
      py::arg("gamma"), py::arg("dp"));
  m.def(
      "estimator_variance",
      [](const std::vector<double>& w, const std::vector<double>& p,
         const std::vector<double>& dp, int nu) {
        return cghd::estimator_variance(w, p, dp, nu);
      },
      py::arg("w"), py::arg("p"), py::arg("dp"), py::arg("nu") = 1);

  py::class_<cghd::MomentEstimator>(m, "MomentEstimator")
      .def_property_readonly("scheme", &cghd::MomentEstimator::scheme)
      .def_property_readonly("weights", &cghd::MomentEstimator::weights)
      .def_property_readonly("phi0", &cghd::MomentEstimator::phi0)
      .def_property_readonly("curve",
                             [](const cghd::MomentEstimator& est) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& pt : est.curve())
                                 out.emplace_back(pt.phi, pt.g);
                               return out;
                             })
      .def_property_readonly("g_min", &cghd::MomentEstimator::g_min)
      .def_property_readonly("g_max", &cghd::MomentEstimator::g_max)
      .def("invert", &cghd::MomentEstimator::invert, py::arg("obar"))
      .def(
          "estimate",
          [](const cghd::MomentEstimator& est, const std::vector<int>& bins) {
            return est.estimate(bins);
          },
          py::arg("sample_bins"))
      .def("to_json", [](const cghd::MomentEstimator& est) {
        return cghd::estimator_to_json(est);
      })
      .def_static("from_json", &cghd::estimator_from_json, py::arg("text"));

  m.def("calibration_curve", &cghd::calibration_curve, py::arg("w"), py::arg("cfg"),
        py::arg("scheme"), py::arg("phi0"), py::arg("phi_lo"), py::arg("phi_hi"),
        py::arg("grid_points") = 2001);

  // Monte Carlo campaigns ---------------------------------------------------
  py::class_<cghd::PhaseScan>(m, "PhaseScan")
      .def(py::init([](double lo, double hi, int count) {
             return cghd::PhaseScan{lo, hi, count};
           }),
           py::arg("lo"), py::arg("hi"), py::arg("count"))
      .def_readonly("lo", &cghd::PhaseScan::lo)
      .def_readonly("hi", &cghd::PhaseScan::hi)
      .def_readonly("count", &cghd::PhaseScan::count);

  py::class_<cghd::SimCampaignConfig>(m, "SimCampaignConfig")
      .def(py::init([](const cghd::InterferometerConfig& cfg,
                       const cghd::BinScheme& scheme, double phi0, double phi_true,
                       int nu, int repeats, int samples_per_phase,
                       const cghd::PhaseScan& phase_scan, int bootstrap_resamples,
                       std::uint64_t master_seed, bool empirical_covariance) {
             cghd::SimCampaignConfig config;
             config.cfg = cfg;
             config.scheme = scheme;
             config.phi0 = phi0;
             config.phi_true = std::isnan(phi_true) ? phi0 : phi_true;
             config.nu = nu;
             config.repeats = repeats;
             config.samples_per_phase = samples_per_phase;
             config.phase_scan = phase_scan;
             config.bootstrap_resamples = bootstrap_resamples;
             config.master_seed = master_seed;
             config.empirical_covariance = empirical_covariance;
             config.validate();
             return config;
           }),
           py::arg("cfg"), py::arg("scheme"),
           py::arg("phi0") = -0.02 * cghd::kPi / 180.0,
           py::arg("phi_true") = std::nan(""), py::arg("nu") = 25,
           py::arg("repeats") = 40, py::arg("samples_per_phase") = 1000,
           py::arg("phase_scan") = cghd::PhaseScan{-20.0 * cghd::kPi / 180.0,
                                                   20.0 * cghd::kPi / 180.0, 150},
           py::arg("bootstrap_resamples") = 40,
           py::arg("master_seed") = cghd::kDefaultMasterSeed,
           py::arg("empirical_covariance") = false)
      .def_readonly("cfg", &cghd::SimCampaignConfig::cfg)
      .def_readonly("scheme", &cghd::SimCampaignConfig::scheme)
      .def_readonly("phi0", &cghd::SimCampaignConfig::phi0)
      .def_readonly("phi_true", &cghd::SimCampaignConfig::phi_true)
      .def_readonly("nu", &cghd::SimCampaignConfig::nu)
      .def_readonly("repeats", &cghd::SimCampaignConfig::repeats)
      .def_readonly("master_seed", &cghd::SimCampaignConfig::master_seed)
      .def("to_json", [](const cghd::SimCampaignConfig& config) {
        return cghd::campaign_config_to_json(config);
      })
      .def_static("from_json", &cghd::campaign_config_from_json, py::arg("text"));

  py::class_<cghd::TrialReport>(m, "TrialReport")
      .def_readonly("phi_true", &cghd::TrialReport::phi_true)
      .def_readonly("estimates", &cghd::TrialReport::estimates)
      .def_readonly("dphi_std", &cghd::TrialReport::dphi_std)
      .def_readonly("dphi_bootstrap_err", &cghd::TrialReport::dphi_bootstrap_err)
      .def_readonly("dphi2_bootstrap_err", &cghd::TrialReport::dphi2_bootstrap_err)
      .def_readonly("crb_predicted", &cghd::TrialReport::crb_predicted)
      .def_readonly("dphi_predicted", &cghd::TrialReport::dphi_predicted)
      .def_readonly("saturated_repeats", &cghd::TrialReport::saturated_repeats)
      .def_readonly("excluded_bins", &cghd::TrialReport::excluded_bins)
      .def_readonly("degenerate_statistics", &cghd::TrialReport::degenerate_statistics);

  py::class_<cghd::FitResult>(m, "FitResult")
      .def_readonly("alpha_hat", &cghd::FitResult::alpha_hat)
      .def_readonly("r_hat", &cghd::FitResult::r_hat)
      .def_readonly("residual", &cghd::FitResult::residual);

  m.def("sample_quadratures", &cghd::sample_quadratures, py::arg("cfg"),
        py::arg("phi"), py::arg("n"), py::arg("seed"));
  m.def(
      "empirical_bin_frequencies",
      [](const std::vector<double>& samples, const cghd::BinScheme& scheme) {
        const auto out = cghd::empirical_bin_frequencies(samples, scheme);
        return py::make_tuple(out.freqs, out.assigned, out.out_of_range);
      },
      py::arg("samples"), py::arg("scheme"),
      "Returns (frequencies, assigned, out_of_range)");
  m.def(
      "fit_probability_model",
      [](const std::vector<std::pair<double, std::vector<double>>>& scan,
         const cghd::BinScheme& scheme) {
        std::vector<cghd::PhasePoint> points;
        points.reserve(scan.size());
        for (const auto& [phi, freqs] : scan) points.push_back({phi, freqs});
        return cghd::fit_probability_model(points, scheme);
      },
      py::arg("scan"), py::arg("scheme"));
  m.def("run_campaign", &cghd::run_campaign, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "phase_range_scan",
      [](const cghd::SimCampaignConfig& config, const std::vector<double>& grid) {
        py::gil_scoped_release release;
        return cghd::phase_range_scan(config, grid);
      },
      py::arg("config"), py::arg("phi_grid"));
  m.def("run_classical_ideal", &cghd::run_classical_ideal, py::arg("alpha"),
        py::arg("phi_true"), py::arg("nu"), py::arg("repeats"),
        py::arg("bootstrap_resamples"), py::arg("master_seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("classical_ideal_dphi", &cghd::classical_ideal_dphi, py::arg("alpha"),
        py::arg("nu"), py::arg("phi"));
  m.def("enhancement_db", &cghd::enhancement_db, py::arg("dphi2_quantum"),
        py::arg("dphi2_classical"));
  m.def(
      "quantum_advantage_crossing",
      [](const std::vector<double>& phi, const std::vector<double>& quantum,
         const std::vector<double>& classical) -> py::object {
        const auto root = cghd::quantum_advantage_crossing(phi, quantum, classical);
        if (!root) return py::none();
        return py::float_(*root);
      },
      py::arg("phi"), py::arg("quantum_err"), py::arg("classical_err"));
}
