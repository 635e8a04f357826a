#include "cghd/io.hpp"

#include <json.hpp>

namespace cghd {

using nlohmann::json;

namespace {

OuterMode outer_mode_from_string(const std::string& s) {
  if (s == "finite") return OuterMode::Finite;
  if (s == "infinite") return OuterMode::Infinite;
  throw std::invalid_argument("unknown outer_mode: " + s);
}

std::string outer_mode_to_string(OuterMode mode) {
  return mode == OuterMode::Finite ? "finite" : "infinite";
}

json scheme_to_obj(const BinScheme& scheme) {
  return json{{"M", scheme.bins()},
              {"R", scheme.range},
              {"outer_mode", outer_mode_to_string(scheme.outer_mode)},
              {"boundaries", scheme.boundaries}};
}

BinScheme scheme_from_obj(const json& obj) {
  BinScheme scheme;
  scheme.range = obj.at("R").get<double>();
  scheme.outer_mode = outer_mode_from_string(obj.at("outer_mode").get<std::string>());
  scheme.boundaries = obj.at("boundaries").get<std::vector<double>>();
  scheme.validate();
  if (obj.contains("M") && obj.at("M").get<int>() != scheme.bins())
    throw std::invalid_argument("bin scheme M does not match boundary count");
  return scheme;
}

}  // namespace

std::string bin_scheme_to_json(const BinScheme& scheme, int indent) {
  return scheme_to_obj(scheme).dump(indent);
}

BinScheme bin_scheme_from_json(const std::string& text) {
  return scheme_from_obj(json::parse(text));
}

std::string estimator_to_json(const MomentEstimator& est, int indent) {
  json g = json::array();
  for (const auto& pt : est.curve())
    g.push_back({rad_to_deg(pt.phi), pt.g});
  json obj{{"scheme", scheme_to_obj(est.scheme())},
           {"phi0_deg", rad_to_deg(est.phi0())},
           {"w", est.weights()},
           {"g", g}};
  return obj.dump(indent);
}

MomentEstimator estimator_from_json(const std::string& text) {
  const json obj = json::parse(text);
  auto scheme = scheme_from_obj(obj.at("scheme"));
  auto w = obj.at("w").get<std::vector<double>>();
  std::vector<CalibrationPoint> curve;
  for (const auto& pt : obj.at("g"))
    curve.push_back({deg_to_rad(pt.at(0).get<double>()), pt.at(1).get<double>()});
  return MomentEstimator(std::move(scheme), std::move(w),
                         deg_to_rad(obj.at("phi0_deg").get<double>()),
                         std::move(curve));
}

std::string campaign_config_to_json(const SimCampaignConfig& config, int indent) {
  json obj{{"cfg", {{"alpha", config.cfg.alpha}, {"r", config.cfg.r}}},
           {"scheme", scheme_to_obj(config.scheme)},
           {"phi0_deg", rad_to_deg(config.phi0)},
           {"phi_true_deg", rad_to_deg(config.phi_true)},
           {"nu", config.nu},
           {"repeats", config.repeats},
           {"samples_per_phase", config.samples_per_phase},
           {"phase_scan",
            {{"lo_deg", rad_to_deg(config.phase_scan.lo)},
             {"hi_deg", rad_to_deg(config.phase_scan.hi)},
             {"count", config.phase_scan.count}}},
           {"bootstrap_resamples", config.bootstrap_resamples},
           {"master_seed", config.master_seed},
           {"empirical_covariance", config.empirical_covariance}};
  return obj.dump(indent);
}

SimCampaignConfig campaign_config_from_json(const std::string& text) {
  const json obj = json::parse(text);
  SimCampaignConfig config;
  const auto& cfg = obj.at("cfg");
  config.cfg.alpha = cfg.at("alpha").get<double>();
  if (cfg.contains("squeezing_db"))
    config.cfg.r = squeezing_db_to_r(cfg.at("squeezing_db").get<double>());
  else
    config.cfg.r = cfg.at("r").get<double>();
  config.scheme = scheme_from_obj(obj.at("scheme"));
  if (obj.contains("phi0_deg"))
    config.phi0 = deg_to_rad(obj.at("phi0_deg").get<double>());
  config.phi_true = obj.contains("phi_true_deg")
                        ? deg_to_rad(obj.at("phi_true_deg").get<double>())
                        : config.phi0;
  if (obj.contains("nu")) config.nu = obj.at("nu").get<int>();
  if (obj.contains("repeats")) config.repeats = obj.at("repeats").get<int>();
  if (obj.contains("samples_per_phase"))
    config.samples_per_phase = obj.at("samples_per_phase").get<int>();
  if (obj.contains("phase_scan")) {
    const auto& ps = obj.at("phase_scan");
    config.phase_scan.lo = deg_to_rad(ps.at("lo_deg").get<double>());
    config.phase_scan.hi = deg_to_rad(ps.at("hi_deg").get<double>());
    config.phase_scan.count = ps.at("count").get<int>();
  }
  if (obj.contains("bootstrap_resamples"))
    config.bootstrap_resamples = obj.at("bootstrap_resamples").get<int>();
  if (obj.contains("master_seed"))
    config.master_seed = obj.at("master_seed").get<std::uint64_t>();
  if (obj.contains("empirical_covariance"))
    config.empirical_covariance = obj.at("empirical_covariance").get<bool>();
  config.validate();
  return config;
}

}  // namespace cghd
