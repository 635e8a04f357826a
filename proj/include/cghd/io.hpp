#pragma once

#include <string>

#include "cghd/estimator.hpp"
#include "cghd/simulate.hpp"

namespace cghd {

/// {"M": int, "R": real, "outer_mode": "finite"|"infinite", "boundaries": [real]}
std::string bin_scheme_to_json(const BinScheme& scheme, int indent = 2);
BinScheme bin_scheme_from_json(const std::string& text);

/// {"scheme": ..., "phi0_deg": real, "w": [real], "g": [[phi_deg, g_value]]}
std::string estimator_to_json(const MomentEstimator& est, int indent = 2);
MomentEstimator estimator_from_json(const std::string& text);

/// Campaign configuration, fields mirroring SimCampaignConfig; angles carry
/// explicit degree units in the keys.
std::string campaign_config_to_json(const SimCampaignConfig& config, int indent = 2);
SimCampaignConfig campaign_config_from_json(const std::string& text);

}  // namespace cghd
