#pragma once

#include <string>
#include <string_view>

#include "qwit/spin_model.hpp"

namespace qwit {

/// Reads a model from YAML text with a top-level `model:` section whose keys
/// mirror the SpinModel fields (kind, n_sites, j, alpha, delta, h_x,
/// boundary, custom_bonds as [i, j, Jxx, Jyy, Jzz] rows).
SpinModel parse_model_config(std::string_view yaml_text);
SpinModel load_model_config(const std::string& path);

/// Inverse of parse_model_config; only fields the kind uses are emitted.
std::string serialize_model_config(const SpinModel& model);

}  // namespace qwit
