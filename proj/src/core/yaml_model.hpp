#pragma once

#include <yaml-cpp/yaml.h>

#include "qwit/spin_model.hpp"

namespace qwit::detail {

SpinModel model_from_node(const YAML::Node& node);
void emit_model(YAML::Emitter& out, const SpinModel& model);

template <typename T>
T scalar_as(const YAML::Node& node, const char* key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorKind::Config, std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace qwit::detail
