#include "qwit/model_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "yaml_model.hpp"

namespace qwit {
namespace detail {

SpinModel model_from_node(const YAML::Node& node) {
  require(node && node.IsMap(), ErrorKind::Config, "model section must be a mapping");
  static const std::set<std::string> known{"kind", "n_sites", "j", "alpha", "delta", "h_x", "boundary",
                                           "custom_bonds"};
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    require(known.count(key) > 0, ErrorKind::Config, "unknown model key '" + key + "'");
  }
  require(static_cast<bool>(node["kind"]), ErrorKind::Config, "model.kind is required");
  require(static_cast<bool>(node["n_sites"]), ErrorKind::Config, "model.n_sites is required");

  SpinModel m;
  m.kind = parse_model_kind(scalar_as<std::string>(node["kind"], "kind"));
  m.n_sites = scalar_as<int>(node["n_sites"], "n_sites");
  if (node["j"]) m.j = scalar_as<double>(node["j"], "j");
  if (node["alpha"]) m.alpha = scalar_as<double>(node["alpha"], "alpha");
  if (node["delta"]) m.delta = scalar_as<double>(node["delta"], "delta");
  if (node["h_x"]) m.h_x = scalar_as<double>(node["h_x"], "h_x");
  if (node["boundary"]) m.boundary = parse_boundary(scalar_as<std::string>(node["boundary"], "boundary"));
  if (const auto bonds = node["custom_bonds"]) {
    require(bonds.IsSequence(), ErrorKind::Config, "custom_bonds must be a list");
    for (const auto& row : bonds) {
      require(row.IsSequence() && row.size() == 5, ErrorKind::Config,
              "each custom bond is [site_i, site_j, Jxx, Jyy, Jzz]");
      m.custom_bonds.push_back({scalar_as<int>(row[0], "custom_bonds"), scalar_as<int>(row[1], "custom_bonds"),
                                scalar_as<double>(row[2], "custom_bonds"), scalar_as<double>(row[3], "custom_bonds"),
                                scalar_as<double>(row[4], "custom_bonds")});
    }
  }
  m.validate();
  return m;
}

void emit_model(YAML::Emitter& out, const SpinModel& m) {
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(m.kind));
  out << YAML::Key << "n_sites" << YAML::Value << m.n_sites;
  out << YAML::Key << "j" << YAML::Value << format_double(m.j);
  if (m.alpha) out << YAML::Key << "alpha" << YAML::Value << format_double(*m.alpha);
  if (m.delta) out << YAML::Key << "delta" << YAML::Value << format_double(*m.delta);
  if (m.h_x) out << YAML::Key << "h_x" << YAML::Value << format_double(*m.h_x);
  out << YAML::Key << "boundary" << YAML::Value << std::string(to_string(m.boundary));
  if (!m.custom_bonds.empty()) {
    out << YAML::Key << "custom_bonds" << YAML::Value << YAML::BeginSeq;
    for (const Bond& b : m.custom_bonds) {
      out << YAML::Flow << YAML::BeginSeq << b.i << b.j << format_double(b.jxx) << format_double(b.jyy)
          << format_double(b.jzz) << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

}  // namespace detail

SpinModel parse_model_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::Config, std::string("malformed model config: ") + e.what());
  }
  require(root.IsMap() && root["model"], ErrorKind::Config, "config needs a top-level 'model' section");
  return detail::model_from_node(root["model"]);
}

SpinModel load_model_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Config, "cannot open model config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str());
}

std::string serialize_model_config(const SpinModel& model) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "model" << YAML::Value;
  detail::emit_model(out, model);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace qwit
