#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qwit/run.hpp"
#include "yaml_model.hpp"

namespace qwit {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kWitnessNames{"one_tangle", "concurrence", "entanglement_of_formation", "two_tangle",
                                          "susceptibility", "discord", "qfi", "nqfi"};

void check_keys(const YAML::Node& node, const std::set<std::string>& known, const std::string& where) {
  require(node.IsMap(), ErrorKind::Config, where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    require(known.count(key) > 0, ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

double number_or_inf(const YAML::Node& node, const char* key) {
  const auto text = detail::scalar_as<std::string>(node, key);
  try {
    return parse_double(text);
  } catch (const Error&) {
    fail(ErrorKind::Config, std::string("config key '") + key + "' expects a number, got '" + text + "'");
  }
}

std::vector<double> parse_temperatures(const YAML::Node& node) {
  std::vector<double> out;
  if (node.IsSequence()) {
    for (const auto& t : node) out.push_back(number_or_inf(t, "temperatures"));
  } else if (node.IsMap()) {
    check_keys(node, {"from", "to", "count", "spacing"}, "temperatures");
    require(node["from"] && node["to"] && node["count"], ErrorKind::Config,
            "temperature range needs from, to and count");
    const double lo = detail::scalar_as<double>(node["from"], "temperatures.from");
    const double hi = detail::scalar_as<double>(node["to"], "temperatures.to");
    const int n = detail::scalar_as<int>(node["count"], "temperatures.count");
    const std::string spacing = node["spacing"] ? detail::scalar_as<std::string>(node["spacing"], "spacing") : "linear";
    require(n >= 1, ErrorKind::Config, "temperature count must be positive");
    require(spacing == "linear" || spacing == "log", ErrorKind::Config, "temperature spacing is linear or log");
    require(spacing == "linear" || (lo > 0.0 && hi > 0.0), ErrorKind::Config, "log spacing needs positive bounds");
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      out.push_back(spacing == "linear" ? (n == 1 ? lo : (lo * (n - 1 - i) + hi * i) / (n - 1)) : lo * std::pow(hi / lo, f));
    }
  } else {
    out.push_back(number_or_inf(node, "temperatures"));
  }
  for (double t : out) {
    require(!std::isnan(t) && t >= 0.0, ErrorKind::Config, "temperatures must be non-negative");
  }
  return out;
}

std::vector<std::string> string_list(const YAML::Node& node, const char* key) {
  std::vector<std::string> out;
  if (node.IsSequence()) {
    for (const auto& v : node) out.push_back(detail::scalar_as<std::string>(v, key));
  } else {
    std::stringstream ss(detail::scalar_as<std::string>(node, key));
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) out.push_back(item);
    }
  }
  return out;
}

std::string concurrence_branch_name(ConcurrenceBranch b) {
  switch (b) {
    case ConcurrenceBranch::General: return "general";
    case ConcurrenceBranch::Parity: return "parity";
    case ConcurrenceBranch::TranslationInvariant: return "translation-invariant";
    case ConcurrenceBranch::Heisenberg: return "heisenberg";
    case ConcurrenceBranch::Dimer: return "dimer";
  }
  return "general";
}

std::string discord_branch_name(DiscordBranch b) {
  switch (b) {
    case DiscordBranch::General: return "general";
    case DiscordBranch::Xyz: return "xyz";
    case DiscordBranch::Heisenberg: return "heisenberg";
  }
  return "general";
}

fs::path resolve(const std::string& base, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : fs::path(base) / p;
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Witness: return "witness";
    case Command::Qfi: return "qfi";
    case Command::IngestQfi: return "ingest-qfi";
    case Command::Sweep: return "sweep";
    case Command::Report: return "report";
  }
  return "sweep";
}

Command parse_command(const std::string& text) {
  for (Command c : {Command::Simulate, Command::Witness, Command::Qfi, Command::IngestQfi, Command::Sweep,
                    Command::Report}) {
    if (text == to_string(c)) return c;
  }
  fail(ErrorKind::Config, "unknown command '" + text + "'");
}

OutputFormats parse_formats(const std::string& list) {
  OutputFormats f{false, false, false};
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item == "csv") {
      f.csv = true;
    } else if (item == "json" || item == "jsonl" || item == "json-lines") {
      f.json = true;
    } else if (item == "svg") {
      f.svg = true;
    } else if (!item.empty()) {
      fail(ErrorKind::Config, "unknown output format '" + item + "' (expected csv, json, svg)");
    }
  }
  require(f.csv || f.json || f.svg, ErrorKind::Config, "no output format selected");
  return f;
}

double parse_wavevector(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (c != ' ' && c != '*') text += c;
  }
  require(!text.empty(), ErrorKind::Config, "empty wavevector");
  const auto p = text.find("pi");
  if (p == std::string::npos) {
    try {
      return parse_double(text);
    } catch (const Error&) {
      fail(ErrorKind::Config, "malformed wavevector '" + raw + "'");
    }
  }
  try {
    const std::string head = text.substr(0, p);
    const std::string tail = text.substr(p + 2);
    double value = kPi;
    if (head == "-") {
      value = -value;
    } else if (!head.empty()) {
      value *= parse_double(head);
    }
    if (!tail.empty()) {
      require(tail[0] == '/', ErrorKind::Config, "malformed wavevector '" + raw + "'");
      const double d = parse_double(tail.substr(1));
      require(d != 0.0, ErrorKind::Config, "wavevector divides by zero");
      value /= d;
    }
    return value;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(ErrorKind::Config, "malformed wavevector '" + raw + "'");
  }
}

RunConfig parse_run_config(const std::string& yaml_text, const std::string& base_directory) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::Config, std::string("malformed config: ") + e.what());
  }
  require(root.IsMap(), ErrorKind::Config, "config must be a mapping");
  check_keys(root,
             {"command", "model", "temperatures", "wavevectors", "witnesses", "pairs", "filters", "components",
              "two_tangle_convention", "concurrence_branch", "discord_branch", "discord", "g_factor", "isotropic_g",
              "spectrum", "report", "output", "threads", "tolerance", "capacity", "bins"},
             "config");

  RunConfig c;
  c.base_directory = base_directory;
  if (root["command"]) c.command = parse_command(detail::scalar_as<std::string>(root["command"], "command"));
  if (root["model"]) c.model = detail::model_from_node(root["model"]);
  if (root["temperatures"]) c.temperatures = parse_temperatures(root["temperatures"]);
  if (const auto k = root["wavevectors"]) {
    const bool grid = k.IsScalar() && k.as<std::string>() == "grid";
    if (!grid) {
      for (const auto& s : string_list(k, "wavevectors")) c.wavevectors.push_back(parse_wavevector(s));
    }
  }
  if (root["witnesses"]) c.witnesses = string_list(root["witnesses"], "witnesses");
  if (const auto p = root["pairs"]) {
    require(p.IsSequence(), ErrorKind::Config, "pairs must be a list of [i, j]");
    c.pairs.clear();
    for (const auto& row : p) {
      require(row.IsSequence() && row.size() == 2, ErrorKind::Config, "each pair is [i, j]");
      c.pairs.emplace_back(detail::scalar_as<int>(row[0], "pairs"), detail::scalar_as<int>(row[1], "pairs"));
    }
  }
  if (root["filters"]) {
    c.filters.clear();
    for (const auto& s : string_list(root["filters"], "filters")) c.filters.push_back(parse_filter(s));
  }
  if (root["components"]) {
    c.components.clear();
    for (const auto& s : string_list(root["components"], "components")) {
      try {
        c.components.push_back(parse_component(s));
      } catch (const Error&) {
        fail(ErrorKind::Config, "unknown spin component '" + s + "'");
      }
    }
  }
  if (root["two_tangle_convention"]) {
    const auto s = detail::scalar_as<std::string>(root["two_tangle_convention"], "two_tangle_convention");
    bool found = false;
    for (auto conv : {TwoTangleConvention::OrderedPairs, TwoTangleConvention::PerSite,
                      TwoTangleConvention::DistanceOnce}) {
      if (s == to_string(conv)) {
        c.two_tangle = conv;
        found = true;
      }
    }
    require(found, ErrorKind::Config, "two_tangle_convention is ordered-pairs, per-site or distance-once");
  }
  if (root["concurrence_branch"]) {
    const auto s = detail::scalar_as<std::string>(root["concurrence_branch"], "concurrence_branch");
    bool found = false;
    for (auto b : {ConcurrenceBranch::General, ConcurrenceBranch::Parity, ConcurrenceBranch::TranslationInvariant,
                   ConcurrenceBranch::Heisenberg, ConcurrenceBranch::Dimer}) {
      if (s == concurrence_branch_name(b)) {
        c.concurrence_branch = b;
        found = true;
      }
    }
    require(found, ErrorKind::Config, "unknown concurrence_branch '" + s + "'");
  }
  if (root["discord_branch"]) {
    const auto s = detail::scalar_as<std::string>(root["discord_branch"], "discord_branch");
    bool found = false;
    for (auto b : {DiscordBranch::General, DiscordBranch::Xyz, DiscordBranch::Heisenberg}) {
      if (s == discord_branch_name(b)) {
        c.discord_branch = b;
        found = true;
      }
    }
    require(found, ErrorKind::Config, "unknown discord_branch '" + s + "'");
  }
  if (const auto d = root["discord"]) {
    check_keys(d, {"grid_points", "refine_starts", "max_iterations", "tolerance"}, "discord");
    if (d["grid_points"]) c.discord.grid_points = detail::scalar_as<int>(d["grid_points"], "grid_points");
    if (d["refine_starts"]) c.discord.refine_starts = detail::scalar_as<int>(d["refine_starts"], "refine_starts");
    if (d["max_iterations"]) c.discord.max_iterations = detail::scalar_as<int>(d["max_iterations"], "max_iterations");
    if (d["tolerance"]) c.discord.tolerance = detail::scalar_as<double>(d["tolerance"], "discord.tolerance");
  }
  if (root["g_factor"]) c.g_factor = detail::scalar_as<double>(root["g_factor"], "g_factor");
  if (root["isotropic_g"]) c.isotropic_g = detail::scalar_as<bool>(root["isotropic_g"], "isotropic_g");
  if (const auto s = root["spectrum"]) {
    check_keys(s, {"path", "temperature_override", "background", "cutoff", "unpolarized", "n_sites"}, "spectrum");
    SpectrumInput in;
    require(static_cast<bool>(s["path"]), ErrorKind::Config, "spectrum.path is required");
    in.path = detail::scalar_as<std::string>(s["path"], "spectrum.path");
    if (s["temperature_override"]) in.temperature_override = number_or_inf(s["temperature_override"], "temperature_override");
    if (s["cutoff"]) in.cutoff = number_or_inf(s["cutoff"], "cutoff");
    if (s["unpolarized"]) in.unpolarized = detail::scalar_as<bool>(s["unpolarized"], "unpolarized");
    if (s["n_sites"]) in.n_sites = detail::scalar_as<int>(s["n_sites"], "spectrum.n_sites");
    if (const auto b = s["background"]) {
      check_keys(b, {"model", "window"}, "spectrum.background");
      require(b["model"] && b["window"], ErrorKind::Config, "background needs model and window");
      const auto m = detail::scalar_as<std::string>(b["model"], "background.model");
      require(m == "constant" || m == "linear", ErrorKind::Config, "background model is constant or linear");
      in.background = m == "constant" ? BackgroundModel::Constant : BackgroundModel::Linear;
      require(b["window"].IsSequence() && b["window"].size() == 2, ErrorKind::Config, "background window is [lo, hi]");
      in.window_lo = detail::scalar_as<double>(b["window"][0], "background.window");
      in.window_hi = detail::scalar_as<double>(b["window"][1], "background.window");
    }
    c.spectrum = in;
  }
  if (const auto r = root["report"]) {
    check_keys(r, {"input"}, "report");
    if (r["input"]) c.report_input = detail::scalar_as<std::string>(r["input"], "report.input");
  }
  if (const auto o = root["output"]) {
    check_keys(o, {"directory", "formats"}, "output");
    if (o["directory"]) c.output_directory = detail::scalar_as<std::string>(o["directory"], "output.directory");
    if (o["formats"]) {
      std::string joined;
      for (const auto& f : string_list(o["formats"], "output.formats")) joined += f + ",";
      c.formats = parse_formats(joined);
    }
  }
  if (root["threads"]) c.threads = detail::scalar_as<int>(root["threads"], "threads");
  if (root["tolerance"]) c.tolerance = detail::scalar_as<double>(root["tolerance"], "tolerance");
  if (const auto cap = root["capacity"]) {
    check_keys(cap, {"max_dense_sites", "max_sector_sites"}, "capacity");
    if (cap["max_dense_sites"]) c.capacity.max_dense_sites = detail::scalar_as<int>(cap["max_dense_sites"], "max_dense_sites");
    if (cap["max_sector_sites"]) c.capacity.max_sector_sites = detail::scalar_as<int>(cap["max_sector_sites"], "max_sector_sites");
  }
  if (const auto b = root["bins"]) {
    check_keys(b, {"count", "omega_max"}, "bins");
    if (b["count"]) c.omega_bins = detail::scalar_as<int>(b["count"], "bins.count");
    if (b["omega_max"]) c.omega_max = detail::scalar_as<double>(b["omega_max"], "bins.omega_max");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Config, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path parent = fs::path(path).parent_path();
  return parse_run_config(ss.str(), parent.empty() ? "." : parent.string());
}

void RunConfig::validate(Command cmd) const {
  require(threads >= 1, ErrorKind::Config, "threads must be at least 1");
  require(std::isfinite(tolerance) && tolerance >= 0.0, ErrorKind::Config, "tolerance must be finite and >= 0");
  require(!output_directory.empty(), ErrorKind::Config, "output directory is empty");
  require(discord.grid_points >= 8 && discord.refine_starts >= 1 && discord.max_iterations >= 1 &&
              discord.tolerance > 0.0,
          ErrorKind::Config, "discord settings out of range");
  require(g_factor > 0.0, ErrorKind::Config, "g_factor must be positive");

  const bool thermal = cmd == Command::Simulate || cmd == Command::Witness || cmd == Command::Qfi ||
                       cmd == Command::Sweep;
  if (thermal) {
    require(model.has_value(), ErrorKind::Config, "command '" + std::string(to_string(cmd)) + "' needs a model");
    require(!temperatures.empty(), ErrorKind::Config, "temperature list is empty");
    require(!components.empty(), ErrorKind::Config, "component list is empty");
    require(omega_bins >= 2 && omega_bins % 2 == 0, ErrorKind::Config, "bins.count must be even and >= 2");
    require(omega_max >= 0.0 && std::isfinite(omega_max), ErrorKind::Config, "bins.omega_max must be >= 0");
    require(capacity.max_dense_sites >= 1 && capacity.max_sector_sites >= capacity.max_dense_sites,
            ErrorKind::Config, "capacity limits out of order");
    for (const auto& [i, j] : pairs) {
      require(i >= 0 && j >= 0 && i < model->n_sites && j < model->n_sites && i != j, ErrorKind::Config,
              "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is not two distinct sites");
    }
    for (double k : wavevectors) require(std::isfinite(k), ErrorKind::Config, "wavevectors must be finite");
  }
  if (cmd == Command::Witness || cmd == Command::Sweep) {
    require(!witnesses.empty(), ErrorKind::Config, "witness list is empty");
  }
  for (const auto& w : witnesses) {
    require(kWitnessNames.count(w) > 0, ErrorKind::Config, "unknown witness '" + w + "'");
    if (cmd == Command::Witness) {
      require(w != "qfi" && w != "nqfi", ErrorKind::Config,
              "witness '" + w + "' is spectral; use the qfi or sweep command");
    }
  }
  if (cmd == Command::Qfi || cmd == Command::Sweep) {
    bool spectral = cmd == Command::Qfi;
    for (const auto& w : witnesses) spectral = spectral || w == "qfi" || w == "nqfi";
    require(!spectral || !filters.empty(), ErrorKind::Config, "filter list is empty");
  }
  if (cmd == Command::IngestQfi) {
    require(spectrum.has_value(), ErrorKind::Config, "ingest-qfi needs a spectrum section");
    const fs::path p = resolve(base_directory, spectrum->path);
    require(fs::is_regular_file(p), ErrorKind::Config, "spectrum file '" + p.string() + "' does not exist");
    require(!filters.empty(), ErrorKind::Config, "filter list is empty");
    require(spectrum->cutoff > 0.0, ErrorKind::Config, "spectrum.cutoff must be positive");
    require(!spectrum->temperature_override || *spectrum->temperature_override >= 0.0, ErrorKind::Config,
            "temperature_override must be non-negative");
    require(!spectrum->background || spectrum->window_lo < spectrum->window_hi, ErrorKind::Config,
            "background window needs lo < hi");
    require(spectrum->n_sites >= 0, ErrorKind::Config, "spectrum.n_sites must be >= 0");
  }
  if (cmd == Command::Report) {
    const std::string in = report_input.empty() ? (fs::path(output_directory) / "summary.jsonl").string() : report_input;
    const fs::path p = report_input.empty() ? fs::path(in) : resolve(base_directory, in);
    require(fs::is_regular_file(p), ErrorKind::Config, "report input '" + p.string() + "' does not exist");
  }
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  if (model) os << "model=" << model->describe() << ';';
  os << "T=";
  for (double t : temperatures) os << format_double(t) << ',';
  os << ";k=";
  for (double k : wavevectors) os << format_double(k) << ',';
  os << ";witnesses=";
  for (const auto& w : witnesses) os << w << ',';
  os << ";pairs=";
  for (const auto& [i, j] : pairs) os << i << '-' << j << ',';
  os << ";filters=";
  for (const auto& f : filters) os << f.name() << ',';
  os << ";components=";
  for (auto c : components) os << to_string(c) << ',';
  os << ";two_tangle=" << to_string(two_tangle) << ";concurrence=" << concurrence_branch_name(concurrence_branch)
     << ";discord=" << discord_branch_name(discord_branch) << ',' << discord.grid_points << ','
     << discord.refine_starts << ',' << discord.max_iterations << ',' << format_double(discord.tolerance)
     << ";g=" << format_double(g_factor) << ',' << isotropic_g << ";tol=" << format_double(tolerance)
     << ";bins=" << omega_bins << ',' << format_double(omega_max);
  if (spectrum) {
    os << ";spectrum=" << spectrum->path << ','
       << (spectrum->temperature_override ? format_double(*spectrum->temperature_override) : std::string("-")) << ','
       << format_double(spectrum->cutoff) << ',' << spectrum->unpolarized << ',' << spectrum->n_sites;
    if (spectrum->background) {
      os << ',' << (*spectrum->background == BackgroundModel::Constant ? "constant" : "linear") << ','
         << format_double(spectrum->window_lo) << ',' << format_double(spectrum->window_hi);
    }
  }
  return os.str();
}

std::string concurrence_branch_label(ConcurrenceBranch b) { return concurrence_branch_name(b); }
std::string discord_branch_label(DiscordBranch b) { return discord_branch_name(b); }

}  // namespace qwit
