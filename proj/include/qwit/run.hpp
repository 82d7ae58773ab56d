#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qwit/ingest.hpp"
#include "qwit/witness.hpp"

namespace qwit {

enum class Command { Simulate, Witness, Qfi, IngestQfi, Sweep, Report };
std::string_view to_string(Command c);
Command parse_command(const std::string& text);

struct OutputFormats {
  bool csv = true;
  bool json = true;
  bool svg = false;
};
/// Comma-separated subset of {csv, json, svg}.
OutputFormats parse_formats(const std::string& list);

enum class ConcurrenceBranch { General, Parity, TranslationInvariant, Heisenberg, Dimer };
enum class DiscordBranch { General, Xyz, Heisenberg };
std::string concurrence_branch_label(ConcurrenceBranch b);
std::string discord_branch_label(DiscordBranch b);

struct SpectrumInput {
  std::string path;
  std::optional<double> temperature_override;
  std::optional<BackgroundModel> background;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double cutoff = std::numeric_limits<double>::infinity();
  /// Grid holds the x + y + z sum; nQFI and its depth are reported per k.
  bool unpolarized = false;
  /// Number of sites used for the large-N depth table (divisor mode ignores it).
  int n_sites = 0;
};

struct RunConfig {
  std::optional<Command> command;
  std::optional<SpinModel> model;
  std::vector<double> temperatures;
  std::vector<double> wavevectors;  // empty means the full grid
  std::vector<std::string> witnesses;
  std::vector<std::pair<int, int>> pairs{{0, 1}};
  std::vector<Filter> filters{Filter::qfi()};
  std::vector<SpinComponent> components{SpinComponent::Z};
  TwoTangleConvention two_tangle = TwoTangleConvention::PerSite;
  ConcurrenceBranch concurrence_branch = ConcurrenceBranch::General;
  DiscordBranch discord_branch = DiscordBranch::General;
  DiscordSettings discord;
  double g_factor = 2.0;
  bool isotropic_g = true;
  std::optional<SpectrumInput> spectrum;
  std::string report_input;  // JSON-lines file for the report command
  std::string output_directory = "qwit-out";
  OutputFormats formats;
  int threads = 1;
  double tolerance = kCertificationTolerance;
  Capacity capacity;
  int omega_bins = 400;
  double omega_max = 0.0;  // 0 picks the spectral width
  std::string base_directory = ".";

  /// Throws Error(Config) for anything the command cannot run with. Nothing is
  /// written before this passes.
  void validate(Command c) const;
  /// Normalized text of every field that affects results.
  std::string canonical() const;
};

RunConfig parse_run_config(const std::string& yaml_text, const std::string& base_directory = ".");
RunConfig load_run_config(const std::string& path);

/// Parses a wavevector literal: a number, "pi", "2pi/3", "pi/2", "0.5*pi".
double parse_wavevector(const std::string& text);

struct RunError {
  std::string witness;
  std::optional<double> temperature;
  std::optional<double> k;
  ErrorKind kind = ErrorKind::Numeric;
  std::string message;
  std::string to_json_line() const;
};

struct RunResult {
  std::vector<WitnessReport> reports;
  std::vector<RunError> errors;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  int exit_code() const;
};

/// Runs one command and writes its artifacts under output_directory.
RunResult run(const RunConfig& config, Command command);
RunResult run(const RunConfig& config);

/// Minimal line plot: one polyline per series plus optional horizontal rules.
struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool staircase = false;
};
std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series, const std::vector<double>& rules);

/// Reads reports back from a summary JSON-lines file.
std::vector<WitnessReport> read_reports(const std::string& path);
WitnessReport report_from_json_line(const std::string& line);

}  // namespace qwit
