#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "qwit/c_api.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string format;
  int threads = 0;
  double tolerance = -1.0;
};

int fail_with(qw_status status) {
  std::fprintf(stderr, "qwit: %s\n", qw_last_error());
  return qw_status_exit_code(status);
}

int execute(const std::string& command, const Options& opt) {
  qw_config* cfg = nullptr;
  qw_status st = opt.config.empty() ? qw_config_parse("{}", ".", &cfg) : qw_config_load(opt.config.c_str(), &cfg);
  if (st != QW_OK) return fail_with(st);
  struct Free {
    qw_config* c;
    ~Free() { qw_config_free(c); }
  } free_cfg{cfg};

  st = qw_config_set_command(cfg, command.c_str());
  if (st == QW_OK && !opt.out.empty()) st = qw_config_set_output(cfg, opt.out.c_str());
  if (st == QW_OK && !opt.format.empty()) st = qw_config_set_formats(cfg, opt.format.c_str());
  if (st == QW_OK && opt.threads != 0) st = qw_config_set_threads(cfg, opt.threads);
  if (st == QW_OK && opt.tolerance >= 0.0) st = qw_config_set_tolerance(cfg, opt.tolerance);
  if (st != QW_OK) return fail_with(st);

  qw_result* res = nullptr;
  st = qw_run(cfg, nullptr, &res);
  if (st != QW_OK) return fail_with(st);

  for (size_t i = 0; i < qw_result_warning_count(res); ++i) std::fprintf(stderr, "warning: %s\n", qw_result_warning(res, i));
  for (size_t i = 0; i < qw_result_error_count(res); ++i) std::fprintf(stderr, "error: %s\n", qw_result_error_json(res, i));
  std::printf("%s: %zu reports, %zu errors, %zu files\n", command.c_str(), qw_result_report_count(res),
              qw_result_error_count(res), qw_result_file_count(res));
  for (size_t i = 0; i < qw_result_file_count(res); ++i) std::printf("  %s\n", qw_result_file(res, i));
  const int code = qw_result_exit_code(res);
  qw_result_free(res);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement witnesses and quantum Fisher information for spin-1/2 models"};
  app.require_subcommand(1, 1);
  Options opt;
  const char* commands[][2] = {
      {"simulate", "Diagonalize the model; write levels, thermodynamics and binned chi'' spectra"},
      {"witness", "Pairwise and susceptibility witnesses over the temperature list"},
      {"qfi", "QFI family and nQFI over wavevectors and temperatures"},
      {"ingest-qfi", "QFI, nQFI and depth from a binned spectrum file"},
      {"sweep", "Every selected witness over the temperature list"},
      {"report", "Re-render CSV, plots and an overview from a summary.jsonl"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", opt.config, "YAML run configuration");
    sub->add_option("--out", opt.out, "Output directory (overrides the config)");
    sub->add_option("--format", opt.format, "Comma-separated output formats: csv,json,svg");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tolerance", opt.tolerance, "Certification tolerance")->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return execute(app.get_subcommands().front()->get_name(), opt);
}
