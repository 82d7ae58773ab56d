#include "qwit/c_api.h"

#include <memory>
#include <string>
#include <vector>

#include "qwit/model_config.hpp"
#include "qwit/run.hpp"
#include "qwit/spectral.hpp"

struct qw_config {
  qwit::RunConfig config;
};

struct qw_result {
  int exit_code = 0;
  std::vector<std::string> reports;
  std::vector<std::string> errors;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

struct qw_model {
  qwit::SpinModel model;
};

struct qw_ensemble {
  std::unique_ptr<qwit::ThermalEnsemble> ensemble;
};

namespace {

thread_local std::string g_last_error;

qw_status to_status(qwit::ErrorKind kind) { return static_cast<qw_status>(static_cast<int>(kind)); }

template <typename Fn>
qw_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return QW_OK;
  } catch (const qwit::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QW_ERR_CAPACITY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QW_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) qwit::fail(qwit::ErrorKind::InvalidArgument, std::string(what) + " is null");
}

const char* at(const std::vector<std::string>& v, size_t i) { return i < v.size() ? v[i].c_str() : nullptr; }

qwit::SpinComponent component(char c) {
  switch (c) {
    case 'x': case 'X': return qwit::SpinComponent::X;
    case 'y': case 'Y': return qwit::SpinComponent::Y;
    case 'z': case 'Z': return qwit::SpinComponent::Z;
    default: qwit::fail(qwit::ErrorKind::InvalidArgument, std::string("unknown component '") + c + "'");
  }
}

}  // namespace

extern "C" {

const char* qw_version(void) { return "1.0.0"; }

const char* qw_last_error(void) { return g_last_error.c_str(); }

int qw_status_exit_code(qw_status status) {
  if (status == QW_OK) return 0;
  if (status == QW_ERR_INTERNAL) return 4;
  return qwit::exit_code(static_cast<qwit::ErrorKind>(static_cast<int>(status)));
}

qw_status qw_config_load(const char* path, qw_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new qw_config{qwit::load_run_config(path)};
  });
}

qw_status qw_config_parse(const char* yaml_text, const char* base_directory, qw_config** out) {
  return guard([&] {
    need(yaml_text, "yaml_text");
    need(out, "out");
    *out = new qw_config{qwit::parse_run_config(yaml_text, base_directory ? base_directory : ".")};
  });
}

void qw_config_free(qw_config* config) { delete config; }

qw_status qw_config_set_command(qw_config* config, const char* command) {
  return guard([&] {
    need(config, "config");
    need(command, "command");
    config->config.command = qwit::parse_command(command);
  });
}

qw_status qw_config_set_output(qw_config* config, const char* directory) {
  return guard([&] {
    need(config, "config");
    need(directory, "directory");
    config->config.output_directory = directory;
  });
}

qw_status qw_config_set_formats(qw_config* config, const char* formats) {
  return guard([&] {
    need(config, "config");
    need(formats, "formats");
    config->config.formats = qwit::parse_formats(formats);
  });
}

qw_status qw_config_set_threads(qw_config* config, int threads) {
  return guard([&] {
    need(config, "config");
    qwit::require(threads >= 1, qwit::ErrorKind::Config, "threads must be at least 1");
    config->config.threads = threads;
  });
}

qw_status qw_config_set_tolerance(qw_config* config, double tolerance) {
  return guard([&] {
    need(config, "config");
    qwit::require(tolerance >= 0.0 && tolerance < 1.0, qwit::ErrorKind::Config, "tolerance must be in [0, 1)");
    config->config.tolerance = tolerance;
  });
}

qw_status qw_config_validate(const qw_config* config, const char* command) {
  return guard([&] {
    need(config, "config");
    const auto& c = config->config;
    qwit::require(command != nullptr || c.command.has_value(), qwit::ErrorKind::Config, "no command given");
    c.validate(command ? qwit::parse_command(command) : *c.command);
  });
}

qw_status qw_run(const qw_config* config, const char* command, qw_result** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    const auto& c = config->config;
    qwit::require(command != nullptr || c.command.has_value(), qwit::ErrorKind::Config, "no command given");
    const qwit::RunResult r = qwit::run(c, command ? qwit::parse_command(command) : *c.command);
    auto res = std::make_unique<qw_result>();
    res->exit_code = r.exit_code();
    for (const auto& rep : r.reports) res->reports.push_back(rep.to_json_line());
    for (const auto& e : r.errors) res->errors.push_back(e.to_json_line());
    res->files = r.files;
    res->warnings = r.warnings;
    *out = res.release();
  });
}

int qw_result_exit_code(const qw_result* result) { return result ? result->exit_code : 4; }
size_t qw_result_report_count(const qw_result* result) { return result ? result->reports.size() : 0; }
const char* qw_result_report_json(const qw_result* result, size_t index) { return result ? at(result->reports, index) : nullptr; }
size_t qw_result_error_count(const qw_result* result) { return result ? result->errors.size() : 0; }
const char* qw_result_error_json(const qw_result* result, size_t index) { return result ? at(result->errors, index) : nullptr; }
size_t qw_result_file_count(const qw_result* result) { return result ? result->files.size() : 0; }
const char* qw_result_file(const qw_result* result, size_t index) { return result ? at(result->files, index) : nullptr; }
size_t qw_result_warning_count(const qw_result* result) { return result ? result->warnings.size() : 0; }
const char* qw_result_warning(const qw_result* result, size_t index) { return result ? at(result->warnings, index) : nullptr; }
void qw_result_free(qw_result* result) { delete result; }

qw_status qw_model_parse(const char* yaml_text, qw_model** out) {
  return guard([&] {
    need(yaml_text, "yaml_text");
    need(out, "out");
    *out = new qw_model{qwit::parse_model_config(yaml_text)};
  });
}

qw_status qw_model_heisenberg_chain(int n_sites, double j, int periodic, qw_model** out) {
  return guard([&] {
    need(out, "out");
    *out = new qw_model{
        qwit::SpinModel::heisenberg_chain(n_sites, j, periodic ? qwit::Boundary::Periodic : qwit::Boundary::Open)};
  });
}

qw_status qw_model_dimer_array(int n_sites, double j, qw_model** out) {
  return guard([&] {
    need(out, "out");
    *out = new qw_model{qwit::SpinModel::dimer_array(n_sites, j)};
  });
}

int qw_model_sites(const qw_model* model) { return model ? model->model.n_sites : 0; }
void qw_model_free(qw_model* model) { delete model; }

qw_status qw_ensemble_create(const qw_model* model, double temperature, qw_ensemble** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    qwit::require(temperature >= 0.0, qwit::ErrorKind::InvalidArgument, "temperature must be >= 0");
    const qwit::Capacity cap;
    std::shared_ptr<const qwit::Eigendecomposition> eig;
    if (model->model.n_sites <= cap.max_dense_sites) {
      eig = std::make_shared<const qwit::Eigendecomposition>(qwit::diagonalize(model->model, cap));
    } else {
      qwit::require(temperature == 0.0, qwit::ErrorKind::Capacity,
                    "finite temperature needs N <= " + std::to_string(cap.max_dense_sites));
      eig = std::make_shared<const qwit::Eigendecomposition>(qwit::ground_manifold(model->model, cap));
    }
    auto e = std::make_unique<qw_ensemble>();
    e->ensemble = std::make_unique<qwit::ThermalEnsemble>(eig, temperature);
    *out = e.release();
  });
}

void qw_ensemble_free(qw_ensemble* ensemble) { delete ensemble; }

qw_status qw_two_site_state(const qw_ensemble* ensemble, int i, int j, double re[16], double im[16]) {
  return guard([&] {
    need(ensemble, "ensemble");
    need(re, "re");
    need(im, "im");
    const qwit::TwoSiteState st = qwit::reduce_two_site(*ensemble->ensemble, i, j);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        re[4 * r + c] = st.rho()(r, c).real();
        im[4 * r + c] = st.rho()(r, c).imag();
      }
    }
  });
}

qw_status qw_concurrence(const qw_ensemble* ensemble, int i, int j, double* out) {
  return guard([&] {
    need(ensemble, "ensemble");
    need(out, "out");
    *out = qwit::concurrence_wootters(qwit::reduce_two_site(*ensemble->ensemble, i, j));
  });
}

qw_status qw_one_tangle(const qw_ensemble* ensemble, int site, double* out) {
  return guard([&] {
    need(ensemble, "ensemble");
    need(out, "out");
    *out = qwit::one_tangle(qwit::reduce_one_site(*ensemble->ensemble, site));
  });
}

qw_status qw_qfi_density(const qw_ensemble* ensemble, char comp, double k, double* out) {
  return guard([&] {
    need(ensemble, "ensemble");
    need(out, "out");
    const auto& ens = *ensemble->ensemble;
    const qwit::SpinOperator op =
        qwit::make_operator(qwit::SiteOperatorSpec::at_wavevector(component(comp), k), ens.n_sites());
    *out = qwit::qfi_direct(ens, op);
  });
}

}  // extern "C"
