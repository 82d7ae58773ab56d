#include "qwit/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace qwit {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes its
/// own slot, so the result order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string t_text(std::optional<double> t) { return t ? format_double(*t) : std::string("-"); }

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') ? c : '-';
  return out;
}

char component_letter(SpinComponent c) {
  switch (c) {
    case SpinComponent::X: return 'x';
    case SpinComponent::Y: return 'y';
    case SpinComponent::Z: return 'z';
  }
  return 'z';
}

struct Correlators {
  double gxx = 0.0;
  double gyy = 0.0;
  double gzz = 0.0;
  double mz = 0.0;
};

/// <S^a_i S^a_j> and <S^z_i> from the two-site density matrix.
Correlators correlators(const TwoSiteState& st) {
  const Eigen::Matrix4cd& r = st.rho();
  Correlators c;
  c.gzz = 0.25 * (r(0, 0) - r(1, 1) - r(2, 2) + r(3, 3)).real();
  c.gxx = 0.5 * (r(0, 3) + r(1, 2)).real();
  c.gyy = 0.5 * (r(1, 2) - r(0, 3)).real();
  c.mz = 0.5 * (r(0, 0) + r(1, 1) - r(2, 2) - r(3, 3)).real();
  return c;
}

struct Context {
  const RunConfig& cfg;
  Command command;
  std::string config_digest;
  std::shared_ptr<const Eigendecomposition> eig;
  std::vector<ThermalEnsemble> ensembles;
  std::vector<double> ks;
  std::vector<std::string> warnings;
};

std::string row_digest(const Context& ctx, const WitnessReport& r) {
  std::ostringstream os;
  os << ctx.config_digest << '|' << r.witness << '|' << r.branch << '|' << t_text(r.temperature) << '|';
  if (r.pair) os << r.pair->first << '-' << r.pair->second;
  os << '|' << (r.k ? format_double(*r.k) : std::string("-"));
  return hex_digest(os.str());
}

struct Slot {
  std::vector<WitnessReport> reports;
  std::vector<RunError> errors;
};

template <typename Fn>
void guarded(Slot& slot, const std::string& witness, std::optional<double> t, std::optional<double> k, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    slot.errors.push_back({witness, t, k, e.kind(), e.what()});
  } catch (const std::exception& e) {
    slot.errors.push_back({witness, t, k, ErrorKind::Numeric, e.what()});
  }
}

WitnessReport base_report(const std::string& witness, double t, std::optional<std::pair<int, int>> pair = {}) {
  WitnessReport r;
  r.witness = witness;
  r.temperature = t;
  r.pair = pair;
  return r;
}

Certification above(double value, double bound, double tol) {
  return value > bound + tol ? Certification::Certified : Certification::NotCertified;
}

double concurrence_by_branch(const RunConfig& cfg, const TwoSiteState& st) {
  const Correlators g = correlators(st);
  switch (cfg.concurrence_branch) {
    case ConcurrenceBranch::General: return concurrence_wootters(st);
    case ConcurrenceBranch::Parity: return concurrence_parity(st);
    case ConcurrenceBranch::TranslationInvariant: return concurrence_translation_invariant(g.gxx, g.gyy, g.gzz, g.mz);
    case ConcurrenceBranch::Heisenberg: return concurrence_heisenberg(g.gzz, g.mz);
    case ConcurrenceBranch::Dimer: return concurrence_dimer(g.gxx + g.gyy + g.gzz);
  }
  return concurrence_wootters(st);
}

void pairwise_witnesses(const Context& ctx, const ThermalEnsemble& ens, Slot& slot) {
  const RunConfig& cfg = ctx.cfg;
  const double t = ens.temperature();
  const int n = ens.n_sites();
  std::map<std::pair<int, int>, double> conc_cache;
  auto conc = [&](int i, int j) {
    const auto key = std::minmax(i, j);
    auto it = conc_cache.find(key);
    if (it != conc_cache.end()) return it->second;
    const double c = concurrence_wootters(reduce_two_site(ens, key.first, key.second));
    conc_cache.emplace(key, c);
    return c;
  };

  for (const std::string& w : cfg.witnesses) {
    if (w == "qfi" || w == "nqfi") continue;
    if (w == "susceptibility") {
      guarded(slot, w, t, std::nullopt, [&] {
        SusceptibilityInput in;
        in.var_x = magnetization_variance(ens, SpinComponent::X);
        in.var_y = magnetization_variance(ens, SpinComponent::Y);
        in.var_z = magnetization_variance(ens, SpinComponent::Z);
        in.n_sites = n;
        in.temperature = t;
        in.g_factor = cfg.g_factor;
        in.isotropic_g = cfg.isotropic_g;
        WitnessReport r = susceptibility_witness(in, cfg.tolerance);
        r.temperature = t;
        slot.reports.push_back(std::move(r));
      });
      continue;
    }
    if (w == "two_tangle") {
      std::vector<int> sites;
      if (cfg.two_tangle == TwoTangleConvention::PerSite) {
        for (const auto& p : cfg.pairs) {
          if (std::find(sites.begin(), sites.end(), p.first) == sites.end()) sites.push_back(p.first);
        }
      } else {
        sites.push_back(0);
      }
      for (int site : sites) {
        guarded(slot, w, t, std::nullopt, [&] {
          RealMatrix cm = RealMatrix::Zero(n, n);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const bool needed = cfg.two_tangle == TwoTangleConvention::OrderedPairs ||
                                  (cfg.two_tangle == TwoTangleConvention::PerSite && i == site) ||
                                  (cfg.two_tangle == TwoTangleConvention::DistanceOnce && i == 0);
              if (needed && i != j) cm(i, j) = conc(i, j);
            }
          }
          const TwoTangle tt = two_tangle(cm, cfg.two_tangle, site);
          WitnessReport r = base_report(w, t);
          if (cfg.two_tangle == TwoTangleConvention::PerSite) r.pair = std::make_pair(site, site);
          r.value = tt.value;
          r.bound = 0.0;
          r.entangled = above(tt.value, 0.0, cfg.tolerance);
          r.branch = std::string(to_string(cfg.two_tangle));
          r.log_base = LogBase::None;
          const double tau1 = one_tangle(reduce_one_site(ens, site));
          r.note = "radius=" + std::to_string(tt.truncation_radius) + " tau_1=" + format_double(tau1);
          slot.reports.push_back(std::move(r));
        });
      }
      continue;
    }
    for (const auto& pair : cfg.pairs) {
      guarded(slot, w, t, std::nullopt, [&] {
        WitnessReport r = base_report(w, t, pair);
        r.log_base = LogBase::None;
        if (w == "one_tangle") {
          r.value = one_tangle(reduce_one_site(ens, pair.first));
          r.bound = 0.0;
          r.branch = "general";
          if (ens.is_pure()) {
            r.entangled = above(r.value, 0.0, cfg.tolerance);
          } else {
            r.entangled = Certification::Inapplicable;
            r.note = "mixed state";
          }
        } else if (w == "concurrence" || w == "entanglement_of_formation") {
          const TwoSiteState st = reduce_two_site(ens, pair.first, pair.second);
          const double c = cfg.concurrence_branch == ConcurrenceBranch::General ? conc(pair.first, pair.second)
                                                                                : concurrence_by_branch(cfg, st);
          r.branch = concurrence_branch_label(cfg.concurrence_branch);
          r.bound = 0.0;
          if (w == "concurrence") {
            r.value = c;
          } else {
            r.value = entanglement_of_formation(c);
            r.log_base = LogBase::Bits;
          }
          r.entangled = above(r.value, 0.0, cfg.tolerance);
        } else if (w == "discord") {
          const TwoSiteState st = reduce_two_site(ens, pair.first, pair.second);
          r.log_base = LogBase::Bits;
          r.entangled = Certification::Inapplicable;
          r.branch = discord_branch_label(cfg.discord_branch);
          switch (cfg.discord_branch) {
            case DiscordBranch::General: {
              const DiscordResult d = discord_general(st, cfg.discord);
              r.value = d.discord;
              r.note = "I=" + format_double(d.mutual_information) + " J=" + format_double(d.classical_correlation) +
                       " gap=" + format_double(d.optimizer_gap) + (d.converged ? "" : " not-converged");
              break;
            }
            case DiscordBranch::Xyz: r.value = discord_xyz(st); break;
            case DiscordBranch::Heisenberg: r.value = discord_heisenberg(4.0 * correlators(st).gzz); break;
          }
        }
        slot.reports.push_back(std::move(r));
      });
    }
  }
}

bool wants(const RunConfig& cfg, const std::string& w) {
  return std::find(cfg.witnesses.begin(), cfg.witnesses.end(), w) != cfg.witnesses.end();
}

std::vector<SpinComponent> spectral_components(const RunConfig& cfg, bool with_nqfi) {
  std::vector<SpinComponent> out = cfg.components;
  if (with_nqfi) {
    for (auto c : {SpinComponent::X, SpinComponent::Y, SpinComponent::Z}) {
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(), [](auto a, auto b) { return static_cast<int>(a) < static_cast<int>(b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Filter values at every (T, filter) for one (k, component), plus the direct F_Q.
struct SpectralCell {
  std::vector<std::vector<double>> by_t_filter;
  std::vector<double> direct;
  std::vector<bool> ok;
  std::vector<RunError> errors;
};

SpectralCell spectral_cell(const Context& ctx, double k, SpinComponent comp) {
  const RunConfig& cfg = ctx.cfg;
  const SpinModel& model = *cfg.model;
  const std::size_t nt = ctx.ensembles.size();
  SpectralCell cell;
  cell.by_t_filter.assign(nt, std::vector<double>(cfg.filters.size(), 0.0));
  cell.direct.assign(nt, 0.0);
  cell.ok.assign(nt, false);
  const std::string label = std::string("qfi_") + component_letter(comp) + component_letter(comp);
  const SpinOperator op = make_operator(SiteOperatorSpec::at_wavevector(comp, k), model.n_sites, model.boundary);
  std::optional<TransitionMatrix> tm;
  if (ctx.eig->complete) {
    try {
      tm = transition_elements(*ctx.eig, op, k);
    } catch (const Error& e) {
      for (std::size_t it = 0; it < nt; ++it) cell.errors.push_back({label, ctx.ensembles[it].temperature(), k, e.kind(), e.what()});
      return cell;
    }
  }
  for (std::size_t it = 0; it < nt; ++it) {
    const ThermalEnsemble& ens = ctx.ensembles[it];
    const double t = ens.temperature();
    try {
      if (tm) {
        const SpectralFunction chi = lehmann_chi(ens, *tm);
        for (std::size_t f = 0; f < cfg.filters.size(); ++f) cell.by_t_filter[it][f] = coherence_measure(chi, t, cfg.filters[f]);
        cell.direct[it] = qfi_direct(ens, *tm);
      } else {
        cell.direct[it] = qfi_direct(ens, op);
        for (std::size_t f = 0; f < cfg.filters.size(); ++f) {
          require(cfg.filters[f].type == Filter::Type::QfiTanh, ErrorKind::Capacity,
                  "filter " + cfg.filters[f].name() + " needs the full spectrum");
          cell.by_t_filter[it][f] = cell.direct[it];
        }
      }
      for (double v : cell.by_t_filter[it]) require(std::isfinite(v), ErrorKind::Numeric, "non-finite coherence measure");
      cell.ok[it] = true;
    } catch (const Error& e) {
      cell.errors.push_back({label, t, k, e.kind(), e.what()});
    }
  }
  return cell;
}

void spectral_witnesses(Context& ctx, std::vector<Slot>& slots, bool family, bool with_nqfi) {
  const RunConfig& cfg = ctx.cfg;
  const int n = cfg.model->n_sites;
  const auto comps = spectral_components(cfg, with_nqfi);
  const std::size_t nk = ctx.ks.size();
  const std::size_t nc = comps.size();
  std::vector<SpectralCell> cells(nk * nc);

  // transition matrices dominate memory: ~6 dense dim x dim buffers per worker
  const double dim = static_cast<double>(ctx.eig->vectors.rows());
  const int mem_workers = std::max(1, static_cast<int>(2.5e9 / std::max(1.0, 6.0 * 16.0 * dim * dim)));
  parallel_for(cells.size(), std::min(cfg.threads, mem_workers), [&](std::size_t i) {
    cells[i] = spectral_cell(ctx, ctx.ks[i / nc], comps[i % nc]);
  });
  if (!ctx.eig->complete) ctx.warnings.push_back("partial spectrum: QFI from the direct route only");

  for (std::size_t it = 0; it < ctx.ensembles.size(); ++it) {
    const double t = ctx.ensembles[it].temperature();
    Slot& slot = slots[it];
    for (std::size_t ik = 0; ik < nk; ++ik) {
      const double k = ctx.ks[ik];
      const bool hermitian = std::abs(std::remainder(k, kPi)) < 1e-12;
      double f_sum = 0.0;
      bool sum_ok = true;
      for (std::size_t ic = 0; ic < nc; ++ic) {
        const SpectralCell& cell = cells[ik * nc + ic];
        const SpinComponent comp = comps[ic];
        if (!cell.ok[it]) {
          sum_ok = false;
          for (const RunError& e : cell.errors) {
            if (!e.temperature || *e.temperature == t) slot.errors.push_back(e);
          }
          continue;
        }
        const bool listed = std::find(cfg.components.begin(), cfg.components.end(), comp) != cfg.components.end();
        for (std::size_t f = 0; f < cfg.filters.size(); ++f) {
          const Filter& filter = cfg.filters[f];
          const double v = cell.by_t_filter[it][f];
          if (filter.type == Filter::Type::QfiTanh) f_sum += v;
          if (!family || !listed) continue;
          WitnessReport r;
          r.witness = filter.name() + "_" + component_letter(comp) + component_letter(comp);
          r.temperature = t;
          r.k = k;
          r.value = v;
          r.log_base = LogBase::None;
          r.branch = ctx.eig->complete ? "lehmann" : "direct";
          if (filter.type == Filter::Type::QfiTanh) {
            r.note = "F_Q/N direct=" + format_double(cell.direct[it]);
            if (hermitian) {
              const DepthResult d = entanglement_depth(n * v, n, 1.0, DepthMode::ExactN, n * cfg.tolerance);
              r.bound = 1.0;
              r.entangled = above(v, 1.0, cfg.tolerance);
              r.depth = r.entangled == Certification::Certified ? d.certified_depth : 1;
            } else {
              r.entangled = Certification::Inapplicable;
              r.note += " non-Hermitian S_k";
            }
          } else {
            r.entangled = Certification::Inapplicable;
          }
          slot.reports.push_back(std::move(r));
        }
      }
      if (with_nqfi && sum_ok) {
        bool has_qfi = false;
        for (const auto& f : cfg.filters) has_qfi = has_qfi || f.type == Filter::Type::QfiTanh;
        if (!has_qfi) continue;
        const NqfiResult q = nqfi(f_sum, 0.5);
        WitnessReport r;
        r.witness = "nqfi";
        r.temperature = t;
        r.k = k;
        r.value = q.nqfi;
        r.bound = 1.0;
        r.entangled = above(q.nqfi, 1.0, cfg.tolerance);
        r.depth = std::min(q.certified_depth, n);
        r.branch = ctx.eig->complete ? "lehmann" : "direct";
        r.log_base = LogBase::None;
        r.note = "f_Q(xx+yy+zz)=" + format_double(f_sum);
        slot.reports.push_back(std::move(r));
      }
    }
  }
}

std::shared_ptr<const Eigendecomposition> spectrum_for(const RunConfig& cfg, bool need_complete) {
  const SpinModel& m = *cfg.model;
  if (m.n_sites <= cfg.capacity.max_dense_sites) {
    return std::make_shared<const Eigendecomposition>(diagonalize(m, cfg.capacity));
  }
  require(!need_complete, ErrorKind::Capacity,
          "N = " + std::to_string(m.n_sites) + " exceeds the dense limit " +
              std::to_string(cfg.capacity.max_dense_sites) + " for finite temperature or spectra");
  return std::make_shared<const Eigendecomposition>(ground_manifold(m, cfg.capacity));
}

// ---------------------------------------------------------------- output

struct Writer {
  fs::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    require(out.good(), ErrorKind::Config, "cannot write '" + p.string() + "'");
    out << content;
    require(out.good(), ErrorKind::Config, "write failed for '" + p.string() + "'");
    files.push_back(p.string());
  }
};

std::vector<std::string> witness_order(const std::vector<WitnessReport>& reports) {
  std::vector<std::string> order;
  for (const auto& r : reports) {
    if (std::find(order.begin(), order.end(), r.witness) == order.end()) order.push_back(r.witness);
  }
  return order;
}

std::string series_key(const WitnessReport& r, bool x_is_t) {
  std::string key = r.branch;
  if (r.pair) key += " (" + std::to_string(r.pair->first) + "," + std::to_string(r.pair->second) + ")";
  if (x_is_t && r.k) key += " k=" + format_double(*r.k);
  if (!x_is_t && r.temperature) key += " T=" + format_double(*r.temperature);
  return key;
}

void write_plots(Writer& w, const std::vector<WitnessReport>& reports) {
  for (const std::string& name : witness_order(reports)) {
    std::vector<const WitnessReport*> rows;
    for (const auto& r : reports) {
      if (r.witness == name) rows.push_back(&r);
    }
    std::set<double> ts;
    for (const auto* r : rows) {
      if (r->temperature) ts.insert(*r->temperature);
    }
    const bool x_is_t = ts.size() > 1 || std::none_of(rows.begin(), rows.end(), [](auto* r) { return r->k.has_value(); });
    std::vector<PlotSeries> series;
    std::vector<PlotSeries> depth;
    std::set<double> bounds;
    bool bound_varies = false;
    for (const auto* r : rows) {
      const std::optional<double> x = x_is_t ? r->temperature : r->k;
      if (!x || !std::isfinite(*x)) continue;
      const std::string key = series_key(*r, x_is_t);
      auto it = std::find_if(series.begin(), series.end(), [&](const PlotSeries& s) { return s.name == key; });
      if (it == series.end()) {
        series.push_back({key, {}, false});
        it = series.end() - 1;
      }
      it->points.emplace_back(*x, r->value);
      if (r->bound) bounds.insert(*r->bound);
      if (r->depth) {
        auto dt = std::find_if(depth.begin(), depth.end(), [&](const PlotSeries& s) { return s.name == key; });
        if (dt == depth.end()) {
          depth.push_back({key, {}, true});
          dt = depth.end() - 1;
        }
        dt->points.emplace_back(*x, static_cast<double>(*r->depth));
      }
    }
    if (series.empty()) continue;
    if (bounds.size() > 1) bound_varies = true;
    const std::vector<double> rules = bound_varies ? std::vector<double>{} : std::vector<double>(bounds.begin(), bounds.end());
    const std::string x_label = x_is_t ? "T / J" : "k";
    w.write(sanitize(name) + ".svg", render_svg(name, x_label, name, series, rules));
    if (!depth.empty()) {
      w.write(sanitize(name) + "_depth.svg", render_svg(name + " certified depth", x_label, "depth", depth, {}));
    }
  }
}

void write_reports(Writer& w, const RunConfig& cfg, const std::vector<WitnessReport>& reports) {
  if (cfg.formats.csv) {
    for (const std::string& name : witness_order(reports)) {
      std::string text = WitnessReport::csv_header() + "\n";
      for (const auto& r : reports) {
        if (r.witness == name) text += r.to_csv_row() + "\n";
      }
      w.write(sanitize(name) + ".csv", text);
    }
  }
  if (cfg.formats.json) {
    std::string text;
    for (const auto& r : reports) text += r.to_json_line() + "\n";
    w.write("summary.jsonl", text);
  }
  if (cfg.formats.svg) write_plots(w, reports);
}

void write_tail(Writer& w, const Context& ctx, const std::vector<RunError>& errors,
                const std::vector<std::pair<std::string, std::string>>& inputs) {
  if (!errors.empty()) {
    std::string text;
    for (const auto& e : errors) text += e.to_json_line() + "\n";
    w.write("errors.jsonl", text);
  }
  nlohmann::ordered_json p;
  p["command"] = std::string(to_string(ctx.command));
  p["config_digest"] = ctx.config_digest;
  p["config"] = ctx.cfg.canonical();
  if (ctx.cfg.model) p["model"] = ctx.cfg.model->describe();
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"digest", digest}});
  p["inputs"] = in;
  p["warnings"] = ctx.warnings;
  p["errors"] = errors.size();
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : w.files) files.push_back(fs::path(f).filename().string());
  p["files"] = files;
  w.write("provenance.json", p.dump(2) + "\n");
}

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(in.good(), ErrorKind::Data, "cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return hex_digest(ss.str());
}

fs::path resolve(const RunConfig& cfg, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : fs::path(cfg.base_directory) / p;
}

// ---------------------------------------------------------------- commands

std::vector<WitnessReport> finalize(const Context& ctx, std::vector<Slot>& slots, std::vector<RunError>& errors) {
  std::vector<WitnessReport> out;
  for (Slot& s : slots) {
    for (auto& r : s.reports) {
      r.inputs_digest = row_digest(ctx, r);
      out.push_back(std::move(r));
    }
    for (auto& e : s.errors) errors.push_back(std::move(e));
  }
  return out;
}

void prepare_thermal(Context& ctx, bool need_complete) {
  ctx.eig = spectrum_for(ctx.cfg, need_complete);
  for (double t : ctx.cfg.temperatures) ctx.ensembles.emplace_back(ctx.eig, t);
  ctx.ks = ctx.cfg.wavevectors.empty() ? wavevector_grid(ctx.cfg.model->n_sites) : ctx.cfg.wavevectors;
}

RunResult run_thermal(Context& ctx, Writer& w) {
  const RunConfig& cfg = ctx.cfg;
  const bool all_zero = std::all_of(cfg.temperatures.begin(), cfg.temperatures.end(), [](double t) { return t == 0.0; });
  const bool family = ctx.command == Command::Qfi || wants(cfg, "qfi");
  const bool with_nqfi = (ctx.command == Command::Qfi &&
                          spectral_components(cfg, false).size() == 3) ||
                         wants(cfg, "nqfi");
  const bool spectral = ctx.command != Command::Witness && (family || with_nqfi);
  const bool need_complete = !all_zero || (spectral && std::any_of(cfg.filters.begin(), cfg.filters.end(), [](const Filter& f) {
                                             return f.type != Filter::Type::QfiTanh;
                                           }));
  prepare_thermal(ctx, need_complete);

  std::vector<Slot> slots(ctx.ensembles.size());
  if (ctx.command != Command::Qfi) {
    parallel_for(ctx.ensembles.size(), cfg.threads, [&](std::size_t i) { pairwise_witnesses(ctx, ctx.ensembles[i], slots[i]); });
  }
  if (spectral) spectral_witnesses(ctx, slots, family, with_nqfi);

  RunResult result;
  result.reports = finalize(ctx, slots, result.errors);
  write_reports(w, cfg, result.reports);
  write_tail(w, ctx, result.errors, {});
  return result;
}

RunResult run_simulate(Context& ctx, Writer& w) {
  const RunConfig& cfg = ctx.cfg;
  const bool all_zero = std::all_of(cfg.temperatures.begin(), cfg.temperatures.end(), [](double t) { return t == 0.0; });
  prepare_thermal(ctx, !all_zero);
  const Eigendecomposition& eig = *ctx.eig;
  const int n = cfg.model->n_sites;
  RunResult result;

  {
    std::ostringstream os;
    os << "index,energy";
    for (double t : cfg.temperatures) os << ",p(T=" << format_double(t) << ")";
    os << "\n";
    for (Eigen::Index l = 0; l < eig.energies.size(); ++l) {
      os << l << ',' << format_double(eig.energies[l]);
      for (const auto& ens : ctx.ensembles) os << ',' << format_double(ens.probabilities()[static_cast<std::size_t>(l)]);
      os << "\n";
    }
    w.write("levels.csv", os.str());
  }
  std::vector<PlotSeries> energy_series{{"energy per site", {}, false}};
  {
    std::ostringstream os;
    os << "T,energy_per_site,log_z,inputs_digest\n";
    for (const auto& ens : ctx.ensembles) {
      double e = 0.0;
      for (std::size_t l = 0; l < ens.level_count(); ++l) e += ens.probabilities()[l] * eig.energies[static_cast<Eigen::Index>(l)];
      e /= n;
      const double t = ens.temperature();
      os << format_double(t) << ',' << format_double(e) << ',' << format_double(ens.log_partition_function()) << ','
         << hex_digest(ctx.config_digest + "|thermo|" + format_double(t)) << "\n";
      if (std::isfinite(t)) energy_series[0].points.emplace_back(t, e);
    }
    w.write("thermo.csv", os.str());
  }
  if (cfg.formats.svg) w.write("thermo.svg", render_svg("energy per site", "T / J", "E / N", energy_series, {}));

  if (eig.complete) {
    const double wmax = cfg.omega_max > 0.0 ? cfg.omega_max : eig.spectral_width * (1.0 + 1e-6) + 1e-9;
    const std::vector<double> edges = uniform_edges(-wmax, wmax, cfg.omega_bins);
    for (SpinComponent comp : cfg.components) {
      const std::string tag = std::string(1, component_letter(comp)) + component_letter(comp);
      std::vector<TransitionMatrix> tms(ctx.ks.size());
      std::vector<std::optional<RunError>> failed(ctx.ks.size());
      for (std::size_t i = 0; i < ctx.ks.size(); ++i) {
        try {
          const SpinOperator op = make_operator(SiteOperatorSpec::at_wavevector(comp, ctx.ks[i]), n, cfg.model->boundary);
          tms[i] = transition_elements(eig, op, ctx.ks[i]);
        } catch (const Error& e) {
          failed[i] = RunError{"chi_" + tag, std::nullopt, ctx.ks[i], e.kind(), e.what()};
        }
      }
      if (std::any_of(failed.begin(), failed.end(), [](const auto& f) { return f.has_value(); })) {
        for (auto& f : failed) {
          if (f) result.errors.push_back(*f);
        }
        continue;
      }
      for (std::size_t it = 0; it < ctx.ensembles.size(); ++it) {
        try {
          std::vector<SpectralFunction> chis;
          for (const auto& tm : tms) chis.push_back(lehmann_chi(ctx.ensembles[it], tm));
          SpectrumGrid g = bin_poles(chis, edges);
          g.notes.push_back("model " + cfg.model->describe());
          g.notes.push_back("component " + tag + " digest " + ctx.config_digest);
          std::ostringstream os;
          write_spectrum(os, g);
          w.write("chi_" + tag + "_T" + std::to_string(it) + ".csv", os.str());
        } catch (const Error& e) {
          result.errors.push_back({"chi_" + tag, ctx.ensembles[it].temperature(), std::nullopt, e.kind(), e.what()});
        }
      }
    }
  } else {
    ctx.warnings.push_back("partial spectrum: binned spectra skipped");
  }
  write_tail(w, ctx, result.errors, {});
  return result;
}

RunResult run_ingest(Context& ctx, Writer& w) {
  const RunConfig& cfg = ctx.cfg;
  const SpectrumInput& in = *cfg.spectrum;
  const fs::path path = resolve(cfg, in.path);
  SpectrumGrid grid = load_spectrum(path.string());
  IntegrationOptions opts;
  opts.cutoff = in.cutoff;
  if (in.temperature_override) {
    if (grid.temperature && *grid.temperature != *in.temperature_override) {
      ctx.warnings.push_back("temperature override " + format_double(*in.temperature_override) +
                             " replaces file value " + format_double(*grid.temperature));
    } else if (!grid.temperature) {
      ctx.warnings.push_back("temperature " + format_double(*in.temperature_override) + " taken from override");
    }
    opts.temperature = in.temperature_override;
  }
  for (const auto& note : grid.notes) {
    if (note.find("defaulted") != std::string::npos || note.find("negative") != std::string::npos) ctx.warnings.push_back(note);
  }
  if (in.background) grid = subtract_background(grid, *in.background, in.window_lo, in.window_hi);
  const double width = 2.0 * grid.spin;

  std::vector<Slot> slots(grid.k.size());
  parallel_for(grid.k.size(), cfg.threads, [&](std::size_t j) {
    Slot& slot = slots[j];
    for (const Filter& filter : cfg.filters) {
      guarded(slot, filter.name(), opts.temperature ? opts.temperature : grid.temperature, grid.k[j], [&] {
        const NumericIntegral ni = integrate_qfi_numeric(grid, j, filter, opts);
        WitnessReport r;
        r.witness = filter.name();
        r.value = ni.value;
        r.uncertainty = ni.uncertainty;
        r.temperature = ni.temperature;
        r.k = grid.k[j];
        r.branch = "numeric";
        r.log_base = LogBase::None;
        std::ostringstream note;
        note << "bracket=[" << format_double(ni.lower) << "," << format_double(ni.upper) << "]";
        if (ni.tail_weight > 0.0) note << " tail=" << format_double(ni.tail_weight);
        if (filter.type == Filter::Type::QfiTanh) {
          const DepthResult d = entanglement_depth(ni.value, in.n_sites, width, DepthMode::LargeNDivisor, cfg.tolerance);
          r.bound = width * width;
          r.entangled = above(ni.value, width * width, cfg.tolerance);
          r.depth = d.certified_depth;
          const DepthResult lo = entanglement_depth(ni.value - ni.uncertainty, in.n_sites, width, DepthMode::LargeNDivisor, cfg.tolerance);
          note << " depth_at_lower=" << lo.certified_depth;
        } else {
          r.entangled = Certification::Inapplicable;
        }
        r.note = note.str();
        slot.reports.push_back(r);
        if (filter.type == Filter::Type::QfiTanh && in.unpolarized) {
          const NqfiResult q = nqfi(ni.value, grid.spin);
          WitnessReport nq = r;
          nq.witness = "nqfi";
          nq.value = q.nqfi;
          nq.uncertainty = ni.uncertainty / (12.0 * grid.spin * grid.spin);
          nq.bound = 1.0;
          nq.entangled = above(q.nqfi, 1.0, cfg.tolerance);
          nq.depth = in.n_sites > 0 ? std::min(q.certified_depth, in.n_sites) : q.certified_depth;
          nq.note = "f_Q=" + format_double(ni.value);
          slot.reports.push_back(std::move(nq));
        }
      });
    }
  });
  RunResult result;
  result.reports = finalize(ctx, slots, result.errors);
  write_reports(w, cfg, result.reports);
  write_tail(w, ctx, result.errors, {{path.string(), file_digest(path)}});
  return result;
}

RunResult run_report(Context& ctx, Writer& w) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path path = cfg.report_input.empty() ? fs::path(cfg.output_directory) / "summary.jsonl"
                                                 : resolve(cfg, cfg.report_input);
  RunResult result;
  result.reports = read_reports(path.string());
  const std::string input_digest = file_digest(path);

  std::ostringstream os;
  os << "witness,rows,certified,not_certified,inapplicable,min_value,max_value,max_depth,inputs_digest\n";
  for (const std::string& name : witness_order(result.reports)) {
    int rows = 0, cert = 0, notc = 0, inap = 0, max_depth = 0;
    double lo = kInf, hi = -kInf;
    for (const auto& r : result.reports) {
      if (r.witness != name) continue;
      ++rows;
      cert += r.entangled == Certification::Certified;
      notc += r.entangled == Certification::NotCertified;
      inap += r.entangled == Certification::Inapplicable;
      lo = std::min(lo, r.value);
      hi = std::max(hi, r.value);
      if (r.depth) max_depth = std::max(max_depth, *r.depth);
    }
    os << name << ',' << rows << ',' << cert << ',' << notc << ',' << inap << ',' << format_double(lo) << ','
       << format_double(hi) << ',' << max_depth << ',' << hex_digest(input_digest + "|" + name) << "\n";
  }
  // never overwrite the input when it lives in the output directory
  RunConfig out_cfg = cfg;
  if (fs::exists(w.dir / "summary.jsonl") && fs::equivalent(w.dir / "summary.jsonl", path)) out_cfg.formats.json = false;
  write_reports(w, out_cfg, result.reports);
  w.write("report.csv", os.str());
  write_tail(w, ctx, result.errors, {{path.string(), input_digest}});
  return result;
}

}  // namespace

std::string RunError::to_json_line() const {
  nlohmann::ordered_json j;
  j["witness"] = witness;
  if (temperature) {
    j["T"] = std::isinf(*temperature) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(*temperature);
  } else {
    j["T"] = nullptr;
  }
  j["k"] = k ? nlohmann::ordered_json(*k) : nlohmann::ordered_json(nullptr);
  j["exit_code"] = qwit::exit_code(kind);
  j["message"] = message;
  return j.dump();
}

int RunResult::exit_code() const {
  int code = 0;
  for (const auto& e : errors) code = std::max(code, qwit::exit_code(e.kind));
  return code;
}

RunResult run(const RunConfig& config) {
  require(config.command.has_value(), ErrorKind::Config, "no command given");
  return run(config, *config.command);
}

RunResult run(const RunConfig& config, Command command) {
  config.validate(command);
  Context ctx{config, command, {}, nullptr, {}, {}, {}};
  std::string inputs;
  if (command == Command::IngestQfi) inputs = file_digest(resolve(config, config.spectrum->path));
  ctx.config_digest = hex_digest(std::string(to_string(command)) + "|" + config.canonical() + "|" + inputs);

  const fs::path dir(config.output_directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::Config, "cannot create output directory '" + dir.string() + "': " + ec.message());
  Writer w{dir, {}};

  RunResult result;
  switch (command) {
    case Command::Simulate: result = run_simulate(ctx, w); break;
    case Command::Witness:
    case Command::Qfi:
    case Command::Sweep: result = run_thermal(ctx, w); break;
    case Command::IngestQfi: result = run_ingest(ctx, w); break;
    case Command::Report: result = run_report(ctx, w); break;
  }
  result.files = w.files;
  result.warnings = ctx.warnings;
  return result;
}

WitnessReport report_from_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Data, std::string("malformed report line: ") + e.what());
  }
  try {
    WitnessReport r;
    r.witness = j.at("witness").get<std::string>();
    r.value = j.at("value").get<double>();
    if (!j.at("bound").is_null()) r.bound = j.at("bound").get<double>();
    const auto ent = j.at("entangled").get<std::string>();
    bool found = false;
    for (auto c : {Certification::Certified, Certification::NotCertified, Certification::Inapplicable}) {
      if (ent == to_string(c)) {
        r.entangled = c;
        found = true;
      }
    }
    require(found, ErrorKind::Data, "unknown certification '" + ent + "'");
    r.branch = j.at("branch").get<std::string>();
    const auto lb = j.at("log_base").get<std::string>();
    r.log_base = lb == "bits" ? LogBase::Bits : lb == "nats" ? LogBase::Nats : LogBase::None;
    if (j.contains("T")) r.temperature = j["T"].is_string() ? parse_double(j["T"].get<std::string>()) : j["T"].get<double>();
    if (j.contains("pair")) r.pair = std::make_pair(j["pair"].at(0).get<int>(), j["pair"].at(1).get<int>());
    if (j.contains("k")) r.k = j["k"].get<double>();
    if (j.contains("depth")) r.depth = j["depth"].get<int>();
    if (j.contains("uncertainty")) r.uncertainty = j["uncertainty"].get<double>();
    if (j.contains("note")) r.note = j["note"].get<std::string>();
    r.inputs_digest = j.at("inputs_digest").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Data, std::string("report line lacks a field: ") + e.what());
  }
}

std::vector<WitnessReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Data, "cannot open '" + path + "'");
  std::vector<WitnessReport> out;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(report_from_json_line(line));
    } catch (const Error& e) {
      fail(e.kind(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qwit
