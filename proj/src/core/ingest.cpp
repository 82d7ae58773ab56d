#include "qwit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qwit {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void add_note(SpectrumGrid& g, const std::string& note) {
  if (std::find(g.notes.begin(), g.notes.end(), note) == g.notes.end()) g.notes.push_back(note);
}

double grid_beta(const SpectrumGrid& g, const char* what) {
  if (!g.temperature) fail(ErrorKind::Data, std::string(what) + " needs the grid temperature");
  const double t = *g.temperature;
  require(t >= 0.0, ErrorKind::Data, "negative temperature in spectrum grid");
  if (t == 0.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(t)) return 0.0;
  return 1.0 / t;
}

/// Filter argument beta * omega for omega >= 0, with 0 * inf = 0.
double filter_arg(double beta, double omega) {
  if (omega <= 0.0) return 0.0;
  return std::isinf(beta) ? beta : beta * omega;
}

/// Trapezoid over (0, 0) and the positive centers below the cutoff, integrand h * v.
double trapezoid(const std::vector<double>& c, const std::vector<double>& v, const std::vector<double>& lo_edges,
                 const Filter& h, double beta, double cutoff) {
  double sum = 0.0;
  double prev_x = 0.0;
  double prev_f = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] <= 0.0 || lo_edges[i] >= cutoff) continue;
    const double f = h(filter_arg(beta, c[i])) * v[i];
    sum += 0.5 * (f + prev_f) * (c[i] - prev_x);
    prev_x = c[i];
    prev_f = f;
  }
  return sum;
}

}  // namespace

std::string_view to_string(GridKind k) {
  switch (k) {
    case GridKind::ChiDoublePrime: return "ChiDoublePrime";
    case GridKind::StructureFactor: return "StructureFactor";
    case GridKind::SymmetrizedStructureFactor: return "SymmetrizedStructureFactor";
  }
  return "ChiDoublePrime";
}

GridKind parse_grid_kind(const std::string& text) {
  const std::string t = trim(text);
  if (t == "ChiDoublePrime") return GridKind::ChiDoublePrime;
  if (t == "StructureFactor") return GridKind::StructureFactor;
  if (t == "SymmetrizedStructureFactor") return GridKind::SymmetrizedStructureFactor;
  fail(ErrorKind::Data, "unknown spectrum kind '" + t + "'");
}

std::vector<double> edges_from_centers(const std::vector<double>& c) {
  require(c.size() >= 2, ErrorKind::Data, "a spectrum grid needs at least two omega bins");
  std::vector<double> e(c.size() + 1);
  for (std::size_t i = 1; i < c.size(); ++i) e[i] = 0.5 * (c[i - 1] + c[i]);
  e.front() = c.front() - (e[1] - c.front());
  e.back() = c.back() + (c.back() - e[c.size() - 1]);
  return e;
}

std::vector<double> uniform_edges(double lo, double hi, int n) {
  require(n >= 1 && hi > lo, ErrorKind::InvalidArgument, "uniform edges need hi > lo and n >= 1");
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n;
  return e;
}

void SpectrumGrid::validate() {
  require(!k.empty(), ErrorKind::Data, "spectrum grid has no k columns");
  require(omega.size() >= 2, ErrorKind::Data, "spectrum grid needs at least two omega bins");
  require(values.rows() == static_cast<Eigen::Index>(omega.size()) &&
              values.cols() == static_cast<Eigen::Index>(k.size()),
          ErrorKind::Data, "spectrum values do not match the grid shape");
  for (std::size_t i = 1; i < omega.size(); ++i) {
    require(omega[i] > omega[i - 1], ErrorKind::Data, "omega bins are not strictly increasing");
  }
  if (edges.size() != omega.size() + 1) edges = edges_from_centers(omega);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    require(edges[i] < edges[i + 1] && edges[i] <= omega[i] && omega[i] <= edges[i + 1], ErrorKind::Data,
            "bin edges do not enclose the omega centers");
  }
  require(values.allFinite(), ErrorKind::Data, "spectrum contains non-finite values");
  require(spin > 0.0, ErrorKind::Data, "spin must be positive");
  if (temperature) require(*temperature >= 0.0, ErrorKind::Data, "negative temperature");
  if (kind == GridKind::ChiDoublePrime) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      for (std::size_t i = 0; i < omega.size(); ++i) {
        if (omega[i] > 0.0 && values(static_cast<Eigen::Index>(i), j) < 0.0) {
          add_note(*this, "warning: negative chi'' at omega > 0 in k column " + std::to_string(j));
          break;
        }
      }
    }
  }
}

SpectrumGrid bin_poles(const std::vector<SpectralFunction>& by_k, const std::vector<double>& edges) {
  require(!by_k.empty(), ErrorKind::InvalidArgument, "no spectra to bin");
  require(edges.size() >= 3, ErrorKind::InvalidArgument, "need at least two bins");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    require(edges[i] > edges[i - 1], ErrorKind::InvalidArgument, "bin edges must increase");
  }
  SpectrumGrid g;
  g.kind = by_k.front().kind == SpectralKind::ChiDoublePrime ? GridKind::ChiDoublePrime : GridKind::StructureFactor;
  g.temperature = by_k.front().temperature;
  g.edges = edges;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) g.omega.push_back(0.5 * (edges[i] + edges[i + 1]));
  g.values = RealMatrix::Zero(static_cast<Eigen::Index>(g.omega.size()), static_cast<Eigen::Index>(by_k.size()));
  double outside = 0.0;
  for (std::size_t j = 0; j < by_k.size(); ++j) {
    const SpectralFunction& sf = by_k[j];
    require(sf.kind == by_k.front().kind, ErrorKind::InvalidArgument, "mixed spectrum kinds");
    require(sf.temperature == by_k.front().temperature || (std::isinf(sf.temperature) && std::isinf(*g.temperature)),
            ErrorKind::InvalidArgument, "mixed temperatures");
    g.k.push_back(sf.k.value_or(static_cast<double>(j)));
    for (const Pole& p : sf.poles) {
      const auto it = std::upper_bound(edges.begin(), edges.end(), p.omega);
      if (it == edges.begin() || it == edges.end()) {
        outside += std::abs(p.weight);
        continue;
      }
      const auto b = static_cast<Eigen::Index>(it - edges.begin() - 1);
      g.values(b, static_cast<Eigen::Index>(j)) += p.weight;
    }
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    g.values.row(static_cast<Eigen::Index>(i)) /= edges[i + 1] - edges[i];
  }
  g.notes.push_back("binned from exact poles, " + std::to_string(g.omega.size()) + " bins");
  if (outside > 0.0) g.notes.push_back("pole weight outside the grid: " + format_double(outside));
  g.validate();
  return g;
}

SpectrumGrid parse_spectrum(std::istream& in, const std::string& source) {
  SpectrumGrid g;
  bool have_weights = false;
  std::string line;
  int line_no = 0;
  auto where = [&]() { return source + ":" + std::to_string(line_no) + ": "; };
  enum class Stage { Header, KRow, Bins } stage = Stage::Header;
  std::size_t k_count = 0;
  std::size_t w_count = 0;
  std::vector<std::vector<double>> rows;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '#') {
        const auto cells = split_csv(t.substr(1));
        const std::string tag = cells.empty() ? std::string() : trim(cells[0]);
        if (tag == "weights") {
          require(cells.size() == 4, ErrorKind::Data, where() + "#weights needs three values");
          for (int a = 0; a < 3; ++a) g.component_weights[static_cast<std::size_t>(a)] = parse_double(cells[a + 1]);
          have_weights = true;
        } else if (tag == "note") {
          const auto comma = t.find(',');
          g.notes.push_back(comma == std::string::npos ? std::string() : trim(t.substr(comma + 1)));
        } else {
          g.notes.push_back(trim(t.substr(1)));
        }
        continue;
      }
      const auto cells = split_csv(t);
      switch (stage) {
        case Stage::Header: {
          require(cells.size() == 5, ErrorKind::Data, where() + "header needs kind,T,S,k-count,omega-count");
          g.kind = parse_grid_kind(cells[0]);
          if (!trim(cells[1]).empty()) g.temperature = parse_double(cells[1]);
          g.spin = parse_double(cells[2]);
          const double kc = parse_double(cells[3]);
          const double wc = parse_double(cells[4]);
          require(kc >= 1 && wc >= 2 && kc == std::floor(kc) && wc == std::floor(wc), ErrorKind::Data,
                  where() + "counts must be integers with k-count >= 1 and omega-count >= 2");
          k_count = static_cast<std::size_t>(kc);
          w_count = static_cast<std::size_t>(wc);
          stage = Stage::KRow;
          break;
        }
        case Stage::KRow:
          require(cells.size() == k_count + 1 && trim(cells[0]) == "k", ErrorKind::Data,
                  where() + "expected 'k' followed by " + std::to_string(k_count) + " wavevectors");
          for (std::size_t j = 0; j < k_count; ++j) g.k.push_back(parse_double(cells[j + 1]));
          stage = Stage::Bins;
          break;
        case Stage::Bins: {
          require(cells.size() == k_count + 1, ErrorKind::Data,
                  where() + "expected " + std::to_string(k_count + 1) + " fields, got " + std::to_string(cells.size()));
          require(rows.size() < w_count, ErrorKind::Data, where() + "more omega rows than declared");
          std::vector<double> row;
          for (const auto& c : cells) row.push_back(parse_double(c));
          rows.push_back(std::move(row));
          break;
        }
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Data && std::string(e.what()).rfind(source, 0) != 0) {
      fail(ErrorKind::Data, where() + e.what());
    }
    throw;
  }
  require(stage == Stage::Bins, ErrorKind::Data, source + ": missing header or k row");
  require(rows.size() == w_count, ErrorKind::Data,
          source + ": declared " + std::to_string(w_count) + " omega rows, found " + std::to_string(rows.size()));
  g.values.resize(static_cast<Eigen::Index>(w_count), static_cast<Eigen::Index>(k_count));
  for (std::size_t i = 0; i < w_count; ++i) {
    g.omega.push_back(rows[i][0]);
    for (std::size_t j = 0; j < k_count; ++j) g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
  }
  if (!have_weights) add_note(g, "warning: component weights not given, defaulted to 1,1,1");
  if (!g.temperature && g.kind != GridKind::ChiDoublePrime) {
    fail(ErrorKind::Data, source + ": kind " + std::string(to_string(g.kind)) + " needs a temperature");
  }
  if (!g.temperature) add_note(g, "warning: no temperature; filters need one at integration time");
  g.validate();
  return g;
}

SpectrumGrid load_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Data, "cannot open spectrum file " + path);
  return parse_spectrum(in, path);
}

void write_spectrum(std::ostream& out, const SpectrumGrid& g) {
  out << "#weights," << format_double(g.component_weights[0]) << ',' << format_double(g.component_weights[1]) << ','
      << format_double(g.component_weights[2]) << '\n';
  for (const auto& note : g.notes) {
    std::string clean = note;
    std::replace(clean.begin(), clean.end(), '\n', ' ');
    out << "#note," << clean << '\n';
  }
  out << to_string(g.kind) << ',' << (g.temperature ? format_double(*g.temperature) : std::string()) << ','
      << format_double(g.spin) << ',' << g.k.size() << ',' << g.omega.size() << '\n';
  out << 'k';
  for (double k : g.k) out << ',' << format_double(k);
  out << '\n';
  for (std::size_t i = 0; i < g.omega.size(); ++i) {
    out << format_double(g.omega[i]);
    for (Eigen::Index j = 0; j < g.values.cols(); ++j) out << ',' << format_double(g.values(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

void save_spectrum(const std::string& path, const SpectrumGrid& grid) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write spectrum file " + path);
  write_spectrum(out, grid);
}

SpectrumGrid normalize_conventions(const SpectrumGrid& grid) {
  SpectrumGrid out = grid;
  if (grid.kind == GridKind::ChiDoublePrime) return out;
  const double beta = grid_beta(grid, "conversion to chi''");
  for (std::size_t i = 0; i < grid.omega.size(); ++i) {
    const double w = grid.omega[i];
    double factor = 0.0;
    if (grid.kind == GridKind::StructureFactor) {
      if (std::isinf(beta)) {
        if (w < 0.0 && grid.values.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() > 0.0) {
          fail(ErrorKind::Domain, "S(omega) at T = 0 has weight at omega < 0");
        }
        factor = w > 0.0 ? kPi : 0.0;
      } else {
        factor = w == 0.0 ? 0.0 : kPi * -std::expm1(-beta * w);
      }
    } else {
      if (std::isinf(beta)) {
        factor = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
      } else {
        factor = std::tanh(0.5 * beta * w);
      }
    }
    out.values.row(static_cast<Eigen::Index>(i)) *= factor;
  }
  out.conversion = grid.kind == GridKind::StructureFactor ? "chi'' = pi (1 - exp(-beta omega)) S"
                                                          : "chi'' = tanh(beta omega / 2) S~";
  out.kind = GridKind::ChiDoublePrime;
  out.notes.push_back("converted: " + out.conversion);
  return out;
}

SpectrumGrid convert_from_chi(const SpectrumGrid& chi, GridKind target) {
  require(chi.kind == GridKind::ChiDoublePrime, ErrorKind::InvalidArgument, "expected a chi'' grid");
  SpectrumGrid out = chi;
  if (target == GridKind::ChiDoublePrime) return out;
  const double beta = grid_beta(chi, "conversion from chi''");
  require(beta > 0.0, ErrorKind::InvalidArgument, "chi'' cannot be converted at infinite temperature");
  for (std::size_t i = 0; i < chi.omega.size(); ++i) {
    const double w = chi.omega[i];
    double factor = 0.0;
    if (w != 0.0) {
      if (target == GridKind::StructureFactor) {
        factor = std::isinf(beta) ? (w > 0.0 ? 1.0 / kPi : 0.0) : 1.0 / (kPi * -std::expm1(-beta * w));
      } else {
        factor = std::isinf(beta) ? (w > 0.0 ? 1.0 : -1.0) : 1.0 / std::tanh(0.5 * beta * w);
      }
    }
    out.values.row(static_cast<Eigen::Index>(i)) *= factor;
  }
  out.kind = target;
  out.conversion = "none";
  return out;
}

SpectrumGrid subtract_background(const SpectrumGrid& grid, BackgroundModel model, double lo, double hi) {
  require(hi > lo, ErrorKind::Config, "background window needs hi > lo");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.omega.size(); ++i) {
    if (grid.omega[i] >= lo && grid.omega[i] <= hi) idx.push_back(i);
  }
  const std::size_t need = model == BackgroundModel::Constant ? 1 : 2;
  require(idx.size() >= need, ErrorKind::Data, "background window holds too few bins");
  SpectrumGrid out = grid;
  for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
    double a = 0.0;
    double b = 0.0;
    double mean_w = 0.0;
    double mean_v = 0.0;
    for (std::size_t i : idx) {
      mean_w += grid.omega[i];
      mean_v += grid.values(static_cast<Eigen::Index>(i), j);
    }
    mean_w /= static_cast<double>(idx.size());
    mean_v /= static_cast<double>(idx.size());
    if (model == BackgroundModel::Linear) {
      double sww = 0.0;
      double swv = 0.0;
      for (std::size_t i : idx) {
        const double dw = grid.omega[i] - mean_w;
        sww += dw * dw;
        swv += dw * (grid.values(static_cast<Eigen::Index>(i), j) - mean_v);
      }
      b = swv / sww;
    }
    a = mean_v - b * mean_w;
    for (std::size_t i = 0; i < grid.omega.size(); ++i) {
      out.values(static_cast<Eigen::Index>(i), j) -= a + b * grid.omega[i];
    }
  }
  out.notes.push_back(std::string("background subtracted: ") +
                      (model == BackgroundModel::Constant ? "constant" : "linear") + " fit on [" + format_double(lo) +
                      ", " + format_double(hi) + "]");
  return out;
}

SpectrumGrid combine_components(const SpectrumGrid& x, const SpectrumGrid& y, const SpectrumGrid& z,
                                const std::array<double, 3>& weights) {
  const SpectrumGrid* parts[3] = {&x, &y, &z};
  for (const SpectrumGrid* p : parts) {
    require(p->kind == GridKind::ChiDoublePrime, ErrorKind::Data, "combine chi'' grids only");
    require(p->k == x.k && p->omega == x.omega, ErrorKind::Data, "component grids differ in k or omega");
    require(p->temperature == x.temperature, ErrorKind::Data, "component grids differ in temperature");
  }
  SpectrumGrid out = x;
  out.values = weights[0] * x.values + weights[1] * y.values + weights[2] * z.values;
  out.component_weights = weights;
  out.notes.push_back("unpolarized sum with weights " + format_double(weights[0]) + "," + format_double(weights[1]) +
                      "," + format_double(weights[2]));
  return out;
}

NumericIntegral integrate_qfi_numeric(const SpectrumGrid& input, std::size_t k_index, const Filter& h,
                                      const IntegrationOptions& options) {
  SpectrumGrid grid = input;
  if (options.temperature) grid.temperature = options.temperature;
  if (!grid.temperature) fail(ErrorKind::Data, "filter needs a temperature but the grid has none");
  if (grid.kind != GridKind::ChiDoublePrime) grid = normalize_conventions(grid);
  require(k_index < grid.k.size(), ErrorKind::InvalidArgument, "k index out of range");
  if (grid.edges.size() != grid.omega.size() + 1) grid.edges = edges_from_centers(grid.omega);
  const double beta = grid_beta(grid, "filtered integral");

  NumericIntegral out;
  out.temperature = *grid.temperature;
  const auto col = static_cast<Eigen::Index>(k_index);
  const std::size_t n = grid.omega.size();
  std::vector<double> v(n);
  std::vector<double> lo_edges(grid.edges.begin(), grid.edges.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = grid.values(static_cast<Eigen::Index>(i), col);
    const double lo = grid.edges[i];
    const double hi = grid.edges[i + 1];
    if (hi <= 0.0) continue;
    const double width = hi - lo;
    if (lo >= options.cutoff) {
      out.tail_weight += v[i] * width;
      continue;
    }
    const double a = v[i] * width * h(filter_arg(beta, std::max(lo, 0.0)));
    const double b = v[i] * width * h(filter_arg(beta, hi));
    if (lo < 0.0) {
      // straddles omega = 0: only the positive part counts, its size is unknown
      out.lower += std::min({0.0, a, b});
      out.upper += std::max({0.0, a, b});
    } else {
      out.lower += std::min(a, b);
      out.upper += std::max(a, b);
    }
    if (grid.omega[i] > 0.0) {
      const double c = v[i] * width * h(filter_arg(beta, grid.omega[i]));
      out.histogram += c;
      out.edge_contribution = c / kPi;
    }
  }
  out.value = trapezoid(grid.omega, v, lo_edges, h, beta, options.cutoff) / kPi;
  out.histogram /= kPi;
  out.lower /= kPi;
  out.upper /= kPi;
  out.tail_weight /= kPi;

  if (n >= 4) {
    std::vector<double> cc;
    std::vector<double> cv;
    std::vector<double> clo;
    for (std::size_t i = 0; i + 1 < n; i += 2) {
      const double w0 = grid.edges[i + 1] - grid.edges[i];
      const double w1 = grid.edges[i + 2] - grid.edges[i + 1];
      cc.push_back(0.5 * (grid.edges[i] + grid.edges[i + 2]));
      cv.push_back((v[i] * w0 + v[i + 1] * w1) / (w0 + w1));
      clo.push_back(grid.edges[i]);
    }
    const double coarse = trapezoid(cc, cv, clo, h, beta, options.cutoff) / kPi;
    out.richardson = std::abs(out.value - coarse);
  }
  const double margin = 1e-12 * std::max({std::abs(out.lower), std::abs(out.upper), 1e-300});
  out.uncertainty = std::max({out.value - out.lower, out.upper - out.value, out.richardson}) + margin;
  return out;
}

}  // namespace qwit
