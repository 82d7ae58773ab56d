#include "qwit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace qwit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// matrix elements whose squared modulus is below this are rounding noise
constexpr double kElementFloor = 1e-30;

double beta_of(double temperature) {
  require(temperature >= 0.0 && !std::isnan(temperature), ErrorKind::InvalidArgument,
          "temperature must be non-negative");
  if (temperature == 0.0) return kInf;
  if (std::isinf(temperature)) return 0.0;
  return 1.0 / temperature;
}

void require_complete(const ThermalEnsemble& ens, const char* what) {
  require(ens.eigen().complete, ErrorKind::InvalidArgument,
          std::string(what) + " needs the complete spectrum; diagonalize fully");
}

void require_matching(const ThermalEnsemble& ens, const TransitionMatrix& m) {
  require(static_cast<std::size_t>(m.elements.rows()) == ens.level_count() &&
              static_cast<std::size_t>(m.elements.cols()) == ens.level_count(),
          ErrorKind::InvalidArgument, "transition matrix does not match the ensemble");
}

SpectralFunction empty_like(const ThermalEnsemble& ens, const TransitionMatrix& m, SpectralKind kind) {
  SpectralFunction sf;
  sf.kind = kind;
  sf.operator_label = m.label;
  sf.temperature = ens.temperature();
  sf.k = m.k;
  sf.n_sites = ens.n_sites();
  sf.elastic_threshold = ens.degeneracy_threshold();
  return sf;
}

std::size_t nonzero_elements(const TransitionMatrix& m) {
  return static_cast<std::size_t>((m.elements.array().abs2() >= kElementFloor).count());
}

void sort_poles(std::vector<Pole>& poles) {
  std::sort(poles.begin(), poles.end(), [](const Pole& a, const Pole& b) {
    return a.omega < b.omega || (a.omega == b.omega && a.weight < b.weight);
  });
}

/// F_Q from the populated block M (rows and columns = populated levels) plus
/// the squared norms of O v and O^dagger v for the complement.
double qfi_from_block(const RealVector& p, const ComplexMatrix& m, const RealVector* o_norms,
                      const RealVector* od_norms) {
  const Eigen::Index n = p.size();
  double f = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index lp = 0; lp < n; ++lp) {
      const double s = p[l] + p[lp];
      if (s <= 0.0) continue;
      const double d = p[l] - p[lp];
      f += 2.0 * d * d / s * std::norm(m(l, lp));
    }
  }
  if (o_norms != nullptr && od_norms != nullptr) {
    for (Eigen::Index l = 0; l < n; ++l) {
      // partners outside the populated block have p' = 0
      const double out_o = std::max(0.0, (*o_norms)[l] - m.col(l).squaredNorm());
      const double out_od = std::max(0.0, (*od_norms)[l] - m.row(l).squaredNorm());
      f += 2.0 * p[l] * (out_o + out_od);
    }
  }
  return f;
}

}  // namespace

std::string_view to_string(SpectralKind k) {
  return k == SpectralKind::ChiDoublePrime ? "ChiDoublePrime" : "StructureFactor";
}

std::string_view to_string(DepthMode m) { return m == DepthMode::ExactN ? "exact-N" : "large-N-divisor"; }

double SpectralFunction::total_weight() const {
  double s = 0.0;
  for (const Pole& p : poles) s += p.weight;
  return s;
}

SpectralFunction SpectralFunction::merged(double tol) const {
  SpectralFunction out = *this;
  out.poles.clear();
  std::vector<Pole> sorted = poles;
  sort_poles(sorted);
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double start = sorted[i].omega;
    double wsum = 0.0;
    double osum = 0.0;
    std::size_t count = 0;
    while (i < sorted.size() && sorted[i].omega - start <= tol) {
      wsum += sorted[i].weight;
      osum += sorted[i].omega;
      ++count;
      ++i;
    }
    out.poles.push_back({osum / static_cast<double>(count), wsum});
  }
  return out;
}

Filter Filter::skew(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument, "skew alpha must lie in (0, 1)");
  return {Type::Skew, alpha};
}

double Filter::operator()(double x) const {
  require(x >= 0.0, ErrorKind::InvalidArgument, "filter argument must be non-negative");
  switch (type) {
    case Type::QfiTanh:
      return std::isinf(x) ? 4.0 : 4.0 * std::tanh(0.5 * x);
    case Type::QvLangevin: {
      if (std::isinf(x)) return 1.0;
      const double y = 0.5 * x;
      if (y < 1e-4) return y / 3.0 - y * y * y / 45.0;
      return 1.0 / std::tanh(y) - 1.0 / y;
    }
    case Type::Skew:
      if (std::isinf(x)) return 1.0;
      if (x == 0.0) return 0.0;
      return std::expm1((alpha - 1.0) * x) * std::expm1(-alpha * x) / -std::expm1(-x);
  }
  return 0.0;
}

std::string Filter::name() const {
  switch (type) {
    case Type::QfiTanh: return "qfi";
    case Type::QvLangevin: return "qv";
    case Type::Skew: return "skew:" + format_double(alpha);
  }
  return "qfi";
}

Filter parse_filter(const std::string& text) {
  if (text == "qfi") return Filter::qfi();
  if (text == "qv") return Filter::quantum_variance();
  if (text.rfind("skew:", 0) == 0) return Filter::skew(parse_double(text.substr(5)));
  if (text == "skew") return Filter::skew(0.5);
  fail(ErrorKind::Config, "unknown filter '" + text + "' (expected qfi, qv or skew:<alpha>)");
}

TransitionMatrix transition_elements(const Eigendecomposition& eig, const SpinOperator& op, std::optional<double> k) {
  require(op.n_sites() == eig.n_sites, ErrorKind::InvalidArgument, "operator and spectrum sizes differ");
  const ComplexMatrix w = op.apply_columns(eig.vectors);
  TransitionMatrix out;
  const RealMatrix re = eig.vectors.transpose() * w.real();
  const RealMatrix im = eig.vectors.transpose() * w.imag();
  out.elements.resize(re.rows(), re.cols());
  out.elements.real() = re;
  out.elements.imag() = im;
  out.label = op.label();
  out.k = k;
  out.hermitian = op.is_hermitian();
  return out;
}

SpectralFunction lehmann_chi(const ThermalEnsemble& ens, const TransitionMatrix& m) {
  require_complete(ens, "chi''");
  require_matching(ens, m);
  SpectralFunction sf = empty_like(ens, m, SpectralKind::ChiDoublePrime);
  const auto& p = ens.probabilities();
  const RealVector& e = ens.eigen().energies;
  const Eigen::Index n = e.size();
  sf.poles.reserve(nonzero_elements(m));
  for (Eigen::Index lp = 0; lp < n; ++lp) {
    const double plp = p[static_cast<std::size_t>(lp)];
    for (Eigen::Index l = 0; l < n; ++l) {
      const double pl = p[static_cast<std::size_t>(l)];
      if (pl + plp <= 0.0) continue;
      const double omega = e[lp] - e[l];
      if (std::abs(omega) <= sf.elastic_threshold) continue;
      const double a2 = std::norm(m.elements(l, lp));
      if (a2 < kElementFloor) continue;
      sf.poles.push_back({omega, kPi * (pl - plp) * a2});
    }
  }
  sort_poles(sf.poles);
  return sf;
}

SpectralFunction lehmann_chi(const ThermalEnsemble& ens, const SpinOperator& op, std::optional<double> k) {
  return lehmann_chi(ens, transition_elements(ens.eigen(), op, k));
}

SpectralFunction dynamical_structure_factor(const ThermalEnsemble& ens, const TransitionMatrix& m) {
  require_complete(ens, "S(omega)");
  require_matching(ens, m);
  SpectralFunction sf = empty_like(ens, m, SpectralKind::StructureFactor);
  const auto& p = ens.probabilities();
  const RealVector& e = ens.eigen().energies;
  const Eigen::Index n = e.size();
  sf.poles.reserve(nonzero_elements(m));
  for (Eigen::Index lp = 0; lp < n; ++lp) {
    for (Eigen::Index l = 0; l < n; ++l) {
      const double pl = p[static_cast<std::size_t>(l)];
      if (pl <= 0.0) continue;
      const double a2 = std::norm(m.elements(l, lp));
      if (a2 < kElementFloor) continue;
      sf.poles.push_back({e[lp] - e[l], pl * a2});
    }
  }
  sort_poles(sf.poles);
  return sf;
}

SpectralFunction dynamical_structure_factor(const ThermalEnsemble& ens, const SpinOperator& op,
                                            std::optional<double> k) {
  return dynamical_structure_factor(ens, transition_elements(ens.eigen(), op, k));
}

SpectralFunction two_site_chi(const ThermalEnsemble& ens, const TransitionMatrix& mi, const TransitionMatrix& mj) {
  require_complete(ens, "chi''");
  require_matching(ens, mi);
  require_matching(ens, mj);
  SpectralFunction sf = empty_like(ens, mi, SpectralKind::ChiDoublePrime);
  sf.operator_label = mi.label + "," + mj.label;
  const auto& p = ens.probabilities();
  const RealVector& e = ens.eigen().energies;
  const Eigen::Index n = e.size();
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index lp = 0; lp < n; ++lp) {
      const double pl = p[static_cast<std::size_t>(l)];
      const double plp = p[static_cast<std::size_t>(lp)];
      if (pl + plp <= 0.0) continue;
      const double omega = e[lp] - e[l];
      if (std::abs(omega) <= sf.elastic_threshold) continue;
      const double prod = (mi.elements(l, lp) * mj.elements(lp, l)).real();
      if (std::abs(prod) < kElementFloor) continue;
      sf.poles.push_back({omega, kPi * (pl - plp) * prod});
    }
  }
  sort_poles(sf.poles);
  return sf;
}

SpectralFunction fdt_convert(const SpectralFunction& in, double temperature, FdtDirection direction) {
  const double beta = beta_of(temperature);
  SpectralFunction out = in;
  out.poles.clear();
  out.temperature = temperature;
  if (direction == FdtDirection::StructureToChi) {
    require(in.kind == SpectralKind::StructureFactor, ErrorKind::InvalidArgument, "expected an S(omega) pole list");
    out.kind = SpectralKind::ChiDoublePrime;
    out.dropped_elastic_weight = 0.0;
    for (const Pole& p : in.poles) {
      if (std::abs(p.omega) <= in.elastic_threshold) {
        out.dropped_elastic_weight += p.weight;
        continue;
      }
      double factor;
      if (std::isinf(beta)) {
        if (p.omega < 0.0 && p.weight != 0.0) {
          fail(ErrorKind::Domain, "S(omega) at T = 0 carries weight at omega < 0");
        }
        factor = p.omega > 0.0 ? 1.0 : 0.0;
      } else {
        factor = -std::expm1(-beta * p.omega);
      }
      out.poles.push_back({p.omega, kPi * factor * p.weight});
    }
  } else {
    require(in.kind == SpectralKind::ChiDoublePrime, ErrorKind::InvalidArgument, "expected a chi'' pole list");
    require(beta > 0.0, ErrorKind::InvalidArgument, "chi'' -> S is undefined at infinite temperature");
    out.kind = SpectralKind::StructureFactor;
    for (const Pole& p : in.poles) {
      if (std::abs(p.omega) <= in.elastic_threshold) continue;  // elastic line carries no chi'' weight
      if (std::isinf(beta)) {
        // beta -> inf limit: S(omega < 0) = 0
        out.poles.push_back({p.omega, p.omega > 0.0 ? p.weight / kPi : 0.0});
      } else {
        out.poles.push_back({p.omega, p.weight / (kPi * -std::expm1(-beta * p.omega))});
      }
    }
  }
  return out;
}

double qfi_direct(const ThermalEnsemble& ens, const SpinOperator& op) {
  require(op.n_sites() == ens.n_sites(), ErrorKind::InvalidArgument, "operator and ensemble sizes differ");
  const RealMatrix& u = ens.eigen().vectors;
  std::vector<Eigen::Index> pop;
  for (std::size_t l = 0; l < ens.level_count(); ++l) {
    if (ens.probabilities()[l] > 0.0) pop.push_back(static_cast<Eigen::Index>(l));
  }
  RealMatrix up(u.rows(), static_cast<Eigen::Index>(pop.size()));
  RealVector p(static_cast<Eigen::Index>(pop.size()));
  for (std::size_t i = 0; i < pop.size(); ++i) {
    up.col(static_cast<Eigen::Index>(i)) = u.col(pop[i]);
    p[static_cast<Eigen::Index>(i)] = ens.probabilities()[static_cast<std::size_t>(pop[i])];
  }
  const ComplexMatrix w = op.apply_columns(up);
  if (ens.is_pure()) {
    const ComplexMatrix wd = op.adjoint().apply_columns(up);
    const Complex mean = (up.col(0).cast<Complex>().adjoint() * w.col(0))(0, 0);
    return std::max(0.0, 2.0 * (w.col(0).squaredNorm() + wd.col(0).squaredNorm()) - 4.0 * std::norm(mean));
  }
  ComplexMatrix m(up.cols(), up.cols());
  m.real() = up.transpose() * w.real();
  m.imag() = up.transpose() * w.imag();
  if (up.cols() == up.rows()) return qfi_from_block(p, m, nullptr, nullptr);
  const ComplexMatrix wd = op.adjoint().apply_columns(up);
  const RealVector on = w.colwise().squaredNorm().transpose();
  const RealVector odn = wd.colwise().squaredNorm().transpose();
  return qfi_from_block(p, m, &on, &odn);
}

double qfi_direct(const ThermalEnsemble& ens, const TransitionMatrix& m, double scale) {
  require_complete(ens, "qfi_direct from transition elements");
  require_matching(ens, m);
  const RealVector p = Eigen::Map<const RealVector>(ens.probabilities().data(),
                                                     static_cast<Eigen::Index>(ens.level_count()));
  return scale * scale * qfi_from_block(p, m.elements, nullptr, nullptr);
}

double qfi_direct(const MixedState& state, const ComplexMatrix& op) {
  const Eigen::Index dim = state.vectors.rows();
  require(op.rows() == dim && op.cols() == dim, ErrorKind::InvalidArgument, "operator and state sizes differ");
  std::vector<Eigen::Index> pop;
  for (Eigen::Index l = 0; l < state.probabilities.size(); ++l) {
    if (state.probabilities[l] > 0.0) pop.push_back(l);
  }
  require(!pop.empty(), ErrorKind::InvalidArgument, "state has no populated component");
  ComplexMatrix v(dim, static_cast<Eigen::Index>(pop.size()));
  RealVector p(static_cast<Eigen::Index>(pop.size()));
  for (std::size_t i = 0; i < pop.size(); ++i) {
    v.col(static_cast<Eigen::Index>(i)) = state.vectors.col(pop[i]);
    p[static_cast<Eigen::Index>(i)] = state.probabilities[pop[i]];
  }
  const ComplexMatrix w = op * v;
  const ComplexMatrix wd = op.adjoint() * v;
  if (pop.size() == 1 && std::abs(p[0] - 1.0) < 1e-14) {
    const Complex mean = (v.col(0).adjoint() * w.col(0))(0, 0);
    return std::max(0.0, 2.0 * (w.col(0).squaredNorm() + wd.col(0).squaredNorm()) - 4.0 * std::norm(mean));
  }
  const ComplexMatrix m = v.adjoint() * w;
  if (v.cols() == dim) return qfi_from_block(p, m, nullptr, nullptr);
  const RealVector on = w.colwise().squaredNorm().transpose();
  const RealVector odn = wd.colwise().squaredNorm().transpose();
  return qfi_from_block(p, m, &on, &odn);
}

double coherence_measure(const SpectralFunction& chi, double temperature, const Filter& filter) {
  require(chi.kind == SpectralKind::ChiDoublePrime, ErrorKind::InvalidArgument, "coherence measure needs chi''");
  const double beta = beta_of(temperature);
  double sum = 0.0;
  for (const Pole& p : chi.poles) {
    if (p.omega <= chi.elastic_threshold) continue;
    const double x = std::isinf(beta) ? kInf : beta * p.omega;
    sum += filter(x) * p.weight;
  }
  return sum / kPi;
}

double qfi_integral(const SpectralFunction& chi, double temperature) {
  return coherence_measure(chi, temperature, Filter::qfi());
}

double spatial_quantum_correlation(const SpectralFunction& cross_chi, double temperature, const Filter& filter) {
  return coherence_measure(cross_chi, temperature, filter);
}

DepthResult entanglement_depth(double value, int n_sites, double width, DepthMode mode, double tolerance) {
  require(width > 0.0, ErrorKind::InvalidArgument, "spectrum width must be positive");
  require(tolerance >= 0.0, ErrorKind::InvalidArgument, "tolerance must be non-negative");
  require(std::isfinite(value), ErrorKind::Numeric, "QFI value is not finite");
  DepthResult out;
  out.mode = mode;
  out.value = value;
  const double w2 = width * width;
  if (mode == DepthMode::ExactN) {
    require(n_sites >= 1, ErrorKind::InvalidArgument, "exact-N depth needs n_sites >= 1");
    for (int m = 1; m <= n_sites; ++m) {
      DepthBound b;
      b.m = m;
      b.s = n_sites / m;
      b.r = n_sites - b.s * m;
      b.bound = (static_cast<double>(b.s) * m * m + static_cast<double>(b.r) * b.r) * w2;
      b.exceeded = value > b.bound + tolerance;
      if (b.exceeded) out.largest_m = m;
      out.table.push_back(b);
    }
  } else {
    int limit = n_sites;
    if (limit <= 0) limit = std::max(1, static_cast<int>(std::ceil(value / w2)) + 1);
    for (int m = 1; m <= limit; ++m) {
      DepthBound b;
      b.m = m;
      b.bound = m * w2;
      b.exceeded = value > b.bound + tolerance;
      if (b.exceeded) out.largest_m = m;
      out.table.push_back(b);
    }
  }
  out.certified_depth = out.largest_m + 1;
  if (n_sites > 0) out.certified_depth = std::min(out.certified_depth, n_sites);
  return out;
}

NqfiResult nqfi(double f_q, double spin) {
  require(spin > 0.0, ErrorKind::InvalidArgument, "spin must be positive");
  NqfiResult out;
  out.nqfi = f_q / (12.0 * spin * spin);
  const int m = out.nqfi > 0.0 ? static_cast<int>(std::ceil(out.nqfi)) - 1 : 0;
  out.certified_depth = m + 1;
  return out;
}

ComplexMatrix van_hove(const std::vector<SpectralFunction>& s_by_k, const std::vector<int>& r,
                       const std::vector<double>& t) {
  require(!s_by_k.empty(), ErrorKind::InvalidArgument, "van Hove transform needs S(k, omega) spectra");
  const int n = static_cast<int>(s_by_k.size());
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const SpectralFunction& sf : s_by_k) {
    require(sf.kind == SpectralKind::StructureFactor, ErrorKind::InvalidArgument, "van Hove transform needs S(omega)");
    require(sf.k.has_value(), ErrorKind::InvalidArgument, "S(omega) lacks its wavevector");
    const double idx = *sf.k * n / (2.0 * kPi);
    const long rounded = std::lround(idx);
    require(std::abs(idx - static_cast<double>(rounded)) < 1e-9, ErrorKind::InvalidArgument,
            "wavevector is off the k grid");
    const auto slot = static_cast<std::size_t>(((rounded % n) + n) % n);
    require(!seen[slot], ErrorKind::InvalidArgument, "duplicate wavevector");
    seen[slot] = true;
  }
  ComplexMatrix g = ComplexMatrix::Zero(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(t.size()));
  for (const SpectralFunction& sf : s_by_k) {
    for (std::size_t ti = 0; ti < t.size(); ++ti) {
      Complex sum(0.0, 0.0);
      for (const Pole& p : sf.poles) sum += p.weight * std::polar(1.0, p.omega * t[ti]);
      for (std::size_t ri = 0; ri < r.size(); ++ri) {
        g(static_cast<Eigen::Index>(ri), static_cast<Eigen::Index>(ti)) += std::polar(1.0, *sf.k * r[ri]) * sum;
      }
    }
  }
  return g / static_cast<double>(n);
}

double tanh_identity_residual(const ThermalEnsemble& ens, const std::vector<std::pair<int, int>>& pairs) {
  require_complete(ens, "tanh identity");
  const double beta = ens.beta();
  require(std::isfinite(beta) && beta > 0.0, ErrorKind::InvalidArgument, "tanh identity needs 0 < T < inf");
  const RealVector& e = ens.eigen().energies;
  const auto& p = ens.probabilities();
  double worst = 0.0;
  for (const auto& [l, lp] : pairs) {
    const double pl = p.at(static_cast<std::size_t>(l));
    const double plp = p.at(static_cast<std::size_t>(lp));
    if (pl + plp <= 0.0) continue;
    const double lhs = std::tanh(0.5 * beta * (e[lp] - e[l]));
    worst = std::max(worst, std::abs(lhs - (pl - plp) / (pl + plp)));
  }
  return worst;
}

void write_poles_csv(std::ostream& out, const SpectralFunction& sf) {
  out << "omega,weight\n";
  for (const Pole& p : sf.poles) out << format_double(p.omega) << ',' << format_double(p.weight) << '\n';
}

}  // namespace qwit
