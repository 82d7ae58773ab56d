#include "qwit/witness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace qwit {

namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

double log_in(double x, LogBase base) { return base == LogBase::Nats ? std::log(x) : std::log2(x); }

Eigen::Vector3d unit_or(const Eigen::Vector3d& v, const Eigen::Vector3d& fallback) {
  const double n = v.norm();
  return n > 1e-300 ? Eigen::Vector3d(v / n) : fallback;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string_view to_string(Certification c) {
  switch (c) {
    case Certification::Certified: return "certified";
    case Certification::NotCertified: return "not-certified";
    case Certification::Inapplicable: return "inapplicable";
  }
  return "inapplicable";
}

std::string_view to_string(LogBase b) {
  switch (b) {
    case LogBase::Bits: return "bits";
    case LogBase::Nats: return "nats";
    case LogBase::None: return "none";
  }
  return "none";
}

std::string_view to_string(TwoTangleConvention c) {
  switch (c) {
    case TwoTangleConvention::OrderedPairs: return "ordered-pairs";
    case TwoTangleConvention::PerSite: return "per-site";
    case TwoTangleConvention::DistanceOnce: return "distance-once";
  }
  return "per-site";
}

std::string WitnessReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["witness"] = witness;
  j["value"] = value;
  j["bound"] = bound ? nlohmann::ordered_json(*bound) : nlohmann::ordered_json(nullptr);
  j["entangled"] = std::string(to_string(entangled));
  j["branch"] = branch;
  j["log_base"] = std::string(to_string(log_base));
  if (temperature) {
    j["T"] = std::isinf(*temperature) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(*temperature);
  }
  if (pair) j["pair"] = {pair->first, pair->second};
  if (k) j["k"] = *k;
  if (depth) j["depth"] = *depth;
  if (uncertainty) j["uncertainty"] = *uncertainty;
  if (!note.empty()) j["note"] = note;
  j["inputs_digest"] = inputs_digest;
  return j.dump();
}

std::string WitnessReport::csv_header() { return "witness,value,bound,certified,branch,T,pair,k,depth,uncertainty,log_base,inputs_digest"; }

std::string WitnessReport::to_csv_row() const {
  std::ostringstream os;
  os << witness << ',' << format_double(value) << ',' << opt_number(bound) << ',' << to_string(entangled) << ','
     << branch << ',';
  if (temperature) os << (std::isinf(*temperature) ? std::string("inf") : format_double(*temperature));
  os << ',';
  if (pair) os << pair->first << '-' << pair->second;
  os << ',' << opt_number(k) << ',';
  if (depth) os << *depth;
  os << ',' << opt_number(uncertainty) << ',' << to_string(log_base) << ',' << inputs_digest;
  return os.str();
}

double clamp_checked(double value, double lo, double hi, const char* what) {
  if (!std::isfinite(value)) fail(ErrorKind::Numeric, std::string(what) + " is not finite");
  if (value < lo - kClampTolerance || value > hi + kClampTolerance) {
    fail(ErrorKind::Domain, std::string(what) + " = " + format_double(value) + " outside [" + format_double(lo) +
                                ", " + format_double(hi) + "]");
  }
  return std::clamp(value, lo, hi);
}

double shannon_entropy(const Eigen::Ref<const RealVector>& probabilities, LogBase base) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = clamp_checked(probabilities[i], 0.0, 1.0, "probability");
    if (p > 0.0) s -= p * log_in(p, base);
  }
  return s;
}

double von_neumann_entropy(const ComplexMatrix& rho, LogBase base) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
  return shannon_entropy(es.eigenvalues(), base);
}

double binary_entropy(double x) {
  x = clamp_checked(x, 0.0, 1.0, "binary entropy argument");
  return 0.0 - xlog2x(x) - xlog2x(1.0 - x);
}

double one_tangle(double sx, double sy, double sz) {
  const double r2 = sx * sx + sy * sy + sz * sz;
  return clamp_checked(1.0 - 4.0 * r2, 0.0, 1.0, "one-tangle");
}

double one_tangle(const Eigen::Matrix2cd& rho) {
  const double sx = rho(0, 1).real();
  const double sy = -rho(0, 1).imag();
  const double sz = 0.5 * (rho(0, 0).real() - rho(1, 1).real());
  return one_tangle(sx, sy, sz);
}

double concurrence_wootters(const TwoSiteState& state) {
  const Eigen::Matrix4cd& rho = state.rho();
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(3, 0) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  const Eigen::Matrix4cd tilde = yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(rho * tilde, false);
  std::array<double, 4> r{};
  for (int i = 0; i < 4; ++i) {
    const double ev = es.eigenvalues()[i].real();
    if (ev < -1e-10) fail(ErrorKind::Domain, "rho rho~ has a negative eigenvalue " + format_double(ev));
    r[i] = std::sqrt(std::max(0.0, ev));
  }
  std::sort(r.begin(), r.end(), std::greater<>());
  return std::max(0.0, r[0] - r[1] - r[2] - r[3]);
}

double concurrence_parity(double a, double b, double x, double y, Complex c, Complex z) {
  const double ab = clamp_checked(a, 0.0, 1.0, "a") * clamp_checked(b, 0.0, 1.0, "b");
  const double xy = clamp_checked(x, 0.0, 1.0, "x") * clamp_checked(y, 0.0, 1.0, "y");
  return 2.0 * std::max({0.0, std::abs(c) - std::sqrt(xy), std::abs(z) - std::sqrt(ab)});
}

double concurrence_parity(const TwoSiteState& rho) {
  if (rho.parity_violation() > kClampTolerance) {
    fail(ErrorKind::Domain, "state lacks parity block form (violation " + format_double(rho.parity_violation()) + ")");
  }
  return concurrence_parity(rho.a(), rho.b(), rho.x(), rho.y(), rho.c(), rho.z());
}

double concurrence_translation_invariant(double gxx, double gyy, double gzz, double mz) {
  const double q = 0.25 + gzz;
  const double rad = clamp_checked(q * q - mz * mz, 0.0, 1.0, "(1/4 + g^zz)^2 - M_z^2");
  return 2.0 * std::max({0.0, std::abs(gxx - gyy) - 0.25 + gzz, std::abs(gxx + gyy) - std::sqrt(rad)});
}

double concurrence_heisenberg(double gzz, double mz) {
  const double q = 0.25 + gzz;
  const double rad = clamp_checked(q * q - mz * mz, 0.0, 1.0, "(1/4 + g^zz)^2 - M_z^2");
  return 2.0 * std::max(0.0, 2.0 * std::abs(gzz) - std::sqrt(rad));
}

double concurrence_disorder_free(double gzz) { return 2.0 * std::max(0.0, 2.0 * std::abs(gzz) - 0.25 - gzz); }

double concurrence_dimer(double bond_correlation) { return 2.0 * std::max(0.0, -bond_correlation - 0.25); }

double entanglement_of_formation(double concurrence) {
  const double c = clamp_checked(concurrence, 0.0, 1.0, "concurrence");
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

TwoTangle two_tangle(const RealMatrix& conc, TwoTangleConvention convention, int site) {
  require(conc.rows() == conc.cols(), ErrorKind::InvalidArgument, "concurrence matrix must be square");
  const int n = static_cast<int>(conc.rows());
  TwoTangle out;
  out.convention = convention;
  auto add = [&](int i, int j) {
    const double c = clamp_checked(conc(i, j), 0.0, 1.0, "concurrence");
    out.value += c * c;
    out.truncation_radius = std::max(out.truncation_radius, std::abs(i - j));
  };
  switch (convention) {
    case TwoTangleConvention::OrderedPairs:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) add(i, j);
      break;
    case TwoTangleConvention::PerSite:
      require(site >= 0 && site < n, ErrorKind::InvalidArgument, "site out of range");
      for (int j = 0; j < n; ++j)
        if (j != site) add(site, j);
      break;
    case TwoTangleConvention::DistanceOnce:
      require(n >= 2, ErrorKind::InvalidArgument, "need at least two sites");
      for (int r = 1; r <= n / 2; ++r) add(0, r);
      break;
  }
  return out;
}

TwoTangle two_tangle_by_distance(const std::vector<double>& conc) {
  TwoTangle out;
  out.convention = TwoTangleConvention::DistanceOnce;
  for (std::size_t r = 0; r < conc.size(); ++r) {
    const double c = clamp_checked(conc[r], 0.0, 1.0, "concurrence");
    out.value += c * c;
  }
  out.truncation_radius = static_cast<int>(conc.size());
  return out;
}

WitnessReport susceptibility_witness(const SusceptibilityInput& in, double tolerance) {
  require(in.n_sites > 0, ErrorKind::InvalidArgument, "susceptibility witness needs n_sites > 0");
  require(in.temperature >= 0.0, ErrorKind::InvalidArgument, "temperature must be non-negative");
  WitnessReport r;
  r.witness = "susceptibility";
  r.branch = "isotropic";
  r.temperature = in.temperature;
  const double sum = in.var_x + in.var_y + in.var_z;
  if (sum < -kClampTolerance) fail(ErrorKind::Domain, "negative magnetization variance");
  const double limit = in.n_sites * in.spin;
  const double g2 = in.g_factor * in.g_factor;
  if (in.temperature > 0.0 && std::isfinite(in.temperature)) {
    r.value = g2 * sum / (3.0 * in.temperature);
    r.bound = g2 * limit / (3.0 * in.temperature);
  } else {
    // bare variance sum when chi itself is singular or zero
    r.value = sum;
    r.bound = limit;
    r.note = "variance sum reported";
  }
  if (!in.isotropic_g) {
    r.entangled = Certification::Inapplicable;
    r.note = "anisotropic g tensor";
    return r;
  }
  r.entangled = sum < limit - tolerance ? Certification::Certified : Certification::NotCertified;
  return r;
}

std::pair<double, Eigen::Vector3d> measurement_parameters(const Eigen::Vector3d& n_in) {
  const Eigen::Vector3d n = unit_or(n_in, Eigen::Vector3d::UnitZ());
  const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  const double t = std::cos(theta / 2.0);
  const Eigen::Vector3d axis = unit_or(Eigen::Vector3d(-n.y(), n.x(), 0.0), Eigen::Vector3d::UnitY());
  return {t, -std::sin(theta / 2.0) * axis};
}

Eigen::Vector3d measurement_direction(double t, const Eigen::Vector3d& y) {
  return {2.0 * (-t * y[1] + y[0] * y[2]), 2.0 * (t * y[0] + y[1] * y[2]),
          t * t + y[2] * y[2] - y[0] * y[0] - y[1] * y[1]};
}

namespace {

/// sum_k p_k S(rho_A|k) in bits for the projectors (1 +- n.sigma)/2 on site B.
double conditional_entropy(const Eigen::Matrix4cd& rho, const Eigen::Vector3d& n) {
  double total = 0.0;
  for (double sign : {1.0, -1.0}) {
    Eigen::Matrix2cd p;
    p(0, 0) = 0.5 * (1.0 + sign * n.z());
    p(1, 1) = 0.5 * (1.0 - sign * n.z());
    p(0, 1) = 0.5 * sign * Complex(n.x(), -n.y());
    p(1, 0) = 0.5 * sign * Complex(n.x(), n.y());
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 2; ++a)
      for (int ap = 0; ap < 2; ++ap)
        for (int b = 0; b < 2; ++b)
          for (int bp = 0; bp < 2; ++bp) m(a, ap) += p(b, bp) * rho(2 * a + bp, 2 * ap + b);
    const double tr = m(0, 0).real() + m(1, 1).real();
    if (tr <= 0.0) continue;
    const double diff = m(0, 0).real() - m(1, 1).real();
    const double r = std::sqrt(diff * diff + 4.0 * std::norm(m(0, 1)));
    const double l1 = std::max(0.0, 0.5 * (tr + r));
    const double l2 = std::max(0.0, 0.5 * (tr - r));
    total -= xlog2x(l1) + xlog2x(l2) - tr * std::log2(tr);
  }
  return total;
}

double entropy_bits_2x2(const Eigen::Matrix2cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m, Eigen::EigenvaluesOnly);
  return shannon_entropy(es.eigenvalues(), LogBase::Bits);
}

struct Refined {
  Eigen::Vector3d n;
  double f;
  bool converged;
};

Refined nelder_mead(const Eigen::Matrix4cd& rho, const Eigen::Vector3d& n0, double step, const DiscordSettings& s) {
  const Eigen::Vector3d seed = std::abs(n0.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (seed - seed.dot(n0) * n0).normalized();
  const Eigen::Vector3d e2 = n0.cross(e1);
  auto point = [&](const Eigen::Vector2d& uv) -> Eigen::Vector3d {
    return (n0 + uv[0] * e1 + uv[1] * e2).normalized();
  };
  auto f = [&](const Eigen::Vector2d& uv) { return conditional_entropy(rho, point(uv)); };

  std::array<Eigen::Vector2d, 3> x{Eigen::Vector2d(0, 0), Eigen::Vector2d(step, 0), Eigen::Vector2d(0, step)};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  bool converged = false;
  for (int it = 0; it < s.max_iterations; ++it) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    x = {x[idx[0]], x[idx[1]], x[idx[2]]};
    fx = {fx[idx[0]], fx[idx[1]], fx[idx[2]]};
    if (fx[2] - fx[0] <= s.tolerance) {
      converged = true;
      break;
    }
    const Eigen::Vector2d centroid = 0.5 * (x[0] + x[1]);
    const Eigen::Vector2d xr = centroid + (centroid - x[2]);
    const double fr = f(xr);
    if (fr < fx[0]) {
      const Eigen::Vector2d xe = centroid + 2.0 * (centroid - x[2]);
      const double fe = f(xe);
      if (fe < fr) {
        x[2] = xe;
        fx[2] = fe;
      } else {
        x[2] = xr;
        fx[2] = fr;
      }
    } else if (fr < fx[1]) {
      x[2] = xr;
      fx[2] = fr;
    } else {
      const bool outside = fr < fx[2];
      const Eigen::Vector2d xc = outside ? Eigen::Vector2d(centroid + 0.5 * (xr - centroid))
                                         : Eigen::Vector2d(centroid + 0.5 * (x[2] - centroid));
      const double fc = f(xc);
      if (fc < std::min(fr, fx[2])) {
        x[2] = xc;
        fx[2] = fc;
      } else {
        for (int i = 1; i < 3; ++i) {
          x[i] = x[0] + 0.5 * (x[i] - x[0]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {point(x[best]), fx[best], converged};
}

}  // namespace

double classical_information(const TwoSiteState& rho, const Eigen::Vector3d& n) {
  return entropy_bits_2x2(rho.reduce_first()) - conditional_entropy(rho.rho(), unit_or(n, Eigen::Vector3d::UnitZ()));
}

DiscordResult discord_general(const TwoSiteState& state, const DiscordSettings& s) {
  require(s.grid_points >= 8, ErrorKind::InvalidArgument, "discord grid needs at least 8 points");
  state.validate();
  const Eigen::Matrix4cd& rho = state.rho();
  const double sa = entropy_bits_2x2(state.reduce_first());
  const double sb = entropy_bits_2x2(state.reduce_second());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
  const double sab = shannon_entropy(es.eigenvalues(), LogBase::Bits);

  // Fibonacci lattice on the sphere
  const int m = s.grid_points;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<std::pair<double, Eigen::Vector3d>> grid;
  grid.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double zc = 1.0 - (2.0 * i + 1.0) / m;
    const double rc = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const Eigen::Vector3d n(rc * std::cos(golden * i), rc * std::sin(golden * i), zc);
    grid.emplace_back(conditional_entropy(rho, n), n);
  }
  const int starts = std::clamp(s.refine_starts, 1, m);
  std::partial_sort(grid.begin(), grid.begin() + starts, grid.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
  const double step = std::sqrt(4.0 * kPi / m);

  Refined best{grid[0].second, grid[0].first, true};
  bool all_converged = true;
  for (int i = 0; i < starts; ++i) {
    const Refined r = nelder_mead(rho, grid[static_cast<std::size_t>(i)].second, step, s);
    all_converged = all_converged && r.converged;
    if (r.f < best.f) best = r;
  }

  DiscordResult out;
  out.mutual_information = sa + sb - sab;
  out.classical_correlation = sa - best.f;
  out.optimizer_gap = grid[0].first - best.f;
  out.converged = all_converged;
  out.direction = best.n;
  std::tie(out.t, out.y) = measurement_parameters(best.n);
  const double q = out.mutual_information - out.classical_correlation;
  out.discord = clamp_checked(q, 0.0, std::max(0.0, sb), "discord");
  return out;
}

double discord_xyz(double gxx, double gyy, double gzz) {
  const double c1 = 4.0 * gxx;
  const double c2 = 4.0 * gyy;
  const double c3 = 4.0 * gzz;
  const std::array<double, 4> lam{(1.0 - c1 - c2 - c3) / 4.0, (1.0 - c1 + c2 + c3) / 4.0,
                                  (1.0 + c1 - c2 + c3) / 4.0, (1.0 + c1 + c2 - c3) / 4.0};
  double q = 0.0;
  for (double l : lam) {
    l = clamp_checked(l, 0.0, 1.0, "two-site eigenvalue");
    q += xlog2x(4.0 * l) / 4.0;
  }
  const double cmax = clamp_checked(std::max({std::abs(c1), std::abs(c2), std::abs(c3)}), 0.0, 1.0, "c_max");
  q -= 0.5 * (xlog2x(1.0 - cmax) + xlog2x(1.0 + cmax));
  return clamp_checked(q, 0.0, 1.0, "discord");
}

double discord_xyz(const TwoSiteState& rho) {
  const auto c = rho.discord_coefficients();
  if (std::abs(c[3]) > kClampTolerance || std::abs(c[4]) > kClampTolerance) {
    fail(ErrorKind::Domain, "closed-form discord needs c4 = c5 = 0");
  }
  if (rho.parity_violation() > kClampTolerance || std::abs(rho.c().imag()) > kClampTolerance ||
      std::abs(rho.z().imag()) > kClampTolerance) {
    fail(ErrorKind::Domain, "closed-form discord needs a real parity-block state");
  }
  return discord_xyz(c[0] / 4.0, c[1] / 4.0, c[2] / 4.0);
}

double discord_heisenberg(double g) {
  g = clamp_checked(g, -1.0, 1.0 / 3.0, "G");
  const double ag = std::abs(g);
  const double q = 0.25 * (xlog2x(1.0 - 3.0 * g) + 3.0 * xlog2x(1.0 + g)) - 0.5 * (xlog2x(1.0 + ag) + xlog2x(1.0 - ag));
  return clamp_checked(q, 0.0, 1.0, "discord");
}

}  // namespace qwit
