#include "qwit/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <lapacke.h>

namespace qwit {
namespace {

// Sectors up to this dimension are diagonalized densely; larger ones use Lanczos.
constexpr Eigen::Index kDenseSectorLimit = 800;
constexpr int kLanczosBasis = 160;
constexpr int kLanczosRestarts = 200;

std::uint32_t site_mask(int site, int n_sites) { return std::uint32_t{1} << (n_sites - 1 - site); }

void check_reconstruction(const RealMatrix& h, const RealVector& w, const RealMatrix& u, double& residual) {
  const double hmax = h.cwiseAbs().maxCoeff();
  residual = (h * u - u * w.asDiagonal()).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-9 * hmax)) {
    fail(ErrorKind::Numeric, "eigendecomposition residual " + format_double(residual) + " exceeds 1e-9 * |H|_max = " +
                                 format_double(1e-9 * hmax));
  }
}

void dense_eigh(const RealMatrix& h, RealVector& w, RealMatrix& u) {
  const auto n = static_cast<lapack_int>(h.rows());
  u = h;
  w.resize(h.rows());
  if (n == 0) return;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, u.data(), n, w.data());
  if (info != 0) fail(ErrorKind::Numeric, "dsyevd failed with info = " + std::to_string(info));
}

RealVector start_vector(Eigen::Index dim) {
  RealVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double x = static_cast<double>(i);
    v[i] = std::sin(1.0 + 0.7548776662 * x) + 0.5 * std::cos(0.5698402910 * x * x + 0.3);
  }
  return v;
}

void project_out(RealVector& v, const std::vector<RealVector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const RealVector& b : basis) v -= b.dot(v) * b;
  }
}

// Lowest eigenpair of h on the orthogonal complement of `locked`.
std::pair<double, RealVector> lanczos_lowest(const SparseRealMatrix& h, const std::vector<RealVector>& locked,
                                             double tol) {
  const Eigen::Index dim = h.rows();
  const Eigen::Index available = dim - static_cast<Eigen::Index>(locked.size());
  require(available > 0, ErrorKind::Numeric, "no room left in sector for another eigenvector");
  RealVector x = start_vector(dim);
  project_out(x, locked);
  x.normalize();
  double theta = 0.0;
  double last_residual = 0.0;
  for (int restart = 0; restart < kLanczosRestarts; ++restart) {
    const int m = static_cast<int>(std::min<Eigen::Index>(kLanczosBasis, available));
    std::vector<RealVector> v{x};
    std::vector<double> alpha, beta;
    bool invariant = false;
    for (int j = 0; j < m; ++j) {
      RealVector w = h * v[j];
      alpha.push_back(v[j].dot(w));
      project_out(w, locked);
      project_out(w, v);
      const double b = w.norm();
      if (j + 1 == m) break;
      if (b < 1e-13 * (1.0 + std::abs(alpha.back()))) {
        invariant = true;
        break;
      }
      beta.push_back(b);
      v.push_back(w / b);
    }
    const auto k = static_cast<Eigen::Index>(alpha.size());
    RealMatrix t = RealMatrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> tri(t);
    theta = tri.eigenvalues()[0];
    RealVector y = tri.eigenvectors().col(0);
    x.setZero();
    for (Eigen::Index i = 0; i < k; ++i) x += y[i] * v[i];
    project_out(x, locked);
    x.normalize();
    const RealVector r = h * x - theta * x;
    last_residual = r.norm();
    if (last_residual <= tol || invariant) return {x.dot(h * x), x};
  }
  fail(ErrorKind::Numeric, "Lanczos did not converge; residual " + format_double(last_residual));
}

// Eigenvectors of one sector with energy within `threshold` of the sector
// minimum, restricted to levels below `ceiling`.
struct SectorLevels {
  std::vector<double> energies;
  std::vector<RealVector> vectors;
};

SectorLevels sector_lowest(const SpinModel& model, int n_down, const Capacity& capacity, double width,
                           std::vector<std::uint32_t>& basis, double ceiling, bool only_first) {
  SectorLevels out;
  const double threshold = kDegeneracyTolerance * width;
  SparseRealMatrix sparse = build_sector_hamiltonian_sparse(model, n_down, basis, capacity);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  if (dim <= kDenseSectorLimit) {
    RealMatrix h(sparse);
    RealVector w;
    RealMatrix u;
    dense_eigh(h, w, u);
    double residual = 0.0;
    check_reconstruction(h, w, u, residual);
    for (Eigen::Index l = 0; l < dim; ++l) {
      if (l > 0 && (only_first || w[l] > std::min(ceiling, w[0] + threshold))) break;
      out.energies.push_back(w[l]);
      out.vectors.push_back(u.col(l));
    }
    return out;
  }
  const double tol = 1e-12 * std::max(width, 1e-300);
  while (static_cast<Eigen::Index>(out.vectors.size()) < dim) {
    auto [e, v] = lanczos_lowest(sparse, out.vectors, tol);
    if (!out.energies.empty() && e > std::min(ceiling, out.energies.front() + threshold)) break;
    out.energies.push_back(e);
    out.vectors.push_back(std::move(v));
    if (only_first) break;
  }
  return out;
}

}  // namespace

Eigendecomposition diagonalize(const RealMatrix& hamiltonian, int n_sites) {
  require(hamiltonian.rows() == hamiltonian.cols(), ErrorKind::InvalidArgument, "Hamiltonian must be square");
  require(hamiltonian.rows() == static_cast<Eigen::Index>(hilbert_dimension(n_sites)), ErrorKind::InvalidArgument,
          "Hamiltonian dimension does not match 2^N");
  Eigendecomposition out;
  out.n_sites = n_sites;
  dense_eigh(hamiltonian, out.energies, out.vectors);
  check_reconstruction(hamiltonian, out.energies, out.vectors, out.residual);
  out.spectral_width = out.energies.size() ? out.energies[out.energies.size() - 1] - out.energies[0] : 0.0;
  out.complete = true;
  return out;
}

Eigendecomposition diagonalize(const SpinModel& model, const Capacity& capacity) {
  return diagonalize(build_hamiltonian(model, capacity), model.n_sites);
}

Eigendecomposition ground_manifold(const SpinModel& model, const Capacity& capacity) {
  model.validate();
  if (!model.conserves_total_sz() || model.n_sites <= 4) {
    Eigendecomposition full = diagonalize(model, capacity);
    const double threshold = kDegeneracyTolerance * full.spectral_width;
    Eigen::Index g = 1;
    while (g < full.energies.size() && full.energies[g] - full.energies[0] <= threshold) ++g;
    Eigendecomposition out;
    out.n_sites = model.n_sites;
    out.energies = full.energies.head(g);
    out.vectors = full.vectors.leftCols(g);
    out.spectral_width = full.spectral_width;
    out.residual = full.residual;
    out.complete = g == full.energies.size();
    return out;
  }

  const int n = model.n_sites;
  const double width = 2.0 * hamiltonian_norm_bound(model);
  const double threshold = kDegeneracyTolerance * width;
  const int half = n / 2;

  // Spin-flip maps sector n_down onto n - n_down with the same spectrum.
  std::vector<double> sector_min(static_cast<std::size_t>(half) + 1);
  std::vector<std::uint32_t> basis;
  for (int d = 0; d <= half; ++d) {
    sector_min[d] = sector_lowest(model, d, capacity, width, basis, 0.0, true).energies.front();
  }
  const double e0 = *std::min_element(sector_min.begin(), sector_min.end());

  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n));
  const std::uint32_t all = static_cast<std::uint32_t>(dim - 1);
  std::vector<double> energies;
  std::vector<RealVector> vectors;
  for (int d = 0; d <= half; ++d) {
    if (sector_min[d] > e0 + threshold) continue;
    SectorLevels lv = sector_lowest(model, d, capacity, width, basis, e0 + threshold, false);
    for (std::size_t l = 0; l < lv.energies.size(); ++l) {
      RealVector full = RealVector::Zero(dim);
      for (std::size_t s = 0; s < basis.size(); ++s) full[basis[s]] = lv.vectors[l][static_cast<Eigen::Index>(s)];
      energies.push_back(lv.energies[l]);
      vectors.push_back(full);
      if (2 * d != n) {
        RealVector flipped = RealVector::Zero(dim);
        for (std::size_t s = 0; s < basis.size(); ++s) {
          flipped[basis[s] ^ all] = lv.vectors[l][static_cast<Eigen::Index>(s)];
        }
        energies.push_back(lv.energies[l]);
        vectors.push_back(std::move(flipped));
      }
    }
  }

  std::vector<std::size_t> order(energies.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
  Eigendecomposition out;
  out.n_sites = n;
  out.complete = false;
  out.spectral_width = width;
  out.energies.resize(static_cast<Eigen::Index>(order.size()));
  out.vectors.resize(dim, static_cast<Eigen::Index>(order.size()));
  for (std::size_t c = 0; c < order.size(); ++c) {
    out.energies[static_cast<Eigen::Index>(c)] = energies[order[c]];
    out.vectors.col(static_cast<Eigen::Index>(c)) = vectors[order[c]];
  }
  return out;
}

ThermalEnsemble::ThermalEnsemble(std::shared_ptr<const Eigendecomposition> eig, double temperature)
    : eig_(std::move(eig)), temperature_(temperature) {
  require(eig_ != nullptr && eig_->energies.size() > 0, ErrorKind::InvalidArgument, "empty eigendecomposition");
  require(!std::isnan(temperature) && temperature >= 0.0, ErrorKind::InvalidArgument,
          "temperature must be nonnegative");
  require(eig_->complete || temperature == 0.0, ErrorKind::InvalidArgument,
          "a partial spectrum supports only the T = 0 ensemble");
  const RealVector& e = eig_->energies;
  const auto levels = static_cast<std::size_t>(e.size());
  degeneracy_threshold_ = kDegeneracyTolerance * eig_->spectral_width;
  probabilities_.assign(levels, 0.0);
  const double e0 = e.minCoeff();
  if (temperature == 0.0) {
    std::size_t g = 0;
    for (std::size_t l = 0; l < levels; ++l) {
      if (e[static_cast<Eigen::Index>(l)] - e0 <= degeneracy_threshold_) ++g;
    }
    for (std::size_t l = 0; l < levels; ++l) {
      if (e[static_cast<Eigen::Index>(l)] - e0 <= degeneracy_threshold_) probabilities_[l] = 1.0 / g;
    }
    log_z_ = std::log(static_cast<double>(g));
    return;
  }
  if (std::isinf(temperature)) {
    std::fill(probabilities_.begin(), probabilities_.end(), 1.0 / levels);
    log_z_ = std::log(static_cast<double>(levels));
    return;
  }
  double z = 0.0;
  for (std::size_t l = 0; l < levels; ++l) {
    probabilities_[l] = std::exp(-(e[static_cast<Eigen::Index>(l)] - e0) / temperature);
    z += probabilities_[l];
  }
  for (double& p : probabilities_) p /= z;
  log_z_ = -e0 / temperature + std::log(z);
}

bool ThermalEnsemble::is_pure() const {
  return std::count_if(probabilities_.begin(), probabilities_.end(), [](double p) { return p > 0.0; }) == 1;
}

ThermalEnsemble thermal_state(std::shared_ptr<const Eigendecomposition> eig, double temperature) {
  return ThermalEnsemble(std::move(eig), temperature);
}

Complex expectation(const ThermalEnsemble& ens, const SpinOperator& op) {
  require(op.n_sites() == ens.n_sites(), ErrorKind::InvalidArgument, "operator acts on a different lattice");
  Complex sum = 0.0;
  ens.for_each_populated([&](std::size_t, double p, const auto& v) {
    const ComplexVector ov = op.apply(RealVector(v));
    sum += p * v.template cast<Complex>().dot(ov);
  });
  return sum;
}

Complex expectation(const ThermalEnsemble& ens, const ComplexMatrix& op) {
  require(op.rows() == static_cast<Eigen::Index>(ens.dimension()) && op.cols() == op.rows(),
          ErrorKind::InvalidArgument, "operator dimension mismatch");
  Complex sum = 0.0;
  ens.for_each_populated([&](std::size_t, double p, const auto& v) {
    const ComplexVector cv = v.template cast<Complex>();
    sum += p * cv.dot(op * cv);
  });
  return sum;
}

Complex correlation(const ThermalEnsemble& ens, const SpinOperator& first, const SpinOperator& second) {
  require(first.n_sites() == ens.n_sites() && second.n_sites() == ens.n_sites(), ErrorKind::InvalidArgument,
          "operator acts on a different lattice");
  const SpinOperator first_dag = first.adjoint();
  Complex sum = 0.0;
  ens.for_each_populated([&](std::size_t, double p, const auto& v) {
    const RealVector rv(v);
    sum += p * first_dag.apply(rv).dot(second.apply(rv));
  });
  return sum;
}

Complex two_point(const ThermalEnsemble& ens, SpinComponent a, int i, SpinComponent b, int j) {
  const int n = ens.n_sites();
  require(i >= 0 && i < n && j >= 0 && j < n, ErrorKind::InvalidArgument, "site index out of range");
  return correlation(ens, SpinOperator(n, {{a, i, 1.0}}), SpinOperator(n, {{b, j, 1.0}}));
}

double magnetization_variance(const ThermalEnsemble& ens, SpinComponent direction) {
  const SpinOperator m = total_spin(direction, ens.n_sites());
  double second = 0.0;
  Complex first = 0.0;
  ens.for_each_populated([&](std::size_t, double p, const auto& v) {
    const RealVector rv(v);
    const ComplexVector mv = m.apply(rv);
    second += p * mv.squaredNorm();
    first += p * rv.cast<Complex>().dot(mv);
  });
  return std::max(0.0, second - std::norm(first));
}

TwoSiteState::TwoSiteState(const Eigen::Matrix4cd& rho, std::pair<int, int> sites) : rho_(rho), sites_(sites) {}

TwoSiteState TwoSiteState::from_parity_entries(double a, double b, double x, double y, Complex c, Complex z) {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho(0, 0) = a;
  rho(3, 3) = b;
  rho(1, 1) = x;
  rho(2, 2) = y;
  rho(0, 3) = c;
  rho(3, 0) = std::conj(c);
  rho(1, 2) = z;
  rho(2, 1) = std::conj(z);
  return TwoSiteState(rho);
}

TwoSiteState TwoSiteState::from_correlators(double gxx, double gyy, double gzz, double gxy, double gyx, double mz,
                                            double dsz) {
  // mz = (<S^z_i> + <S^z_j>)/2, dsz = (<S^z_i> - <S^z_j>)/2
  const double a = 0.25 + mz + gzz;
  const double b = 0.25 - mz + gzz;
  const double x = 0.25 + dsz - gzz;
  const double y = 0.25 - dsz - gzz;
  const Complex c(gxx - gyy, -(gxy + gyx));
  const Complex z(gxx + gyy, gxy - gyx);
  return from_parity_entries(a, b, x, y, c, z);
}

std::array<double, 5> TwoSiteState::discord_coefficients() const {
  const double c1 = 2.0 * (z().real() + c().real());
  const double c2 = 2.0 * (z().real() - c().real());
  const double c3 = a() + b() - x() - y();
  const double c4 = a() - b() - x() + y();
  const double c5 = a() - b() + x() - y();
  return {c1, c2, c3, c4, c5};
}

double TwoSiteState::parity_violation() const {
  double worst = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const bool even_r = r == 0 || r == 3;
      const bool even_c = c == 0 || c == 3;
      if (even_r != even_c) worst = std::max(worst, std::abs(rho_(r, c)));
    }
  }
  return worst;
}

Eigen::Vector4d TwoSiteState::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Eigen::Matrix2cd TwoSiteState::reduce_first() const {
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a) {
    for (int ap = 0; ap < 2; ++ap) {
      for (int b = 0; b < 2; ++b) out(a, ap) += rho_(2 * a + b, 2 * ap + b);
    }
  }
  return out;
}

Eigen::Matrix2cd TwoSiteState::reduce_second() const {
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int b = 0; b < 2; ++b) {
    for (int bp = 0; bp < 2; ++bp) {
      for (int a = 0; a < 2; ++a) out(b, bp) += rho_(2 * a + b, 2 * a + bp);
    }
  }
  return out;
}

void TwoSiteState::validate(double tol) const {
  require(rho_.allFinite(), ErrorKind::Domain, "two-site state has non-finite entries");
  require((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() <= tol, ErrorKind::Domain, "two-site state is not Hermitian");
  require(std::abs(rho_.trace() - Complex(1.0)) <= tol, ErrorKind::Domain, "two-site state trace differs from 1");
  require(eigenvalues().minCoeff() >= -tol, ErrorKind::Domain, "two-site state is not positive semidefinite");
}

Eigen::Matrix2cd reduce_one_site(const ThermalEnsemble& ens, int site) {
  const int n = ens.n_sites();
  require(site >= 0 && site < n, ErrorKind::InvalidArgument, "site index out of range");
  const std::uint32_t m = site_mask(site, n);
  const auto dim = static_cast<std::uint32_t>(ens.dimension());
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  ens.for_each_populated([&](std::size_t, double p, const auto& v) {
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    for (std::uint32_t s = 0; s < dim; ++s) {
      if (s & m) continue;
      const double up = v[s];
      const double dn = v[s | m];
      acc(0, 0) += up * up;
      acc(0, 1) += up * dn;
      acc(1, 1) += dn * dn;
    }
    acc(1, 0) = acc(0, 1);
    rho += p * acc.cast<Complex>();
  });
  return rho;
}

TwoSiteState reduce_two_site(const ThermalEnsemble& ens, int i, int j) {
  const int n = ens.n_sites();
  require(i >= 0 && i < n && j >= 0 && j < n, ErrorKind::InvalidArgument, "site index out of range");
  require(i != j, ErrorKind::InvalidArgument, "two-site reduction needs distinct sites");
  const std::uint32_t mi = site_mask(i, n);
  const std::uint32_t mj = site_mask(j, n);
  const std::uint32_t offsets[4] = {0, mj, mi, mi | mj};
  const auto dim = static_cast<std::uint32_t>(ens.dimension());
  Eigen::Matrix4d rho = Eigen::Matrix4d::Zero();
  ens.for_each_populated([&](std::size_t, double p, const auto& v) {
    Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
    for (std::uint32_t s = 0; s < dim; ++s) {
      if (s & (mi | mj)) continue;
      Eigen::Vector4d amp;
      for (int q = 0; q < 4; ++q) amp[q] = v[s | offsets[q]];
      acc.noalias() += amp * amp.transpose();
    }
    rho += p * acc;
  });
  return TwoSiteState(rho.cast<Complex>(), {i, j});
}

MixedState MixedState::from_density_matrix(const ComplexMatrix& rho, int n_sites) {
  require(rho.rows() == static_cast<Eigen::Index>(hilbert_dimension(n_sites)) && rho.cols() == rho.rows(),
          ErrorKind::InvalidArgument, "density matrix dimension does not match 2^N");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  require(es.info() == Eigen::Success, ErrorKind::Numeric, "density-matrix eigensolver failed");
  MixedState out;
  out.n_sites = n_sites;
  out.probabilities = es.eigenvalues();
  require(out.probabilities.minCoeff() >= -1e-9, ErrorKind::Domain, "density matrix is not positive semidefinite");
  out.probabilities = out.probabilities.cwiseMax(0.0);
  out.probabilities /= out.probabilities.sum();
  out.vectors = es.eigenvectors();
  return out;
}

MixedState MixedState::pure(const ComplexVector& psi, int n_sites) {
  require(psi.size() == static_cast<Eigen::Index>(hilbert_dimension(n_sites)), ErrorKind::InvalidArgument,
          "state dimension does not match 2^N");
  const double norm = psi.norm();
  require(norm > 0.0, ErrorKind::InvalidArgument, "zero state vector");
  MixedState out;
  out.n_sites = n_sites;
  out.probabilities = RealVector::Ones(1);
  out.vectors = psi / norm;
  return out;
}

MixedState MixedState::product(const std::vector<Eigen::Matrix2cd>& site_states) {
  const int n = static_cast<int>(site_states.size());
  require(n >= 1, ErrorKind::InvalidArgument, "product state needs at least one site");
  RealVector probs = RealVector::Ones(1);
  ComplexMatrix vecs = ComplexMatrix::Ones(1, 1);
  for (const Eigen::Matrix2cd& s : site_states) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(s);
    Eigen::Vector2d p = es.eigenvalues();
    require(p.minCoeff() >= -1e-12, ErrorKind::Domain, "site state is not positive semidefinite");
    p = p.cwiseMax(0.0);
    p /= p.sum();
    const Eigen::Matrix2cd u = es.eigenvectors();
    RealVector next_p(probs.size() * 2);
    ComplexMatrix next_v(vecs.rows() * 2, vecs.cols() * 2);
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
      for (int q = 0; q < 2; ++q) {
        const Eigen::Index col = 2 * c + q;
        next_p[col] = probs[c] * p[q];
        for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
          next_v(2 * r, col) = vecs(r, c) * u(0, q);
          next_v(2 * r + 1, col) = vecs(r, c) * u(1, q);
        }
      }
    }
    probs = std::move(next_p);
    vecs = std::move(next_v);
  }
  MixedState out;
  out.n_sites = n;
  out.probabilities = probs;
  out.vectors = vecs;
  return out;
}

ComplexMatrix MixedState::density_matrix() const {
  return vectors * probabilities.cast<Complex>().asDiagonal() * vectors.adjoint();
}

void write_levels_csv(std::ostream& out, const ThermalEnsemble& ens) {
  out << "level,energy,probability\n";
  const RealVector& e = ens.eigen().energies;
  for (std::size_t l = 0; l < ens.level_count(); ++l) {
    out << l << ',' << format_double(e[static_cast<Eigen::Index>(l)]) << ',' << format_double(ens.probabilities()[l])
        << '\n';
  }
}

}  // namespace qwit
