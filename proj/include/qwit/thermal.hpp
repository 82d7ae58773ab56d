#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "qwit/spin_model.hpp"

namespace qwit {

/// Energies ascending with orthonormal real eigenvectors as columns.
/// `complete` is false when only the low-energy manifold was computed
/// (magnetization-sector ground-state path).
struct Eigendecomposition {
  RealVector energies;
  RealMatrix vectors;
  int n_sites = 0;
  bool complete = true;
  double spectral_width = 0.0;
  double residual = 0.0;  // max |H U - U diag(E)|
};

/// Full dense diagonalization (LAPACK dsyevd). Throws Error(Numeric) with the
/// residual when the reconstruction check fails.
Eigendecomposition diagonalize(const SpinModel& model, const Capacity& capacity = {});
Eigendecomposition diagonalize(const RealMatrix& hamiltonian, int n_sites);

/// Degenerate ground manifold only, found sector by sector for models that
/// conserve total S^z (falls back to dense diagonalization otherwise).
Eigendecomposition ground_manifold(const SpinModel& model, const Capacity& capacity = {});

/// Relative gap below which levels count as degenerate, as a fraction of the
/// spectral width.
inline constexpr double kDegeneracyTolerance = 1e-10;

class ThermalEnsemble {
 public:
  static constexpr double kInfiniteTemperature = std::numeric_limits<double>::infinity();

  /// T = 0 averages uniformly over the degenerate ground manifold; T = +inf
  /// weights every level equally.
  ThermalEnsemble(std::shared_ptr<const Eigendecomposition> eig, double temperature);

  const Eigendecomposition& eigen() const { return *eig_; }
  std::shared_ptr<const Eigendecomposition> eigen_ptr() const { return eig_; }
  double temperature() const { return temperature_; }
  double beta() const { return temperature_ == 0.0 ? kInfiniteTemperature : 1.0 / temperature_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  int n_sites() const { return eig_->n_sites; }
  std::size_t dimension() const { return static_cast<std::size_t>(eig_->vectors.rows()); }
  std::size_t level_count() const { return probabilities_.size(); }

  /// ln Z with Z = sum exp(-E/T). At T = 0 energies are measured from the
  /// ground level, so this is ln(ground degeneracy).
  double log_partition_function() const { return log_z_; }

  /// Absolute energy difference below which two levels are treated as equal.
  double degeneracy_threshold() const { return degeneracy_threshold_; }

  bool is_pure() const;

  template <typename Fn>
  void for_each_populated(Fn&& fn) const {
    for (std::size_t l = 0; l < probabilities_.size(); ++l) {
      if (probabilities_[l] > 0.0) fn(l, probabilities_[l], eig_->vectors.col(static_cast<Eigen::Index>(l)));
    }
  }

 private:
  std::shared_ptr<const Eigendecomposition> eig_;
  double temperature_ = 0.0;
  std::vector<double> probabilities_;
  double log_z_ = 0.0;
  double degeneracy_threshold_ = 0.0;
};

ThermalEnsemble thermal_state(std::shared_ptr<const Eigendecomposition> eig, double temperature);

Complex expectation(const ThermalEnsemble& ens, const SpinOperator& op);
Complex expectation(const ThermalEnsemble& ens, const ComplexMatrix& op);

/// <O1 O2> for two operators given matrix-free.
Complex correlation(const ThermalEnsemble& ens, const SpinOperator& first, const SpinOperator& second);

/// g^{ab}_{ij} = <S^a_i S^b_j>.
Complex two_point(const ThermalEnsemble& ens, SpinComponent a, int i, SpinComponent b, int j);

/// Variance of total magnetization along one axis.
double magnetization_variance(const ThermalEnsemble& ens, SpinComponent direction);

/// 4x4 reduced density matrix in the basis {uu, ud, du, dd} of sites (i, j).
class TwoSiteState {
 public:
  TwoSiteState() = default;
  explicit TwoSiteState(const Eigen::Matrix4cd& rho, std::pair<int, int> sites = {0, 1});

  /// Parity-symmetric form with the six independent entries.
  static TwoSiteState from_parity_entries(double a, double b, double x, double y, Complex c, Complex z);
  /// Builds the parity-symmetric state from correlators.
  static TwoSiteState from_correlators(double gxx, double gyy, double gzz, double gxy, double gyx, double mz,
                                       double dsz);

  const Eigen::Matrix4cd& rho() const { return rho_; }
  std::pair<int, int> sites() const { return sites_; }

  double a() const { return rho_(0, 0).real(); }
  double b() const { return rho_(3, 3).real(); }
  double x() const { return rho_(1, 1).real(); }
  double y() const { return rho_(2, 2).real(); }
  Complex c() const { return rho_(0, 3); }
  Complex z() const { return rho_(1, 2); }

  /// c_1..c_5 of rho = (1/4)[I + sum c_i s^i s^i + c4 I s^3 + c5 s^3 I].
  std::array<double, 5> discord_coefficients() const;

  /// Largest modulus among entries outside the parity blocks.
  double parity_violation() const;
  double trace() const { return rho_.trace().real(); }
  Eigen::Vector4d eigenvalues() const;
  Eigen::Matrix2cd reduce_first() const;   // trace out the second site
  Eigen::Matrix2cd reduce_second() const;  // trace out the first site

  /// Throws Error(Domain) unless Hermitian, unit trace and PSD within tol.
  void validate(double tol = 1e-9) const;

 private:
  Eigen::Matrix4cd rho_ = Eigen::Matrix4cd::Identity() / 4.0;
  std::pair<int, int> sites_{0, 1};
};

Eigen::Matrix2cd reduce_one_site(const ThermalEnsemble& ens, int site);
TwoSiteState reduce_two_site(const ThermalEnsemble& ens, int i, int j);

/// General finite mixture sum_l p_l |v_l><v_l| with orthonormal v_l.
struct MixedState {
  RealVector probabilities;
  ComplexMatrix vectors;
  int n_sites = 0;

  static MixedState from_density_matrix(const ComplexMatrix& rho, int n_sites);
  static MixedState pure(const ComplexVector& psi, int n_sites);
  /// Tensor product of single-site density matrices, site 0 first.
  static MixedState product(const std::vector<Eigen::Matrix2cd>& site_states);

  ComplexMatrix density_matrix() const;
};

/// Level table (index, energy, probability) as CSV.
void write_levels_csv(std::ostream& out, const ThermalEnsemble& ens);

}  // namespace qwit
