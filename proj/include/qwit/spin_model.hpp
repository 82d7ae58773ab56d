#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

#include "qwit/common.hpp"

namespace qwit {

enum class ModelKind { HeisenbergChain, AlternatingChain, TransverseFieldXXZ, DimerArray, CustomCouplings };
enum class Boundary { Open, Periodic };
enum class SpinComponent { X, Y, Z };

std::string_view to_string(ModelKind kind);
std::string_view to_string(Boundary boundary);
std::string_view to_string(SpinComponent component);
ModelKind parse_model_kind(std::string_view text);
Boundary parse_boundary(std::string_view text);
SpinComponent parse_component(std::string_view text);

/// Exchange bond J_xx S^x_i S^x_j + J_yy S^y_i S^y_j + J_zz S^z_i S^z_j.
struct Bond {
  int i = 0;
  int j = 0;
  double jxx = 0.0;
  double jyy = 0.0;
  double jzz = 0.0;

  bool operator==(const Bond&) const = default;
};

/// Dense-path limits. The full Hilbert space is held as a dense 2^N x 2^N
/// matrix up to max_dense_sites; ground-state queries on models that conserve
/// total S^z go through magnetization sectors up to max_sector_sites.
struct Capacity {
  int max_dense_sites = 12;
  int max_sector_sites = 16;
};

struct SpinModel {
  ModelKind kind = ModelKind::HeisenbergChain;
  int n_sites = 2;
  double j = 1.0;
  std::optional<double> alpha;  // AlternatingChain
  std::optional<double> delta;  // TransverseFieldXXZ
  std::optional<double> h_x;    // TransverseFieldXXZ
  Boundary boundary = Boundary::Open;
  std::vector<Bond> custom_bonds;  // CustomCouplings

  static SpinModel heisenberg_chain(int n, double j, Boundary boundary);
  static SpinModel alternating_chain(int n, double j, double alpha, Boundary boundary);
  static SpinModel transverse_field_xxz(int n, double j, double delta, double h_x, Boundary boundary);
  static SpinModel dimer_array(int n, double j);
  static SpinModel custom(int n, std::vector<Bond> bonds);

  /// Throws Error(Config) when the description violates the type invariants.
  void validate() const;

  /// Expanded bond list in the order the Hamiltonian sums them.
  std::vector<Bond> bonds() const;

  double transverse_field() const { return h_x.value_or(0.0); }

  /// True when [H, sum_i S^z_i] = 0 (isotropic XY part, no transverse field).
  bool conserves_total_sz() const;

  /// Canonical text used for provenance digests.
  std::string describe() const;

  bool operator==(const SpinModel&) const = default;
};

inline std::size_t hilbert_dimension(int n_sites) { return std::size_t{1} << n_sites; }

/// Dense real Hamiltonian in the product basis. Site 0 is the most significant
/// bit and spin up is bit value 0, so index 0 is |up ... up>.
RealMatrix build_hamiltonian(const SpinModel& model, const Capacity& capacity = {});

/// Hamiltonian restricted to the sector with `n_down` flipped spins. Requires
/// a model that conserves total S^z. `basis` receives the full-space indices.
RealMatrix build_sector_hamiltonian(const SpinModel& model, int n_down, std::vector<std::uint32_t>& basis,
                                    const Capacity& capacity = {});

using SparseRealMatrix = Eigen::SparseMatrix<double>;

SparseRealMatrix build_sector_hamiltonian_sparse(const SpinModel& model, int n_down,
                                                 std::vector<std::uint32_t>& basis, const Capacity& capacity = {});

/// Upper bound on the operator norm of H from the bond couplings and field.
double hamiltonian_norm_bound(const SpinModel& model);

struct SiteTerm {
  SpinComponent component = SpinComponent::Z;
  int site = 0;
  Complex coefficient{1.0, 0.0};
};

/// Linear combination of single-site spin operators. Applied matrix-free to
/// state vectors; `dense()` materializes the 2^N matrix.
class SpinOperator {
 public:
  SpinOperator() = default;
  SpinOperator(int n_sites, std::vector<SiteTerm> terms, std::string label = {});

  int n_sites() const { return n_sites_; }
  const std::vector<SiteTerm>& terms() const { return terms_; }
  const std::string& label() const { return label_; }

  bool is_hermitian(double tol = 1e-14) const;
  SpinOperator adjoint() const;
  SpinOperator scaled(Complex factor) const;

  /// out = O * in
  void apply(const Eigen::Ref<const ComplexVector>& in, Eigen::Ref<ComplexVector> out) const;
  ComplexVector apply(const Eigen::Ref<const RealVector>& in) const;
  ComplexVector apply(const Eigen::Ref<const ComplexVector>& in) const;

  ComplexMatrix dense() const;

  /// O applied to every column of a real matrix.
  ComplexMatrix apply_columns(const RealMatrix& in) const;

  /// lambda_max - lambda_min of one single-site term with unit coefficient.
  static constexpr double kSiteSpectrumWidth = 1.0;

 private:
  int n_sites_ = 0;
  std::vector<SiteTerm> terms_;
  std::string label_;
};

/// Single-site operator S^mu_i, or the collective Fourier component
/// S^mu_k = N^{-1/2} sum_i e^{i k r_i} S^mu_i with r_i = i.
struct SiteOperatorSpec {
  SpinComponent component = SpinComponent::Z;
  std::optional<int> site;
  std::optional<double> k;

  static SiteOperatorSpec at_site(SpinComponent c, int site) { return {c, site, std::nullopt}; }
  static SiteOperatorSpec at_wavevector(SpinComponent c, double k) { return {c, std::nullopt, k}; }
};

struct OperatorMatrix {
  ComplexMatrix matrix;
  bool hermitian = true;
};

SpinOperator make_operator(const SiteOperatorSpec& spec, int n_sites, Boundary boundary = Boundary::Periodic);
OperatorMatrix build_operator(const SiteOperatorSpec& spec, int n_sites, Boundary boundary = Boundary::Periodic);

/// sum_i S^mu_i (no normalization).
SpinOperator total_spin(SpinComponent component, int n_sites);

/// k_n = 2 pi n / N, n = 0..N-1.
std::vector<double> wavevector_grid(int n_sites);
bool on_wavevector_grid(double k, int n_sites, double tol = 1e-9);

/// prod_i (2 S^x_i): flips every spin.
RealMatrix spin_flip_parity(int n_sites);

}  // namespace qwit
