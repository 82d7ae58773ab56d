#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qwit/thermal.hpp"

namespace qwit {

enum class Certification { Certified, NotCertified, Inapplicable };
enum class LogBase { Bits, Nats, None };

std::string_view to_string(Certification c);
std::string_view to_string(LogBase b);

/// One evaluated witness. `branch` names the formula that produced the value
/// (general, translation-invariant, heisenberg, disorder-free, dimer, ...).
struct WitnessReport {
  std::string witness;
  double value = 0.0;
  std::optional<double> bound;
  Certification entangled = Certification::Inapplicable;
  std::string branch = "general";
  LogBase log_base = LogBase::None;
  std::string inputs_digest;
  std::optional<double> temperature;
  std::optional<std::pair<int, int>> pair;
  std::optional<double> k;
  std::optional<int> depth;
  std::optional<double> uncertainty;
  std::string note;

  /// Single-line JSON object.
  std::string to_json_line() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

/// Default tolerance a witness inequality must be beaten by before a report
/// says Certified.
inline constexpr double kCertificationTolerance = 1e-10;
/// Range violations below this are clamped; larger ones raise Error(Domain).
inline constexpr double kClampTolerance = 1e-9;

/// Maps a value into [lo, hi], raising when it lies further out than kClampTolerance.
double clamp_checked(double value, double lo, double hi, const char* what);

// ---- entropies --------------------------------------------------------------

/// -sum p log p with 0 log 0 = 0.
double shannon_entropy(const Eigen::Ref<const RealVector>& probabilities, LogBase base);
double von_neumann_entropy(const ComplexMatrix& rho, LogBase base);
/// Binary entropy h(x) in bits.
double binary_entropy(double x);

// ---- one-tangle ---------------------------------------------------------------

/// tau_1 = 1 - 4 sum_a <S^a>^2.
double one_tangle(double sx, double sy, double sz);
double one_tangle(const Eigen::Matrix2cd& rho_one_site);

// ---- concurrence --------------------------------------------------------------

/// Wootters route through the eigenvalues of rho rho~.
double concurrence_wootters(const TwoSiteState& rho);

/// C = 2 max{0, |c| - sqrt(xy), |z| - sqrt(ab)}.
double concurrence_parity(double a, double b, double x, double y, Complex c, Complex z);
/// Same, after checking that the state has the parity block form.
double concurrence_parity(const TwoSiteState& rho);

/// Translation-invariant pair with a real Hamiltonian (x = y, real c and z).
double concurrence_translation_invariant(double gxx, double gyy, double gzz, double mz);
/// Isotropic Heisenberg correlations g^xx = g^yy = g^zz.
double concurrence_heisenberg(double gzz, double mz);
/// Isotropic and unordered (M^z = 0).
double concurrence_disorder_free(double gzz);
/// Heisenberg dimer from the bond correlation <S_0 . S_1>.
double concurrence_dimer(double bond_correlation);

/// Entanglement of formation in bits.
double entanglement_of_formation(double concurrence);

// ---- two-tangle ---------------------------------------------------------------

enum class TwoTangleConvention {
  OrderedPairs,   // sum over all ordered pairs i != j
  PerSite,        // sum over partners j of one site i
  DistanceOnce,   // 1D translation-invariant: sum_{r>0} C_r^2, each distance once
};
std::string_view to_string(TwoTangleConvention c);

struct TwoTangle {
  double value = 0.0;
  TwoTangleConvention convention = TwoTangleConvention::PerSite;
  int truncation_radius = 0;  // largest |i - j| that entered the sum
};

/// `concurrences(i, j)` holds C_ij; the diagonal is ignored. `site` selects the
/// site for the PerSite convention.
TwoTangle two_tangle(const RealMatrix& concurrences, TwoTangleConvention convention, int site = 0);
/// C_r for r = 1..R in a translation-invariant chain.
TwoTangle two_tangle_by_distance(const std::vector<double>& concurrence_by_distance);

// ---- susceptibility witness --------------------------------------------------

struct SusceptibilityInput {
  double var_x = 0.0;  // Delta^2(M^x_tot)
  double var_y = 0.0;
  double var_z = 0.0;
  int n_sites = 0;
  double spin = 0.5;
  double temperature = 0.0;
  double g_factor = 2.0;
  bool isotropic_g = true;
};

/// Reports chi_bar = g^2 sum_a Delta^2(M^a) / (3T) (mu_B = 1) against g^2 N S / (3T).
/// Certified iff sum_a Delta^2(M^a) < N S - tolerance; the comparison is done
/// on the variances so T = 0 is handled.
WitnessReport susceptibility_witness(const SusceptibilityInput& in, double tolerance = kCertificationTolerance);

// ---- quantum discord ----------------------------------------------------------

struct DiscordSettings {
  int grid_points = 2000;
  int refine_starts = 3;
  int max_iterations = 400;
  double tolerance = 1e-13;
};

struct DiscordResult {
  double discord = 0.0;               // bits
  double mutual_information = 0.0;    // bits
  double classical_correlation = 0.0; // bits
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();  // Bloch vector n of the projector (1 + n.sigma)/2 on B
  double t = 1.0;                     // V = t I + i y.sigma with V|up> along n
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  double optimizer_gap = 0.0;         // improvement of the refinement over the best grid point
  bool converged = true;
};

/// Conditional-entropy-based classical correlation J for a projective
/// measurement of the second site along n.
double classical_information(const TwoSiteState& rho, const Eigen::Vector3d& n);

DiscordResult discord_general(const TwoSiteState& rho, const DiscordSettings& settings = {});

/// Closed form for c4 = c5 = 0 states with real correlations.
double discord_xyz(double gxx, double gyy, double gzz);
/// Checks c4 = c5 = 0 and real off-diagonals first; Error(Domain) otherwise.
double discord_xyz(const TwoSiteState& rho);
/// Isotropic case with G = 4 g^zz in [-1, 1/3].
double discord_heisenberg(double g_big);

/// (t, y) of the SU(2) element whose rotated projector points along n.
std::pair<double, Eigen::Vector3d> measurement_parameters(const Eigen::Vector3d& n);
/// Bloch vector (z1, z2, z3) produced by V = t I + i y.sigma.
Eigen::Vector3d measurement_direction(double t, const Eigen::Vector3d& y);

}  // namespace qwit
