#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qwit/thermal.hpp"

namespace qwit {

enum class SpectralKind { ChiDoublePrime, StructureFactor };
std::string_view to_string(SpectralKind k);

struct Pole {
  double omega = 0.0;
  double weight = 0.0;
};

/// Exact pole list of chi''(omega) or S(omega) for one operator.
struct SpectralFunction {
  SpectralKind kind = SpectralKind::ChiDoublePrime;
  std::vector<Pole> poles;  // ascending in omega
  std::string operator_label;
  double temperature = 0.0;
  std::optional<double> k;
  int n_sites = 0;
  /// |omega| at or below this counts as elastic.
  double elastic_threshold = 0.0;
  /// S weight at |omega| <= elastic_threshold that a conversion to chi'' dropped.
  double dropped_elastic_weight = 0.0;

  double total_weight() const;
  /// Combines poles closer than `tol` to the first pole of their cluster.
  SpectralFunction merged(double tol) const;
};

/// Monotone quantum filters h(x) with x = beta * omega.
struct Filter {
  enum class Type { QfiTanh, QvLangevin, Skew };
  Type type = Type::QfiTanh;
  double alpha = 0.5;

  static Filter qfi() { return {Type::QfiTanh, 0.5}; }
  static Filter quantum_variance() { return {Type::QvLangevin, 0.5}; }
  static Filter skew(double alpha);

  /// h(x) for x >= 0, including x = +inf.
  double operator()(double x) const;
  std::string name() const;
};

/// Parses "qfi", "qv" or "skew:<alpha>".
Filter parse_filter(const std::string& text);

/// <lambda|O|lambda'> over the stored eigenvectors.
struct TransitionMatrix {
  ComplexMatrix elements;
  std::string label;
  std::optional<double> k;
  bool hermitian = true;
};

TransitionMatrix transition_elements(const Eigendecomposition& eig, const SpinOperator& op, std::optional<double> k = {});

/// chi'' poles pi (p_l - p_l') |<l|O|l'>|^2 at omega = E_l' - E_l. Terms with
/// p_l + p_l' = 0 and elastic pairs are left out.
SpectralFunction lehmann_chi(const ThermalEnsemble& ens, const TransitionMatrix& m);
SpectralFunction lehmann_chi(const ThermalEnsemble& ens, const SpinOperator& op, std::optional<double> k = {});

/// S(omega) poles p_l |<l'|O^dagger|l>|^2 at omega = E_l' - E_l, elastic line included.
SpectralFunction dynamical_structure_factor(const ThermalEnsemble& ens, const TransitionMatrix& m);
SpectralFunction dynamical_structure_factor(const ThermalEnsemble& ens, const SpinOperator& op,
                                            std::optional<double> k = {});

/// Cross response of (O_i, O_j): weights pi (p_l - p_l') Re[<l|O_i|l'><l'|O_j|l>].
SpectralFunction two_site_chi(const ThermalEnsemble& ens, const TransitionMatrix& mi, const TransitionMatrix& mj);

enum class FdtDirection { StructureToChi, ChiToStructure };

/// chi'' = pi (1 - e^{-beta omega}) S. Elastic S poles are dropped (their
/// weight is recorded); chi'' -> S needs T > 0 wherever omega < 0 carries weight.
SpectralFunction fdt_convert(const SpectralFunction& in, double temperature, FdtDirection direction);

/// F_Q = 2 sum (p - p')^2/(p + p') |<l|O|l'>|^2. Works on a partial spectrum
/// because unpopulated partners enter only through ||O v||^2 and ||O^dagger v||^2.
double qfi_direct(const ThermalEnsemble& ens, const SpinOperator& op);
/// Same, from precomputed elements on a complete spectrum; `scale` multiplies O.
double qfi_direct(const ThermalEnsemble& ens, const TransitionMatrix& m, double scale = 1.0);
double qfi_direct(const MixedState& state, const ComplexMatrix& op);

/// (1/pi) sum over omega > 0 poles of h(beta omega) w. T = 0 uses h(inf).
double coherence_measure(const SpectralFunction& chi, double temperature, const Filter& filter);
/// (4/pi) integral of tanh(beta omega / 2) chi''.
double qfi_integral(const SpectralFunction& chi, double temperature);
/// C[O_i, O_j; h, rho] from a two_site_chi pole list.
double spatial_quantum_correlation(const SpectralFunction& cross_chi, double temperature, const Filter& filter);

enum class DepthMode { ExactN, LargeNDivisor };
std::string_view to_string(DepthMode m);

struct DepthBound {
  int m = 0;
  int s = 0;
  int r = 0;
  double bound = 0.0;
  bool exceeded = false;
};

struct DepthResult {
  DepthMode mode = DepthMode::ExactN;
  double value = 0.0;
  int largest_m = 0;        // largest m whose bound is strictly exceeded, 0 if none
  int certified_depth = 1;  // largest_m + 1
  std::vector<DepthBound> table;
};

/// ExactN compares the total F_Q with (s m^2 + r^2) dl^2, s = floor(N/m), r = N - s m.
/// LargeNDivisor compares the density f_Q with m dl^2. A bound counts as
/// exceeded only when value > bound + tolerance.
DepthResult entanglement_depth(double value, int n_sites, double spectrum_width, DepthMode mode,
                               double tolerance = 0.0);

struct NqfiResult {
  double nqfi = 0.0;
  int certified_depth = 1;
};
/// nQFI = f_Q / (12 S^2) for f_Q summed over three spin components; nQFI > m
/// certifies (m+1)-partite entanglement.
NqfiResult nqfi(double f_q, double spin = 0.5);

/// G(r, t) = (1/N) sum_k e^{ikr} sum_n w_n(k) e^{i omega_n t} from S(k, omega)
/// pole lists of S^z_k covering the whole k grid. Rows follow `r`, columns `t`.
ComplexMatrix van_hove(const std::vector<SpectralFunction>& s_by_k, const std::vector<int>& r,
                       const std::vector<double>& t);

/// tanh(beta (E' - E)/2) - (p - p')/(p + p') over the given level pairs; max |.|.
double tanh_identity_residual(const ThermalEnsemble& ens, const std::vector<std::pair<int, int>>& pairs);

void write_poles_csv(std::ostream& out, const SpectralFunction& sf);

}  // namespace qwit
