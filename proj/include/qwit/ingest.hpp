#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qwit/spectral.hpp"

namespace qwit {

enum class GridKind { ChiDoublePrime, StructureFactor, SymmetrizedStructureFactor };
std::string_view to_string(GridKind k);
GridKind parse_grid_kind(const std::string& text);

/// Binned spectrum: values(bin, k) is a per-site density in inverse energy units.
///
/// CSV layout (comma separated, one record per line):
///   optional lines  #weights,<wx>,<wy>,<wz>   and   #note,<text>
///   <kind>,<T or empty>,<S>,<k count>,<omega count>
///   k,<k_1>,...,<k_K>
///   <omega center>,<value at k_1>,...,<value at k_K>     (one line per bin)
/// Bin edges sit halfway between centers; the outer edges mirror the
/// neighbouring half-width.
struct SpectrumGrid {
  GridKind kind = GridKind::ChiDoublePrime;
  std::vector<double> k;
  std::vector<double> omega;  // bin centers, strictly increasing
  std::vector<double> edges;  // omega.size() + 1
  RealMatrix values;          // omega.size() x k.size()
  std::optional<double> temperature;
  double spin = 0.5;
  std::array<double, 3> component_weights{1.0, 1.0, 1.0};
  std::vector<std::string> notes;
  std::string conversion = "none";

  std::size_t bins() const { return omega.size(); }
  /// Throws Error(Data) on shape or ordering problems; appends warnings to notes.
  void validate();
};

/// Edges halfway between centers.
std::vector<double> edges_from_centers(const std::vector<double>& centers);
/// n bins of equal width on [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, int n);

/// Histograms pole lists (one per k, same kind and temperature) into [edges).
SpectrumGrid bin_poles(const std::vector<SpectralFunction>& by_k, const std::vector<double>& edges);

SpectrumGrid parse_spectrum(std::istream& in, const std::string& source = "<stream>");
SpectrumGrid load_spectrum(const std::string& path);
void write_spectrum(std::ostream& out, const SpectrumGrid& grid);
void save_spectrum(const std::string& path, const SpectrumGrid& grid);

/// Converts to ChiDoublePrime. S uses chi'' = pi (1 - e^{-beta w}) S and the
/// symmetrized S~ = S(w) + S(-w) uses chi'' = tanh(beta w / 2) S~ with S~ in the
/// same units as chi''. Records the relation in `conversion`.
SpectrumGrid normalize_conventions(const SpectrumGrid& grid);
/// Inverse of normalize_conventions where defined (omega = 0 bins become 0).
SpectrumGrid convert_from_chi(const SpectrumGrid& chi, GridKind target);

enum class BackgroundModel { Constant, Linear };

/// Least-squares fit of the background over bins whose centers lie in
/// [window_lo, window_hi], subtracted from every bin, per k column.
SpectrumGrid subtract_background(const SpectrumGrid& grid, BackgroundModel model, double window_lo, double window_hi);

/// sum_a w_a chi''_aa over matching x, y, z grids.
SpectrumGrid combine_components(const SpectrumGrid& x, const SpectrumGrid& y, const SpectrumGrid& z,
                                const std::array<double, 3>& weights = {1.0, 1.0, 1.0});

struct NumericIntegral {
  double value = 0.0;        // trapezoid over bin centers with omega > 0
  double histogram = 0.0;    // bin-sum estimate
  double lower = 0.0;        // rigorous bracket of the binned poles for a monotone filter
  double upper = 0.0;
  double richardson = 0.0;   // |I(w) - I(2w)| from merging bin pairs
  double tail_weight = 0.0;  // raw chi'' weight above the cutoff, divided by pi
  double edge_contribution = 0.0;  // filtered contribution of the last bin used
  double uncertainty = 0.0;  // covers the bracket and the Richardson estimate
  double temperature = 0.0;
};

struct IntegrationOptions {
  double cutoff = std::numeric_limits<double>::infinity();
  std::optional<double> temperature;  // overrides the grid's temperature
};

/// (1/pi) integral over omega > 0 of h(beta omega) chi''(k, omega). The grid is
/// normalized first if it is not chi''.
NumericIntegral integrate_qfi_numeric(const SpectrumGrid& grid, std::size_t k_index, const Filter& filter,
                                      const IntegrationOptions& options = {});

}  // namespace qwit
