#include "qwit/spin_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

namespace qwit {
namespace {

constexpr int kMaxIndexableSites = 30;

std::uint32_t site_mask(int site, int n_sites) { return std::uint32_t{1} << (n_sites - 1 - site); }

void check_finite(double v, const char* name) {
  require(std::isfinite(v), ErrorKind::Config, std::string("model field '") + name + "' must be finite");
}

template <typename Sink>
void for_bond_elements(const std::vector<std::uint32_t>* basis, Eigen::Index dim, const Bond& b, int n_sites,
                       Sink&& sink) {
  const std::uint32_t mi = site_mask(b.i, n_sites);
  const std::uint32_t mj = site_mask(b.j, n_sites);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint32_t s = basis ? (*basis)[col] : static_cast<std::uint32_t>(col);
    const bool parallel = ((s & mi) != 0) == ((s & mj) != 0);
    sink(col, col, parallel ? 0.25 * b.jzz : -0.25 * b.jzz);
    const double amp = parallel ? 0.25 * (b.jxx - b.jyy) : 0.25 * (b.jxx + b.jyy);
    if (amp == 0.0) continue;
    const std::uint32_t t = s ^ mi ^ mj;
    Eigen::Index row = static_cast<Eigen::Index>(t);
    if (basis) {
      auto it = std::lower_bound(basis->begin(), basis->end(), t);
      row = static_cast<Eigen::Index>(it - basis->begin());
    }
    sink(row, col, amp);
  }
}

void add_bond_elements(RealMatrix& h, const std::vector<std::uint32_t>* basis, const Bond& b, int n_sites) {
  for_bond_elements(basis, h.rows(), b, n_sites, [&h](Eigen::Index r, Eigen::Index c, double v) { h(r, c) += v; });
}

void sector_basis(const SpinModel& model, int n_down, std::vector<std::uint32_t>& basis, const Capacity& capacity) {
  model.validate();
  require(model.conserves_total_sz(), ErrorKind::InvalidArgument,
          "magnetization sectors require a model that conserves total S^z");
  require(n_down >= 0 && n_down <= model.n_sites, ErrorKind::InvalidArgument, "sector index out of range");
  if (model.n_sites > capacity.max_sector_sites) {
    fail(ErrorKind::Capacity, "sector Hamiltonian for " + std::to_string(model.n_sites) +
                                  " sites exceeds the configured cap of " +
                                  std::to_string(capacity.max_sector_sites) + " sites");
  }
  basis.clear();
  const std::uint32_t dim = static_cast<std::uint32_t>(hilbert_dimension(model.n_sites));
  for (std::uint32_t s = 0; s < dim; ++s) {
    if (std::popcount(s) == n_down) basis.push_back(s);
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::HeisenbergChain: return "HeisenbergChain";
    case ModelKind::AlternatingChain: return "AlternatingChain";
    case ModelKind::TransverseFieldXXZ: return "TransverseFieldXXZ";
    case ModelKind::DimerArray: return "DimerArray";
    case ModelKind::CustomCouplings: return "CustomCouplings";
  }
  return "?";
}

std::string_view to_string(Boundary boundary) { return boundary == Boundary::Open ? "Open" : "Periodic"; }

std::string_view to_string(SpinComponent component) {
  switch (component) {
    case SpinComponent::X: return "x";
    case SpinComponent::Y: return "y";
    case SpinComponent::Z: return "z";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::HeisenbergChain, ModelKind::AlternatingChain, ModelKind::TransverseFieldXXZ,
                 ModelKind::DimerArray, ModelKind::CustomCouplings}) {
    if (text == to_string(k)) return k;
  }
  fail(ErrorKind::Config, "unknown model kind '" + std::string(text) + "'");
}

Boundary parse_boundary(std::string_view text) {
  if (text == "Open" || text == "open") return Boundary::Open;
  if (text == "Periodic" || text == "periodic") return Boundary::Periodic;
  fail(ErrorKind::Config, "unknown boundary '" + std::string(text) + "'");
}

SpinComponent parse_component(std::string_view text) {
  if (text == "x" || text == "X" || text == "Sx") return SpinComponent::X;
  if (text == "y" || text == "Y" || text == "Sy") return SpinComponent::Y;
  if (text == "z" || text == "Z" || text == "Sz") return SpinComponent::Z;
  fail(ErrorKind::Config, "unknown spin component '" + std::string(text) + "'");
}

SpinModel SpinModel::heisenberg_chain(int n, double j, Boundary boundary) {
  SpinModel m;
  m.kind = ModelKind::HeisenbergChain;
  m.n_sites = n;
  m.j = j;
  m.boundary = boundary;
  m.validate();
  return m;
}

SpinModel SpinModel::alternating_chain(int n, double j, double alpha, Boundary boundary) {
  SpinModel m = heisenberg_chain(n, j, boundary);
  m.kind = ModelKind::AlternatingChain;
  m.alpha = alpha;
  m.validate();
  return m;
}

SpinModel SpinModel::transverse_field_xxz(int n, double j, double delta, double h_x, Boundary boundary) {
  SpinModel m = heisenberg_chain(n, j, boundary);
  m.kind = ModelKind::TransverseFieldXXZ;
  m.delta = delta;
  m.h_x = h_x;
  m.validate();
  return m;
}

SpinModel SpinModel::dimer_array(int n, double j) {
  SpinModel m;
  m.n_sites = n;
  m.j = j;
  m.kind = ModelKind::DimerArray;
  m.validate();
  return m;
}

SpinModel SpinModel::custom(int n, std::vector<Bond> bonds) {
  SpinModel m;
  m.kind = ModelKind::CustomCouplings;
  m.n_sites = n;
  m.custom_bonds = std::move(bonds);
  m.validate();
  return m;
}

void SpinModel::validate() const {
  require(n_sites >= 2, ErrorKind::Config, "n_sites must be at least 2");
  require(n_sites <= kMaxIndexableSites, ErrorKind::Capacity, "n_sites exceeds the indexable range");
  check_finite(j, "j");
  const bool alternating = kind == ModelKind::AlternatingChain;
  const bool xxz = kind == ModelKind::TransverseFieldXXZ;
  const bool custom = kind == ModelKind::CustomCouplings;
  require(alpha.has_value() == alternating, ErrorKind::Config,
          alternating ? "AlternatingChain requires alpha" : "alpha is only valid for AlternatingChain");
  require(delta.has_value() == xxz, ErrorKind::Config,
          xxz ? "TransverseFieldXXZ requires delta" : "delta is only valid for TransverseFieldXXZ");
  require(h_x.has_value() == xxz, ErrorKind::Config,
          xxz ? "TransverseFieldXXZ requires h_x" : "h_x is only valid for TransverseFieldXXZ");
  require(custom || custom_bonds.empty(), ErrorKind::Config, "custom_bonds are only valid for CustomCouplings");
  if (alpha) check_finite(*alpha, "alpha");
  if (delta) check_finite(*delta, "delta");
  if (h_x) check_finite(*h_x, "h_x");
  if (kind == ModelKind::DimerArray) {
    require(n_sites % 2 == 0, ErrorKind::Config, "DimerArray needs an even number of sites");
  }
  if (alternating && boundary == Boundary::Periodic) {
    require(n_sites % 2 == 0, ErrorKind::Config, "periodic AlternatingChain needs an even number of sites");
  }
  for (const Bond& b : custom_bonds) {
    require(b.i >= 0 && b.i < n_sites && b.j >= 0 && b.j < n_sites, ErrorKind::Config,
            "bond site index out of range");
    require(b.i != b.j, ErrorKind::Config, "bond must connect two distinct sites");
    check_finite(b.jxx, "jxx");
    check_finite(b.jyy, "jyy");
    check_finite(b.jzz, "jzz");
  }
}

std::vector<Bond> SpinModel::bonds() const {
  std::vector<Bond> out;
  const int last = boundary == Boundary::Periodic ? n_sites : n_sites - 1;
  switch (kind) {
    case ModelKind::HeisenbergChain:
      for (int i = 0; i < last; ++i) out.push_back({i, (i + 1) % n_sites, j, j, j});
      break;
    case ModelKind::AlternatingChain:
      for (int i = 0; i < last; ++i) {
        const double c = (i % 2 == 0) ? j : *alpha * j;
        out.push_back({i, (i + 1) % n_sites, c, c, c});
      }
      break;
    case ModelKind::TransverseFieldXXZ:
      for (int i = 0; i < last; ++i) out.push_back({i, (i + 1) % n_sites, j, j, *delta * j});
      break;
    case ModelKind::DimerArray:
      for (int i = 0; i + 1 < n_sites; i += 2) out.push_back({i, i + 1, j, j, j});
      break;
    case ModelKind::CustomCouplings:
      out = custom_bonds;
      break;
  }
  return out;
}

bool SpinModel::conserves_total_sz() const {
  if (transverse_field() != 0.0) return false;
  for (const Bond& b : bonds()) {
    if (b.jxx != b.jyy) return false;
  }
  return true;
}

std::string SpinModel::describe() const {
  std::ostringstream os;
  os << to_string(kind) << " n=" << n_sites << " j=" << format_double(j);
  if (alpha) os << " alpha=" << format_double(*alpha);
  if (delta) os << " delta=" << format_double(*delta);
  if (h_x) os << " h_x=" << format_double(*h_x);
  os << " boundary=" << to_string(boundary);
  for (const Bond& b : custom_bonds) {
    os << " bond(" << b.i << "," << b.j << "," << format_double(b.jxx) << "," << format_double(b.jyy) << ","
       << format_double(b.jzz) << ")";
  }
  return os.str();
}

RealMatrix build_hamiltonian(const SpinModel& model, const Capacity& capacity) {
  model.validate();
  if (model.n_sites > capacity.max_dense_sites) {
    fail(ErrorKind::Capacity, "dense Hamiltonian for " + std::to_string(model.n_sites) +
                                  " sites exceeds the configured cap of " +
                                  std::to_string(capacity.max_dense_sites) + " sites");
  }
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(model.n_sites));
  RealMatrix h = RealMatrix::Zero(dim, dim);
  for (const Bond& b : model.bonds()) add_bond_elements(h, nullptr, b, model.n_sites);
  const double hx = model.transverse_field();
  if (hx != 0.0) {
    for (int site = 0; site < model.n_sites; ++site) {
      const std::uint32_t m = site_mask(site, model.n_sites);
      for (Eigen::Index s = 0; s < dim; ++s) h(static_cast<Eigen::Index>(s ^ m), s) += 0.5 * hx;
    }
  }
  return h;
}

RealMatrix build_sector_hamiltonian(const SpinModel& model, int n_down, std::vector<std::uint32_t>& basis,
                                    const Capacity& capacity) {
  sector_basis(model, n_down, basis, capacity);
  const auto sector_dim = static_cast<Eigen::Index>(basis.size());
  RealMatrix h = RealMatrix::Zero(sector_dim, sector_dim);
  for (const Bond& b : model.bonds()) add_bond_elements(h, &basis, b, model.n_sites);
  return h;
}

SparseRealMatrix build_sector_hamiltonian_sparse(const SpinModel& model, int n_down,
                                                 std::vector<std::uint32_t>& basis, const Capacity& capacity) {
  sector_basis(model, n_down, basis, capacity);
  const auto sector_dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<double>> entries;
  for (const Bond& b : model.bonds()) {
    for_bond_elements(&basis, sector_dim, b, model.n_sites, [&entries](Eigen::Index r, Eigen::Index c, double v) {
      if (v != 0.0) entries.emplace_back(r, c, v);
    });
  }
  SparseRealMatrix h(sector_dim, sector_dim);
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

double hamiltonian_norm_bound(const SpinModel& model) {
  double bound = 0.0;
  for (const Bond& b : model.bonds()) bound += 0.25 * (std::abs(b.jxx) + std::abs(b.jyy) + std::abs(b.jzz));
  return bound + 0.5 * model.n_sites * std::abs(model.transverse_field());
}

SpinOperator::SpinOperator(int n_sites, std::vector<SiteTerm> terms, std::string label)
    : n_sites_(n_sites), terms_(std::move(terms)), label_(std::move(label)) {
  require(n_sites >= 1 && n_sites <= kMaxIndexableSites, ErrorKind::InvalidArgument, "invalid site count");
  for (const SiteTerm& t : terms_) {
    require(t.site >= 0 && t.site < n_sites, ErrorKind::InvalidArgument, "operator site index out of range");
  }
}

bool SpinOperator::is_hermitian(double tol) const {
  std::map<std::pair<int, int>, Complex> combined;
  for (const SiteTerm& t : terms_) combined[{static_cast<int>(t.component), t.site}] += t.coefficient;
  return std::all_of(combined.begin(), combined.end(),
                     [tol](const auto& kv) { return std::abs(kv.second.imag()) <= tol; });
}

SpinOperator SpinOperator::adjoint() const {
  SpinOperator out = *this;
  for (SiteTerm& t : out.terms_) t.coefficient = std::conj(t.coefficient);
  out.label_ = label_.empty() ? std::string{} : label_ + "^dag";
  return out;
}

SpinOperator SpinOperator::scaled(Complex factor) const {
  SpinOperator out = *this;
  for (SiteTerm& t : out.terms_) t.coefficient *= factor;
  return out;
}

void SpinOperator::apply(const Eigen::Ref<const ComplexVector>& in, Eigen::Ref<ComplexVector> out) const {
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n_sites_));
  require(in.size() == dim && out.size() == dim, ErrorKind::InvalidArgument, "operator/vector dimension mismatch");
  out.setZero();
  const Complex half_i(0.0, 0.5);
  for (const SiteTerm& t : terms_) {
    const std::uint32_t m = site_mask(t.site, n_sites_);
    const Complex c = t.coefficient;
    switch (t.component) {
      case SpinComponent::Z:
        for (Eigen::Index s = 0; s < dim; ++s) {
          out[s] += (static_cast<std::uint32_t>(s) & m ? -0.5 : 0.5) * c * in[s];
        }
        break;
      case SpinComponent::X:
        for (Eigen::Index s = 0; s < dim; ++s) out[static_cast<Eigen::Index>(s ^ m)] += 0.5 * c * in[s];
        break;
      case SpinComponent::Y:
        for (Eigen::Index s = 0; s < dim; ++s) {
          const Complex amp = (static_cast<std::uint32_t>(s) & m) ? -half_i : half_i;
          out[static_cast<Eigen::Index>(s ^ m)] += amp * c * in[s];
        }
        break;
    }
  }
}

ComplexVector SpinOperator::apply(const Eigen::Ref<const RealVector>& in) const {
  ComplexVector cin = in.cast<Complex>();
  ComplexVector out(cin.size());
  apply(cin, out);
  return out;
}

ComplexVector SpinOperator::apply(const Eigen::Ref<const ComplexVector>& in) const {
  ComplexVector out(in.size());
  apply(in, out);
  return out;
}

ComplexMatrix SpinOperator::dense() const {
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n_sites_));
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  ComplexVector e = ComplexVector::Zero(dim);
  ComplexVector col(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    e[s] = 1.0;
    apply(e, col);
    m.col(s) = col;
    e[s] = 0.0;
  }
  return m;
}

ComplexMatrix SpinOperator::apply_columns(const RealMatrix& in) const {
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n_sites_));
  require(in.rows() == dim, ErrorKind::InvalidArgument, "operator/matrix dimension mismatch");
  std::vector<Eigen::Triplet<double>> re;
  std::vector<Eigen::Triplet<double>> im;
  re.reserve(terms_.size() * static_cast<std::size_t>(dim));
  im.reserve(terms_.size() * static_cast<std::size_t>(dim));
  const Complex half_i(0.0, 0.5);
  for (const SiteTerm& t : terms_) {
    const std::uint32_t m = site_mask(t.site, n_sites_);
    for (Eigen::Index s = 0; s < dim; ++s) {
      const bool down = (static_cast<std::uint32_t>(s) & m) != 0;
      Complex amp;
      Eigen::Index target = s;
      switch (t.component) {
        case SpinComponent::Z:
          amp = down ? -0.5 : 0.5;
          break;
        case SpinComponent::X:
          amp = 0.5;
          target = static_cast<Eigen::Index>(s ^ m);
          break;
        case SpinComponent::Y:
          amp = down ? -half_i : half_i;
          target = static_cast<Eigen::Index>(s ^ m);
          break;
      }
      const Complex v = amp * t.coefficient;
      if (v.real() != 0.0) re.emplace_back(target, s, v.real());
      if (v.imag() != 0.0) im.emplace_back(target, s, v.imag());
    }
  }
  SparseRealMatrix op_re(dim, dim);
  SparseRealMatrix op_im(dim, dim);
  op_re.setFromTriplets(re.begin(), re.end());
  op_im.setFromTriplets(im.begin(), im.end());
  ComplexMatrix out(dim, in.cols());
  out.real() = op_re * in;
  out.imag() = op_im * in;
  return out;
}

std::vector<double> wavevector_grid(int n_sites) {
  std::vector<double> ks;
  for (int n = 0; n < n_sites; ++n) ks.push_back(2.0 * kPi * n / n_sites);
  return ks;
}

bool on_wavevector_grid(double k, int n_sites, double tol) {
  const double n = k * n_sites / (2.0 * kPi);
  return std::abs(n - std::round(n)) < tol;
}

SpinOperator make_operator(const SiteOperatorSpec& spec, int n_sites, Boundary boundary) {
  require(spec.site.has_value() != spec.k.has_value(), ErrorKind::InvalidArgument,
          "operator spec needs exactly one of site or k");
  std::string comp(to_string(spec.component));
  if (spec.site) {
    require(*spec.site >= 0 && *spec.site < n_sites, ErrorKind::InvalidArgument, "site index out of range");
    return SpinOperator(n_sites, {{spec.component, *spec.site, 1.0}}, "S" + comp + "_" + std::to_string(*spec.site));
  }
  const double k = *spec.k;
  require(std::isfinite(k), ErrorKind::InvalidArgument, "wavevector must be finite");
  if (boundary == Boundary::Periodic && !on_wavevector_grid(k, n_sites)) {
    fail(ErrorKind::InvalidArgument, "k = " + format_double(k) + " is not on the periodic grid 2 pi n / " +
                                         std::to_string(n_sites));
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_sites));
  std::vector<SiteTerm> terms;
  for (int i = 0; i < n_sites; ++i) terms.push_back({spec.component, i, norm * std::polar(1.0, k * i)});
  return SpinOperator(n_sites, std::move(terms), "S" + comp + "(k=" + format_double(k) + ")");
}

OperatorMatrix build_operator(const SiteOperatorSpec& spec, int n_sites, Boundary boundary) {
  SpinOperator op = make_operator(spec, n_sites, boundary);
  return {op.dense(), op.is_hermitian(1e-12)};
}

SpinOperator total_spin(SpinComponent component, int n_sites) {
  std::vector<SiteTerm> terms;
  for (int i = 0; i < n_sites; ++i) terms.push_back({component, i, 1.0});
  return SpinOperator(n_sites, std::move(terms), "M" + std::string(to_string(component)));
}

RealMatrix spin_flip_parity(int n_sites) {
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n_sites));
  const auto all = static_cast<Eigen::Index>(dim - 1);
  RealMatrix p = RealMatrix::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s) p(s ^ all, s) = 1.0;
  return p;
}

}  // namespace qwit
