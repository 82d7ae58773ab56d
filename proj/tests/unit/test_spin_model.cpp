#include <doctest.h>

#include <algorithm>
#include <bit>

#include "qwit/model_config.hpp"
#include "qwit/spin_model.hpp"

using namespace qwit;

namespace {

RealVector sorted_eigenvalues(const RealMatrix& h) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
  return es.eigenvalues();
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

ComplexMatrix site_op(SpinComponent c, int site, int n) {
  return build_operator(SiteOperatorSpec::at_site(c, site), n).matrix;
}

}  // namespace

TEST_CASE("two-site Heisenberg has singlet-triplet spectrum") {
  const RealVector e = sorted_eigenvalues(build_hamiltonian(SpinModel::heisenberg_chain(2, 1.0, Boundary::Open)));
  CHECK(e[0] == doctest::Approx(-0.75).epsilon(1e-14));
  for (int i = 1; i < 4; ++i) CHECK(e[i] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("alternating chain with alpha 1 equals the uniform chain") {
  for (Boundary b : {Boundary::Open, Boundary::Periodic}) {
    const RealMatrix h1 = build_hamiltonian(SpinModel::heisenberg_chain(6, 1.3, b));
    const RealMatrix h2 = build_hamiltonian(SpinModel::alternating_chain(6, 1.3, 1.0, b));
    CHECK((h1 - h2).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("four-site periodic ring ground energy") {
  const RealVector e = sorted_eigenvalues(build_hamiltonian(SpinModel::heisenberg_chain(4, 1.0, Boundary::Periodic)));
  CHECK(e[0] == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("Hamiltonians are real symmetric") {
  const std::vector<SpinModel> models{
      SpinModel::heisenberg_chain(6, 1.0, Boundary::Periodic),
      SpinModel::alternating_chain(6, 1.0, 0.4, Boundary::Periodic),
      SpinModel::transverse_field_xxz(6, 1.0, 0.25, 0.7, Boundary::Open),
      SpinModel::dimer_array(6, 2.0),
      SpinModel::custom(4, {{0, 2, 1.0, -0.5, 0.3}, {1, 3, 0.2, 0.2, 0.9}}),
  };
  for (const auto& m : models) {
    const RealMatrix h = build_hamiltonian(m);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("capacity cap raises instead of truncating") {
  Capacity cap;
  cap.max_dense_sites = 6;
  CHECK_THROWS_AS(build_hamiltonian(SpinModel::heisenberg_chain(8, 1.0, Boundary::Open), cap), Error);
  try {
    build_hamiltonian(SpinModel::heisenberg_chain(8, 1.0, Boundary::Open), cap);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Capacity);
  }
}

TEST_CASE("model invariants are validated") {
  SpinModel m = SpinModel::heisenberg_chain(4, 1.0, Boundary::Open);
  m.alpha = 0.5;
  CHECK_THROWS_AS(m.validate(), Error);
  CHECK_THROWS_AS(SpinModel::heisenberg_chain(1, 1.0, Boundary::Open), Error);
  CHECK_THROWS_AS(SpinModel::dimer_array(5, 1.0), Error);
  CHECK_THROWS_AS(SpinModel::custom(3, {{0, 3, 1, 1, 1}}), Error);
  CHECK_NOTHROW(SpinModel::custom(3, {}));
}

TEST_CASE("single-site and collective operators") {
  const ComplexMatrix sz = site_op(SpinComponent::Z, 0, 1);
  CHECK(sz(0, 0).real() == 0.5);
  CHECK(sz(1, 1).real() == -0.5);
  CHECK(std::abs(sz(0, 1)) == 0.0);

  const OperatorMatrix k0 = build_operator(SiteOperatorSpec::at_wavevector(SpinComponent::Z, 0.0), 4);
  CHECK(k0.hermitian);
  const ComplexMatrix mz = total_spin(SpinComponent::Z, 4).dense();
  CHECK((k0.matrix - mz / 2.0).cwiseAbs().maxCoeff() < 1e-15);

  const OperatorMatrix kpi = build_operator(SiteOperatorSpec::at_wavevector(SpinComponent::Z, kPi), 2);
  CHECK(kpi.hermitian);
  const ComplexMatrix expect = (site_op(SpinComponent::Z, 0, 2) - site_op(SpinComponent::Z, 1, 2)) / std::sqrt(2.0);
  CHECK((kpi.matrix - expect).cwiseAbs().maxCoeff() < 1e-15);

  const OperatorMatrix khalf = build_operator(SiteOperatorSpec::at_wavevector(SpinComponent::X, kPi / 2), 4);
  CHECK_FALSE(khalf.hermitian);
  CHECK_THROWS_AS(build_operator(SiteOperatorSpec::at_wavevector(SpinComponent::X, 1.0), 4), Error);
  CHECK_NOTHROW(build_operator(SiteOperatorSpec::at_wavevector(SpinComponent::X, 1.0), 4, Boundary::Open));
  CHECK_THROWS_AS(build_operator(SiteOperatorSpec::at_site(SpinComponent::X, 4), 4), Error);
}

TEST_CASE("spin commutation relations") {
  const int n = 3;
  const SpinComponent comps[3] = {SpinComponent::X, SpinComponent::Y, SpinComponent::Z};
  const Complex i(0.0, 1.0);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3;
      const int c = (a + 2) % 3;
      const ComplexMatrix lhs = commutator(site_op(comps[a], s, n), site_op(comps[b], s, n));
      CHECK((lhs - i * site_op(comps[c], s, n)).cwiseAbs().maxCoeff() < 1e-15);
      const ComplexMatrix other = commutator(site_op(comps[a], s, n), site_op(comps[b], (s + 1) % n, n));
      CHECK(other.cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("total S^z conservation and spin-flip parity") {
  const ComplexMatrix mz = total_spin(SpinComponent::Z, 6).dense();
  for (const auto& m : {SpinModel::heisenberg_chain(6, 1.0, Boundary::Periodic),
                        SpinModel::transverse_field_xxz(6, 1.0, 0.3, 0.0, Boundary::Periodic)}) {
    CHECK(m.conserves_total_sz());
    const ComplexMatrix h = build_hamiltonian(m).cast<Complex>();
    CHECK(commutator(h, mz).cwiseAbs().maxCoeff() < 1e-14);
  }
  const SpinModel tf = SpinModel::transverse_field_xxz(6, 1.0, 0.3, 0.8, Boundary::Periodic);
  CHECK_FALSE(tf.conserves_total_sz());
  const RealMatrix h = build_hamiltonian(tf);
  CHECK(commutator(h.cast<Complex>(), mz).cwiseAbs().maxCoeff() > 0.1);
  const RealMatrix p = spin_flip_parity(6);
  CHECK((h * p - p * h).cwiseAbs().maxCoeff() < 1e-14);
  // no matrix elements between the +1 and -1 eigenspaces of the spin-flip parity
  const RealMatrix plus = 0.5 * (RealMatrix::Identity(64, 64) + p);
  const RealMatrix minus = 0.5 * (RealMatrix::Identity(64, 64) - p);
  CHECK((plus * h * minus).cwiseAbs().maxCoeff() < 1e-14);
  // the field term mixes even and odd S^z parity, so the z-basis block form needs h_x = 0
  bool mixes = false;
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      if ((std::popcount(static_cast<unsigned>(r)) + std::popcount(static_cast<unsigned>(c))) % 2 != 0 &&
          h(r, c) != 0.0) {
        mixes = true;
      }
    }
  }
  CHECK(mixes);
}

TEST_CASE("sector Hamiltonians reproduce the full spectrum") {
  const SpinModel m = SpinModel::alternating_chain(8, 1.0, 0.6, Boundary::Periodic);
  std::vector<double> merged;
  for (int d = 0; d <= 8; ++d) {
    std::vector<std::uint32_t> basis;
    const RealMatrix dense = build_sector_hamiltonian(m, d, basis);
    const RealMatrix sparse(build_sector_hamiltonian_sparse(m, d, basis));
    CHECK((dense - sparse).cwiseAbs().maxCoeff() < 1e-15);
    const RealVector e = sorted_eigenvalues(dense);
    merged.insert(merged.end(), e.data(), e.data() + e.size());
  }
  std::sort(merged.begin(), merged.end());
  const RealVector full = sorted_eigenvalues(build_hamiltonian(m));
  REQUIRE(merged.size() == 256);
  for (int i = 0; i < 256; ++i) CHECK(merged[i] == doctest::Approx(full[i]).epsilon(1e-12));
}

TEST_CASE("matrix-free application matches dense operator") {
  const SpinOperator op = make_operator(SiteOperatorSpec::at_wavevector(SpinComponent::Y, 2 * kPi / 5), 5);
  RealMatrix u(32, 3);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 3; ++c) u(r, c) = std::sin(0.3 * r + 1.7 * c);
  }
  const ComplexMatrix ref = op.dense() * u.cast<Complex>();
  CHECK((op.apply_columns(u) - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((op.apply(RealVector(u.col(1))) - ref.col(1)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("model config round trip") {
  const SpinModel m = SpinModel::transverse_field_xxz(8, 1.25, 0.1, 0.3, Boundary::Periodic);
  const std::string text = serialize_model_config(m);
  CHECK(parse_model_config(text) == m);
  const SpinModel c = SpinModel::custom(3, {{0, 1, 0.1, 0.2, 0.30000000000000004}, {1, 2, 1, 1, 1}});
  CHECK(parse_model_config(serialize_model_config(c)) == c);
  CHECK_THROWS_AS(parse_model_config("model:\n  kind: HeisenbergChain\n  n_sites: 4\n  bogus: 1\n"), Error);
  CHECK_THROWS_AS(parse_model_config("model: [1, 2"), Error);
  const SpinModel parsed =
      parse_model_config("model:\n  kind: AlternatingChain\n  n_sites: 6\n  j: 2\n  alpha: 0.5\n  boundary: Periodic\n");
  CHECK(parsed == SpinModel::alternating_chain(6, 2.0, 0.5, Boundary::Periodic));
}
