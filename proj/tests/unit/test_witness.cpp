#include <doctest.h>

#include <cmath>
#include <random>

#include "qwit/witness.hpp"

using namespace qwit;

namespace {

TwoSiteState singlet() { return TwoSiteState::from_parity_entries(0, 0, 0.5, 0.5, 0.0, -0.5); }

TwoSiteState random_parity_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
  double a = u(rng), b = u(rng), x = u(rng), y = u(rng);
  const double tr = a + b + x + y;
  a /= tr, b /= tr, x /= tr, y /= tr;
  const Complex c = std::polar(u(rng) * std::sqrt(a * b), ph(rng));
  const Complex z = std::polar(u(rng) * std::sqrt(x * y), ph(rng));
  return TwoSiteState::from_parity_entries(a, b, x, y, c, z);
}

ThermalEnsemble ensemble(const SpinModel& m, double t) {
  return ThermalEnsemble(std::make_shared<const Eigendecomposition>(diagonalize(m)), t);
}

}  // namespace

TEST_CASE("singlet and maximally mixed reference values") {
  const TwoSiteState s = singlet();
  CHECK(concurrence_wootters(s) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(concurrence_parity(s) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(entanglement_of_formation(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(concurrence_dimer(-0.75) == doctest::Approx(1.0));
  CHECK(concurrence_disorder_free(-0.25) == doctest::Approx(1.0));
  const DiscordResult d = discord_general(s);
  CHECK(d.discord == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.mutual_information == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(discord_heisenberg(-1.0) == doctest::Approx(1.0).epsilon(1e-14));

  const TwoSiteState mixed;
  CHECK(concurrence_wootters(mixed) == 0.0);
  CHECK(concurrence_parity(mixed) == 0.0);
  CHECK(discord_general(mixed).discord == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(discord_xyz(mixed) == 0.0);
}

TEST_CASE("entanglement of formation") {
  CHECK(entanglement_of_formation(0.0) == 0.0);
  CHECK(entanglement_of_formation(0.5) == doctest::Approx(0.35457890266527003).epsilon(1e-13));
  CHECK_THROWS_AS(entanglement_of_formation(1.1), Error);
}

TEST_CASE("one-tangle") {
  CHECK(one_tangle(0, 0, 0.5) == 0.0);
  CHECK(one_tangle(0, 0, 0) == 1.0);
  CHECK(one_tangle(0.25, 0, 0) == doctest::Approx(0.75));
  Eigen::Matrix2cd rho;
  rho << 0.5, Complex(0.25, -0.1), Complex(0.25, 0.1), 0.5;
  CHECK(one_tangle(rho) == doctest::Approx(1.0 - 4.0 * (0.0625 + 0.01)));
  CHECK(one_tangle(0, 0, 0.5 + 1e-12) == 0.0);
  CHECK_THROWS_AS(one_tangle(0.4, 0.4, 0.0), Error);
}

TEST_CASE("parity formula agrees with Wootters on random parity states") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const TwoSiteState s = random_parity_state(rng);
    CHECK(concurrence_parity(s) == doctest::Approx(concurrence_wootters(s)).epsilon(1e-7));
  }
  Eigen::Matrix4cd off = Eigen::Matrix4cd::Identity() / 4.0;
  off(0, 1) = off(1, 0) = 0.1;
  CHECK_THROWS_AS(concurrence_parity(TwoSiteState(off)), Error);
}

TEST_CASE("correlator branches agree with Wootters on chain states") {
  for (double t : {0.0, 0.3, 1.0}) {
    const ThermalEnsemble h = ensemble(SpinModel::heisenberg_chain(8, 1.0, Boundary::Periodic), t);
    const TwoSiteState s = reduce_two_site(h, 0, 1);
    const double gzz = two_point(h, SpinComponent::Z, 0, SpinComponent::Z, 1).real();
    const double c = concurrence_wootters(s);
    CHECK(concurrence_heisenberg(gzz, 0.0) == doctest::Approx(c).epsilon(1e-8));
    CHECK(concurrence_disorder_free(gzz) == doctest::Approx(c).epsilon(1e-8));
  }
  const SpinModel xyz = SpinModel::custom(6, {{0, 1, 1.0, 0.5, 0.3}, {1, 2, 1.0, 0.5, 0.3}, {2, 3, 1.0, 0.5, 0.3},
                                              {3, 4, 1.0, 0.5, 0.3}, {4, 5, 1.0, 0.5, 0.3}, {5, 0, 1.0, 0.5, 0.3}});
  for (double t : {0.2, 0.8}) {
    const ThermalEnsemble e = ensemble(xyz, t);
    const TwoSiteState s = reduce_two_site(e, 2, 3);
    auto g = [&](SpinComponent a) { return two_point(e, a, 2, a, 3).real(); };
    const double mz = expectation(e, make_operator(SiteOperatorSpec::at_site(SpinComponent::Z, 2), 6)).real();
    CHECK(concurrence_translation_invariant(g(SpinComponent::X), g(SpinComponent::Y), g(SpinComponent::Z), mz) ==
          doctest::Approx(concurrence_wootters(s)).epsilon(1e-8));
  }
}

TEST_CASE("dimer entanglement and susceptibility thresholds coincide at T = 1/ln 3") {
  const double tc = 1.0 / std::log(3.0);
  for (double t : {0.9 * tc, 1.1 * tc}) {
    const ThermalEnsemble e = ensemble(SpinModel::dimer_array(2, 1.0), t);
    const double c = concurrence_wootters(reduce_two_site(e, 0, 1));
    SusceptibilityInput in;
    in.var_x = magnetization_variance(e, SpinComponent::X);
    in.var_y = magnetization_variance(e, SpinComponent::Y);
    in.var_z = magnetization_variance(e, SpinComponent::Z);
    in.n_sites = 2;
    in.temperature = t;
    const WitnessReport r = susceptibility_witness(in);
    if (t < tc) {
      CHECK(c > 0.01);
      CHECK(r.entangled == Certification::Certified);
      CHECK(*r.bound > r.value);
    } else {
      CHECK(c == 0.0);
      CHECK(r.entangled == Certification::NotCertified);
    }
  }
  SusceptibilityInput free;
  free.var_x = free.var_y = free.var_z = 0.5;
  free.n_sites = 2;
  free.temperature = 1.0;
  CHECK(susceptibility_witness(free).entangled == Certification::NotCertified);
  free.isotropic_g = false;
  CHECK(susceptibility_witness(free).entangled == Certification::Inapplicable);
  // product states sit exactly on the separable bound
  SusceptibilityInput edge;
  edge.var_x = edge.var_y = 0.25;
  edge.n_sites = 1;
  edge.temperature = 0.5;
  CHECK(susceptibility_witness(edge).entangled == Certification::NotCertified);
}

TEST_CASE("two-tangle conventions") {
  RealMatrix c = RealMatrix::Zero(2, 2);
  c(0, 1) = c(1, 0) = 1.0;
  CHECK(two_tangle(c, TwoTangleConvention::PerSite).value == 1.0);
  CHECK(two_tangle(c, TwoTangleConvention::OrderedPairs).value == 2.0);
  const TwoTangle d = two_tangle_by_distance({0.4, 0.1});
  CHECK(d.value == doctest::Approx(0.17));
  CHECK(d.truncation_radius == 2);
  CHECK(to_string(d.convention) == "distance-once");
}

TEST_CASE("closed-form discord matches the general optimizer") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  int tested = 0;
  while (tested < 40) {
    const double gx = u(rng), gy = u(rng), gz = u(rng);
    const TwoSiteState s = TwoSiteState::from_correlators(gx, gy, gz, 0, 0, 0, 0);
    if (s.eigenvalues().minCoeff() < 0) continue;
    ++tested;
    const DiscordResult d = discord_general(s);
    CHECK(d.converged);
    CHECK(d.optimizer_gap >= 0.0);
    CHECK(d.discord == doctest::Approx(discord_xyz(gx, gy, gz)).epsilon(1e-6));
  }
  CHECK(discord_xyz(-0.125, -0.125, -0.125) == doctest::Approx(0.26248318376373436).epsilon(1e-12));
  for (double g : {-0.9, -0.3, 0.0, 0.2, 1.0 / 3.0}) {
    CHECK(discord_heisenberg(g) == doctest::Approx(discord_xyz(g / 4, g / 4, g / 4)).epsilon(1e-12));
  }
}

TEST_CASE("general discord on a complex parity-block state") {
  const TwoSiteState s = TwoSiteState::from_parity_entries(0.4, 0.1, 0.3, 0.2, Complex(0.1, 0.05), Complex(0.15, -0.1));
  const DiscordResult d = discord_general(s);
  CHECK(d.discord == doctest::Approx(0.02480473133340122).epsilon(1e-6));
  CHECK(d.mutual_information == doctest::Approx(0.30633956432265386).epsilon(1e-12));
  CHECK(d.discord <= d.mutual_information);
  CHECK((measurement_direction(d.t, d.y) - d.direction).norm() < 1e-12);
  CHECK(classical_information(s, d.direction) == doctest::Approx(d.classical_correlation).epsilon(1e-14));
  CHECK_THROWS_AS(discord_xyz(s), Error);
}

TEST_CASE("measurement parameters reproduce the Bloch direction") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d n = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    const auto [t, y] = measurement_parameters(n);
    CHECK(t * t + y.squaredNorm() == doctest::Approx(1.0));
    CHECK((measurement_direction(t, y) - n).norm() < 1e-12);
  }
  for (const Eigen::Vector3d n : {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, -1)}) {
    const auto [t, y] = measurement_parameters(n);
    CHECK((measurement_direction(t, y) - n).norm() < 1e-12);
  }
}

TEST_CASE("report serialization") {
  WitnessReport r;
  r.witness = "concurrence";
  r.value = 0.25;
  r.bound = 0.0;
  r.entangled = Certification::Certified;
  r.temperature = ThermalEnsemble::kInfiniteTemperature;
  r.pair = std::make_pair(0, 1);
  r.inputs_digest = "abc";
  const std::string line = r.to_json_line();
  CHECK(line.find("\"entangled\":\"certified\"") != std::string::npos);
  CHECK(line.find("\"T\":\"inf\"") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
  const std::string row = r.to_csv_row();
  const std::string header = WitnessReport::csv_header();
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
}

namespace {

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix2cd m;
  for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = Complex(g(rng), g(rng));
  return Eigen::HouseholderQR<Eigen::Matrix2cd>(m).householderQ();
}

TwoSiteState random_mixed_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix4cd m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = Complex(g(rng), g(rng));
  Eigen::Matrix4cd rho = m * m.adjoint();
  return TwoSiteState(rho / rho.trace().real());
}

Eigen::Matrix2cd projector(Complex a, Complex b) {
  Eigen::Vector2cd v(a, b);
  v.normalize();
  return v * v.adjoint();
}

}  // namespace

TEST_CASE("concurrence and discord are invariant under local unitaries") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const TwoSiteState st = random_mixed_state(rng);
    const Eigen::Matrix4cd u = kron2(random_unitary(rng), random_unitary(rng));
    const TwoSiteState rotated(u * st.rho() * u.adjoint());
    CHECK(concurrence_wootters(rotated) == doctest::Approx(concurrence_wootters(st)).epsilon(1e-9));
    CHECK(discord_general(rotated).discord == doctest::Approx(discord_general(st).discord).epsilon(1e-6));
  }
}

TEST_CASE("separable states with non-orthogonal conditional states carry discord") {
  // (|0><0| x |0><0| + |1><1| x |+><+|) / 2: separable, B measured
  const Eigen::Matrix2cd up = projector(1.0, 0.0);
  const Eigen::Matrix2cd dn = projector(0.0, 1.0);
  const Eigen::Matrix2cd plus = projector(1.0, 1.0);
  const TwoSiteState st(0.5 * (kron2(up, up) + kron2(dn, plus)));
  CHECK(concurrence_wootters(st) == doctest::Approx(0.0));
  const DiscordResult d = discord_general(st);
  CHECK(d.discord > 1e-3);
  CHECK(d.discord < 1.0);

  // classical on B: zero discord for measurements on B
  const TwoSiteState cq(0.5 * (kron2(up, up) + kron2(plus, dn)));
  CHECK(std::abs(discord_general(cq).discord) < 1e-9);
}

TEST_CASE("discord never exceeds the entropy of the measured site") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 40; ++i) {
    const TwoSiteState st = random_mixed_state(rng);
    const double s_b = von_neumann_entropy(ComplexMatrix(st.reduce_second()), LogBase::Bits);
    const DiscordResult d = discord_general(st);
    CHECK(d.discord >= -1e-12);
    CHECK(d.discord <= s_b + 1e-9);
    CHECK(d.classical_correlation <= d.mutual_information + 1e-12);
  }
}
