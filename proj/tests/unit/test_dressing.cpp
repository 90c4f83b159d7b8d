#include "rydpol/dressing.hpp"
#include "rydpol/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace rydpol::dressing;
using rydpol::angular::half;
using rydpol::angular::HalfInt;
using std::numbers::pi;

namespace {

const TransitionClass kHalf0 = TransitionClass::from_twice(1, 0);
const TransitionClass kHalfP = TransitionClass::from_twice(1, 1);
const TransitionClass kHalfM = TransitionClass::from_twice(1, -1);
const TransitionClass kThree0 = TransitionClass::from_twice(3, 0);
const TransitionClass kThreeP = TransitionClass::from_twice(3, 1);
const TransitionClass kThreeM = TransitionClass::from_twice(3, -1);

// Entry-by-entry transcription of the coupling-matrix formula with raw
// 1-based indices i, j. In this indexing both blocks run from the largest m
// down, so it is compared after reversing each block.
Eigen::MatrixXd raw_index_matrix(const TransitionClass &cls, double phi) {
  const HalfInt J = cls.J, Jp = cls.j_prime();
  const int ap = std::abs(cls.p);
  const double Jv = J.value();
  const double pre = std::sqrt((2 * Jv + 1) / (4 * (Jv + 1))) *
                     std::sqrt(std::pow(2 * Jv + 3, ap) / std::pow(Jv, 1 - ap));
  const int n = cls.dim();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  auto threej = [&](HalfInt m1, int q, HalfInt m3) {
    if (abs(m1) > J || abs(m3) > Jp)
      return 0.0;
    return rydpol::angular::wigner3j(J, HalfInt(1), Jp, m1, HalfInt(q), m3);
  };
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int q : {-1, +1}) {
        // J + 1 - j and -3J - |p| - 2 + i as doubled integers.
        const HalfInt a1 = J + HalfInt(1) - HalfInt(j);
        const HalfInt a3 = HalfInt(i - 2 - ap) - J - J - J;
        const HalfInt b1 = J + HalfInt(1) - HalfInt(i);
        const HalfInt b3 = HalfInt(j - 2 - ap) - J - J - J;
        const double w = std::cos(phi / 2) + q * std::sin(phi / 2);
        M(i - 1, j - 1) += pre * (threej(a1, q, a3) + threej(b1, q, b3)) * w;
      }
  return M;
}

Eigen::MatrixXd reverse_blocks(const Eigen::MatrixXd &M, int n1) {
  const int n = static_cast<int>(M.rows());
  std::vector<int> perm(n);
  for (int k = 0; k < n1; ++k)
    perm[k] = n1 - 1 - k;
  for (int k = n1; k < n; ++k)
    perm[k] = n1 + (n - 1 - k);
  Eigen::MatrixXd out(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      out(a, b) = M(perm[a], perm[b]);
  return out;
}

const TransitionClass kAll[] = {kHalf0, kHalfP, kHalfM, kThree0, kThreeP, kThreeM};

} // namespace

TEST_CASE("TransitionClass validation and derived sizes") {
  CHECK(kThreeP.dim() == 10);
  CHECK(kHalf0.dim() == 4);
  CHECK(kHalfP.dim() == 6);
  CHECK(kThree0.dim() == 8);
  CHECK(kThreeP.j_prime() == half(5));
  CHECK(kThreeP.label() == "3/2^+");
  CHECK_THROWS_AS(TransitionClass::from_twice(0, 0), rydpol::Error);
  CHECK_THROWS_AS(TransitionClass::from_twice(2, 0), rydpol::Error);
  CHECK_THROWS_AS(TransitionClass::from_twice(1, 2), rydpol::Error);
  CHECK_THROWS_AS(TransitionClass::from_twice(-1, 0), rydpol::Error);
}

TEST_CASE("basis ordering is r1 ascending then r2 ascending") {
  const auto b = basis(kThreeP);
  REQUIRE(b.size() == 10);
  CHECK(b[0].level == Level::r1);
  CHECK(b[0].m == half(-3));
  CHECK(b[3].m == half(3));
  CHECK(b[4].level == Level::r2);
  CHECK(b[4].m == half(-5));
  CHECK(b[9].m == half(5));
}

TEST_CASE("coupling matrix equals the raw-index transcription") {
  for (const auto &cls : kAll)
    for (double phi : {0.0, 0.7, pi / 2, 2.0, pi, 4.4, 5.9}) {
      const auto M = coupling_matrix(cls, phi).entries;
      const auto R = reverse_blocks(raw_index_matrix(cls, phi), cls.J.multiplicity());
      CAPTURE(cls.label());
      CAPTURE(phi);
      CHECK((M - R).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("coupling matrix is symmetric with empty diagonal blocks") {
  for (const auto &cls : kAll)
    for (double phi = 0.0; phi < 2 * pi; phi += 0.3) {
      const auto M = coupling_matrix(cls, phi).entries;
      const int n1 = cls.J.multiplicity();
      const int n2 = cls.j_prime().multiplicity();
      CHECK(M == M.transpose());
      CHECK(M.topLeftCorner(n1, n1).cwiseAbs().maxCoeff() == 0.0);
      CHECK(M.bottomRightCorner(n2, n2).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("1/2^0 eigenvalues are the closed form times 2/3") {
  const auto s0 = eigen_spectrum(kHalf0, 0.0);
  const double v = kHalfZeroMatrixScale / std::numbers::sqrt2;
  REQUIRE(s0.eigenvalues.size() == 4);
  CHECK(s0.eigenvalues[0] == doctest::Approx(-v).epsilon(1e-14));
  CHECK(s0.eigenvalues[1] == doctest::Approx(-v).epsilon(1e-14));
  CHECK(s0.eigenvalues[2] == doctest::Approx(v).epsilon(1e-14));
  CHECK(s0.eigenvalues[3] == doctest::Approx(v).epsilon(1e-14));

  for (double phi = 0.0; phi <= 2 * pi; phi += 2 * pi / 997) {
    auto cf = closed_form_eigenvalues_half(phi);
    std::sort(cf.begin(), cf.end());
    const auto s = eigen_spectrum(kHalf0, phi);
    for (int n = 0; n < 4; ++n)
      CHECK(std::abs(s.eigenvalues[n] - kHalfZeroMatrixScale * cf[n]) < 1e-13);
  }
}

TEST_CASE("closed form worked values") {
  const double r = std::numbers::sqrt2 / 2;
  auto a = closed_form_eigenvalues_half(0.0);
  CHECK(a[0] == doctest::Approx(r));
  CHECK(a[1] == doctest::Approx(-r));
  CHECK(a[2] == doctest::Approx(-r));
  CHECK(a[3] == doctest::Approx(r));
  a = closed_form_eigenvalues_half(pi / 2);
  CHECK(a[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(a[1] == doctest::Approx(-1.0));
  CHECK(a[2] == doctest::Approx(0.0).scale(1.0));
  CHECK(a[3] == doctest::Approx(1.0));
  a = closed_form_eigenvalues_half(pi);
  CHECK(a[0] == doctest::Approx(-r));
  CHECK(a[1] == doctest::Approx(-r));
  CHECK(a[2] == doctest::Approx(r));
  CHECK(a[3] == doctest::Approx(r));
}

TEST_CASE("distinct eigenvalue counts of the four classes") {
  const TransitionClass classes[] = {kHalf0, kHalfP, kThree0, kThreeP};
  const int linear[] = {2, 3, 4, 5};
  const int maximum[] = {4, 5, 8, 9};
  const auto grid = phi_grid(720);
  for (int c = 0; c < 4; ++c) {
    CAPTURE(classes[c].label());
    CHECK(eigen_spectrum(classes[c], 0.0).distinct_count() == linear[c]);
    CHECK(eigen_spectrum(classes[c], pi).distinct_count() == linear[c]);
    int best = 0;
    for (const auto &s : spectrogram(classes[c], grid))
      best = std::max(best, s.distinct_count());
    CHECK(best == maximum[c]);
  }
  // 1/2^0 at circular polarization: {-1, 0, 0, +1} up to scale.
  const auto lcp = eigen_spectrum(kHalf0, pi / 2);
  CHECK(lcp.distinct_count() == 3);
  CHECK(lcp.degeneracies[1] == 2);
}

TEST_CASE("nonzero eigenvalues are doubly degenerate only on the equator") {
  for (const auto &cls : {kHalf0, kHalfP, kThree0, kThreeP}) {
    for (double phi : {0.0, pi}) {
      const auto s = eigen_spectrum(cls, phi);
      for (std::size_t k = 0; k < s.distinct_values.size(); ++k)
        if (std::abs(s.distinct_values[k]) > 1e-9)
          CHECK(s.degeneracies[k] == 2);
    }
    const auto s = eigen_spectrum(cls, 1.1);
    for (std::size_t k = 0; k < s.distinct_values.size(); ++k)
      if (std::abs(s.distinct_values[k]) > 1e-9)
        CHECK(s.degeneracies[k] == 1);
  }
}

TEST_CASE("spectra are symmetric about zero and mirror in phi") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2 * pi);
  for (const auto &cls : kAll)
    for (int t = 0; t < 40; ++t) {
      const double phi = u(rng);
      const auto a = eigen_spectrum(cls, phi).eigenvalues;
      const auto b = eigen_spectrum(cls, 2 * pi - phi).eigenvalues;
      const std::size_t n = a.size();
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(a[k] + a[n - 1 - k]) < 1e-12);
        CHECK(std::abs(a[k] - b[k]) < 1e-12);
      }
    }
}

TEST_CASE("oracle matrix agrees up to one global scale") {
  for (const auto &cls : {kHalf0, kHalfP, kThree0, kThreeP, kHalfM, kThreeM}) {
    for (int k = 0; k < 64; ++k) {
      const double phi = 2 * pi * k / 64;
      const auto ref = eigen_spectrum(cls, phi).eigenvalues;
      const auto oracle = hermitian_eigenvalues(
          oracle_matrix(cls, rydpol::sop::sop_from_phi(phi)).entries);
      // Least-squares scale, then the relative residual.
      double num = 0.0, den = 0.0, norm = 0.0;
      for (std::size_t n = 0; n < ref.size(); ++n) {
        num += ref[n] * oracle[n];
        den += oracle[n] * oracle[n];
        norm = std::max(norm, std::abs(ref[n]));
      }
      const double scale = num / den;
      CHECK(scale == doctest::Approx(kOracleToCouplingScale).epsilon(1e-12));
      for (std::size_t n = 0; n < ref.size(); ++n)
        CHECK(std::abs(scale * oracle[n] - ref[n]) < 1e-12 * norm);
    }
  }
}

TEST_CASE("oracle matrix selection rule with a single helicity") {
  const auto s = rydpol::sop::RfSop::from_amplitudes({1.0, 0.0}, {0.0, 0.0});
  const auto o = oracle_matrix(kThreeP, s);
  for (std::size_t a = 0; a < o.basis.size(); ++a)
    for (std::size_t b = 0; b < o.basis.size(); ++b) {
      if (o.basis[a].level != Level::r2 || o.basis[b].level != Level::r1)
        continue;
      if (o.basis[a].m != o.basis[b].m + HalfInt(1))
        CHECK(std::abs(o.entries(static_cast<Eigen::Index>(a),
                                 static_cast<Eigen::Index>(b))) == 0.0);
    }
  CHECK((o.entries - o.entries.adjoint()).norm() < 1e-15);
}

TEST_CASE("3/2^+ at circular polarization has 9 distinct values and a zero") {
  const auto s = eigen_spectrum(kThreeP, pi / 2);
  CHECK(s.eigenvalues.size() == 10);
  CHECK(s.distinct_count() == 9);
  bool zero = false;
  for (double v : s.distinct_values)
    zero = zero || std::abs(v) < 1e-12;
  CHECK(zero);
}

TEST_CASE("envelope worked values") {
  auto e = envelopes_exact(0.0);
  CHECK(e.outer_plus == doctest::Approx(2 * std::sqrt(3.0) / 5).epsilon(1e-14));
  CHECK(e.inner_plus == doctest::Approx(2 * std::sqrt(2.0) / 5).epsilon(1e-14));
  e = envelopes_exact(pi / 2);
  CHECK(e.outer_plus == doctest::Approx(2 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(e.inner_plus == doctest::Approx(std::sqrt(2.0) / 5).epsilon(1e-14));
  const auto a = envelopes_approx(pi / 2);
  CHECK(a.outer_plus == doctest::Approx(2 * std::sqrt(3.0) / 5 +
                                        2 * (std::sqrt(5.0) - std::sqrt(3.0)) / 5));
  CHECK(a.inner_plus == doctest::Approx(std::sqrt(2.0) / 5));
}

TEST_CASE("exact envelopes bound the 3/2^+- spectra") {
  for (const auto &cls : {kThreeP, kThreeM})
    for (double phi = 0.0; phi <= 2 * pi; phi += 2 * pi / 500) {
      const auto s = eigen_spectrum(cls, phi);
      const auto num = numeric_envelopes(s);
      const auto ex = envelopes_exact(phi);
      CHECK(std::abs(num.outer_plus - ex.outer_plus) < 1e-9);
      CHECK(std::abs(num.inner_plus - ex.inner_plus) < 1e-9);
      CHECK(ex.outer_minus == -ex.outer_plus);
      CHECK(ex.inner_minus == -ex.inner_plus);
      CHECK(ex.outer_plus >= ex.inner_plus);
      CHECK(ex.inner_plus >= 0.0);
    }
}

TEST_CASE("spectrogram grid handling") {
  const auto one = spectrogram(kThreeP, {0.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].eigenvalues == eigen_spectrum(kThreeP, 0.0).eigenvalues);
  CHECK_THROWS_AS(spectrogram(kThreeP, {-0.1}), rydpol::Error);
  CHECK_THROWS_AS(spectrogram(kThreeP, {7.0}), rydpol::Error);
  CHECK_THROWS_AS(eigen_spectrum(kThreeP, 0.0, 0.0), rydpol::Error);
  const auto g = phi_grid(4, true);
  CHECK(g.size() == 4);
  CHECK(g.back() == doctest::Approx(2 * pi));
  const auto h = phi_grid(4);
  CHECK(h.back() == doctest::Approx(1.5 * pi));
}

TEST_CASE("bands are continuous in phi") {
  for (const auto &cls : kAll) {
    const auto rows = spectrogram(cls, phi_grid(2048, true));
    const double h = 2 * pi / 2047;
    double worst = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k)
      for (std::size_t n = 0; n < rows[k].eigenvalues.size(); ++n)
        worst = std::max(worst,
                         std::abs(rows[k].eigenvalues[n] - rows[k - 1].eigenvalues[n]));
    // Eigenvalues are Lipschitz with constant ||dM/dphi|| <= ||M||.
    CHECK(worst < 1.5 * h);
  }
}
