#include "rydpol/dressing.hpp"
#include "rydpol/error.hpp"
#include "rydpol/inversion.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace rydpol::inversion;
using rydpol::ErrorCode;
using rydpol::sop::OpticsPreset;
using std::numbers::pi;

namespace {

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const rydpol::Error &e) {
    return e.code();
  }
  FAIL("no rydpol::Error thrown");
  return ErrorCode::io_failure;
}

SampledSpectrum lorentzians(const std::vector<double> &centers, double width,
                            double scale = 1.0, int n = 2001) {
  SampledSpectrum s;
  for (int k = 0; k < n; ++k) {
    const double x = -2.0 + 4.0 * k / (n - 1);
    double y = 0.0;
    for (double c : centers)
      y += 1.0 / (1.0 + ((x - c) / width) * ((x - c) / width));
    s.detuning.push_back(x);
    s.amplitude.push_back(scale * y);
  }
  return s;
}

bool same_set(const std::vector<double> &a, const std::vector<double> &b,
              double tol = 1e-9) {
  if (a.size() != b.size())
    return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > tol)
      return false;
  return true;
}

} // namespace

TEST_CASE("four synthetic lines are located and paired") {
  const auto s = lorentzians({-0.9, -0.3, 0.3, 0.9}, 0.05);
  const auto peaks = find_peaks(s, {});
  REQUIRE(peaks.size() == 4);
  const auto ps = extract_peaks(s, {}, PairRule::five_half);
  CHECK(ps.lambda_o_plus == doctest::Approx(0.9).epsilon(0.005));
  CHECK(ps.lambda_o_minus == doctest::Approx(-0.9).epsilon(0.005));
  CHECK(ps.lambda_i_plus == doctest::Approx(0.3).epsilon(0.005));
  CHECK(ps.lambda_i_minus == doctest::Approx(-0.3).epsilon(0.005));
  CHECK_FALSE(ps.has_central);
  CHECK(ratio_five_half(ps) == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("ratio does not depend on the overall signal level") {
  const auto a = extract_peaks(lorentzians({-0.9, -0.3, 0.3, 0.9}, 0.05), {},
                               PairRule::five_half);
  const auto b = extract_peaks(lorentzians({-0.9, -0.3, 0.3, 0.9}, 0.05, 7.5),
                               {}, PairRule::five_half);
  CHECK(ratio_five_half(a) == doctest::Approx(ratio_five_half(b)).epsilon(1e-12));
}

TEST_CASE("two lines give R = 1 for the 1/2^0 rule") {
  const auto ps = extract_peaks(lorentzians({-0.7, 0.7}, 0.05), {},
                                PairRule::half_zero);
  CHECK(ratio_half(ps) == doctest::Approx(1.0));
  const auto pc = invert_half(ratio_half(ps));
  CHECK(pc.principal == doctest::Approx(0.0).scale(1.0));
  CHECK(same_set(pc.candidates, {0.0, pi}, 1e-6));
  CHECK(pc.ambiguity == AmbiguityClass::twofold);
}

TEST_CASE("a central line stands for a coalesced inner pair") {
  const auto ps = extract_peaks(lorentzians({-0.7, 0.0, 0.7}, 0.05), {0.001, 0.0, 0.05},
                                PairRule::half_zero);
  CHECK(ps.has_central);
  CHECK(ratio_half(ps) == doctest::Approx(0.0).scale(1.0));
  const auto pc = invert_half(0.0);
  CHECK(pc.principal == doctest::Approx(pi / 2));
  CHECK(same_set(pc.candidates, {pi / 2, 3 * pi / 2}));
}

TEST_CASE("peak extraction error paths") {
  SampledSpectrum flat;
  for (int k = 0; k < 50; ++k) {
    flat.detuning.push_back(k);
    flat.amplitude.push_back(1.0);
  }
  CHECK(code_of([&] { extract_peaks(flat, {}, PairRule::five_half); }) ==
        ErrorCode::fewer_than_four_peaks);
  CHECK(code_of([&] { extract_peaks(flat, {}, PairRule::half_zero); }) ==
        ErrorCode::fewer_than_four_peaks);
  CHECK(code_of([&] {
          extract_peaks(lorentzians({0.3, 0.6, 0.9, 1.2}, 0.05), {}, PairRule::five_half);
        }) == ErrorCode::non_straddling);

  SampledSpectrum bad = flat;
  bad.detuning[10] = bad.detuning[9];
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::invalid_argument);
  bad = flat;
  bad.amplitude.pop_back();
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::dimension_mismatch);
  bad = flat;
  bad.amplitude[3] = std::nan("");
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::invalid_argument);

  PeakSet zero;
  CHECK(code_of([&] { ratio_half(zero); }) == ErrorCode::degenerate_outer);
  CHECK(code_of([&] { ratio_five_half(zero); }) == ErrorCode::degenerate_inner);
}

TEST_CASE("1/2^0 ratio of the dressed eigenvalues") {
  using rydpol::dressing::TransitionClass;
  const auto cls = TransitionClass::from_twice(1, 0);
  auto ratio_at = [&](double phi) {
    const auto s = rydpol::dressing::eigen_spectrum(cls, phi);
    return ratio_half(peaks_from_eigenvalues(s.eigenvalues, PairRule::half_zero));
  };
  CHECK(ratio_at(0.0) == doctest::Approx(1.0));
  CHECK(ratio_at(pi / 2) == doctest::Approx(0.0).scale(1.0));
  CHECK(ratio_at(pi / 4) == doctest::Approx(std::tan(pi / 8)).epsilon(1e-12));
  CHECK(ratio_at(pi) == doctest::Approx(1.0));
}

TEST_CASE("1/2^0 inversion worked values") {
  CHECK(phi_tilde(1.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(phi_tilde(0.0) == doctest::Approx(pi / 2));
  CHECK(phi_tilde(std::tan(pi / 8)) == doctest::Approx(pi / 4));
  const auto pc = invert_half(std::tan(pi / 8));
  CHECK(same_set(pc.candidates, {pi / 4, 3 * pi / 4, 5 * pi / 4, 7 * pi / 4}));
  CHECK(pc.ambiguity == AmbiguityClass::fourfold);
  CHECK(code_of([] { phi_tilde(1.1); }) == ErrorCode::out_of_range);
  CHECK(code_of([] { phi_tilde(-0.1); }) == ErrorCode::out_of_range);
  CHECK(phi_tilde(1.0 + 1e-12) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("1/2^0 round trip over the full circle") {
  using rydpol::dressing::TransitionClass;
  const auto cls = TransitionClass::from_twice(1, 0);
  for (int k = 0; k < 180; ++k) {
    const double phi = (k + 0.5) * 2 * pi / 180;
    const auto s = rydpol::dressing::eigen_spectrum(cls, phi);
    const auto pc =
        invert_half(ratio_half(peaks_from_eigenvalues(s.eigenvalues, PairRule::half_zero)));
    CHECK(distance_to_set(phi, pc.candidates) < 1e-7);
  }
}

TEST_CASE("3/2^+- ratio endpoints and monotonicity") {
  CHECK(five_half_ratio_exact(0.0) == doctest::Approx(kFiveHalfRatioMin).epsilon(1e-14));
  CHECK(five_half_ratio_exact(pi / 2) == doctest::Approx(kFiveHalfRatioMax).epsilon(1e-14));
  CHECK(five_half_ratio_approx(0.0) == doctest::Approx(kFiveHalfRatioMin).epsilon(1e-14));
  CHECK(five_half_ratio_approx(pi / 2) == doctest::Approx(kFiveHalfRatioMax).epsilon(1e-14));
  double prev_e = 0.0, prev_a = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double phi = pi / 2 * k / 1000;
    const double e = five_half_ratio_exact(phi), a = five_half_ratio_approx(phi);
    if (k > 0) {
      CHECK(e > prev_e);
      CHECK(a > prev_a);
    }
    prev_e = e;
    prev_a = a;
  }
}

TEST_CASE("3/2^+- closed-form inverse undoes the approximate ratio") {
  for (int k = 0; k <= 500; ++k) {
    const double phi = pi / 2 * k / 500;
    CHECK(std::abs(phi_p_approx(five_half_ratio_approx(phi)) - phi) < 1e-7);
    CHECK(std::abs(phi_p_exact(five_half_ratio_exact(phi)) - phi) < 1e-9);
  }
  for (int k = 0; k <= 2000; ++k) {
    const double r = kFiveHalfRatioMin + (kFiveHalfRatioMax - kFiveHalfRatioMin) * k / 2000;
    const double x = phi_p_approx(r);
    CHECK(std::abs(five_half_ratio_approx(x) - r) < 1e-9);
  }
  CHECK(code_of([] { phi_p_approx(1.0); }) == ErrorCode::out_of_range);
  CHECK(code_of([] { phi_p_exact(3.5); }) == ErrorCode::out_of_range);
}

TEST_CASE("closed-form inverse against the exact ratio stays within 1%") {
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double r = kFiveHalfRatioMin + (kFiveHalfRatioMax - kFiveHalfRatioMin) * k / 2000;
    worst = std::max(worst, std::abs(five_half_ratio_exact(phi_p_approx(r)) - r) / r);
  }
  INFO("max relative residual ", worst);
  CHECK(worst < 0.01);
}

TEST_CASE("ratio of the exact dressed spectrum matches the exact envelope ratio") {
  using rydpol::dressing::TransitionClass;
  for (int p : {1, -1}) {
    const auto cls = TransitionClass::from_twice(3, p);
    for (int k = 1; k < 90; ++k) {
      const double phi = 4 * pi * k / 180;
      const auto s = rydpol::dressing::eigen_spectrum(cls, phi);
      const double r =
          ratio_five_half(peaks_from_eigenvalues(s.eigenvalues, PairRule::five_half));
      CHECK(r == doctest::Approx(five_half_ratio_exact(phi)).epsilon(1e-9));
    }
  }
}

TEST_CASE("candidate sets are closed under the ratio symmetries") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, pi / 2);
  for (int t = 0; t < 200; ++t) {
    const double x = u(rng);
    const auto c = candidate_set(x);
    for (double phi : c) {
      CHECK(phi >= 0.0);
      CHECK(phi < 2 * pi);
      CHECK(five_half_ratio_exact(phi) == doctest::Approx(five_half_ratio_exact(x)));
      CHECK(distance_to_set(pi - phi, c) < 1e-9);
      CHECK(distance_to_set(2 * pi - phi, c) < 1e-9);
    }
  }
  CHECK(candidate_set(0.0).size() == 2);
  CHECK(candidate_set(pi / 2).size() == 2);
  CHECK(candidate_set(0.3).size() == 4);
}

TEST_CASE("central-peak gate prunes by optics configuration") {
  ProminenceGate bright{1.0, 0.5, 0.0, OpticsPreset::standard};
  auto pc = invert_five_half(kFiveHalfRatioMax, bright);
  CHECK(same_set(pc.candidates, {pi / 2, 3 * pi / 2}));
  CHECK(same_set(pc.pruned, {pi / 2, 3 * pi / 2}));
  CHECK(pc.ambiguity == AmbiguityClass::twofold);

  bright.config = OpticsPreset::rotated_circular;
  pc = invert_five_half(kFiveHalfRatioMax, bright);
  CHECK(same_set(pc.pruned, {pi / 2}));
  CHECK(pc.ambiguity == AmbiguityClass::unique);

  const ProminenceGate dark{0.0, 0.5, 0.0, OpticsPreset::standard};
  pc = invert_five_half(kFiveHalfRatioMin, dark);
  CHECK(same_set(pc.candidates, {0.0, pi}));
  CHECK(same_set(pc.pruned, {0.0}));
  CHECK(pc.ambiguity == AmbiguityClass::unique);

  pc = invert_five_half(2.0, std::nullopt);
  CHECK(pc.candidates.size() == 4);
  CHECK(pc.pruned == pc.candidates);
  CHECK(code_of([] { invert_five_half(1.0, std::nullopt); }) == ErrorCode::out_of_range);
}

TEST_CASE("dead band around the threshold suppresses pruning") {
  const ProminenceGate g{0.52, 0.5, 0.05, OpticsPreset::standard};
  const auto pc = invert_five_half(2.0, g);
  CHECK(pc.prominence_ambiguous);
  CHECK(pc.pruned == pc.candidates);
  CHECK(pc.ambiguity == AmbiguityClass::fourfold);

  const ProminenceGate clear{0.56, 0.5, 0.05, OpticsPreset::standard};
  const auto pd = invert_five_half(2.0, clear);
  CHECK_FALSE(pd.prominence_ambiguous);
  CHECK(pd.pruned.size() == 2);
}

TEST_CASE("bright intervals") {
  CHECK(in_bright_interval(pi, OpticsPreset::standard));
  CHECK(in_bright_interval(pi / 2, OpticsPreset::standard));
  CHECK_FALSE(in_bright_interval(0.2, OpticsPreset::standard));
  CHECK_FALSE(in_bright_interval(5.0, OpticsPreset::standard));
  CHECK(in_bright_interval(0.2, OpticsPreset::rotated_circular));
  CHECK(in_bright_interval(pi, OpticsPreset::rotated_circular));
  CHECK_FALSE(in_bright_interval(4.0, OpticsPreset::rotated_circular));
}

TEST_CASE("combining two configurations intersects the pruned sets") {
  const ProminenceGate std_bright{1.0, 0.5, 0.0, OpticsPreset::standard};
  const ProminenceGate rot_bright{1.0, 0.5, 0.0, OpticsPreset::rotated_circular};
  const double r = five_half_ratio_approx(pi / 3);
  const auto a = invert_five_half(r, std_bright);
  const auto b = invert_five_half(r, rot_bright);
  const auto c = combine(a, b, 1e-6);
  REQUIRE(c.pruned.size() == 1);
  CHECK(c.pruned[0] == doctest::Approx(2 * pi / 3).epsilon(1e-7));
  CHECK(c.ambiguity == AmbiguityClass::unique);
  CHECK(c.ratio == a.ratio);

  CHECK(classify(4) == AmbiguityClass::fourfold);
  CHECK(classify(2) == AmbiguityClass::twofold);
  CHECK(classify(1) == AmbiguityClass::unique);
  CHECK(classify(0) == AmbiguityClass::none);
  CHECK(to_string(AmbiguityClass::twofold) == "twofold");
}

TEST_CASE("angular distance wraps around the circle") {
  CHECK(distance_to_set(0.01, {2 * pi - 0.01}) == doctest::Approx(0.02));
  CHECK(distance_to_set(1.0, {1.5, 0.8}) == doctest::Approx(0.2));
}
