#include "rydpol/inversion.hpp"

#include "rydpol/dressing.hpp"
#include "rydpol/error.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rydpol::inversion {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Vertex of the parabola through three points; falls back to the middle
// point when the samples are collinear.
double parabolic_vertex(double x0, double y0, double x1, double y1, double x2,
                        double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curv = (d12 - d01) / (x2 - x0);
  if (!(curv < 0.0))
    return x1;
  const double x = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
  return std::clamp(x, x0, x2);
}

std::vector<Peak> merge_close(std::vector<Peak> peaks, double merge_tol) {
  if (peaks.empty() || !(merge_tol > 0.0))
    return peaks;
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak &a, const Peak &b) { return a.position < b.position; });
  std::vector<Peak> out;
  std::size_t i = 0;
  while (i < peaks.size()) {
    std::size_t j = i + 1;
    while (j < peaks.size() &&
           peaks[j].position - peaks[j - 1].position < merge_tol)
      ++j;
    double wsum = 0.0, xsum = 0.0;
    Peak merged{0.0, 0.0, 0.0};
    for (std::size_t k = i; k < j; ++k) {
      const double w = std::max(peaks[k].prominence, 1e-300);
      wsum += w;
      xsum += w * peaks[k].position;
      merged.height = std::max(merged.height, peaks[k].height);
      merged.prominence = std::max(merged.prominence, peaks[k].prominence);
    }
    merged.position = xsum / wsum;
    out.push_back(merged);
    i = j;
  }
  return out;
}

} // namespace

void SampledSpectrum::validate() const {
  if (detuning.size() != amplitude.size())
    throw Error(ErrorCode::dimension_mismatch,
                "detuning and amplitude have different lengths");
  if (detuning.size() < 8)
    throw Error(ErrorCode::invalid_argument,
                "spectrum needs at least 8 samples");
  for (std::size_t i = 0; i < detuning.size(); ++i) {
    if (!std::isfinite(detuning[i]) || !std::isfinite(amplitude[i]))
      throw Error(ErrorCode::invalid_argument, "spectrum has non-finite values");
    if (i > 0 && !(detuning[i] > detuning[i - 1]))
      throw Error(ErrorCode::invalid_argument,
                  "detuning grid must be strictly increasing");
  }
}

std::vector<Peak> find_peaks(const SampledSpectrum &spectrum,
                             const PeakOptions &options) {
  spectrum.validate();
  const auto &x = spectrum.detuning;
  const auto &y = spectrum.amplitude;
  const std::size_t n = y.size();

  std::vector<Peak> peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(y[i] > y[i - 1])) {
      ++i;
      continue;
    }
    // Walk across a flat top.
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i])
      ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) {
      i = j + 1;
      continue;
    }

    const double h = y[i];
    double left_min = h;
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > h)
        break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = h;
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > h)
        break;
      right_min = std::min(right_min, y[k]);
    }
    const double prominence = h - std::max(left_min, right_min);

    if (prominence >= options.min_prominence) {
      double pos;
      if (i == j)
        pos = parabolic_vertex(x[i - 1], y[i - 1], x[i], y[i], x[i + 1], y[i + 1]);
      else
        pos = 0.5 * (x[i] + x[j]);
      peaks.push_back({pos, h, prominence});
    }
    i = j + 1;
  }
  return merge_close(std::move(peaks), options.merge_tol);
}

PeakSet assign_pairs(const std::vector<Peak> &peaks, PairRule rule,
                     double central_tol) {
  PeakSet set;
  std::vector<Peak> sorted = peaks;
  std::sort(sorted.begin(), sorted.end(),
            [](const Peak &a, const Peak &b) { return a.position < b.position; });

  std::vector<double> neg, pos;
  for (const Peak &p : sorted) {
    set.positions.push_back(p.position);
    set.prominences.push_back(p.prominence);
    if (std::abs(p.position) <= central_tol) {
      // Keep the most prominent candidate if several fall near zero.
      if (!set.has_central || p.prominence > set.central_prominence)
        set.central_prominence = p.prominence;
      set.has_central = true;
    } else if (p.position < 0.0) {
      neg.push_back(p.position);
    } else {
      pos.push_back(p.position);
    }
  }

  const std::size_t nonzero = neg.size() + pos.size();
  if (rule == PairRule::half_zero) {
    if (nonzero < 2)
      throw Error(ErrorCode::fewer_than_four_peaks,
                  "need at least 2 off-center peaks, found " +
                      std::to_string(nonzero));
  } else if (nonzero < 4) {
    throw Error(ErrorCode::fewer_than_four_peaks,
                "need at least 4 off-center peaks, found " +
                    std::to_string(nonzero));
  }
  if (neg.empty() || pos.empty())
    throw Error(ErrorCode::non_straddling,
                "peaks do not straddle zero detuning");

  set.lambda_o_minus = neg.front();
  set.lambda_o_plus = pos.back();
  if (rule == PairRule::half_zero && set.has_central && nonzero == 2) {
    set.lambda_i_minus = 0.0;
    set.lambda_i_plus = 0.0;
  } else {
    set.lambda_i_minus = neg.back();
    set.lambda_i_plus = pos.front();
  }
  return set;
}

PeakSet extract_peaks(const SampledSpectrum &spectrum,
                      const PeakOptions &options, PairRule rule) {
  return assign_pairs(find_peaks(spectrum, options), rule, options.central_tol);
}

PeakSet peaks_from_eigenvalues(const std::vector<double> &eigenvalues,
                               PairRule rule, double central_tol,
                               double central_prominence, double merge_tol) {
  const auto spectrum = dressing::make_spectrum(eigenvalues, 0.0, merge_tol);
  std::vector<Peak> peaks;
  for (double v : spectrum.distinct_values)
    peaks.push_back({v, 1.0, 1.0});
  PeakSet set = assign_pairs(peaks, rule, central_tol);
  set.central_prominence = set.has_central ? central_prominence : 0.0;
  for (std::size_t k = 0; k < set.positions.size(); ++k)
    if (std::abs(set.positions[k]) <= central_tol)
      set.prominences[k] = set.central_prominence;
  return set;
}

double ratio_half(const PeakSet &peaks, double span_tol) {
  const double outer = peaks.lambda_o_plus - peaks.lambda_o_minus;
  if (!(outer > span_tol))
    throw Error(ErrorCode::degenerate_outer, "outer peak span is zero");
  return (peaks.lambda_i_plus - peaks.lambda_i_minus) / outer;
}

double ratio_five_half(const PeakSet &peaks, double span_tol) {
  const double inner = peaks.lambda_i_plus - peaks.lambda_i_minus;
  if (!(inner > span_tol))
    throw Error(ErrorCode::degenerate_inner, "inner peak span is zero");
  return (peaks.lambda_o_plus - peaks.lambda_o_minus) / inner;
}

std::string_view to_string(AmbiguityClass a) {
  switch (a) {
  case AmbiguityClass::fourfold:
    return "fourfold";
  case AmbiguityClass::twofold:
    return "twofold";
  case AmbiguityClass::unique:
    return "unique";
  case AmbiguityClass::none:
    return "none";
  }
  return "none";
}

AmbiguityClass classify(std::size_t pruned_size) {
  if (pruned_size >= 3)
    return AmbiguityClass::fourfold;
  if (pruned_size == 2)
    return AmbiguityClass::twofold;
  if (pruned_size == 1)
    return AmbiguityClass::unique;
  return AmbiguityClass::none;
}

std::vector<double> candidate_set(double principal, double dedup_tol) {
  std::vector<double> raw = {principal, kPi - principal, kPi + principal,
                             kTwoPi - principal};
  for (double &v : raw)
    v = sop::wrap_angle(v);
  std::sort(raw.begin(), raw.end());
  std::vector<double> out;
  for (double v : raw) {
    bool dup = false;
    for (double w : out)
      if (sop::angle_distance(v, w) <= dedup_tol)
        dup = true;
    if (!dup)
      out.push_back(v);
  }
  return out;
}

double phi_tilde(double ratio, double tol) {
  if (!std::isfinite(ratio) || ratio < -tol || ratio > 1.0 + tol)
    throw Error(ErrorCode::out_of_range,
                "ratio " + std::to_string(ratio) + " outside [0, 1]");
  const double r = std::clamp(ratio, 0.0, 1.0);
  return 2.0 * (kPi / 4.0 - std::atan(r));
}

PhaseCandidates invert_half(double ratio, double tol) {
  PhaseCandidates pc;
  pc.ratio = ratio;
  pc.principal = phi_tilde(ratio, tol);
  pc.candidates = candidate_set(pc.principal);
  pc.pruned = pc.candidates;
  pc.ambiguity = classify(pc.pruned.size());
  return pc;
}

namespace {

double checked_five_half_ratio(double ratio, double tol) {
  if (!std::isfinite(ratio) || ratio < kFiveHalfRatioMin - tol ||
      ratio > kFiveHalfRatioMax + tol)
    throw Error(ErrorCode::out_of_range,
                "ratio " + std::to_string(ratio) +
                    " outside [sqrt(3/2), sqrt(10)]");
  return std::clamp(ratio, kFiveHalfRatioMin, kFiveHalfRatioMax);
}

} // namespace

double phi_p_approx(double ratio, double tol) {
  const double r = checked_five_half_ratio(ratio, tol);
  const double sqrt6 = std::sqrt(6.0);
  const double sqrt15 = std::sqrt(15.0);
  const double disc = std::max(0.0, 4 * r * r - 2 * r * sqrt6 + 8 - 2 * sqrt15);
  const double s =
      (std::sqrt(disc) - std::sqrt(5.0) + std::numbers::sqrt3) /
      (std::numbers::sqrt2 * r);
  return std::asin(std::clamp(s, 0.0, 1.0));
}

double five_half_ratio_exact(double phi) {
  const auto e = dressing::envelopes_exact(phi);
  return e.outer_plus / e.inner_plus;
}

double five_half_ratio_approx(double phi) {
  const auto e = dressing::envelopes_approx(phi);
  return e.outer_plus / e.inner_plus;
}

double phi_p_exact(double ratio, double tol) {
  const double r = checked_five_half_ratio(ratio, tol);
  auto f = [r](double s) { return five_half_ratio_exact(std::asin(s)) - r; };
  const double f0 = f(0.0);
  const double f1 = f(1.0);
  if (f0 >= 0.0)
    return 0.0;
  if (f1 <= 0.0)
    return kPi / 2.0;
  std::uintmax_t max_iter = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      f, 0.0, 1.0, f0, f1, boost::math::tools::eps_tolerance<double>(52),
      max_iter);
  return std::asin(0.5 * (lo + hi));
}

bool in_bright_interval(double phi, sop::OpticsPreset config, double tol) {
  const double w = sop::wrap_angle(phi);
  if (config == sop::OpticsPreset::standard)
    return w >= kPi / 2.0 - tol && w <= 1.5 * kPi + tol;
  return w <= kPi + tol || w >= kTwoPi - tol;
}

void prune(PhaseCandidates &pc, const ProminenceGate &gate, double tol) {
  if (std::abs(gate.central_prominence - gate.threshold) <= gate.dead_band) {
    pc.prominence_ambiguous = true;
    pc.pruned = pc.candidates;
  } else {
    pc.prominence_ambiguous = false;
    const bool bright =
        (gate.central_prominence > gate.threshold) == gate.bright_is_high;
    pc.pruned.clear();
    for (double c : pc.candidates)
      if (in_bright_interval(c, gate.config, tol) == bright)
        pc.pruned.push_back(c);
  }
  pc.ambiguity = classify(pc.pruned.size());
}

PhaseCandidates invert_five_half(double ratio,
                                 const std::optional<ProminenceGate> &gate,
                                 FiveHalfMethod method, double tol) {
  PhaseCandidates pc;
  pc.ratio = ratio;
  pc.principal = method == FiveHalfMethod::exact ? phi_p_exact(ratio, tol)
                                                 : phi_p_approx(ratio, tol);
  pc.candidates = candidate_set(pc.principal);
  pc.pruned = pc.candidates;
  pc.ambiguity = classify(pc.pruned.size());
  if (gate)
    prune(pc, *gate, tol);
  return pc;
}

PhaseCandidates combine(const PhaseCandidates &a, const PhaseCandidates &b,
                        double angle_tol) {
  PhaseCandidates out = a;
  out.pruned.clear();
  for (double x : a.pruned)
    if (distance_to_set(x, b.pruned) <= angle_tol)
      out.pruned.push_back(x);
  out.prominence_ambiguous = a.prominence_ambiguous || b.prominence_ambiguous;
  out.ambiguity = classify(out.pruned.size());
  return out;
}

double distance_to_set(double phi, const std::vector<double> &set) {
  double best = std::numeric_limits<double>::infinity();
  for (double s : set)
    best = std::min(best, sop::angle_distance(phi, s));
  return best;
}

} // namespace rydpol::inversion
