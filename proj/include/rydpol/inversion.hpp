#pragma once

// Peak extraction from sampled spectra, envelope ratios, and inversion of a
// ratio to the candidate phase angles of the RF SOP.
//
// Two ratio conventions coexist and are never mixed:
//   ratio_half      (1/2^0 class): inner span / outer span, in [0, 1]
//   ratio_five_half (3/2^+- class): outer span / inner span, in [sqrt(3/2), sqrt(10)]

#include "rydpol/sop.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace rydpol::inversion {

/// Amplitude vs. detuning on a strictly increasing grid.
struct SampledSpectrum {
  std::vector<double> detuning;
  std::vector<double> amplitude;

  /// Throws ErrorCode::invalid_argument unless the sizes match, there are
  /// at least 8 finite samples and the grid is strictly increasing.
  void validate() const;
};

struct Peak {
  double position = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

struct PeakOptions {
  /// Peaks with smaller topographic prominence are dropped.
  double min_prominence = 1e-3;
  /// Peaks closer than this are merged at their prominence-weighted centroid.
  double merge_tol = 0.0;
  /// A peak within this distance of zero detuning is the central peak.
  double central_tol = 0.0;
};

/// Local maxima of the spectrum with topographic prominence (height above
/// the higher of the two bases reached before meeting a taller sample) and
/// 3-point parabolic sub-sample refinement. Sorted by position.
std::vector<Peak> find_peaks(const SampledSpectrum &spectrum,
                             const PeakOptions &options);

/// How the outer and inner pairs are read off the sorted peak positions.
enum class PairRule {
  /// 1/2^0: a central peak stands for a coalesced inner pair (inner = 0);
  /// with only two peaks the inner pair coincides with the outer one.
  half_zero,
  /// 3/2^+-: innermost nonzero peaks; a central peak is reported but
  /// never used as an inner peak.
  five_half,
};

struct PeakSet {
  std::vector<double> positions;
  std::vector<double> prominences;
  double lambda_o_plus = 0.0;
  double lambda_o_minus = 0.0;
  double lambda_i_plus = 0.0;
  double lambda_i_minus = 0.0;
  /// Prominence of the peak within central_tol of zero; 0 if there is none.
  double central_prominence = 0.0;
  bool has_central = false;
};

/// Assign outer and inner pairs from a list of peaks.
/// Errors: FewerThanFourPeaks when the rule cannot be satisfied (fewer than
/// 2 peaks for half_zero, fewer than 4 non-central peaks for five_half);
/// NonStraddling when no nonzero peak lies on one side of zero.
PeakSet assign_pairs(const std::vector<Peak> &peaks, PairRule rule,
                     double central_tol);

/// find_peaks followed by assign_pairs.
PeakSet extract_peaks(const SampledSpectrum &spectrum,
                      const PeakOptions &options, PairRule rule);

/// Peak set built straight from dressed eigenvalues: each distinct value
/// (clustered within merge_tol) is one unit-prominence peak. The central
/// prominence is supplied by the caller.
PeakSet peaks_from_eigenvalues(const std::vector<double> &eigenvalues,
                               PairRule rule, double central_tol = 1e-7,
                               double central_prominence = 0.0,
                               double merge_tol = 1e-9);

/// (Lambda_i+ - Lambda_i-) / (Lambda_o+ - Lambda_o-). Throws DegenerateOuter
/// if the outer span is below span_tol.
double ratio_half(const PeakSet &peaks, double span_tol = 1e-12);

/// (Lambda_o+ - Lambda_o-) / (Lambda_i+ - Lambda_i-). Throws DegenerateInner
/// if the inner span is below span_tol.
double ratio_five_half(const PeakSet &peaks, double span_tol = 1e-12);

inline constexpr double kFiveHalfRatioMin = 1.2247448713915890491; // sqrt(3/2)
inline constexpr double kFiveHalfRatioMax = 3.1622776601683793320; // sqrt(10)

enum class AmbiguityClass { fourfold, twofold, unique, none };
std::string_view to_string(AmbiguityClass a);

struct PhaseCandidates {
  double ratio = 0.0;
  /// phi~ (1/2^0) or phi_p (3/2^+-), in [0, pi/2].
  double principal = 0.0;
  /// {x, pi - x, pi + x, 2 pi - x} reduced to [0, 2 pi), duplicates removed,
  /// ascending.
  std::vector<double> candidates;
  /// Subset kept after central-peak disambiguation (equals candidates when
  /// no pruning was requested or possible).
  std::vector<double> pruned;
  AmbiguityClass ambiguity = AmbiguityClass::fourfold;
  /// Set when the central prominence fell in the dead band around the
  /// threshold; pruned is then the full candidate set.
  bool prominence_ambiguous = false;
};

/// Classification of a pruned set by its size (4, 2, 1, 0).
AmbiguityClass classify(std::size_t pruned_size);

/// Candidate set of a principal angle x in [0, pi/2].
std::vector<double> candidate_set(double principal, double dedup_tol = 1e-9);

/// phi~ = 2 [pi/4 - atan R]. Throws OutOfRange for R outside [0, 1] by more
/// than tol; values within tol are clamped.
double phi_tilde(double ratio, double tol = 1e-9);
PhaseCandidates invert_half(double ratio, double tol = 1e-9);

enum class FiveHalfMethod {
  /// Closed-form arcsine inverse of the approximate-envelope ratio.
  approximate,
  /// Root of the exact-envelope ratio; monotone on [0, pi/2].
  exact,
};

/// phi_p = asin[(sqrt(4R^2 - 2R sqrt6 + 8 - 2 sqrt15) - sqrt5 + sqrt3) / (sqrt2 R)].
double phi_p_approx(double ratio, double tol = 1e-9);
/// Solves ratio_exact(phi) = R for phi in [0, pi/2].
double phi_p_exact(double ratio, double tol = 1e-9);

/// Envelope ratios of the 3/2^+- spectrum as functions of phi.
double five_half_ratio_exact(double phi);
double five_half_ratio_approx(double phi);

/// Central-peak gate for pruning the 3/2^+- candidates.
struct ProminenceGate {
  double central_prominence = 0.0;
  double threshold = 0.0;
  /// Half-width of the band around threshold where no decision is taken.
  double dead_band = 0.0;
  sop::OpticsPreset config = sop::OpticsPreset::standard;
  /// False when a strong central peak marks the candidates outside the
  /// interval instead (3/2^-, whose spectra mirror those of 3/2^+).
  bool bright_is_high = true;
};

/// Candidates with a strong central peak lie in [pi/2, 3 pi/2] for standard
/// optics and in [0, pi] for rotated circular optics.
bool in_bright_interval(double phi, sop::OpticsPreset config,
                        double tol = 1e-9);

/// Throws OutOfRange unless R is in [sqrt(3/2), sqrt(10)] within tol.
PhaseCandidates invert_five_half(double ratio,
                                 const std::optional<ProminenceGate> &gate,
                                 FiveHalfMethod method = FiveHalfMethod::approximate,
                                 double tol = 1e-9);

/// Apply a prominence gate to existing candidates.
void prune(PhaseCandidates &pc, const ProminenceGate &gate, double tol = 1e-9);

/// Intersection of two pruned sets (angles equal within angle_tol).
/// The result keeps a's ratio and principal angle.
PhaseCandidates combine(const PhaseCandidates &a, const PhaseCandidates &b,
                        double angle_tol);

/// Smallest angular distance from phi to any angle in the set.
double distance_to_set(double phi, const std::vector<double> &set);

} // namespace rydpol::inversion
