#pragma once

// Forward-simulate a spectrum at a known phase angle, extract its peaks and
// invert it again, either on bare dressed eigenvalues or on simulated EIT.
//
// Only the 1/2^0 and 3/2^+- classes are invertible. For 3/2^+- the peak
// positions come from the first optical configuration; every configuration
// contributes a central-peak gate whose threshold is calibrated by running
// the same forward model at each candidate angle. With more than one
// configuration the pruned sets are intersected.

#include "rydpol/dressing.hpp"
#include "rydpol/eitsim.hpp"
#include "rydpol/inversion.hpp"
#include "rydpol/sop.hpp"

#include <functional>
#include <vector>

namespace rydpol::roundtrip {

enum class ForwardLevel { eigenvalue, eit };

/// Throws NotInvertible unless cls is 1/2^0 or 3/2^+-.
inversion::PairRule pair_rule_for(const dressing::TransitionClass &cls);

struct Calibration {
  double threshold = 0.0;
  double bright_mean = 0.0;
  double dark_mean = 0.0;
  bool two_sided = false;
  /// Bright and dark predictions differ by more than kMinContrast. Fails for
  /// 3/2^-, whose zero-eigenvalue states are dark to the optics at every phi.
  bool informative = false;
};

inline constexpr double kMinContrast = 1e-9;

using ProminenceModel = std::function<double(double phi)>;

/// Threshold halfway between the mean predicted prominence of the
/// candidates inside the bright interval and of those outside it. When all
/// candidates fall on one side there is nothing to prune and two_sided is
/// false.
Calibration calibrate(const std::vector<double> &candidates,
                      sop::OpticsPreset config, const ProminenceModel &model);

struct Options {
  ForwardLevel level = ForwardLevel::eigenvalue;
  std::vector<sop::OpticsPreset> configs = {sop::OpticsPreset::standard};
  inversion::FiveHalfMethod method = inversion::FiveHalfMethod::approximate;
  eitsim::SimParams params;
  /// Peak extraction on EIT spectra; central_tol <= 0 means half the zero-RF
  /// linewidth.
  inversion::PeakOptions peaks{0.002, 1.0, 0.0};
  /// Dead band as a fraction of the largest spectrum amplitude (EIT level)
  /// or of the total line weight (eigenvalue level).
  double dead_band_fraction = 0.0;
  /// Angle tolerance for deciding whether the truth was recovered.
  double angle_tol = 0.0;
};

/// Eigenvalue-level defaults: exact data, no dead band, 2 degrees.
Options eigenvalue_options();
/// EIT-level defaults: 10% dead band, 5 degrees.
Options eit_options();

struct ConfigResult {
  sop::OpticsPreset config = sop::OpticsPreset::standard;
  double central_prominence = 0.0;
  Calibration calibration;
  inversion::PhaseCandidates candidates;
};

struct Report {
  dressing::TransitionClass cls;
  double phi_true = 0.0;
  inversion::PeakSet peaks;
  double ratio = 0.0;
  std::vector<ConfigResult> per_config;
  /// Final candidates (intersection over configurations for 3/2^+-).
  inversion::PhaseCandidates result;
  /// Distance from phi_true to the nearest pruned and unpruned candidate.
  double pruned_error = 0.0;
  double candidate_error = 0.0;
  bool recovered = false;
};

/// One forward-plus-inverse pass at phi_true.
Report round_trip(const dressing::TransitionClass &cls, double phi_true,
                  const Options &options);

/// Forward spectra used by round_trip, exposed for the CLI and tests.
inversion::PeakSet eigenvalue_peaks(const dressing::TransitionClass &cls,
                                    double phi, double central_prominence);
double eigenvalue_central_prominence(const eitsim::EitModel &model, double phi);
double eit_central_prominence(const eitsim::EitModel &model, double phi,
                              const inversion::PeakOptions &peaks);

/// Level scheme with no third level for an invertible class.
eitsim::LevelScheme scheme_for(const dressing::TransitionClass &cls);

/// Invert measured peak sets: the first supplies the ratio, each contributes
/// a gate calibrated on the candidates still left by the gates before it.
/// Used by the CLI.
struct Measurement {
  sop::OpticsPreset config = sop::OpticsPreset::standard;
  inversion::PeakSet peaks;
  double max_amplitude = 1.0;
};

inversion::PhaseCandidates
invert_measurements(const dressing::TransitionClass &cls,
                    const std::vector<Measurement> &measurements,
                    const std::function<ProminenceModel(sop::OpticsPreset)> &models,
                    inversion::FiveHalfMethod method, double dead_band_fraction,
                    double angle_tol, std::vector<ConfigResult> *details = nullptr);

} // namespace rydpol::roundtrip
