#include "rydpol/roundtrip.hpp"

#include "rydpol/error.hpp"

#include <algorithm>
#include <numbers>

namespace rydpol::roundtrip {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;
constexpr double kSameAngle = 1e-9;

eitsim::EitModel model_for(const dressing::TransitionClass &cls,
                           const eitsim::SimParams &params,
                           sop::OpticsPreset config) {
  eitsim::SimParams p = params;
  p.optics = sop::optics_from_preset(config);
  return eitsim::EitModel(scheme_for(cls), p);
}

} // namespace

inversion::PairRule pair_rule_for(const dressing::TransitionClass &cls) {
  if (cls.J == angular::half(1) && cls.p == 0)
    return inversion::PairRule::half_zero;
  if (cls.J == angular::half(3) && cls.p != 0)
    return inversion::PairRule::five_half;
  throw Error(ErrorCode::not_invertible,
              "class " + cls.label() +
                  " has no inversion formula; supported classes are 1/2^0, "
                  "3/2^+ and 3/2^-");
}

eitsim::LevelScheme scheme_for(const dressing::TransitionClass &cls) {
  return eitsim::LevelScheme{cls, std::nullopt};
}

Calibration calibrate(const std::vector<double> &candidates,
                      sop::OpticsPreset config, const ProminenceModel &model) {
  double bright = 0.0, dark = 0.0;
  int nb = 0, nd = 0;
  for (double c : candidates) {
    const double v = model(c);
    if (inversion::in_bright_interval(c, config)) {
      bright += v;
      ++nb;
    } else {
      dark += v;
      ++nd;
    }
  }
  Calibration cal;
  cal.bright_mean = nb ? bright / nb : 0.0;
  cal.dark_mean = nd ? dark / nd : 0.0;
  cal.two_sided = nb > 0 && nd > 0;
  cal.threshold = 0.5 * (cal.bright_mean + cal.dark_mean);
  cal.informative =
      cal.two_sided && std::abs(cal.bright_mean - cal.dark_mean) > kMinContrast;
  return cal;
}

Options eigenvalue_options() {
  Options o;
  o.level = ForwardLevel::eigenvalue;
  o.dead_band_fraction = 0.0;
  o.angle_tol = 2.0 * kDegree;
  return o;
}

Options eit_options() {
  Options o;
  o.level = ForwardLevel::eit;
  o.dead_band_fraction = 0.1;
  o.angle_tol = 5.0 * kDegree;
  return o;
}

inversion::PeakSet eigenvalue_peaks(const dressing::TransitionClass &cls,
                                    double phi, double central_prominence) {
  return inversion::peaks_from_eigenvalues(
      dressing::eigen_spectrum(cls, phi).eigenvalues, pair_rule_for(cls), 1e-7,
      central_prominence);
}

double eigenvalue_central_prominence(const eitsim::EitModel &model,
                                     double phi) {
  return eitsim::central_weight(model.line_strengths(sop::sop_from_phi(phi)));
}

double eit_central_prominence(const eitsim::EitModel &model, double phi,
                              const inversion::PeakOptions &peaks) {
  const inversion::SampledSpectrum s{model.params().delta_c_grid,
                                     eitsim::eit_spectrum(model, sop::sop_from_phi(phi))};
  double best = 0.0;
  for (const auto &p : inversion::find_peaks(s, peaks))
    if (std::abs(p.position) <= peaks.central_tol)
      best = std::max(best, p.prominence);
  return best;
}

inversion::PhaseCandidates invert_measurements(
    const dressing::TransitionClass &cls,
    const std::vector<Measurement> &measurements,
    const std::function<ProminenceModel(sop::OpticsPreset)> &models,
    inversion::FiveHalfMethod method, double dead_band_fraction,
    double angle_tol, std::vector<ConfigResult> *details) {
  if (measurements.empty())
    throw Error(ErrorCode::invalid_argument, "no spectra to invert");
  const auto rule = pair_rule_for(cls);
  if (rule == inversion::PairRule::half_zero)
    return inversion::invert_half(inversion::ratio_half(measurements.front().peaks));

  const double ratio = inversion::ratio_five_half(measurements.front().peaks);
  const auto base = inversion::invert_five_half(ratio, std::nullopt, method);
  inversion::PhaseCandidates result = base;
  bool first = true;
  for (const auto &m : measurements) {
    ConfigResult cr;
    cr.config = m.config;
    cr.central_prominence = m.peaks.central_prominence;
    cr.candidates = base;
    // Later configurations only have to split what the earlier ones left.
    cr.calibration = calibrate(result.pruned, m.config, models(m.config));
    if (cr.calibration.informative)
      inversion::prune(cr.candidates,
                       {m.peaks.central_prominence, cr.calibration.threshold,
                        dead_band_fraction * m.max_amplitude, m.config,
                        cr.calibration.bright_mean >= cr.calibration.dark_mean});
    result = first ? cr.candidates
                   : inversion::combine(result, cr.candidates, angle_tol);
    first = false;
    if (details)
      details->push_back(cr);
  }
  return result;
}

Report round_trip(const dressing::TransitionClass &cls, double phi_true,
                  const Options &options) {
  if (options.configs.empty())
    throw Error(ErrorCode::invalid_argument, "no optical configuration given");
  const auto rule = pair_rule_for(cls);
  Report report;
  report.cls = cls;
  report.phi_true = phi_true;

  std::vector<eitsim::EitModel> models;
  for (auto config : options.configs)
    models.push_back(model_for(cls, options.params, config));

  inversion::PeakOptions peak_options = options.peaks;
  if (options.level == ForwardLevel::eit && !(peak_options.central_tol > 0.0))
    peak_options.central_tol =
        0.5 * eitsim::zero_rf_linewidth(scheme_for(cls), options.params);

  std::vector<Measurement> measurements;
  for (std::size_t k = 0; k < models.size(); ++k) {
    Measurement m;
    m.config = options.configs[k];
    if (options.level == ForwardLevel::eigenvalue) {
      m.peaks = eigenvalue_peaks(
          cls, phi_true,
          rule == inversion::PairRule::five_half
              ? eigenvalue_central_prominence(models[k], phi_true)
              : 0.0);
      m.max_amplitude = 1.0;
    } else {
      const inversion::SampledSpectrum s{
          options.params.delta_c_grid,
          eitsim::eit_spectrum(models[k], sop::sop_from_phi(phi_true))};
      m.max_amplitude = *std::max_element(s.amplitude.begin(), s.amplitude.end());
      if (k == 0) {
        m.peaks = inversion::extract_peaks(s, peak_options, rule);
      } else {
        // Only the central peak is read from the extra configurations.
        for (const auto &p : inversion::find_peaks(s, peak_options))
          if (std::abs(p.position) <= peak_options.central_tol)
            m.peaks.central_prominence =
                std::max(m.peaks.central_prominence, p.prominence);
        m.peaks.has_central = m.peaks.central_prominence > 0.0;
      }
    }
    measurements.push_back(std::move(m));
    if (rule == inversion::PairRule::half_zero)
      break;
  }
  report.peaks = measurements.front().peaks;

  auto prominence_model = [&](sop::OpticsPreset config) -> ProminenceModel {
    std::size_t k = 0;
    while (options.configs[k] != config)
      ++k;
    const eitsim::EitModel *model = &models[k];
    if (options.level == ForwardLevel::eigenvalue)
      return [model](double phi) {
        return eigenvalue_central_prominence(*model, phi);
      };
    return [model, peak_options](double phi) {
      return eit_central_prominence(*model, phi, peak_options);
    };
  };

  std::vector<ConfigResult> details;
  report.result = invert_measurements(cls, measurements, prominence_model,
                                      options.method, options.dead_band_fraction,
                                      kSameAngle, &details);
  report.per_config = std::move(details);
  report.ratio = report.result.ratio;
  report.candidate_error =
      inversion::distance_to_set(phi_true, report.result.candidates);
  report.pruned_error = inversion::distance_to_set(phi_true, report.result.pruned);
  report.recovered = report.pruned_error <= options.angle_tol;
  return report;
}

} // namespace rydpol::roundtrip
