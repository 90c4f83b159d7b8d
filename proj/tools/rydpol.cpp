// rydpol: spectrograms, EIT simulation and SOP inversion from the command line.
//
// Exit codes: 0 ok, 2 usage, 3 validation, 4 numerical failure.

#include "rydpol/dressing.hpp"
#include "rydpol/eitsim.hpp"
#include "rydpol/error.hpp"
#include "rydpol/inversion.hpp"
#include "rydpol/io.hpp"
#include "rydpol/roundtrip.hpp"
#include "rydpol/sop.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using rydpol::Error;
using rydpol::ErrorCode;
using rydpol::io::Json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;
constexpr double kDeg = std::numbers::pi / 180.0;

// Thrown for problems that CLI11 cannot see (e.g. flag combinations).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out_dir = ".";
  std::string name;
  bool degrees = false;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--name", c.name, "Output file stem (default: command name)");
  cmd->add_flag("--degrees", c.degrees, "Angles in degrees instead of radians");
}

const CLI::Validator kTwiceJ(
    [](std::string &s) -> std::string {
      try {
        const int v = std::stoi(s);
        if (v > 0 && v % 2 == 1)
          return {};
      } catch (const std::exception &) {
      }
      return "J2 must be a positive odd integer (J >= 1/2, half-odd)";
    },
    "ODD>0");

// Everything needed to describe one run in its manifest.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  Json details = Json::object();
  std::vector<std::string> inputs;
  std::optional<unsigned long long> seed;
};

fs::path output_path(const Common &c, const Run &run, const char *ext) {
  return fs::path(c.out_dir) / ((c.name.empty() ? run.command : c.name) + ext);
}

// Writes outputs plus the manifest atomically.
void emit(const Common &c, const Run &run,
          std::vector<std::pair<fs::path, std::string>> files) {
  Json outputs = Json::array();
  for (const auto &f : files)
    outputs.push_back(f.first.filename().string());
  Json m{{"version", rydpol::io::version_string()},
         {"command", run.command},
         {"argv", run.argv}};
  for (const auto &[k, v] : run.details.items())
    m[k] = v;
  m["inputs"] = run.inputs;
  m["outputs"] = outputs;
  m["seed"] = run.seed ? Json(*run.seed) : Json(nullptr);
  files.emplace_back(output_path(c, run, ".manifest.json"), rydpol::io::dump(m));
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec)
    throw Error(ErrorCode::io_failure, "cannot create " + c.out_dir);
  rydpol::io::write_files(files);
  for (const auto &f : files)
    std::cout << "wrote " << f.first.string() << "\n";
}

// ---------------------------------------------------------------- spectrogram

struct SpectrogramArgs {
  Common common;
  int J2 = 0;
  int p = 0;
  int phi_steps = 361;
  std::string envelopes;
  double tol = rydpol::dressing::kDefaultDegeneracyTol;
};

void run_spectrogram(const SpectrogramArgs &a, Run &run) {
  const auto cls = rydpol::dressing::TransitionClass::from_twice(a.J2, a.p);
  std::optional<rydpol::io::EnvelopeKind> env;
  if (!a.envelopes.empty()) {
    if (!(a.J2 == 3 && a.p != 0))
      throw UsageError("--envelopes is only defined for the 3/2^+ and 3/2^- classes");
    env = rydpol::io::parse_envelope_kind(a.envelopes);
  }
  const auto grid = rydpol::dressing::phi_grid(a.phi_steps, true);
  const auto rows = rydpol::dressing::spectrogram(cls, grid, a.tol);
  run.details["class"] = rydpol::io::class_to_json(cls);
  run.details["grids"] = {{"phi", {{"min", 0.0}, {"max", 2 * std::numbers::pi},
                                   {"steps", a.phi_steps}}}};
  emit(a.common, run,
       {{output_path(a.common, run, ".csv"),
         rydpol::io::spectrogram_csv(rows, env, a.common.degrees)},
        {output_path(a.common, run, ".json"),
         rydpol::io::dump(
             rydpol::io::spectrogram_json(cls, rows, env, a.common.degrees))}});
}

// ------------------------------------------------------------------ envelopes

struct EnvelopeArgs {
  Common common;
  int phi_steps = 361;
  std::string kind = "both";
};

void run_envelopes(const EnvelopeArgs &a, Run &run) {
  std::vector<rydpol::io::EnvelopeKind> kinds;
  if (a.kind == "both")
    kinds = {rydpol::io::EnvelopeKind::exact, rydpol::io::EnvelopeKind::approx};
  else
    kinds = {*rydpol::io::parse_envelope_kind(a.kind)};
  const auto grid = rydpol::dressing::phi_grid(a.phi_steps, true);
  run.details["class"] = rydpol::io::class_to_json(
      rydpol::dressing::TransitionClass::from_twice(3, 1));
  run.details["grids"] = {{"phi", {{"min", 0.0}, {"max", 2 * std::numbers::pi},
                                   {"steps", a.phi_steps}}}};
  emit(a.common, run,
       {{output_path(a.common, run, ".csv"),
         rydpol::io::envelopes_csv(grid, kinds, a.common.degrees)}});
}

// ------------------------------------------------------------------------ eit

struct EitArgs {
  Common common;
  std::string scenario;
  std::optional<int> J2, p, phi_steps, delta_points;
  std::optional<double> omega_probe, omega_coupling, omega_rf, gamma_i, gamma_r,
      delta_probe, delta_min, delta_max;
  std::string optics;
  std::optional<double> third_level;
  std::optional<int> third_J2;
  std::optional<double> phi;
  double noise = 0.0;
  unsigned long long seed = 1;
};

// J2 of the other fine-structure level sharing r2's orbital momentum.
int partner_twice_j(const rydpol::dressing::TransitionClass &cls) {
  const int l = cls.orbital_l() + 1;
  const int jp = cls.j_prime().twice();
  return jp == 2 * l + 1 ? 2 * l - 1 : 2 * l + 1;
}

void run_eit(const EitArgs &a, Run &run) {
  Json cfg = a.scenario.empty() ? Json::object() : rydpol::io::read_json(a.scenario);
  if (!a.scenario.empty())
    run.inputs.push_back(a.scenario);
  if (!cfg.is_object())
    throw Error(ErrorCode::invalid_argument, "scenario must be a JSON object");
  if (a.J2)
    cfg["class"]["J2"] = *a.J2;
  if (a.p)
    cfg["class"]["p"] = *a.p;
  auto set = [&](const char *group, const char *key, const auto &v) {
    if (v)
      cfg[group][key] = *v;
  };
  set("params", "omega_probe", a.omega_probe);
  set("params", "omega_coupling", a.omega_coupling);
  set("params", "omega_rf", a.omega_rf);
  set("params", "gamma_i", a.gamma_i);
  set("params", "gamma_r", a.gamma_r);
  set("params", "delta_probe", a.delta_probe);
  set("delta_c", "min", a.delta_min);
  set("delta_c", "max", a.delta_max);
  set("delta_c", "points", a.delta_points);
  set("phi", "steps", a.phi_steps);
  if (!a.optics.empty())
    cfg["optics"] = a.optics;
  if (a.third_level) {
    int j3 = 0;
    if (a.third_J2)
      j3 = *a.third_J2;
    else {
      try {
        j3 = partner_twice_j(rydpol::io::class_from_json(cfg.value("class", Json())));
      } catch (const Error &) {
        // Reported by scenario validation below.
      }
    }
    cfg["third_level"] = {{"J2", j3}, {"delta_mhz", *a.third_level}};
  }
  if (!cfg.contains("class"))
    throw UsageError("eit needs --scenario or --J2 and --p");

  const auto sc = rydpol::io::scenario_from_json(cfg);
  for (const auto &w : sc.params.warnings())
    std::cerr << "warning: " << w << "\n";
  if (a.phi && !sc.optics_preset)
    throw UsageError("--phi writes a spectrum file, which needs a named optics preset");
  const auto grid =
      a.phi ? std::vector<double>{rydpol::sop::wrap_angle(a.common.degrees ? *a.phi * kDeg
                                                                          : *a.phi)}
            : rydpol::dressing::phi_grid(sc.phi_steps, sc.phi_endpoint);
  auto sg = rydpol::eitsim::eit_spectrogram(sc.scheme, sc.params, grid);
  if (a.noise > 0.0) {
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> gauss(0.0, a.noise);
    for (Eigen::Index i = 0; i < sg.response.rows(); ++i)
      for (Eigen::Index k = 0; k < sg.response.cols(); ++k)
        sg.response(i, k) += gauss(rng);
    run.seed = a.seed;
  }
  run.details["class"] = rydpol::io::class_to_json(sc.scheme.cls);
  run.details["scenario"] = rydpol::io::scenario_to_json(sc);
  run.details["grids"] = {
      {"phi", {{"min", grid.front()}, {"max", grid.back()}, {"steps", grid.size()}}},
      {"delta_c", {{"min", sc.params.delta_c_grid.front()},
                   {"max", sc.params.delta_c_grid.back()},
                   {"points", sc.params.delta_c_grid.size()}}}};
  run.details["noise"] = a.noise;
  std::vector<std::pair<fs::path, std::string>> files{
      {output_path(a.common, run, ".csv"), rydpol::io::eit_csv(sg, a.common.degrees)},
      {output_path(a.common, run, ".json"),
       rydpol::io::dump(
           rydpol::io::eit_json(sc.scheme, sc.params, sg, a.common.degrees))}};
  if (a.phi) {
    rydpol::io::SpectrumFile sf;
    sf.cls = sc.scheme.cls;
    sf.optics = *sc.optics_preset;
    sf.spectrum.detuning = sg.detuning_grid;
    sf.spectrum.amplitude.assign(sg.response.data(),
                                 sg.response.data() + sg.response.size());
    files.emplace_back(output_path(a.common, run, ".spectrum.json"),
                       rydpol::io::dump(rydpol::io::spectrum_to_json(sf)));
  }
  emit(a.common, run, std::move(files));
}

// --------------------------------------------------------------------- invert

struct InvertArgs {
  Common common;
  std::vector<std::string> spectra;
  std::string scenario;
  std::string method = "approx";
  double dead_band = 0.1;
  double min_prominence = 0.002;
};

void run_invert(const InvertArgs &a, Run &run) {
  namespace inv = rydpol::inversion;
  namespace rt = rydpol::roundtrip;
  std::vector<rydpol::io::SpectrumFile> files;
  for (const auto &path : a.spectra) {
    files.push_back(rydpol::io::spectrum_from_json(rydpol::io::read_json(path)));
    run.inputs.push_back(path);
  }
  const auto cls = files.front().cls;
  for (const auto &f : files)
    if (!(f.cls == cls))
      throw Error(ErrorCode::invalid_argument, "spectra declare different classes");
  const auto rule = rt::pair_rule_for(cls);
  // The ratio is read from standard optics when available.
  std::stable_sort(files.begin(), files.end(), [](const auto &x, const auto &y) {
    return x.optics == rydpol::sop::OpticsPreset::standard &&
           y.optics != rydpol::sop::OpticsPreset::standard;
  });
  for (std::size_t k = 1; k < files.size(); ++k)
    if (files[k].optics == files[k - 1].optics)
      throw Error(ErrorCode::invalid_argument,
                  "two spectra share the optics preset " +
                      std::string(rydpol::sop::to_string(files[k].optics)));

  rydpol::eitsim::SimParams params;
  if (!a.scenario.empty()) {
    params = rydpol::io::scenario_from_json(rydpol::io::read_json(a.scenario)).params;
    run.inputs.push_back(a.scenario);
  }
  const auto scheme = rt::scheme_for(cls);
  inv::PeakOptions peak_opts{a.min_prominence, 1.0, 0.0};
  peak_opts.central_tol = 0.5 * rydpol::eitsim::zero_rf_linewidth(scheme, params);

  std::vector<rt::Measurement> measurements;
  std::vector<rydpol::eitsim::EitModel> models;
  Json peak_lists = Json::array();
  for (std::size_t k = 0; k < files.size(); ++k) {
    const auto &f = files[k];
    rt::Measurement m;
    m.config = f.optics;
    m.max_amplitude =
        *std::max_element(f.spectrum.amplitude.begin(), f.spectrum.amplitude.end());
    const auto found = inv::find_peaks(f.spectrum, peak_opts);
    Json pl = Json::array();
    for (const auto &pk : found)
      pl.push_back({{"position_mhz", pk.position}, {"prominence", pk.prominence}});
    peak_lists.push_back({{"optics", rydpol::sop::to_string(f.optics)}, {"peaks", pl}});
    if (k == 0) {
      m.peaks = inv::assign_pairs(found, rule, peak_opts.central_tol);
    } else {
      for (const auto &pk : found)
        if (std::abs(pk.position) <= peak_opts.central_tol)
          m.peaks.central_prominence = std::max(m.peaks.central_prominence, pk.prominence);
      m.peaks.has_central = m.peaks.central_prominence > 0.0;
    }
    measurements.push_back(std::move(m));
    auto p = params;
    p.optics = rydpol::sop::optics_from_preset(f.optics);
    p.delta_c_grid = f.spectrum.detuning;
    models.emplace_back(scheme, p);
    if (rule == inv::PairRule::half_zero)
      break;
  }
  auto model_for = [&](rydpol::sop::OpticsPreset config) -> rt::ProminenceModel {
    std::size_t k = 0;
    while (measurements[k].config != config)
      ++k;
    const auto *model = &models[k];
    return [model, peak_opts](double phi) {
      return rt::eit_central_prominence(*model, phi, peak_opts);
    };
  };
  const auto method = a.method == "exact" ? inv::FiveHalfMethod::exact
                                          : inv::FiveHalfMethod::approximate;
  std::vector<rt::ConfigResult> details;
  const auto result = rt::invert_measurements(cls, measurements, model_for, method,
                                              a.dead_band, 1e-9, &details);

  const auto deg = [&](double x) { return a.common.degrees ? x / kDeg : x; };
  Json configs = Json::array();
  for (const auto &d : details) {
    Json pruned = Json::array();
    for (double x : d.candidates.pruned)
      pruned.push_back(deg(x));
    configs.push_back({{"optics", rydpol::sop::to_string(d.config)},
                       {"central_prominence", d.central_prominence},
                       {"threshold", d.calibration.threshold},
                       {"bright_mean", d.calibration.bright_mean},
                       {"dark_mean", d.calibration.dark_mean},
                       {"two_sided", d.calibration.two_sided},
                       {"informative", d.calibration.informative},
                       {"prominence_ambiguous", d.candidates.prominence_ambiguous},
                       {"pruned", pruned}});
  }
  Json diagnostics{{"method", a.method},
                   {"min_prominence", a.min_prominence},
                   {"central_tol_mhz", peak_opts.central_tol},
                   {"dead_band_fraction", a.dead_band},
                   {"omega_rf_mhz", params.omega_rf},
                   {"spectra", peak_lists},
                   {"configs", configs}};
  const Json report = rydpol::io::inversion_report(
      cls, measurements.front().peaks, result, diagnostics, a.common.degrees);
  run.details["class"] = rydpol::io::class_to_json(cls);
  std::cout << fmt::format("R = {:.9g}, ambiguity {}, {} candidate(s) kept\n",
                           result.ratio, rydpol::inversion::to_string(result.ambiguity),
                           result.pruned.size());
  emit(a.common, run,
       {{output_path(a.common, run, ".json"), rydpol::io::dump(report)}});
}

// ------------------------------------------------------------------ roundtrip

struct RoundTripArgs {
  Common common;
  int J2 = 0;
  int p = 0;
  std::vector<double> phi;
  std::string level = "eigen";
  std::vector<std::string> optics{"standard"};
  std::string method = "approx";
};

void run_roundtrip(const RoundTripArgs &a, Run &run) {
  namespace rt = rydpol::roundtrip;
  const auto cls = rydpol::dressing::TransitionClass::from_twice(a.J2, a.p);
  rt::Options opt = a.level == "eit" ? rt::eit_options() : rt::eigenvalue_options();
  opt.configs.clear();
  for (const auto &o : a.optics)
    opt.configs.push_back(*rydpol::sop::parse_optics_preset(o));
  opt.method = a.method == "exact" ? rydpol::inversion::FiveHalfMethod::exact
                                   : rydpol::inversion::FiveHalfMethod::approximate;
  const auto deg = [&](double x) { return a.common.degrees ? x / kDeg : x; };
  Json cases = Json::array();
  for (double phi_in : a.phi) {
    const double phi = rydpol::sop::wrap_angle(a.common.degrees ? phi_in * kDeg : phi_in);
    const auto r = rt::round_trip(cls, phi, opt);
    Json pruned = Json::array(), cand = Json::array();
    for (double x : r.result.pruned)
      pruned.push_back(deg(x));
    for (double x : r.result.candidates)
      cand.push_back(deg(x));
    cases.push_back({{"phi_true", deg(phi)},
                     {"ratio", r.ratio},
                     {"candidates", cand},
                     {"pruned", pruned},
                     {"ambiguity", rydpol::inversion::to_string(r.result.ambiguity)},
                     {"pruned_error", deg(r.pruned_error)},
                     {"recovered", r.recovered}});
    std::cout << fmt::format("phi {:.6g}: R {:.9g}, {} kept, error {:.3g}, {}\n",
                             deg(phi), r.ratio, r.result.pruned.size(),
                             deg(r.pruned_error),
                             r.recovered ? "recovered" : "NOT recovered");
  }
  run.details["class"] = rydpol::io::class_to_json(cls);
  const Json report{{"class", rydpol::io::class_to_json(cls)},
                    {"angle_unit", a.common.degrees ? "deg" : "rad"},
                    {"level", a.level},
                    {"optics", a.optics},
                    {"method", a.method},
                    {"angle_tol", deg(opt.angle_tol)},
                    {"cases", cases}};
  emit(a.common, run,
       {{output_path(a.common, run, ".json"), rydpol::io::dump(report)}});
}

// --------------------------------------------------------------------- wigner

struct WignerArgs {
  std::vector<std::string> args;
};

double run_wigner(const std::string &symbol, const WignerArgs &a) {
  std::vector<rydpol::angular::HalfInt> j;
  for (const auto &s : a.args)
    j.push_back(rydpol::io::parse_half_int(s));
  if (symbol == "3j")
    return rydpol::angular::wigner3j(j[0], j[1], j[2], j[3], j[4], j[5]);
  return rydpol::angular::wigner6j(j[0], j[1], j[2], j[3], j[4], j[5]);
}

// ---------------------------------------------------------------------- main

int run(int argc, char **argv);

int exit_code_for(const Error &e) {
  return rydpol::is_numerical(e.code()) ? kExitNumerical : kExitValidation;
}

int replay(const std::string &manifest_path, const std::string &out_override) {
  const Json m = rydpol::io::read_json(manifest_path);
  if (!m.contains("argv") || !m["argv"].is_array())
    throw Error(ErrorCode::invalid_argument, manifest_path + " has no argv");
  if (m.value("version", "") != rydpol::io::version_string())
    std::cerr << "warning: manifest written by " << m.value("version", "?")
              << ", replaying with " << rydpol::io::version_string() << "\n";
  std::vector<std::string> args{"rydpol"};
  for (const auto &a : m["argv"])
    args.push_back(a.get<std::string>());
  args.push_back("--out");
  args.push_back(out_override.empty()
                     ? fs::path(manifest_path).parent_path().lexically_normal().string()
                     : out_override);
  if (args.back().empty())
    args.back() = ".";
  std::vector<char *> ptrs;
  for (auto &s : args)
    ptrs.push_back(s.data());
  return run(static_cast<int>(ptrs.size()), ptrs.data());
}

// Command-line tokens minus the program name and output directory.
std::vector<std::string> manifest_argv(int argc, char **argv) {
  std::vector<std::string> out;
  for (int k = 1; k < argc; ++k) {
    const std::string s = argv[k];
    if (s == "--out") {
      ++k;
      continue;
    }
    if (s.rfind("--out=", 0) == 0)
      continue;
    out.push_back(s);
  }
  return out;
}

int run(int argc, char **argv) {
  CLI::App app{"Rydberg-atom RF polarimetry: dressed spectra, EIT simulation and "
               "SOP inversion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rydpol::io::version_string());

  SpectrogramArgs sg;
  auto *c_sg = app.add_subcommand("spectrogram", "Dressed eigenvalues over phi");
  c_sg->add_option("--J2", sg.J2, "2J of the lower Rydberg level")->required()->check(kTwiceJ);
  c_sg->add_option("--p", sg.p, "J' - J sign class")->required()->check(CLI::Range(-1, 1));
  c_sg->add_option("--phi-steps", sg.phi_steps, "Points on [0, 2 pi]")
      ->check(CLI::Range(2, 1000000))->capture_default_str();
  c_sg->add_option("--envelopes", sg.envelopes, "Add envelope columns (3/2^+-)")
      ->check(CLI::IsMember({"exact", "approx"}));
  c_sg->add_option("--tol", sg.tol, "Degeneracy tolerance")
      ->check(CLI::PositiveNumber)->capture_default_str();
  add_common(c_sg, sg.common);

  EnvelopeArgs ev;
  auto *c_ev = app.add_subcommand("envelopes", "3/2^+- envelope curves");
  c_ev->add_option("--phi-steps", ev.phi_steps, "Points on [0, 2 pi]")
      ->check(CLI::Range(2, 1000000))->capture_default_str();
  c_ev->add_option("--kind", ev.kind, "exact, approx or both")
      ->check(CLI::IsMember({"exact", "approx", "both"}))->capture_default_str();
  add_common(c_ev, ev.common);

  EitArgs eit;
  auto *c_eit = app.add_subcommand("eit", "EIT spectrogram");
  c_eit->add_option("--scenario", eit.scenario, "Scenario JSON")->check(CLI::ExistingFile);
  c_eit->add_option("--J2", eit.J2, "2J of the lower Rydberg level")->check(kTwiceJ);
  c_eit->add_option("--p", eit.p, "J' - J sign class")->check(CLI::Range(-1, 1));
  c_eit->add_option("--omega-probe", eit.omega_probe, "Probe Rabi frequency (MHz)");
  c_eit->add_option("--omega-coupling", eit.omega_coupling, "Coupling Rabi frequency (MHz)");
  c_eit->add_option("--omega-rf", eit.omega_rf, "RF Rabi scale (MHz)");
  c_eit->add_option("--gamma-i", eit.gamma_i, "Intermediate decay rate (MHz)");
  c_eit->add_option("--gamma-r", eit.gamma_r, "Rydberg decay rate (MHz)");
  c_eit->add_option("--delta-probe", eit.delta_probe, "Probe detuning (MHz)");
  c_eit->add_option("--delta-min", eit.delta_min, "Coupling detuning grid start (MHz)");
  c_eit->add_option("--delta-max", eit.delta_max, "Coupling detuning grid end (MHz)");
  c_eit->add_option("--delta-points", eit.delta_points, "Coupling detuning grid points");
  c_eit->add_option("--phi-steps", eit.phi_steps, "Points on [0, 2 pi]");
  c_eit->add_option("--phi", eit.phi, "Single phase angle; also writes a spectrum file")
      ->excludes("--phi-steps");
  c_eit->add_option("--optics", eit.optics, "standard or rotated-circular")
      ->check(CLI::IsMember({"standard", "rotated-circular", "rotated_circular"}));
  c_eit->add_option("--third-level", eit.third_level,
                    "Add the fine-structure partner of r2 this far above (MHz)");
  c_eit->add_option("--third-J2", eit.third_J2, "2J of the extra level");
  c_eit->add_option("--noise", eit.noise, "Gaussian noise on the response")
      ->check(CLI::NonNegativeNumber);
  c_eit->add_option("--seed", eit.seed, "Noise seed")->capture_default_str();
  add_common(c_eit, eit.common);

  InvertArgs iv;
  auto *c_iv = app.add_subcommand("invert", "Candidate SOPs from measured spectra");
  c_iv->add_option("--spectrum", iv.spectra, "Spectrum JSON (one per optics preset)")
      ->required()->check(CLI::ExistingFile)->expected(1, 2)->take_all();
  c_iv->add_option("--scenario", iv.scenario, "Simulation parameters for calibration")
      ->check(CLI::ExistingFile);
  c_iv->add_option("--method", iv.method, "approx or exact")
      ->check(CLI::IsMember({"approx", "exact"}))->capture_default_str();
  c_iv->add_option("--dead-band", iv.dead_band, "Dead band (fraction of peak response)")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c_iv->add_option("--min-prominence", iv.min_prominence, "Peak prominence floor")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  add_common(c_iv, iv.common);

  RoundTripArgs rtp;
  auto *c_rt = app.add_subcommand("roundtrip", "Simulate, extract peaks and invert");
  c_rt->add_option("--J2", rtp.J2, "2J of the lower Rydberg level")->required()->check(kTwiceJ);
  c_rt->add_option("--p", rtp.p, "J' - J sign class")->required()->check(CLI::Range(-1, 1));
  c_rt->add_option("--phi", rtp.phi, "True phase angle(s)")->required()->delimiter(',');
  c_rt->add_option("--level", rtp.level, "eigen or eit")
      ->check(CLI::IsMember({"eigen", "eit"}))->capture_default_str();
  c_rt->add_option("--optics", rtp.optics, "Optics presets, first supplies the ratio")
      ->check(CLI::IsMember({"standard", "rotated-circular", "rotated_circular"}))
      ->delimiter(',');
  c_rt->add_option("--method", rtp.method, "approx or exact")
      ->check(CLI::IsMember({"approx", "exact"}))->capture_default_str();
  add_common(c_rt, rtp.common);

  WignerArgs w3, w6;
  auto *c_w = app.add_subcommand("wigner", "Print a Wigner symbol");
  c_w->require_subcommand(1);
  auto *c_w3 = c_w->add_subcommand("3j", "(j1 j2 j3; m1 m2 m3)");
  c_w3->add_option("values", w3.args, "j1 j2 j3 m1 m2 m3, e.g. 3/2")->expected(6)->required();
  auto *c_w6 = c_w->add_subcommand("6j", "{j1 j2 j3; j4 j5 j6}");
  c_w6->add_option("values", w6.args, "j1 j2 j3 j4 j5 j6")->expected(6)->required();

  std::string manifest, replay_out;
  auto *c_rp = app.add_subcommand("replay", "Re-run a manifest");
  c_rp->add_option("manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  c_rp->add_option("--out", replay_out, "Output directory (default: manifest's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  Run run;
  run.argv = manifest_argv(argc, argv);
  try {
    if (c_sg->parsed()) {
      run.command = "spectrogram";
      run_spectrogram(sg, run);
    } else if (c_ev->parsed()) {
      run.command = "envelopes";
      run_envelopes(ev, run);
    } else if (c_eit->parsed()) {
      run.command = "eit";
      run_eit(eit, run);
    } else if (c_iv->parsed()) {
      run.command = "invert";
      run_invert(iv, run);
    } else if (c_rt->parsed()) {
      run.command = "roundtrip";
      run_roundtrip(rtp, run);
    } else if (c_w->parsed()) {
      const bool three = c_w3->parsed();
      std::cout << fmt::format("{:.17g}\n", run_wigner(three ? "3j" : "6j",
                                                        three ? w3 : w6));
    } else if (c_rp->parsed()) {
      return replay(manifest, replay_out);
    }
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) { return run(argc, argv); }
