#pragma once

// File formats: CSV tables, JSON documents, scenario configs and run
// manifests. Every writer renders to a string first; files are only touched
// by write_files, which stages all outputs before renaming any of them into
// place.
//
// CSV: '.' decimal, no thousands separators, 9 significant digits. Angles are
// radians unless the degrees flag is set.

#include "rydpol/dressing.hpp"
#include "rydpol/eitsim.hpp"
#include "rydpol/inversion.hpp"
#include "rydpol/sop.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rydpol::io {

using Json = nlohmann::ordered_json;

/// "{:.9g}"; throws invalid_argument for non-finite values.
std::string format_number(double v);

/// Parses "3/2", "-1/2", "2" or "1.5" into a half-integer.
angular::HalfInt parse_half_int(const std::string &text);

enum class EnvelopeKind { exact, approx };
std::string_view to_string(EnvelopeKind kind);
std::optional<EnvelopeKind> parse_envelope_kind(std::string_view name);
dressing::EnvelopePair envelopes(EnvelopeKind kind, double phi);

Json class_to_json(const dressing::TransitionClass &cls);
/// {"J2": int, "p": int}
dressing::TransitionClass class_from_json(const Json &j);

/// {"phi": x} for meridian states, otherwise {"amp_plus": [re, im],
/// "amp_minus": [re, im]}.
Json sop_to_json(const sop::RfSop &sop);
sop::RfSop sop_from_json(const Json &j);
Json stokes_to_json(const sop::StokesVector &s);

// Eigenvalue spectrograms ---------------------------------------------------

std::string spectrogram_csv(const std::vector<dressing::EigenSpectrum> &rows,
                            std::optional<EnvelopeKind> envelope, bool degrees);
Json spectrogram_json(const dressing::TransitionClass &cls,
                      const std::vector<dressing::EigenSpectrum> &rows,
                      std::optional<EnvelopeKind> envelope, bool degrees);
/// phi,eo_plus,eo_minus,ei_plus,ei_minus,exact_or_approx; one row per angle
/// and kind.
std::string envelopes_csv(const std::vector<double> &phi_grid,
                          const std::vector<EnvelopeKind> &kinds, bool degrees);

// EIT ------------------------------------------------------------------------

std::string eit_csv(const eitsim::EitSpectrogram &s, bool degrees);
Json eit_json(const eitsim::LevelScheme &scheme, const eitsim::SimParams &params,
              const eitsim::EitSpectrogram &s, bool degrees);

/// A single measured or simulated spectrum.
struct SpectrumFile {
  dressing::TransitionClass cls;
  inversion::SampledSpectrum spectrum;
  sop::OpticsPreset optics = sop::OpticsPreset::standard;
};

/// {"detuning_mhz": [...], "amplitude": [...], "class": {"J2", "p"},
///  "optics": "standard" | "rotated_circular" (optional)}
SpectrumFile spectrum_from_json(const Json &j);
Json spectrum_to_json(const SpectrumFile &s);

// Scenarios ------------------------------------------------------------------

struct Scenario {
  eitsim::LevelScheme scheme;
  eitsim::SimParams params;
  std::optional<sop::OpticsPreset> optics_preset = sop::OpticsPreset::standard;
  int phi_steps = 73;
  bool phi_endpoint = true;
};

/// Reads a scenario, collecting every problem before throwing a single
/// invalid_argument whose message lists them all.
Scenario scenario_from_json(const Json &j);
Json scenario_to_json(const Scenario &s);

Json optics_to_json(const sop::OpticalConfig &optics);

// Inversion ------------------------------------------------------------------

Json inversion_report(const dressing::TransitionClass &cls,
                      const inversion::PeakSet &peaks,
                      const inversion::PhaseCandidates &result,
                      const Json &diagnostics, bool degrees);

// Files ------------------------------------------------------------------------

Json read_json(const std::filesystem::path &path);
std::string dump(const Json &j);

/// Writes every (path, content) pair or none: contents go to temporary
/// siblings first and are renamed once all writes succeeded. Throws
/// io_failure.
void write_files(
    const std::vector<std::pair<std::filesystem::path, std::string>> &files);

/// Version string written as the first key of every manifest.
std::string version_string();

} // namespace rydpol::io
