#include "rydpol/io.hpp"

#include "rydpol/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include <unistd.h>

namespace rydpol::io {

namespace {

constexpr double kToDegrees = 180.0 / std::numbers::pi;

double angle_out(double phi, bool degrees) {
  return degrees ? phi * kToDegrees : phi;
}

double finite(double v) {
  if (!std::isfinite(v))
    throw Error(ErrorCode::invalid_argument, "non-finite value in output");
  return v;
}

Json number_array(const std::vector<double> &v) {
  Json a = Json::array();
  for (double x : v)
    a.push_back(finite(x));
  return a;
}

Json complex_to_json(sop::Complex c) {
  return Json::array({finite(c.real()), finite(c.imag())});
}

sop::Complex complex_from_json(const Json &j, const char *what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

// Collects every problem found while reading a document.
class Reader {
public:
  explicit Reader(std::vector<std::string> &issues) : issues_(issues) {}

  const Json *object(const Json &parent, const char *key, bool required) {
    if (!parent.contains(key)) {
      if (required)
        issues_.push_back(fmt::format("missing \"{}\"", key));
      return nullptr;
    }
    const Json &v = parent.at(key);
    if (!v.is_object()) {
      issues_.push_back(fmt::format("\"{}\" must be an object", key));
      return nullptr;
    }
    return &v;
  }

  void number(const Json &parent, const char *key, double &out) {
    if (!parent.contains(key))
      return;
    const Json &v = parent.at(key);
    if (!v.is_number())
      issues_.push_back(fmt::format("\"{}\" must be a number", key));
    else
      out = v.get<double>();
  }

  bool integer(const Json &parent, const char *key, int &out, bool required) {
    if (!parent.contains(key)) {
      if (required)
        issues_.push_back(fmt::format("missing \"{}\"", key));
      return false;
    }
    const Json &v = parent.at(key);
    if (!v.is_number_integer()) {
      issues_.push_back(fmt::format("\"{}\" must be an integer", key));
      return false;
    }
    out = v.get<int>();
    return true;
  }

  void boolean(const Json &parent, const char *key, bool &out) {
    if (!parent.contains(key))
      return;
    const Json &v = parent.at(key);
    if (!v.is_boolean())
      issues_.push_back(fmt::format("\"{}\" must be true or false", key));
    else
      out = v.get<bool>();
  }

  void add(std::string issue) { issues_.push_back(std::move(issue)); }

private:
  std::vector<std::string> &issues_;
};

[[noreturn]] void throw_issues(const std::vector<std::string> &issues) {
  std::string msg = "invalid scenario:";
  for (const auto &s : issues)
    msg += "\n  - " + s;
  throw Error(ErrorCode::invalid_argument, msg);
}

sop::Vec3 vec3_from_json(const Json &j, const char *what) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " must be a 3-vector");
  sop::Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number())
      throw Error(ErrorCode::invalid_argument,
                  std::string(what) + " must be a 3-vector");
    v[k] = j[k].get<double>();
  }
  return v;
}

sop::CVec3 cvec3_from_json(const Json &j, const char *what) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " must hold three [re, im] pairs");
  sop::CVec3 v;
  for (int k = 0; k < 3; ++k)
    v[k] = complex_from_json(j[k], what);
  return v;
}

} // namespace

std::string format_number(double v) { return fmt::format("{:.9g}", finite(v)); }

angular::HalfInt parse_half_int(const std::string &text) {
  auto bad = [&] {
    return Error(ErrorCode::invalid_argument,
                 "not a half-integer: \"" + text + "\"");
  };
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const int num = std::stoi(text.substr(0, slash), &used);
      if (used != slash || text.substr(slash + 1) != "2")
        throw bad();
      if (num % 2 == 0)
        throw bad();
      return angular::half(num);
    }
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw bad();
    const double twice = 2.0 * v;
    if (std::abs(twice - std::round(twice)) > 1e-12)
      throw bad();
    return angular::half(static_cast<int>(std::lround(twice)));
  } catch (const std::logic_error &) {
    throw bad();
  }
}

std::string_view to_string(EnvelopeKind kind) {
  return kind == EnvelopeKind::exact ? "exact" : "approx";
}

std::optional<EnvelopeKind> parse_envelope_kind(std::string_view name) {
  if (name == "exact")
    return EnvelopeKind::exact;
  if (name == "approx")
    return EnvelopeKind::approx;
  return std::nullopt;
}

dressing::EnvelopePair envelopes(EnvelopeKind kind, double phi) {
  return kind == EnvelopeKind::exact ? dressing::envelopes_exact(phi)
                                     : dressing::envelopes_approx(phi);
}

Json class_to_json(const dressing::TransitionClass &cls) {
  return Json{{"J2", cls.J.twice()}, {"p", cls.p}};
}

dressing::TransitionClass class_from_json(const Json &j) {
  if (!j.is_object() || !j.contains("J2") || !j.contains("p") ||
      !j["J2"].is_number_integer() || !j["p"].is_number_integer())
    throw Error(ErrorCode::invalid_argument,
                "class must be {\"J2\": int, \"p\": int}");
  return dressing::TransitionClass::from_twice(j["J2"].get<int>(),
                                               j["p"].get<int>());
}

Json sop_to_json(const sop::RfSop &s) {
  if (s.phi)
    return Json{{"phi", finite(*s.phi)}};
  return Json{{"amp_plus", complex_to_json(s.amp_plus)},
              {"amp_minus", complex_to_json(s.amp_minus)}};
}

sop::RfSop sop_from_json(const Json &j) {
  if (j.is_object() && j.contains("phi") && j["phi"].is_number())
    return sop::sop_from_phi(j["phi"].get<double>());
  if (j.is_object() && j.contains("amp_plus") && j.contains("amp_minus"))
    return sop::RfSop::from_amplitudes(complex_from_json(j["amp_plus"], "amp_plus"),
                                       complex_from_json(j["amp_minus"], "amp_minus"));
  throw Error(ErrorCode::invalid_argument,
              "SOP must be {\"phi\": x} or {\"amp_plus\", \"amp_minus\"}");
}

Json stokes_to_json(const sop::StokesVector &s) {
  return Json{{"s1", finite(s.s1)}, {"s2", finite(s.s2)}, {"s3", finite(s.s3)}};
}

std::string spectrogram_csv(const std::vector<dressing::EigenSpectrum> &rows,
                            std::optional<EnvelopeKind> envelope, bool degrees) {
  std::string out = "phi,band_index,eigenvalue";
  if (envelope)
    out += ",eo_plus,eo_minus,ei_plus,ei_minus,exact_or_approx";
  out += '\n';
  for (const auto &row : rows) {
    std::string tail;
    if (envelope) {
      const auto e = envelopes(*envelope, row.phi);
      tail = fmt::format(",{},{},{},{},{}", format_number(e.outer_plus),
                         format_number(e.outer_minus), format_number(e.inner_plus),
                         format_number(e.inner_minus), to_string(*envelope));
    }
    const std::string phi = format_number(angle_out(row.phi, degrees));
    for (std::size_t b = 0; b < row.eigenvalues.size(); ++b)
      out += fmt::format("{},{},{}{}\n", phi, b, format_number(row.eigenvalues[b]),
                         tail);
  }
  return out;
}

Json spectrogram_json(const dressing::TransitionClass &cls,
                      const std::vector<dressing::EigenSpectrum> &rows,
                      std::optional<EnvelopeKind> envelope, bool degrees) {
  Json phi = Json::array(), bands = Json::array(), distinct = Json::array();
  Json env = Json::array();
  for (const auto &row : rows) {
    phi.push_back(finite(angle_out(row.phi, degrees)));
    bands.push_back(number_array(row.eigenvalues));
    distinct.push_back(row.distinct_count());
    if (envelope) {
      const auto e = envelopes(*envelope, row.phi);
      env.push_back(number_array(
          {e.outer_plus, e.outer_minus, e.inner_plus, e.inner_minus}));
    }
  }
  Json j{{"class", class_to_json(cls)},
         {"angle_unit", degrees ? "deg" : "rad"},
         {"phi", phi},
         {"eigenvalues", bands},
         {"distinct_count", distinct}};
  if (envelope) {
    j["envelopes"] = Json{{"kind", to_string(*envelope)},
                          {"columns", {"eo_plus", "eo_minus", "ei_plus", "ei_minus"}},
                          {"values", env}};
  }
  return j;
}

std::string envelopes_csv(const std::vector<double> &phi_grid,
                          const std::vector<EnvelopeKind> &kinds, bool degrees) {
  std::string out = "phi,eo_plus,eo_minus,ei_plus,ei_minus,exact_or_approx\n";
  for (double phi : phi_grid)
    for (auto kind : kinds) {
      const auto e = envelopes(kind, phi);
      out += fmt::format("{},{},{},{},{},{}\n",
                         format_number(angle_out(phi, degrees)),
                         format_number(e.outer_plus), format_number(e.outer_minus),
                         format_number(e.inner_plus), format_number(e.inner_minus),
                         to_string(kind));
    }
  return out;
}

std::string eit_csv(const eitsim::EitSpectrogram &s, bool degrees) {
  std::string out = "phi,delta_c_mhz,response\n";
  for (std::size_t i = 0; i < s.phi_grid.size(); ++i) {
    const std::string phi = format_number(angle_out(s.phi_grid[i], degrees));
    for (std::size_t k = 0; k < s.detuning_grid.size(); ++k)
      out += fmt::format("{},{},{}\n", phi, format_number(s.detuning_grid[k]),
                         format_number(s.response(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(k))));
  }
  return out;
}

Json optics_to_json(const sop::OpticalConfig &optics) {
  auto vec = [](const sop::Vec3 &v) {
    return Json::array({finite(v[0]), finite(v[1]), finite(v[2])});
  };
  auto cvec = [](const sop::CVec3 &v) {
    return Json::array(
        {complex_to_json(v[0]), complex_to_json(v[1]), complex_to_json(v[2])});
  };
  return Json{{"probe", {{"k", vec(optics.propagation_probe)},
                         {"pol", cvec(optics.pol_probe)}}},
              {"coupling", {{"k", vec(optics.propagation_coupling)},
                            {"pol", cvec(optics.pol_coupling)}}}};
}

Json eit_json(const eitsim::LevelScheme &scheme, const eitsim::SimParams &params,
              const eitsim::EitSpectrogram &s, bool degrees) {
  Json phi = Json::array();
  for (double p : s.phi_grid)
    phi.push_back(finite(angle_out(p, degrees)));
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < s.response.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < s.response.cols(); ++k)
      row.push_back(finite(s.response(i, k)));
    rows.push_back(std::move(row));
  }
  Json j{{"class", class_to_json(scheme.cls)}};
  if (scheme.third)
    j["third_level"] = Json{{"J2", scheme.third->J.twice()},
                            {"delta_mhz", finite(scheme.third->delta_mhz)}};
  j["optics"] = optics_to_json(params.optics);
  j["angle_unit"] = degrees ? "deg" : "rad";
  j["phi"] = phi;
  j["delta_c_mhz"] = number_array(s.detuning_grid);
  j["response"] = rows;
  return j;
}

SpectrumFile spectrum_from_json(const Json &j) {
  std::vector<std::string> issues;
  SpectrumFile f;
  if (!j.is_object())
    throw Error(ErrorCode::invalid_argument, "spectrum file must be an object");
  auto numbers = [&](const char *key, std::vector<double> &out) {
    if (!j.contains(key) || !j[key].is_array()) {
      issues.push_back(fmt::format("\"{}\" must be an array of numbers", key));
      return;
    }
    for (const auto &v : j[key]) {
      if (!v.is_number()) {
        issues.push_back(fmt::format("\"{}\" must be an array of numbers", key));
        return;
      }
      out.push_back(v.get<double>());
    }
  };
  numbers("detuning_mhz", f.spectrum.detuning);
  numbers("amplitude", f.spectrum.amplitude);
  try {
    f.cls = class_from_json(j.contains("class") ? j["class"] : Json());
  } catch (const Error &e) {
    issues.push_back(e.what());
  }
  if (j.contains("optics")) {
    const auto preset = j["optics"].is_string()
                            ? sop::parse_optics_preset(j["optics"].get<std::string>())
                            : std::nullopt;
    if (!preset)
      issues.push_back("\"optics\" must be \"standard\" or \"rotated_circular\"");
    else
      f.optics = *preset;
  }
  if (issues.empty()) {
    try {
      f.spectrum.validate();
    } catch (const Error &e) {
      issues.push_back(e.what());
    }
  }
  if (!issues.empty()) {
    std::string msg = "invalid spectrum:";
    for (const auto &s : issues)
      msg += "\n  - " + s;
    throw Error(ErrorCode::invalid_argument, msg);
  }
  return f;
}

Json spectrum_to_json(const SpectrumFile &s) {
  return Json{{"class", class_to_json(s.cls)},
              {"optics", sop::to_string(s.optics)},
              {"detuning_mhz", number_array(s.spectrum.detuning)},
              {"amplitude", number_array(s.spectrum.amplitude)}};
}

Scenario scenario_from_json(const Json &j) {
  if (!j.is_object())
    throw Error(ErrorCode::invalid_argument, "scenario must be a JSON object");
  std::vector<std::string> issues;
  Reader r(issues);
  Scenario s;

  bool have_class = false;
  if (const Json *c = r.object(j, "class", true)) {
    int J2 = 0, p = 0;
    const bool ok = r.integer(*c, "J2", J2, true) & r.integer(*c, "p", p, true);
    if (ok) {
      try {
        s.scheme.cls = dressing::TransitionClass::from_twice(J2, p);
        have_class = true;
      } catch (const Error &e) {
        r.add(e.what());
      }
    }
  }
  if (const Json *t = r.object(j, "third_level", false)) {
    int J2 = 0;
    eitsim::ThirdLevel third;
    if (r.integer(*t, "J2", J2, true))
      third.J = angular::half(J2);
    if (!t->contains("delta_mhz"))
      r.add("missing \"delta_mhz\"");
    r.number(*t, "delta_mhz", third.delta_mhz);
    s.scheme.third = third;
  }
  if (const Json *p = r.object(j, "params", false)) {
    r.number(*p, "omega_probe", s.params.omega_probe);
    r.number(*p, "omega_coupling", s.params.omega_coupling);
    r.number(*p, "omega_rf", s.params.omega_rf);
    r.number(*p, "gamma_i", s.params.gamma_i);
    r.number(*p, "gamma_r", s.params.gamma_r);
    r.number(*p, "delta_probe", s.params.delta_probe);
    for (const auto &[key, _] : p->items())
      if (key != "omega_probe" && key != "omega_coupling" && key != "omega_rf" &&
          key != "gamma_i" && key != "gamma_r" && key != "delta_probe")
        r.add(fmt::format("unknown parameter \"{}\"", key));
  }
  if (const Json *d = r.object(j, "delta_c", false)) {
    double lo = -60.0, hi = 60.0;
    int points = 481;
    r.number(*d, "min", lo);
    r.number(*d, "max", hi);
    r.integer(*d, "points", points, false);
    if (points < 8 || !(hi > lo))
      r.add("\"delta_c\" needs max > min and at least 8 points");
    else
      s.params.delta_c_grid = eitsim::SimParams::uniform_grid(lo, hi, points);
  }
  if (const Json *p = r.object(j, "phi", false)) {
    r.integer(*p, "steps", s.phi_steps, false);
    r.boolean(*p, "endpoint", s.phi_endpoint);
    if (s.phi_steps < 1)
      r.add("\"phi.steps\" must be positive");
  }
  if (j.contains("optics")) {
    const Json &o = j["optics"];
    if (o.is_string()) {
      const auto preset = sop::parse_optics_preset(o.get<std::string>());
      if (!preset)
        r.add("\"optics\" must be \"standard\", \"rotated_circular\" or an object");
      else {
        s.optics_preset = preset;
        s.params.optics = sop::optics_from_preset(*preset);
      }
    } else if (o.is_object()) {
      s.optics_preset.reset();
      try {
        s.params.optics.propagation_probe = vec3_from_json(o.at("probe").at("k"), "probe.k");
        s.params.optics.pol_probe = cvec3_from_json(o.at("probe").at("pol"), "probe.pol");
        s.params.optics.propagation_coupling =
            vec3_from_json(o.at("coupling").at("k"), "coupling.k");
        s.params.optics.pol_coupling =
            cvec3_from_json(o.at("coupling").at("pol"), "coupling.pol");
      } catch (const Error &e) {
        r.add(e.what());
      } catch (const nlohmann::json::exception &) {
        r.add("explicit optics need probe.k, probe.pol, coupling.k, coupling.pol");
      }
    } else {
      r.add("\"optics\" must be a preset name or an object");
    }
  }
  for (const auto &[key, _] : j.items())
    if (key != "class" && key != "third_level" && key != "params" &&
        key != "delta_c" && key != "phi" && key != "optics" && key != "name" &&
        key != "description")
      r.add(fmt::format("unknown key \"{}\"", key));

  if (have_class)
    for (auto &m : s.scheme.validate())
      issues.push_back(std::move(m));
  for (auto &m : s.params.validate())
    issues.push_back(std::move(m));
  if (!issues.empty())
    throw_issues(issues);
  return s;
}

Json scenario_to_json(const Scenario &s) {
  Json j{{"class", class_to_json(s.scheme.cls)}};
  if (s.scheme.third)
    j["third_level"] = Json{{"J2", s.scheme.third->J.twice()},
                            {"delta_mhz", finite(s.scheme.third->delta_mhz)}};
  const auto &p = s.params;
  j["params"] = Json{{"omega_probe", p.omega_probe},
                     {"omega_coupling", p.omega_coupling},
                     {"omega_rf", p.omega_rf},
                     {"gamma_i", p.gamma_i},
                     {"gamma_r", p.gamma_r},
                     {"delta_probe", p.delta_probe}};
  j["delta_c"] = Json{{"min", p.delta_c_grid.front()},
                      {"max", p.delta_c_grid.back()},
                      {"points", p.delta_c_grid.size()}};
  j["phi"] = Json{{"steps", s.phi_steps}, {"endpoint", s.phi_endpoint}};
  if (s.optics_preset)
    j["optics"] = sop::to_string(*s.optics_preset);
  else
    j["optics"] = optics_to_json(p.optics);
  return j;
}

Json inversion_report(const dressing::TransitionClass &cls,
                      const inversion::PeakSet &peaks,
                      const inversion::PhaseCandidates &result,
                      const Json &diagnostics, bool degrees) {
  auto angles = [&](const std::vector<double> &v) {
    Json a = Json::array();
    for (double x : v)
      a.push_back(finite(angle_out(x, degrees)));
    return a;
  };
  Json stokes = Json::array();
  for (double c : result.candidates) {
    Json e{{"phi", finite(angle_out(c, degrees))}};
    const Json st = stokes_to_json(sop::stokes_from_phi(c));
    for (const auto &[k, v] : st.items())
      e[k] = v;
    bool kept = false;
    for (double q : result.pruned)
      kept = kept || sop::angle_distance(q, c) < 1e-9;
    e["pruned_in"] = kept;
    stokes.push_back(std::move(e));
  }
  return Json{{"class", class_to_json(cls)},
              {"angle_unit", degrees ? "deg" : "rad"},
              {"ratio", finite(result.ratio)},
              {"principal", finite(angle_out(result.principal, degrees))},
              {"candidates", angles(result.candidates)},
              {"pruned", angles(result.pruned)},
              {"ambiguity", inversion::to_string(result.ambiguity)},
              {"prominence_ambiguous", result.prominence_ambiguous},
              {"stokes", stokes},
              {"peaks", {{"positions_mhz", number_array(peaks.positions)},
                         {"lambda_o_plus", finite(peaks.lambda_o_plus)},
                         {"lambda_o_minus", finite(peaks.lambda_o_minus)},
                         {"lambda_i_plus", finite(peaks.lambda_i_plus)},
                         {"lambda_i_minus", finite(peaks.lambda_i_minus)},
                         {"central_prominence", finite(peaks.central_prominence)},
                         {"has_central", peaks.has_central}}},
              {"diagnostics", diagnostics}};
}

Json read_json(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::invalid_argument,
                path.string() + " is not valid JSON: " + e.what());
  }
}

std::string dump(const Json &j) { return j.dump(2) + "\n"; }

void write_files(
    const std::vector<std::pair<std::filesystem::path, std::string>> &files) {
  namespace fs = std::filesystem;
  std::vector<fs::path> staged;
  auto discard = [&] {
    std::error_code ec;
    for (const auto &p : staged)
      fs::remove(p, ec);
  };
  const std::string suffix = fmt::format(".tmp{}", static_cast<long>(::getpid()));
  for (const auto &[path, content] : files) {
    fs::path tmp = path;
    tmp += suffix;
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out)
      staged.push_back(tmp);
    out << content;
    out.close();
    if (!out) {
      discard();
      throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    }
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    std::error_code ec;
    fs::rename(staged[k], files[k].first, ec);
    if (ec) {
      discard();
      throw Error(ErrorCode::io_failure,
                  "cannot move output into place: " + files[k].first.string());
    }
  }
}

std::string version_string() { return "rydpol " RYDPOL_VERSION; }

} // namespace rydpol::io
