#include "rydpol/sop.hpp"

#include "rydpol/error.hpp"

#include <cmath>
#include <numbers>

namespace rydpol::sop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

CVec3 unit_plus() { return CVec3(-kInvSqrt2, Complex(0, -kInvSqrt2), 0.0); }
CVec3 unit_minus() { return CVec3(kInvSqrt2, Complex(0, -kInvSqrt2), 0.0); }
CVec3 unit_zero() { return CVec3(0.0, 0.0, 1.0); }

} // namespace

RfSop RfSop::from_amplitudes(Complex plus, Complex minus) {
  const double n = std::sqrt(std::norm(plus) + std::norm(minus));
  if (!(n > 0.0) || !std::isfinite(n))
    throw Error(ErrorCode::invalid_argument,
                "SOP amplitudes must be finite and not both zero");
  RfSop s;
  s.amp_plus = plus / n;
  s.amp_minus = minus / n;
  return s;
}

Complex RfSop::amplitude(int q) const {
  if (q == 1)
    return amp_plus;
  if (q == -1)
    return amp_minus;
  return {0.0, 0.0};
}

CVec3 RfSop::field() const {
  return amp_plus * unit_plus() + amp_minus * unit_minus();
}

double StokesVector::norm() const {
  return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3);
}

double wrap_angle(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0)
    r += kTwoPi;
  if (r >= kTwoPi)
    r = 0.0;
  return r;
}

double angle_distance(double a, double b) {
  const double d = wrap_angle(a - b);
  return std::min(d, kTwoPi - d);
}

RfSop sop_from_phi(double phi) {
  if (!std::isfinite(phi))
    throw Error(ErrorCode::invalid_argument, "phase angle must be finite");
  const double c = std::cos(0.5 * phi);
  const double s = std::sin(0.5 * phi);
  RfSop sop;
  sop.phi = wrap_angle(phi);
  sop.amp_plus = -(c + s) * kInvSqrt2;
  sop.amp_minus = (c - s) * kInvSqrt2;
  return sop;
}

StokesVector stokes(const RfSop &sop) {
  const CVec3 e = sop.field();
  const Complex vertical = e.x();
  const Complex horizontal = e.y();
  StokesVector st;
  st.s1 = std::norm(horizontal) - std::norm(vertical);
  st.s2 = 2.0 * std::real(std::conj(horizontal) * vertical);
  st.s3 = std::norm(sop.amp_plus) - std::norm(sop.amp_minus);
  return st;
}

StokesVector stokes_from_phi(double phi) { return stokes(sop_from_phi(phi)); }

Complex SphericalComponents::operator[](int q) const {
  if (q == 1)
    return plus;
  if (q == -1)
    return minus;
  if (q == 0)
    return zero;
  throw Error(ErrorCode::invalid_argument, "spherical index must be -1, 0, 1");
}

double SphericalComponents::norm_squared() const {
  return std::norm(minus) + std::norm(zero) + std::norm(plus);
}

Eigen::Matrix3d quantization_frame(const Vec3 &quantization_axis) {
  const double n = quantization_axis.norm();
  if (!(n > 0.0))
    throw Error(ErrorCode::invalid_argument, "quantization axis has zero norm");
  const Vec3 z = quantization_axis / n;
  Vec3 ref = Vec3::UnitX();
  if (std::abs(z.dot(ref)) > 1.0 - 1e-12)
    ref = Vec3::UnitY();
  const Vec3 x = (ref - ref.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return r;
}

SphericalComponents spherical_components(const CVec3 &pol,
                                         const Vec3 &quantization_axis) {
  if (!(pol.norm() > 0.0))
    throw Error(ErrorCode::invalid_argument, "polarization has zero norm");
  const CVec3 local = quantization_frame(quantization_axis).cast<Complex>() * pol;
  SphericalComponents c;
  c.minus = unit_minus().dot(local); // Eigen's dot conjugates the left operand
  c.zero = unit_zero().dot(local);
  c.plus = unit_plus().dot(local);
  return c;
}

CVec3 reconstruct(const SphericalComponents &c, const Vec3 &quantization_axis) {
  const CVec3 local =
      c.minus * unit_minus() + c.zero * unit_zero() + c.plus * unit_plus();
  return quantization_frame(quantization_axis).transpose().cast<Complex>() *
         local;
}

std::string_view to_string(OpticsPreset preset) {
  return preset == OpticsPreset::standard ? "standard" : "rotated_circular";
}

std::optional<OpticsPreset> parse_optics_preset(std::string_view name) {
  if (name == "standard")
    return OpticsPreset::standard;
  if (name == "rotated_circular" || name == "rotated-circular")
    return OpticsPreset::rotated_circular;
  return std::nullopt;
}

std::vector<std::string> OpticalConfig::validate(double tol) const {
  std::vector<std::string> issues;
  auto unit = [&](const auto &v, const char *name) {
    if (std::abs(v.norm() - 1.0) > tol)
      issues.push_back(std::string(name) + " is not unit norm");
  };
  unit(propagation_probe, "propagation_probe");
  unit(propagation_coupling, "propagation_coupling");
  unit(pol_probe, "pol_probe");
  unit(pol_coupling, "pol_coupling");
  if (std::abs(propagation_probe.cast<Complex>().dot(pol_probe)) > tol)
    issues.push_back("pol_probe is not transverse to propagation_probe");
  if (std::abs(propagation_coupling.cast<Complex>().dot(pol_coupling)) > tol)
    issues.push_back("pol_coupling is not transverse to propagation_coupling");
  if (propagation_probe.dot(propagation_coupling) > -1.0 + tol)
    issues.push_back("probe and coupling beams are not counter-propagating");
  return issues;
}

OpticalConfig standard_optics() { return OpticalConfig{}; }

OpticalConfig rotated_circular_optics() {
  OpticalConfig o;
  o.propagation_probe = Vec3(0.0, 1.0, -1.0).normalized();
  o.propagation_coupling = -o.propagation_probe;
  const Vec3 x = Vec3::UnitX();
  const Vec3 y = o.propagation_probe.cross(x);
  const CVec3 circ =
      (x.cast<Complex>() + Complex(0.0, 1.0) * y.cast<Complex>()) * kInvSqrt2;
  o.pol_probe = circ;
  o.pol_coupling = circ;
  return o;
}

OpticalConfig optics_from_preset(OpticsPreset preset) {
  return preset == OpticsPreset::standard ? standard_optics()
                                          : rotated_circular_optics();
}

} // namespace rydpol::sop
