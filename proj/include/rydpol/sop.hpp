#pragma once

// RF state of polarization (SOP), Stokes vectors and optical-beam geometry.
//
// Conventions
//   * Spherical unit vectors e_{+1} = -(x + i y)/sqrt2, e_{-1} = (x - i y)/sqrt2,
//     e_0 = z, with z the RF propagation axis and the atomic quantization axis.
//   * A polarization vector v is expanded as v = sum_q c_q e_q, so
//     c_q = conj(e_q) . v.
//   * The RF field of the dual-port antenna is (u1 + e^{i phi} u2)/sqrt2 with
//     u1,2 = (x -/+ y)/sqrt2. Dropping the global phase e^{i phi/2},
//         amp_plus  = -(cos(phi/2) + sin(phi/2)) / sqrt2
//         amp_minus =  (cos(phi/2) - sin(phi/2)) / sqrt2
//     so phi = 0 is linear along x (vertical in the lab) and phi = pi is
//     linear along y (horizontal).
//   * Stokes: s1 = +1 is linear-horizontal (along y), s3 = +1 is pure e_{+1}
//     (labelled LCP). The meridian phi = 0 -> 2 pi visits LVP, LCP, LHP, RCP.

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rydpol::sop {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

/// RF field SOP as normalized spherical amplitudes (|a+|^2 + |a-|^2 = 1).
struct RfSop {
  /// Set for meridian states built from a phase angle; in [0, 2 pi).
  std::optional<double> phi;
  Complex amp_plus{0.0, 0.0};
  Complex amp_minus{0.0, 0.0};

  /// Arbitrary (non-meridian) SOP; the pair is normalized. Throws
  /// ErrorCode::invalid_argument for a zero pair.
  static RfSop from_amplitudes(Complex plus, Complex minus);

  /// Amplitude of e_q for q in {-1, 0, +1} (zero for q = 0).
  Complex amplitude(int q) const;

  /// Lab-frame complex field vector amp_plus e_+ + amp_minus e_-.
  CVec3 field() const;
};

struct StokesVector {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double norm() const;
};

/// Reduce an angle to [0, 2 pi).
double wrap_angle(double phi);

/// Shortest angular distance between two angles, in [0, pi].
double angle_distance(double a, double b);

RfSop sop_from_phi(double phi);
StokesVector stokes(const RfSop &sop);
StokesVector stokes_from_phi(double phi);

/// Spherical components (c_-, c_0, c_+) of a polarization vector.
struct SphericalComponents {
  Complex minus;
  Complex zero;
  Complex plus;

  Complex operator[](int q) const;
  double norm_squared() const;
};

/// Rotation whose rows are the (x', y', z') axes of the frame with z' along
/// the quantization axis. x' is the projection of lab x onto the plane
/// normal to the axis (lab y if the axis is parallel to x).
Eigen::Matrix3d quantization_frame(const Vec3 &quantization_axis);

/// Decompose pol onto e_-, e_0, e_+ of the frame quantized along the axis.
/// Throws ErrorCode::invalid_argument for zero-norm inputs.
SphericalComponents spherical_components(const CVec3 &pol,
                                         const Vec3 &quantization_axis);

/// Inverse of spherical_components: the lab-frame vector sum_q c_q e_q.
CVec3 reconstruct(const SphericalComponents &c, const Vec3 &quantization_axis);

enum class OpticsPreset { standard, rotated_circular };

std::string_view to_string(OpticsPreset preset);
/// Accepts "standard", "rotated_circular" and "rotated-circular".
std::optional<OpticsPreset> parse_optics_preset(std::string_view name);

/// Probe and coupling beam geometry.
struct OpticalConfig {
  Vec3 propagation_probe = Vec3::UnitY();
  Vec3 propagation_coupling = -Vec3::UnitY();
  CVec3 pol_probe = CVec3(1.0, 0.0, 0.0);
  CVec3 pol_coupling = CVec3(1.0, 0.0, 0.0);

  /// Empty when all invariants hold; otherwise one message per violation.
  std::vector<std::string> validate(double tol = 1e-9) const;
};

/// Beams counter-propagating along y, both linearly polarized along x.
OpticalConfig standard_optics();

/// Beams counter-propagating along (y - z)/sqrt2, both circularly polarized
/// with the common lab-frame Jones vector (x + i k_probe x x)/sqrt2.
OpticalConfig rotated_circular_optics();

OpticalConfig optics_from_preset(OpticsPreset preset);

} // namespace rydpol::sop
