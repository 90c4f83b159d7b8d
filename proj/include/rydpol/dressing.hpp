#pragma once

// RF dressing of a resonantly coupled Rydberg pair r1 = |L, J>, r2 = |L+1, J'>.
//
// The angular coupling matrix M^(Jp) is real symmetric of dimension
// (2J+1) + (2J'+1). Rows and columns are ordered r1 m = -J..J ascending,
// then r2 m = -J'..J' ascending. Eigenvalues are dimensionless; the physical
// splitting is (RF Rabi scale) x eigenvalue.

#include "rydpol/angular.hpp"
#include "rydpol/sop.hpp"

#include <Eigen/Dense>

#include <array>
#include <numbers>
#include <string>
#include <vector>

namespace rydpol::dressing {

using angular::HalfInt;

/// (J, p) pair labelling the dressed manifold; J' = J + |p|.
struct TransitionClass {
  HalfInt J;
  int p = 0;

  /// Throws ErrorCode::invalid_argument unless J >= 1/2 is half-odd and
  /// p is in {-1, 0, +1}.
  static TransitionClass make(HalfInt J, int p);
  static TransitionClass from_twice(int twice_J, int p) {
    return make(HalfInt::from_twice(twice_J), p);
  }

  HalfInt j_prime() const { return angular::upper_j(J, p); }
  int dim() const { return J.multiplicity() + j_prime().multiplicity(); }
  /// Orbital angular momentum of r1 (r2 has L + 1).
  int orbital_l() const { return angular::orbital_l(J, p); }
  std::string label() const;

  bool operator==(const TransitionClass &) const = default;
};

enum class Level { r1, r2 };

struct BasisState {
  Level level;
  HalfInt m;
};

/// The documented basis ordering for a class.
std::vector<BasisState> basis(const TransitionClass &cls);

struct CouplingMatrix {
  TransitionClass cls;
  double phi = 0.0;
  Eigen::MatrixXd entries;
  std::vector<BasisState> basis;
};

/// M^(Jp) at phase angle phi, entries from the 3-j form of the coupling
/// weighted by cos(phi/2) + q sin(phi/2) for q = +/-1.
CouplingMatrix coupling_matrix(const TransitionClass &cls, double phi);

/// Complex Hermitian dressing matrix assembled from Wigner-Eckart dipole
/// elements and the spherical field amplitudes of an arbitrary SOP.
struct OracleMatrix {
  TransitionClass cls;
  sop::RfSop sop;
  Eigen::MatrixXcd entries;
  std::vector<BasisState> basis;
};

/// H(r2 m', r1 m) = sum_q amp_q <r2 m'| r_q |r1 m> with the generic six-j
/// reduction and unit radial integral; H(r1, r2) is the conjugate.
OracleMatrix oracle_matrix(const TransitionClass &cls, const sop::RfSop &sop);

/// oracle_matrix x this constant reproduces the normalization of
/// coupling_matrix for meridian SOPs (the sop amplitudes are normalized
/// while the coupling-matrix weights cos(phi/2) +/- sin(phi/2) are not).
inline constexpr double kOracleToCouplingScale = std::numbers::sqrt2;

inline constexpr double kDefaultDegeneracyTol = 1e-9;

struct EigenSpectrum {
  double phi = 0.0;
  /// Ascending, with multiplicity.
  std::vector<double> eigenvalues;
  /// Distinct values at tolerance and their multiplicities.
  std::vector<double> distinct_values;
  std::vector<int> degeneracies;

  int distinct_count() const { return static_cast<int>(distinct_values.size()); }
};

/// Group sorted eigenvalues into distinct values: consecutive values closer
/// than tol share a cluster.
EigenSpectrum make_spectrum(std::vector<double> eigenvalues, double phi,
                            double degeneracy_tol);

/// Throws ErrorCode::invalid_argument for tol <= 0 and
/// ErrorCode::eigensolver_failure if the eigensolver does not converge.
EigenSpectrum eigen_spectrum(const TransitionClass &cls, double phi,
                             double degeneracy_tol = kDefaultDegeneracyTol);

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd &m);
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd &m);

/// lambda_n = Re exp{i [phi/2 + (2n - 1) pi/4]}, n = 1..4.
std::array<double, 4> closed_form_eigenvalues_half(double phi);

/// Ratio between eigenvalues of M^(1/2, 0) and closed_form_eigenvalues_half:
/// the coupling matrix carries the prefactor sqrt(2/3) and the 3-j symbol
/// 1/sqrt3 per unit weight, while the closed form is normalized to unit peak.
inline constexpr double kHalfZeroMatrixScale = 2.0 / 3.0;

/// One spectrum per grid point, in grid order. Grid values must lie in
/// [0, 2 pi]. Evaluated in parallel; output order is deterministic.
std::vector<EigenSpectrum>
spectrogram(const TransitionClass &cls, const std::vector<double> &phi_grid,
            double degeneracy_tol = kDefaultDegeneracyTol);

/// n equally spaced angles covering [0, 2 pi) (or [0, 2 pi] with endpoint).
std::vector<double> phi_grid(int n, bool include_endpoint = false);

/// Symmetric envelopes bounding the positive and negative eigenvalues.
struct EnvelopePair {
  double outer_plus = 0.0;
  double outer_minus = 0.0;
  double inner_plus = 0.0;
  double inner_minus = 0.0;
};

/// Closed-form outer and inner envelopes for the 3/2^(+/-) classes.
EnvelopePair envelopes_exact(double phi);
/// Harmonic-plus-constant approximation of envelopes_exact.
EnvelopePair envelopes_approx(double phi);

/// Envelopes read off a spectrum: outer = largest |lambda|, inner = smallest
/// nonzero |lambda| (|lambda| > zero_tol). Works for every class.
EnvelopePair numeric_envelopes(const EigenSpectrum &spectrum,
                               double zero_tol = 1e-7);

} // namespace rydpol::dressing
