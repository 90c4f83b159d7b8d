#pragma once

// Steady-state ladder EIT through an RF-dressed Rydberg pair.
//
// Levels: ground g (S1/2, one sublevel m_g per solve), intermediate i (P3/2),
// the dressed pair r1 = |L, J>, r2 = |L+1, J'> and an optional extra level
// r3 = |L+1, J3> that the RF field couples to r1 off resonance. The coupling
// laser drives i to whichever Rydberg level has even L (S or D); a dressed
// state made only of the odd-L level is therefore dark to the optics.
//
// Rotating frame, all frequencies in MHz:
//   H_gg = 0, H_ii = -dp, H_rr = -(dp + dc), H_r3r3 = -(dp + dc) + d3
//   probe/coupling: (Omega / 2) sum_q c_q <up| r_q |low> / n, where n is the
//     largest angular factor of that laser's primary transition
//   RF r1 <-> r2, r1 <-> r3: Omega_rf sqrt2 sum_q a_q <r| r_q |r1>
// so the RF block has eigenvalues Omega_rf x eig(M^(Jp)) and EIT peaks sit at
// dc = Omega_rf x eigenvalue. Decay: i -> g at gamma_i, every Rydberg state
// -> g at gamma_r. The response averages m_g = +-1/2 incoherently:
//   response = 1 - sum A / sum A0,  A = -Im sum_m conj(H_{i_m g}) rho_{i_m g}
// with A0 the absorption with coupling and RF switched off.

#include "rydpol/dressing.hpp"
#include "rydpol/sop.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace rydpol::eitsim {

using angular::HalfInt;
using Complex = std::complex<double>;

struct ThirdLevel {
  /// J3 of |L+1, J3>, J3 != J'.
  HalfInt J;
  /// Energy offset above the resonant pair (MHz, > 0).
  double delta_mhz = 0.0;
};

struct LevelScheme {
  dressing::TransitionClass cls;
  std::optional<ThirdLevel> third;

  int intermediate_count() const { return 4; }
  int state_count() const;
  /// Index offsets into the state vector.
  int offset_intermediate() const { return 1; }
  int offset_r1() const { return 5; }
  int offset_r2() const { return offset_r1() + cls.J.multiplicity(); }
  int offset_r3() const { return offset_r2() + cls.j_prime().multiplicity(); }
  /// Orbital angular momentum of r1, r2 (and r3 = r2's L).
  int l_r1() const { return cls.orbital_l(); }
  int l_r2() const { return cls.orbital_l() + 1; }
  /// Which member of the pair the coupling laser reaches.
  dressing::Level coupled_level() const;
  bool third_is_coupled() const;

  /// Empty if consistent; otherwise one message per problem.
  std::vector<std::string> validate() const;
};

struct SimParams {
  double omega_probe = 0.5;
  double omega_coupling = 4.0;
  double omega_rf = 40.0;
  double gamma_i = 6.07;
  double gamma_r = 0.1;
  double delta_probe = 0.0;
  std::vector<double> delta_c_grid = default_grid();
  sop::OpticalConfig optics = sop::standard_optics();

  /// -60 .. 60 MHz in 0.25 MHz steps.
  static std::vector<double> default_grid();
  static std::vector<double> uniform_grid(double lo, double hi, int points);

  /// Hard errors, all at once.
  std::vector<std::string> validate() const;
  /// Soft issues (weak-probe regime violated).
  std::vector<std::string> warnings() const;
};

/// Lindblad jump operator sqrt(rate) |to><from|.
struct DecayChannel {
  int from = 0;
  int to = 0;
  double rate = 0.0;
};

struct SteadyState {
  Eigen::MatrixXcd rho;
  double trace_error = 0.0;
  /// Max-norm of L(rho) with the full (unconstrained) generator.
  double residual = 0.0;
  double min_eigenvalue = 0.0;
  double hermiticity_error = 0.0;
};

/// Vectorized generator (row-major vec, index a N + b).
Eigen::SparseMatrix<Complex> liouvillian(const Eigen::MatrixXcd &H,
                                         const std::vector<DecayChannel> &decay);

/// Dimension of the generator's nullspace from a dense SVD (singular values
/// below tol times the largest one).
int liouvillian_nullity(const Eigen::MatrixXcd &H,
                        const std::vector<DecayChannel> &decay,
                        double tol = 1e-10);

/// Solves L(rho) = 0 with the rho_00 equation replaced by trace(rho) = 1.
/// Throws NonUniqueSteadyState when the constrained system is singular or
/// its solution fails the residual check; DimensionMismatch for a bad H.
SteadyState steady_state(const Eigen::MatrixXcd &H,
                         const std::vector<DecayChannel> &decay);

/// Probe observables at one detuning for one ground sublevel.
struct ProbeSignal {
  double absorption = 0.0;
  /// -Im sum_m conj(d_m) rho_{i_m g}, d the normalized probe amplitudes;
  /// linear in Omega_probe for a weak probe.
  double coherence = 0.0;
};

/// Dressed-state weights for the optical path g -> i -> Rydberg.
struct LineStrength {
  double eigenvalue = 0.0;
  double weight = 0.0;
};

/// Forward model with all SOP-independent couplings precomputed.
class EitModel {
public:
  /// Throws ErrorCode::invalid_argument listing every validation issue.
  EitModel(LevelScheme scheme, SimParams params);

  const LevelScheme &scheme() const { return scheme_; }
  const SimParams &params() const { return params_; }
  int state_count() const { return n_; }

  Eigen::MatrixXcd hamiltonian(const sop::RfSop &sop, double delta_c,
                               HalfInt m_g) const;
  std::vector<DecayChannel> decay() const;

  ProbeSignal probe_signal(const sop::RfSop &sop, double delta_c,
                           HalfInt m_g) const;

  /// Response over the configured detuning grid.
  std::vector<double> response(const sop::RfSop &sop) const;

  /// Dressed eigenvalues (in units of Omega_rf) with their optical weights;
  /// ignores r3.
  std::vector<LineStrength> line_strengths(const sop::RfSop &sop) const;

private:
  Eigen::MatrixXcd base_hamiltonian(const sop::RfSop &sop, HalfInt m_g,
                                    bool lasers_coupling, bool rf) const;
  std::vector<double> absorption_sweep(const sop::RfSop &sop, HalfInt m_g,
                                       const std::vector<double> &grid,
                                       bool coupling_and_rf) const;

  LevelScheme scheme_;
  SimParams params_;
  int n_ = 0;
  // Probe: rows i_m, columns m_g (= -1/2, +1/2).
  Eigen::MatrixXcd probe_;
  // Coupling: rows Rydberg state index, columns i_m.
  Eigen::MatrixXcd coupling_;
};

/// Sum of weights of dressed states with |eigenvalue| < zero_tol over the
/// total weight.
double central_weight(const std::vector<LineStrength> &lines,
                      double zero_tol = 1e-7);

/// Hamiltonian for m_g = +1/2 at phase angle phi.
Eigen::MatrixXcd build_hamiltonian(const LevelScheme &scheme,
                                   const SimParams &params, double phi,
                                   double delta_c);

/// Throws invalid_argument if the grid does not span
/// +-1.5 Omega_rf max|eigenvalue| of the class.
std::vector<double> eit_spectrum(const LevelScheme &scheme,
                                 const SimParams &params, double phi);
std::vector<double> eit_spectrum(const EitModel &model, const sop::RfSop &sop);

struct EitSpectrogram {
  std::vector<double> phi_grid;
  std::vector<double> detuning_grid;
  /// response(i, k): phi_grid[i], detuning_grid[k].
  Eigen::MatrixXd response;
};

EitSpectrogram eit_spectrogram(const LevelScheme &scheme,
                               const SimParams &params,
                               const std::vector<double> &phi_grid);

/// One spectrogram per third-level offset. Requires scheme.third.
std::vector<EitSpectrogram>
third_level_sweep(const LevelScheme &scheme, const SimParams &params,
                  const std::vector<double> &phi_grid,
                  const std::vector<double> &delta3_mhz);

/// RMS of (a - reference) divided by the peak of reference.
double relative_rms_distance(const EitSpectrogram &a,
                             const EitSpectrogram &reference);

/// RMS difference between rows at phi and 2 pi - phi divided by the peak
/// response; rows without a mirror partner on the grid are skipped.
double mirror_asymmetry(const EitSpectrogram &s, double phi_tol = 1e-9);

/// Full width at half maximum of the single EIT peak with the RF off.
double zero_rf_linewidth(const LevelScheme &scheme, const SimParams &params,
                         double half_span = 20.0, int points = 2001);

/// Largest |eigenvalue| of M^(Jp) over phi (sampled).
double max_abs_eigenvalue(const dressing::TransitionClass &cls);

} // namespace rydpol::eitsim
