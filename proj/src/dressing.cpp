#include "rydpol/dressing.hpp"

#include "rydpol/error.hpp"
#include "rydpol/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rydpol::dressing {

using angular::half;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Index of r1 |m> or r2 |m'> in the documented ordering.
int r1_index(const TransitionClass &cls, HalfInt m) {
  return (m + cls.J).twice() / 2;
}
int r2_index(const TransitionClass &cls, HalfInt mp) {
  return cls.J.multiplicity() + (mp + cls.j_prime()).twice() / 2;
}

// sqrt((2J+1)/(4(J+1))) sqrt((2J+3)^|p| / J^(1-|p|))
double coupling_prefactor(const TransitionClass &cls) {
  const double j = cls.J.value();
  const int ap = std::abs(cls.p);
  return std::sqrt((2 * j + 1) / (4 * (j + 1))) *
         std::sqrt(std::pow(2 * j + 3, ap) / std::pow(j, 1 - ap));
}

} // namespace

TransitionClass TransitionClass::make(HalfInt J, int p) {
  if (p < -1 || p > 1)
    throw Error(ErrorCode::invalid_argument,
                "p must be -1, 0 or +1, got " + std::to_string(p));
  if (J.twice() < 1 || !J.is_half_odd())
    throw Error(ErrorCode::invalid_argument,
                "J must be a half-odd integer >= 1/2, got " + J.str());
  return TransitionClass{J, p};
}

std::string TransitionClass::label() const {
  const char *sign = p > 0 ? "+" : (p < 0 ? "-" : "0");
  return J.str() + "^" + sign;
}

std::vector<BasisState> basis(const TransitionClass &cls) {
  std::vector<BasisState> b;
  b.reserve(static_cast<std::size_t>(cls.dim()));
  for (HalfInt m = -cls.J; m <= cls.J; m += HalfInt(1))
    b.push_back({Level::r1, m});
  const HalfInt jp = cls.j_prime();
  for (HalfInt m = -jp; m <= jp; m += HalfInt(1))
    b.push_back({Level::r2, m});
  return b;
}

CouplingMatrix coupling_matrix(const TransitionClass &cls, double phi) {
  CouplingMatrix out;
  out.cls = cls;
  out.phi = phi;
  out.basis = basis(cls);
  out.entries = Eigen::MatrixXd::Zero(cls.dim(), cls.dim());

  const double pre = coupling_prefactor(cls);
  const HalfInt jp = cls.j_prime();
  for (int q : {+1, -1}) {
    const double weight = std::cos(0.5 * phi) + q * std::sin(0.5 * phi);
    for (HalfInt m = -cls.J; m <= cls.J; m += HalfInt(1)) {
      const HalfInt mp = m + HalfInt(q);
      if (angular::abs(mp) > jp)
        continue;
      const double threej =
          angular::wigner3j(cls.J, HalfInt(1), jp, m, HalfInt(q), -mp);
      const int a = r1_index(cls, m);
      const int b = r2_index(cls, mp);
      out.entries(a, b) += pre * threej * weight;
      out.entries(b, a) += pre * threej * weight;
    }
  }
  return out;
}

OracleMatrix oracle_matrix(const TransitionClass &cls, const sop::RfSop &sop) {
  OracleMatrix out;
  out.cls = cls;
  out.sop = sop;
  out.basis = basis(cls);
  out.entries = Eigen::MatrixXcd::Zero(cls.dim(), cls.dim());

  const int L = cls.orbital_l();
  const HalfInt jp = cls.j_prime();
  for (HalfInt m = -cls.J; m <= cls.J; m += HalfInt(1)) {
    for (int q : {-1, +1}) {
      const HalfInt mp = m + HalfInt(q);
      if (angular::abs(mp) > jp)
        continue;
      const double d = angular::dipole_matrix_element(
          {L, cls.J, m}, {L + 1, jp, mp}, HalfInt(q));
      const std::complex<double> h = sop.amplitude(q) * d;
      const int a = r1_index(cls, m);
      const int b = r2_index(cls, mp);
      out.entries(b, a) += h;
      out.entries(a, b) += std::conj(h);
    }
  }
  return out;
}

EigenSpectrum make_spectrum(std::vector<double> eigenvalues, double phi,
                            double degeneracy_tol) {
  if (!(degeneracy_tol > 0.0))
    throw Error(ErrorCode::invalid_argument,
                "degeneracy tolerance must be positive");
  std::sort(eigenvalues.begin(), eigenvalues.end());
  EigenSpectrum s;
  s.phi = phi;
  s.eigenvalues = std::move(eigenvalues);
  for (std::size_t i = 0; i < s.eigenvalues.size();) {
    std::size_t j = i + 1;
    double sum = s.eigenvalues[i];
    while (j < s.eigenvalues.size() &&
           s.eigenvalues[j] - s.eigenvalues[j - 1] < degeneracy_tol) {
      sum += s.eigenvalues[j];
      ++j;
    }
    s.distinct_values.push_back(sum / static_cast<double>(j - i));
    s.degeneracies.push_back(static_cast<int>(j - i));
    i = j;
  }
  return s;
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd &m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::eigensolver_failure,
                "symmetric eigensolver did not converge");
  const Eigen::VectorXd &ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd &m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::eigensolver_failure,
                "hermitian eigensolver did not converge");
  const Eigen::VectorXd &ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

EigenSpectrum eigen_spectrum(const TransitionClass &cls, double phi,
                             double degeneracy_tol) {
  if (!(degeneracy_tol > 0.0))
    throw Error(ErrorCode::invalid_argument,
                "degeneracy tolerance must be positive");
  return make_spectrum(symmetric_eigenvalues(coupling_matrix(cls, phi).entries),
                       phi, degeneracy_tol);
}

std::array<double, 4> closed_form_eigenvalues_half(double phi) {
  std::array<double, 4> out{};
  for (int n = 1; n <= 4; ++n)
    out[static_cast<std::size_t>(n - 1)] =
        std::cos(0.5 * phi + (2 * n - 1) * std::numbers::pi / 4);
  return out;
}

std::vector<EigenSpectrum> spectrogram(const TransitionClass &cls,
                                       const std::vector<double> &phi_grid,
                                       double degeneracy_tol) {
  if (phi_grid.empty())
    throw Error(ErrorCode::invalid_argument, "phi grid is empty");
  for (double phi : phi_grid)
    if (!(phi >= 0.0 && phi <= kTwoPi + 1e-12))
      throw Error(ErrorCode::invalid_argument,
                  "phi grid values must lie in [0, 2 pi]");
  std::vector<EigenSpectrum> out(phi_grid.size());
  parallel_for(phi_grid.size(), [&](std::size_t i) {
    out[i] = eigen_spectrum(cls, phi_grid[i], degeneracy_tol);
  });
  return out;
}

std::vector<double> phi_grid(int n, bool include_endpoint) {
  if (n < 1)
    throw Error(ErrorCode::invalid_argument, "phi grid needs >= 1 point");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double step =
      include_endpoint && n > 1 ? kTwoPi / (n - 1) : kTwoPi / n;
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = i * step;
  if (include_endpoint && n > 1)
    g.back() = kTwoPi;
  return g;
}

EnvelopePair envelopes_exact(double phi) {
  const double s = std::abs(std::sin(phi));
  const double outer =
      std::sqrt(10 + 3 * s + std::sqrt(33 * s * s + 12 * s + 4)) / 5;
  // The inner radicand touches zero only in exact arithmetic; clamp round-off.
  const double inner_sq = 10 - 3 * s - std::sqrt(33 * s * s - 12 * s + 4);
  const double inner = std::sqrt(std::max(0.0, inner_sq)) / 5;
  return {outer, -outer, inner, -inner};
}

EnvelopePair envelopes_approx(double phi) {
  const double s = std::abs(std::sin(phi));
  const double sqrt3 = std::numbers::sqrt3;
  const double sqrt5 = std::sqrt(5.0);
  const double outer = 2 * sqrt3 / 5 + 2 * (sqrt5 - sqrt3) / 5 * s;
  const double inner = std::numbers::sqrt2 / 5 * (2 - s * s);
  return {outer, -outer, inner, -inner};
}

EnvelopePair numeric_envelopes(const EigenSpectrum &spectrum, double zero_tol) {
  double outer = 0.0;
  double inner = std::numeric_limits<double>::infinity();
  for (double v : spectrum.eigenvalues) {
    const double a = std::abs(v);
    outer = std::max(outer, a);
    if (a > zero_tol)
      inner = std::min(inner, a);
  }
  if (!std::isfinite(inner))
    inner = 0.0;
  return {outer, -outer, inner, -inner};
}

} // namespace rydpol::dressing
