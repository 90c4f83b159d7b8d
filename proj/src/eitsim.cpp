#include "rydpol/eitsim.hpp"

#include "rydpol/error.hpp"
#include "rydpol/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <klu.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rydpol::eitsim {

using angular::FineLevel;
using angular::half;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kI(0.0, 1.0);

const HalfInt kGroundJ = half(1);
const HalfInt kIntermediateJ = half(3);
constexpr int kGroundL = 0;
constexpr int kIntermediateL = 1;

int m_index(HalfInt J, HalfInt m) { return (m + J).twice() / 2; }
HalfInt m_value(HalfInt J, int index) { return -J + HalfInt(index); }

// Sum_q c_q <up m_up| r_q |low m_low>.
Complex driven_element(const FineLevel &low, const FineLevel &up,
                       const sop::SphericalComponents &c) {
  Complex sum = 0.0;
  for (int q = -1; q <= 1; ++q)
    sum += c[q] * angular::dipole_matrix_element(low, up, HalfInt(q));
  return sum;
}

// Largest |<up| r_q |low>| over all sublevels and q.
double max_angular_factor(int l_low, HalfInt j_low, int l_up, HalfInt j_up) {
  double best = 0.0;
  for (int a = 0; a < j_low.multiplicity(); ++a)
    for (int b = 0; b < j_up.multiplicity(); ++b)
      for (int q = -1; q <= 1; ++q)
        best = std::max(best, std::abs(angular::dipole_matrix_element(
                                  {l_low, j_low, m_value(j_low, a)},
                                  {l_up, j_up, m_value(j_up, b)}, HalfInt(q))));
  return best;
}

void throw_if_issues(const std::vector<std::string> &issues,
                     const std::string &what) {
  if (issues.empty())
    return;
  std::ostringstream msg;
  msg << what << ":";
  for (const auto &s : issues)
    msg << "\n  - " << s;
  throw Error(ErrorCode::invalid_argument, msg.str());
}

// Steady state over a sweep of one diagonal parameter: H = H0 + delta diag(s).
//
// rho is parametrized by N^2 reals (populations, Re and Im of the upper
// triangle), which halves the work against the complex vectorization. The
// rho_00 equation is replaced by the trace condition. The sparsity pattern
// is fixed over the sweep, so it is ordered once and each point only
// refactorizes with the previous pivot sequence; a full factorization is
// redone if that sequence turns ill-conditioned.
class LindbladSweep {
public:
  LindbladSweep(const Eigen::MatrixXcd &H0, const Eigen::VectorXd &slope,
                const std::vector<DecayChannel> &decay)
      : n_(static_cast<int>(H0.rows())) {
    const int n = n_;
    const int dim = n * n;

    std::vector<Eigen::Triplet<Complex>> lt, st;
    std::vector<double> out_rate(static_cast<std::size_t>(n), 0.0);
    for (const auto &d : decay)
      out_rate[static_cast<std::size_t>(d.from)] += d.rate;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const int row = a * n + b;
        for (int k = 0; k < n; ++k) {
          if (k != a && H0(a, k) != Complex(0.0))
            lt.emplace_back(row, k * n + b, -kI * H0(a, k));
          if (k != b && H0(k, b) != Complex(0.0))
            lt.emplace_back(row, a * n + k, kI * H0(k, b));
        }
        lt.emplace_back(row, row,
                        -kI * (H0(a, a) - H0(b, b)) -
                            0.5 * (out_rate[static_cast<std::size_t>(a)] +
                                   out_rate[static_cast<std::size_t>(b)]));
        if (slope(a) != slope(b))
          st.emplace_back(row, row, -kI * (slope(a) - slope(b)));
      }
    for (const auto &d : decay)
      lt.emplace_back(d.to * n + d.to, d.from * n + d.from, d.rate);

    // Columns of T expand the real parameters into vec(rho).
    std::vector<Eigen::Triplet<Complex>> tt;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b) {
          tt.emplace_back(a * n + a, a * n + a, 1.0);
        } else if (a < b) {
          tt.emplace_back(a * n + b, a * n + b, 1.0);
          tt.emplace_back(a * n + b, b * n + a, kI);
        } else {
          tt.emplace_back(a * n + b, b * n + a, 1.0);
          tt.emplace_back(a * n + b, a * n + b, -kI);
        }
      }
    Eigen::SparseMatrix<Complex> L(dim, dim), S(dim, dim), T(dim, dim);
    L.setFromTriplets(lt.begin(), lt.end());
    S.setFromTriplets(st.begin(), st.end());
    T.setFromTriplets(tt.begin(), tt.end());
    const Eigen::SparseMatrix<Complex> LT = L * T;
    const Eigen::SparseMatrix<Complex> ST = S * T;

    // Keep Re of the (a <= b) equations and Im of the (a < b) ones; both
    // matrices get the union pattern so values can be combined in place.
    std::vector<Eigen::Triplet<double>> base, grad;
    auto split = [&](const Eigen::SparseMatrix<Complex> &M, bool is_base) {
      for (int k = 0; k < M.outerSize(); ++k)
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(M, k); it; ++it) {
          const int a = static_cast<int>(it.row()) / n;
          const int b = static_cast<int>(it.row()) % n;
          if (a > b || it.row() == 0)
            continue;
          const int col = static_cast<int>(it.col());
          const double re = it.value().real();
          const double im = it.value().imag();
          base.emplace_back(a * n + b, col, is_base ? re : 0.0);
          grad.emplace_back(a * n + b, col, is_base ? 0.0 : re);
          if (a < b) {
            base.emplace_back(b * n + a, col, is_base ? im : 0.0);
            grad.emplace_back(b * n + a, col, is_base ? 0.0 : im);
          }
        }
    };
    split(LT, true);
    split(ST, false);
    for (int c = 0; c < n; ++c) {
      base.emplace_back(0, c * n + c, 1.0);
      grad.emplace_back(0, c * n + c, 0.0);
    }

    a_.resize(dim, dim);
    a_.setFromTriplets(base.begin(), base.end());
    s_.resize(dim, dim);
    s_.setFromTriplets(grad.begin(), grad.end());
    a_.makeCompressed();
    s_.makeCompressed();
    base_.assign(a_.valuePtr(), a_.valuePtr() + a_.nonZeros());

    klu_defaults(&common_);
    symbolic_ = klu_analyze(dim, a_.outerIndexPtr(), a_.innerIndexPtr(), &common_);
    if (!symbolic_)
      throw Error(ErrorCode::non_unique_steady_state,
                  "could not order the steady-state system");
    rhs_ = Eigen::VectorXd::Zero(dim);
    rhs_(0) = 1.0;
  }

  LindbladSweep(const LindbladSweep &) = delete;
  LindbladSweep &operator=(const LindbladSweep &) = delete;

  ~LindbladSweep() {
    if (numeric_)
      klu_free_numeric(&numeric_, &common_);
    if (symbolic_)
      klu_free_symbolic(&symbolic_, &common_);
  }

  /// Real parameter vector at the given sweep value.
  const Eigen::VectorXd &solve(double delta) {
    double *values = a_.valuePtr();
    const double *slope = s_.valuePtr();
    for (Eigen::Index k = 0; k < a_.nonZeros(); ++k)
      values[k] = base_[static_cast<std::size_t>(k)] + delta * slope[k];

    bool fresh = numeric_ == nullptr;
    if (!fresh) {
      const bool ok = klu_refactor(a_.outerIndexPtr(), a_.innerIndexPtr(),
                                   values, symbolic_, numeric_, &common_) &&
                      klu_rcond(symbolic_, numeric_, &common_) &&
                      common_.rcond > kMinRcond;
      if (!ok) {
        klu_free_numeric(&numeric_, &common_);
        fresh = true;
      }
    }
    if (fresh) {
      numeric_ = klu_factor(a_.outerIndexPtr(), a_.innerIndexPtr(), values,
                            symbolic_, &common_);
      if (!numeric_ || common_.status != KLU_OK)
        throw Error(ErrorCode::non_unique_steady_state,
                    "trace-constrained generator is singular");
    }
    x_ = rhs_;
    if (!klu_solve(symbolic_, numeric_, static_cast<int>(x_.size()), 1,
                   x_.data(), &common_) ||
        !x_.allFinite())
      throw Error(ErrorCode::non_unique_steady_state,
                  "steady-state solve failed");
    return x_;
  }

  /// rho_{a b} from the real parameters.
  Complex rho(const Eigen::VectorXd &x, int a, int b) const {
    if (a == b)
      return x(a * n_ + a);
    if (a < b)
      return {x(a * n_ + b), x(b * n_ + a)};
    return {x(b * n_ + a), -x(a * n_ + b)};
  }

private:
  static constexpr double kMinRcond = 1e-13;

  int n_;
  Eigen::SparseMatrix<double> a_;
  Eigen::SparseMatrix<double> s_;
  std::vector<double> base_;
  klu_common common_{};
  klu_symbolic *symbolic_ = nullptr;
  klu_numeric *numeric_ = nullptr;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd x_;
};

void check_hamiltonian(const Eigen::MatrixXcd &H,
                       const std::vector<DecayChannel> &decay) {
  if (H.rows() != H.cols() || H.rows() == 0)
    throw Error(ErrorCode::dimension_mismatch, "Hamiltonian must be square");
  for (const auto &d : decay)
    if (d.from < 0 || d.to < 0 || d.from >= H.rows() || d.to >= H.rows() ||
        !(d.rate >= 0.0))
      throw Error(ErrorCode::dimension_mismatch,
                  "decay channel does not fit the Hamiltonian");
}

} // namespace

int LevelScheme::state_count() const {
  int n = 1 + intermediate_count() + cls.dim();
  if (third)
    n += third->J.multiplicity();
  return n;
}

dressing::Level LevelScheme::coupled_level() const {
  return l_r1() % 2 == 0 ? dressing::Level::r1 : dressing::Level::r2;
}

bool LevelScheme::third_is_coupled() const {
  return third && l_r2() % 2 == 0;
}

std::vector<std::string> LevelScheme::validate() const {
  std::vector<std::string> issues;
  const int lc = coupled_level() == dressing::Level::r1 ? l_r1() : l_r2();
  const HalfInt jc =
      coupled_level() == dressing::Level::r1 ? cls.J : cls.j_prime();
  if (std::abs(lc - kIntermediateL) != 1 ||
      !angular::triangle(kIntermediateJ, HalfInt(1), jc))
    issues.push_back("coupling laser cannot reach the Rydberg pair from P3/2");
  if (third) {
    const HalfInt j3 = third->J;
    const int l3 = l_r2();
    if (j3 != HalfInt(l3) + half(1) && j3 != HalfInt(l3) - half(1))
      issues.push_back("third level J3 = " + j3.str() +
                       " is not a fine-structure level of L = " +
                       std::to_string(l3));
    else if (j3 == cls.j_prime())
      issues.push_back("third level coincides with r2");
    else if (!angular::triangle(cls.J, HalfInt(1), j3))
      issues.push_back("third level is not dipole coupled to r1");
    if (!(third->delta_mhz > 0.0) || !std::isfinite(third->delta_mhz))
      issues.push_back("third level detuning must be positive");
  }
  return issues;
}

std::vector<double> SimParams::uniform_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo))
    throw Error(ErrorCode::invalid_argument, "grid needs >= 2 points, hi > lo");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  return g;
}

std::vector<double> SimParams::default_grid() {
  return uniform_grid(-60.0, 60.0, 481);
}

std::vector<std::string> SimParams::validate() const {
  std::vector<std::string> issues;
  auto nonneg = [&](double v, const char *name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      issues.push_back(std::string(name) + " must be finite and >= 0");
  };
  nonneg(omega_probe, "omega_probe");
  nonneg(omega_coupling, "omega_coupling");
  nonneg(omega_rf, "omega_rf");
  nonneg(gamma_r, "gamma_r");
  if (!(gamma_i > 0.0) || !std::isfinite(gamma_i))
    issues.push_back("gamma_i must be finite and > 0");
  if (!std::isfinite(delta_probe))
    issues.push_back("delta_probe must be finite");
  if (delta_c_grid.size() < 8)
    issues.push_back("delta_c grid needs at least 8 points");
  for (std::size_t k = 0; k < delta_c_grid.size(); ++k) {
    if (!std::isfinite(delta_c_grid[k]) ||
        (k > 0 && !(delta_c_grid[k] > delta_c_grid[k - 1]))) {
      issues.push_back("delta_c grid must be finite and strictly increasing");
      break;
    }
  }
  for (const auto &s : optics.validate())
    issues.push_back("optics: " + s);
  return issues;
}

std::vector<std::string> SimParams::warnings() const {
  std::vector<std::string> w;
  if (omega_probe > 0.1 * gamma_i)
    w.push_back("omega_probe is not small against gamma_i; the response is "
                "outside the weak-probe regime");
  return w;
}

Eigen::SparseMatrix<Complex>
liouvillian(const Eigen::MatrixXcd &H, const std::vector<DecayChannel> &decay) {
  check_hamiltonian(H, decay);
  const int n = static_cast<int>(H.rows());
  std::vector<Eigen::Triplet<Complex>> t;
  std::vector<double> out_rate(static_cast<std::size_t>(n), 0.0);
  for (const auto &d : decay)
    out_rate[static_cast<std::size_t>(d.from)] += d.rate;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int row = a * n + b;
      for (int k = 0; k < n; ++k) {
        if (H(a, k) != Complex(0.0))
          t.emplace_back(row, k * n + b, -kI * H(a, k));
        if (H(k, b) != Complex(0.0))
          t.emplace_back(row, a * n + k, kI * H(k, b));
      }
      const double loss = 0.5 * (out_rate[static_cast<std::size_t>(a)] +
                                 out_rate[static_cast<std::size_t>(b)]);
      if (loss != 0.0)
        t.emplace_back(row, row, -loss);
    }
  for (const auto &d : decay)
    t.emplace_back(d.to * n + d.to, d.from * n + d.from, d.rate);
  Eigen::SparseMatrix<Complex> L(n * n, n * n);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

int liouvillian_nullity(const Eigen::MatrixXcd &H,
                        const std::vector<DecayChannel> &decay, double tol) {
  const Eigen::MatrixXcd L = Eigen::MatrixXcd(liouvillian(H, decay));
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(L);
  const auto &sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv(0));
  int nullity = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) <= cutoff)
      ++nullity;
  return nullity;
}

SteadyState steady_state(const Eigen::MatrixXcd &H,
                         const std::vector<DecayChannel> &decay) {
  check_hamiltonian(H, decay);
  const int n = static_cast<int>(H.rows());
  LindbladSweep sweep(H, Eigen::VectorXd::Zero(n), decay);
  const Eigen::VectorXd &y = sweep.solve(0.0);

  SteadyState ss;
  ss.rho.resize(n, n);
  Eigen::VectorXcd x(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      ss.rho(a, b) = sweep.rho(y, a, b);
      x(a * n + b) = ss.rho(a, b);
    }
  ss.trace_error = std::abs(ss.rho.trace() - Complex(1.0));
  const Eigen::VectorXcd r = liouvillian(H, decay) * x;
  ss.residual = r.cwiseAbs().maxCoeff();
  ss.hermiticity_error = (ss.rho - ss.rho.adjoint()).cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd herm = 0.5 * (ss.rho + ss.rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm,
                                                     Eigen::EigenvaluesOnly);
  ss.min_eigenvalue = es.eigenvalues()(0);

  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (!std::isfinite(ss.residual) || ss.residual > 1e-6 * scale)
    throw Error(ErrorCode::non_unique_steady_state,
                "steady state fails the residual check");
  return ss;
}

EitModel::EitModel(LevelScheme scheme, SimParams params)
    : scheme_(std::move(scheme)), params_(std::move(params)) {
  auto issues = scheme_.validate();
  for (auto &s : params_.validate())
    issues.push_back(std::move(s));
  throw_if_issues(issues, "invalid EIT configuration");

  n_ = scheme_.state_count();
  const auto &opt = params_.optics;
  const sop::Vec3 z = sop::Vec3::UnitZ();
  const auto cp = sop::spherical_components(opt.pol_probe, z);
  const auto cc = sop::spherical_components(opt.pol_coupling, z);

  const double np =
      max_angular_factor(kGroundL, kGroundJ, kIntermediateL, kIntermediateJ);
  probe_.resize(4, 2);
  for (int mi = 0; mi < 4; ++mi)
    for (int mg = 0; mg < 2; ++mg)
      probe_(mi, mg) =
          driven_element({kGroundL, kGroundJ, m_value(kGroundJ, mg)},
                         {kIntermediateL, kIntermediateJ,
                          m_value(kIntermediateJ, mi)},
                         cp) /
          np;

  const bool to_r1 = scheme_.coupled_level() == dressing::Level::r1;
  const int lc = to_r1 ? scheme_.l_r1() : scheme_.l_r2();
  const HalfInt jc = to_r1 ? scheme_.cls.J : scheme_.cls.j_prime();
  const double nc = max_angular_factor(kIntermediateL, kIntermediateJ, lc, jc);

  const int rydberg = n_ - scheme_.offset_r1();
  coupling_ = Eigen::MatrixXcd::Zero(rydberg, 4);
  auto fill = [&](int offset, int l, HalfInt j) {
    for (int a = 0; a < j.multiplicity(); ++a)
      for (int mi = 0; mi < 4; ++mi)
        coupling_(offset - scheme_.offset_r1() + a, mi) =
            driven_element({kIntermediateL, kIntermediateJ,
                            m_value(kIntermediateJ, mi)},
                           {l, j, m_value(j, a)}, cc) /
            nc;
  };
  fill(to_r1 ? scheme_.offset_r1() : scheme_.offset_r2(), lc, jc);
  if (scheme_.third_is_coupled())
    fill(scheme_.offset_r3(), scheme_.l_r2(), scheme_.third->J);
}

std::vector<DecayChannel> EitModel::decay() const {
  std::vector<DecayChannel> d;
  for (int k = 0; k < 4; ++k)
    d.push_back({scheme_.offset_intermediate() + k, 0, params_.gamma_i});
  if (params_.gamma_r > 0.0)
    for (int k = scheme_.offset_r1(); k < n_; ++k)
      d.push_back({k, 0, params_.gamma_r});
  return d;
}

Eigen::MatrixXcd EitModel::base_hamiltonian(const sop::RfSop &sop, HalfInt m_g,
                                            bool lasers_coupling,
                                            bool rf) const {
  if (m_g != half(1) && m_g != half(-1))
    throw Error(ErrorCode::invalid_argument, "m_g must be +-1/2");
  const int mg = m_index(kGroundJ, m_g);
  const int oi = scheme_.offset_intermediate();
  const int o1 = scheme_.offset_r1();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n_, n_);

  for (int mi = 0; mi < 4; ++mi) {
    const Complex v = 0.5 * params_.omega_probe * probe_(mi, mg);
    H(oi + mi, 0) = v;
    H(0, oi + mi) = std::conj(v);
    H(oi + mi, oi + mi) = -params_.delta_probe;
  }
  for (int s = o1; s < n_; ++s)
    H(s, s) = -params_.delta_probe;
  if (scheme_.third)
    for (int s = scheme_.offset_r3(); s < n_; ++s)
      H(s, s) += scheme_.third->delta_mhz;

  if (lasers_coupling)
    for (int s = o1; s < n_; ++s)
      for (int mi = 0; mi < 4; ++mi) {
        const Complex v = 0.5 * params_.omega_coupling * coupling_(s - o1, mi);
        if (v == Complex(0.0))
          continue;
        H(s, oi + mi) = v;
        H(oi + mi, s) = std::conj(v);
      }

  if (rf && params_.omega_rf > 0.0) {
    const double scale = params_.omega_rf * dressing::kOracleToCouplingScale;
    const auto pair = dressing::oracle_matrix(scheme_.cls, sop);
    H.block(o1, o1, scheme_.cls.dim(), scheme_.cls.dim()) += scale * pair.entries;
    if (scheme_.third) {
      const HalfInt J = scheme_.cls.J;
      const HalfInt J3 = scheme_.third->J;
      const int o3 = scheme_.offset_r3();
      for (int a = 0; a < J.multiplicity(); ++a)
        for (int b = 0; b < J3.multiplicity(); ++b) {
          Complex v = 0.0;
          for (int q : {-1, 1})
            v += sop.amplitude(q) *
                 angular::dipole_matrix_element(
                     {scheme_.l_r1(), J, m_value(J, a)},
                     {scheme_.l_r2(), J3, m_value(J3, b)}, HalfInt(q));
          H(o3 + b, o1 + a) = scale * v;
          H(o1 + a, o3 + b) = scale * std::conj(v);
        }
    }
  }
  return H;
}

Eigen::MatrixXcd EitModel::hamiltonian(const sop::RfSop &sop, double delta_c,
                                       HalfInt m_g) const {
  Eigen::MatrixXcd H = base_hamiltonian(sop, m_g, true, true);
  for (int s = scheme_.offset_r1(); s < n_; ++s)
    H(s, s) -= delta_c;
  return H;
}

std::vector<double> EitModel::absorption_sweep(const sop::RfSop &sop,
                                               HalfInt m_g,
                                               const std::vector<double> &grid,
                                               bool coupling_and_rf) const {
  const Eigen::MatrixXcd H0 =
      base_hamiltonian(sop, m_g, coupling_and_rf, coupling_and_rf);
  Eigen::VectorXd slope = Eigen::VectorXd::Zero(n_);
  for (int s = scheme_.offset_r1(); s < n_; ++s)
    slope(s) = -1.0;
  LindbladSweep sweep(H0, slope, decay());
  const int oi = scheme_.offset_intermediate();
  std::vector<double> out;
  out.reserve(grid.size());
  for (double dc : grid) {
    const Eigen::VectorXd &x = sweep.solve(dc);
    Complex sum = 0.0;
    for (int mi = 0; mi < 4; ++mi)
      sum += std::conj(H0(oi + mi, 0)) * sweep.rho(x, oi + mi, 0);
    out.push_back(-sum.imag());
  }
  return out;
}

ProbeSignal EitModel::probe_signal(const sop::RfSop &sop, double delta_c,
                                   HalfInt m_g) const {
  const SteadyState ss = steady_state(hamiltonian(sop, delta_c, m_g), decay());
  const int mg = m_index(kGroundJ, m_g);
  const int oi = scheme_.offset_intermediate();
  ProbeSignal p;
  Complex a = 0.0, c = 0.0;
  for (int mi = 0; mi < 4; ++mi) {
    const Complex d = probe_(mi, mg);
    a += std::conj(0.5 * params_.omega_probe * d) * ss.rho(oi + mi, 0);
    c += std::conj(d) * ss.rho(oi + mi, 0);
  }
  p.absorption = -a.imag();
  p.coherence = -c.imag();
  return p;
}

std::vector<double> EitModel::response(const sop::RfSop &sop) const {
  const auto &grid = params_.delta_c_grid;
  std::vector<double> total(grid.size(), 0.0);
  double reference = 0.0;
  for (HalfInt mg : {half(-1), half(1)}) {
    const auto a = absorption_sweep(sop, mg, grid, true);
    reference += absorption_sweep(sop, mg, {0.0}, false).front();
    for (std::size_t k = 0; k < grid.size(); ++k)
      total[k] += a[k];
  }
  if (!(reference > 0.0))
    throw Error(ErrorCode::non_unique_steady_state,
                "reference probe absorption vanishes");
  for (double &v : total)
    v = 1.0 - v / reference;
  return total;
}

std::vector<LineStrength> EitModel::line_strengths(const sop::RfSop &sop) const {
  const auto &cls = scheme_.cls;
  const Eigen::MatrixXcd M =
      dressing::kOracleToCouplingScale * dressing::oracle_matrix(cls, sop).entries;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::eigensolver_failure, "dressed-state solve failed");
  const Eigen::MatrixXcd &U = es.eigenvectors();
  const Eigen::MatrixXcd C = coupling_.topRows(cls.dim());
  // amp(k, mi) = <k| V_c |i_m>
  const Eigen::MatrixXcd amp = U.adjoint() * C;
  std::vector<LineStrength> out;
  for (int k = 0; k < cls.dim(); ++k) {
    double w = 0.0;
    for (int mg = 0; mg < 2; ++mg)
      w += std::norm(amp.row(k).dot(probe_.col(mg).conjugate()));
    out.push_back({es.eigenvalues()(k), w});
  }
  return out;
}

double central_weight(const std::vector<LineStrength> &lines, double zero_tol) {
  double total = 0.0, central = 0.0;
  for (const auto &l : lines) {
    total += l.weight;
    if (std::abs(l.eigenvalue) < zero_tol)
      central += l.weight;
  }
  return total > 0.0 ? central / total : 0.0;
}

Eigen::MatrixXcd build_hamiltonian(const LevelScheme &scheme,
                                   const SimParams &params, double phi,
                                   double delta_c) {
  EitModel model(scheme, params);
  return model.hamiltonian(sop::sop_from_phi(phi), delta_c, half(1));
}

double max_abs_eigenvalue(const dressing::TransitionClass &cls) {
  double best = 0.0;
  for (double phi : dressing::phi_grid(360))
    best = std::max(best, dressing::eigen_spectrum(cls, phi).eigenvalues.back());
  return best;
}

namespace {

void check_grid_span(const EitModel &model) {
  const auto &grid = model.params().delta_c_grid;
  const double need = 1.5 * model.params().omega_rf *
                      max_abs_eigenvalue(model.scheme().cls);
  if (grid.front() > -need || grid.back() < need)
    throw Error(ErrorCode::invalid_argument,
                "delta_c grid must span +-" + std::to_string(need) + " MHz");
}

} // namespace

std::vector<double> eit_spectrum(const EitModel &model, const sop::RfSop &sop) {
  check_grid_span(model);
  return model.response(sop);
}

std::vector<double> eit_spectrum(const LevelScheme &scheme,
                                 const SimParams &params, double phi) {
  return eit_spectrum(EitModel(scheme, params), sop::sop_from_phi(phi));
}

EitSpectrogram eit_spectrogram(const LevelScheme &scheme,
                               const SimParams &params,
                               const std::vector<double> &phi_grid) {
  if (phi_grid.empty())
    throw Error(ErrorCode::invalid_argument, "phi grid is empty");
  const EitModel model(scheme, params);
  check_grid_span(model);
  EitSpectrogram s;
  s.phi_grid = phi_grid;
  s.detuning_grid = params.delta_c_grid;
  s.response.resize(static_cast<Eigen::Index>(phi_grid.size()),
                    static_cast<Eigen::Index>(s.detuning_grid.size()));
  std::vector<std::vector<double>> rows(phi_grid.size());
  parallel_for(phi_grid.size(), [&](std::size_t i) {
    rows[i] = model.response(sop::sop_from_phi(phi_grid[i]));
  });
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      s.response(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          rows[i][k];
  return s;
}

std::vector<EitSpectrogram>
third_level_sweep(const LevelScheme &scheme, const SimParams &params,
                  const std::vector<double> &phi_grid,
                  const std::vector<double> &delta3_mhz) {
  if (!scheme.third)
    throw Error(ErrorCode::invalid_argument,
                "third-level sweep needs a scheme with a third level");
  std::vector<EitSpectrogram> out;
  for (double d3 : delta3_mhz) {
    LevelScheme s = scheme;
    s.third->delta_mhz = d3;
    out.push_back(eit_spectrogram(s, params, phi_grid));
  }
  return out;
}

double relative_rms_distance(const EitSpectrogram &a,
                             const EitSpectrogram &reference) {
  if (a.response.rows() != reference.response.rows() ||
      a.response.cols() != reference.response.cols())
    throw Error(ErrorCode::dimension_mismatch, "spectrogram shapes differ");
  const double peak = reference.response.cwiseAbs().maxCoeff();
  const double rms = std::sqrt((a.response - reference.response).squaredNorm() /
                               static_cast<double>(a.response.size()));
  return rms / peak;
}

double mirror_asymmetry(const EitSpectrogram &s, double phi_tol) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.phi_grid.size(); ++i) {
    const double target = sop::wrap_angle(kTwoPi - s.phi_grid[i]);
    for (std::size_t j = 0; j < s.phi_grid.size(); ++j) {
      if (sop::angle_distance(s.phi_grid[j], target) > phi_tol)
        continue;
      const auto d = s.response.row(static_cast<Eigen::Index>(i)) -
                     s.response.row(static_cast<Eigen::Index>(j));
      sum += d.squaredNorm();
      count += static_cast<std::size_t>(d.size());
      break;
    }
  }
  if (count == 0)
    throw Error(ErrorCode::invalid_argument,
                "phi grid has no mirror pairs about pi");
  return std::sqrt(sum / static_cast<double>(count)) /
         s.response.cwiseAbs().maxCoeff();
}

double zero_rf_linewidth(const LevelScheme &scheme, const SimParams &params,
                         double half_span, int points) {
  SimParams p = params;
  p.omega_rf = 0.0;
  p.delta_c_grid = SimParams::uniform_grid(-half_span, half_span, points);
  const EitModel model(scheme, p);
  const auto y = model.response(sop::sop_from_phi(0.0));
  const auto &x = p.delta_c_grid;
  const auto top = static_cast<std::size_t>(
      std::max_element(y.begin(), y.end()) - y.begin());
  const double base = std::min(y.front(), y.back());
  const double level = 0.5 * (y[top] + base);
  auto crossing = [&](std::size_t from, int step) {
    for (std::size_t k = from;;) {
      const std::size_t next = static_cast<std::size_t>(static_cast<long>(k) + step);
      if (next >= y.size())
        throw Error(ErrorCode::invalid_argument,
                    "EIT peak is wider than the linewidth scan");
      if (y[next] < level) {
        const double t = (y[k] - level) / (y[k] - y[next]);
        return x[k] + t * (x[next] - x[k]);
      }
      k = next;
    }
  };
  return crossing(top, 1) - crossing(top, -1);
}

} // namespace rydpol::eitsim
