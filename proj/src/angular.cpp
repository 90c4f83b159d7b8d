#include "rydpol/angular.hpp"

#include "rydpol/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace rydpol::angular {

namespace mp = boost::multiprecision;

namespace {

using BigInt = mp::cpp_int;
using Rational = mp::cpp_rational;

// Factorials are looked up in an immutable table built on first use.
constexpr int kMaxFactorial = 400;

const BigInt &factorial(int n) {
  static const std::vector<BigInt> table = [] {
    std::vector<BigInt> t(kMaxFactorial + 1);
    t[0] = 1;
    for (int i = 1; i <= kMaxFactorial; ++i)
      t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n > kMaxFactorial)
    throw Error(ErrorCode::out_of_range,
                "factorial argument " + std::to_string(n) + " out of table");
  return table[static_cast<std::size_t>(n)];
}

// Factorial of an integer-valued half-integer.
const BigInt &fact(HalfInt h) { return factorial(h.twice() / 2); }

// Δ(abc) = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!
Rational triangle_coefficient(HalfInt a, HalfInt b, HalfInt c) {
  return Rational(fact(a + b - c) * fact(a - b + c) * fact(-a + b + c),
                  fact(a + b + c + HalfInt(1)));
}

// sign * sum * sqrt(radicand), with sum and radicand exact.
double finish(int sign, const Rational &sum, const Rational &radicand) {
  if (sum == 0 || radicand == 0)
    return 0.0;
  const Rational squared = sum * sum * radicand;
  const double magnitude = std::sqrt(squared.convert_to<double>());
  return (sum < 0 ? -sign : sign) * magnitude;
}

void require_magnitude(HalfInt j) {
  if (j.twice() < 0)
    throw Error(ErrorCode::invalid_argument,
                "negative angular momentum " + j.str());
}

void require_parity(HalfInt j, HalfInt m) {
  if ((j.twice() - m.twice()) % 2 != 0)
    throw Error(ErrorCode::invalid_argument,
                "projection " + m.str() + " inconsistent with j = " + j.str());
}

} // namespace

std::string HalfInt::str() const {
  if (twice_ % 2 == 0)
    return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

int phase(HalfInt k) {
  if (!k.is_integer())
    throw Error(ErrorCode::invalid_argument,
                "phase exponent " + k.str() + " is not an integer");
  return (k.twice() / 2) % 2 == 0 ? 1 : -1;
}

bool triangle(HalfInt j1, HalfInt j2, HalfInt j3) {
  if (!(j1 + j2 + j3).is_integer())
    return false;
  return abs(j1 - j2) <= j3 && j3 <= j1 + j2;
}

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2,
                HalfInt m3) {
  for (HalfInt j : {j1, j2, j3})
    require_magnitude(j);
  require_parity(j1, m1);
  require_parity(j2, m2);
  require_parity(j3, m3);

  if ((m1 + m2 + m3).twice() != 0)
    return 0.0;
  if (abs(m1) > j1 || abs(m2) > j2 || abs(m3) > j3)
    return 0.0;
  if (!triangle(j1, j2, j3))
    return 0.0;

  // Racah: sum over k of (-1)^k / [k! (j1+j2-j3-k)! (j1-m1-k)! (j2+m2-k)!
  //                                 (j3-j2+m1+k)! (j3-j1-m2+k)!]
  const HalfInt a = j1 + j2 - j3;
  const HalfInt b = j1 - m1;
  const HalfInt c = j2 + m2;
  const HalfInt d = j3 - j2 + m1;
  const HalfInt e = j3 - j1 - m2;
  const int kmin = std::max({0, -d.twice() / 2, -e.twice() / 2});
  const int kmax = std::min({a.twice() / 2, b.twice() / 2, c.twice() / 2});

  Rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    const HalfInt hk(k);
    BigInt den = factorial(k) * fact(a - hk) * fact(b - hk) * fact(c - hk) *
                 fact(d + hk) * fact(e + hk);
    sum += Rational(k % 2 == 0 ? 1 : -1, 1) / Rational(den);
  }

  Rational radicand = triangle_coefficient(j1, j2, j3);
  radicand *= Rational(fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) *
                       fact(j2 - m2) * fact(j3 + m3) * fact(j3 - m3));

  return finish(phase(j1 - j2 - m3), sum, radicand);
}

double wigner6j(HalfInt a, HalfInt b, HalfInt c, HalfInt d, HalfInt e,
                HalfInt f) {
  for (HalfInt j : {a, b, c, d, e, f})
    require_magnitude(j);
  if (!triangle(a, b, c) || !triangle(a, e, f) || !triangle(d, b, f) ||
      !triangle(d, e, c))
    return 0.0;

  const std::array<HalfInt, 4> triads = {a + b + c, a + e + f, d + b + f,
                                         d + e + c};
  const std::array<HalfInt, 3> quads = {a + b + d + e, b + c + e + f,
                                        c + a + f + d};
  const int tmin = std::max_element(triads.begin(), triads.end())->twice() / 2;
  const int tmax = std::min_element(quads.begin(), quads.end())->twice() / 2;

  Rational sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    const HalfInt ht(t);
    BigInt den = 1;
    for (HalfInt s : triads)
      den *= fact(ht - s);
    for (HalfInt s : quads)
      den *= fact(s - ht);
    sum += Rational((t % 2 == 0 ? 1 : -1) * factorial(t + 1), den);
  }

  Rational radicand = triangle_coefficient(a, b, c) *
                      triangle_coefficient(a, e, f) *
                      triangle_coefficient(d, b, f) *
                      triangle_coefficient(d, e, c);
  return finish(1, sum, radicand);
}

int orbital_l(HalfInt J, int p) {
  if (p < -1 || p > 1)
    throw Error(ErrorCode::invalid_argument,
                "transition label p must be -1, 0 or +1");
  if (!J.is_half_odd() || J.twice() < 1)
    throw Error(ErrorCode::invalid_argument,
                "J must be a positive half-odd integer, got " + J.str());
  // p = 0, +1: J = L + 1/2 ; p = -1: J = L - 1/2
  const HalfInt L = p >= 0 ? J - half(1) : J + half(1);
  return L.twice() / 2;
}

double six_j_closed_form(HalfInt J, int p) {
  const int L = orbital_l(J, p);
  const double l = L;
  switch (p) {
  case +1:
    // {L+1, L+3/2, 1/2; L+1/2, L, 1}; the phase (-1)^(2L+3) is negative.
    return -1.0 / std::sqrt((2 * l + 3) * (2 * l + 2));
  case 0:
    return std::sqrt(2.0 / ((2 * l + 1) * (2 * l + 2) * (2 * l + 2) *
                            (2 * l + 3)));
  default:
    return 1.0 / std::sqrt((2 * l + 2) * (2 * l + 1));
  }
}

double reduced_factor(HalfInt J, int p) {
  const int L = orbital_l(J, p);
  const double j = J.value();
  const double jp = upper_j(J, p).value();
  return std::sqrt((2 * j + 1) * (2 * jp + 1) * (L + 1)) *
         six_j_closed_form(J, p);
}

double dipole_angular_factor(HalfInt J, int p, HalfInt mJ, HalfInt mJp,
                             HalfInt q) {
  if (abs(q) > HalfInt(1) || !q.is_integer())
    throw Error(ErrorCode::invalid_argument, "q must be -1, 0 or +1");
  const HalfInt Jp = upper_j(J, p);
  if (mJp != mJ + q || abs(mJ) > J || abs(mJp) > Jp)
    return 0.0;
  // (-1)^(J'+J-mJ'-1/2) (J' 1 J; -mJ' q mJ) x reduced factor
  const int sign = phase(Jp + J - mJp - half(1));
  return sign * wigner3j(Jp, HalfInt(1), J, -mJp, q, mJ) * reduced_factor(J, p);
}

double dipole_matrix_element(const FineLevel &initial, const FineLevel &final,
                             HalfInt q) {
  if (std::abs(initial.L - final.L) != 1)
    return 0.0;
  if (final.m != initial.m + q)
    return 0.0;
  const HalfInt S = half(1);
  const HalfInt L(initial.L), Lp(final.L);
  const HalfInt J = initial.J, Jp = final.J;
  const double threej = wigner3j(Jp, HalfInt(1), J, -final.m, q, initial.m);
  if (threej == 0.0)
    return 0.0;
  const double sixj = wigner6j(Lp, Jp, S, J, L, HalfInt(1));
  const double reduced_orbital =
      phase(Lp) * std::sqrt(static_cast<double>(std::max(initial.L, final.L)));
  return phase(Jp - final.m) * threej * phase(Lp + S + J + HalfInt(1)) *
         std::sqrt(static_cast<double>(J.multiplicity() * Jp.multiplicity())) *
         sixj * reduced_orbital;
}

} // namespace rydpol::angular
