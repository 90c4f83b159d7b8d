#pragma once

// Exact angular-momentum algebra for single-valence-electron atoms (S = 1/2).
//
// Angular momenta are carried as doubled integers so that triangle and parity
// selection rules are decided in integer arithmetic. Wigner symbols are
// evaluated with the Racah single-sum formula over exact big-integer
// factorials and rounded to double only at the very end.

#include <compare>
#include <cstdlib>
#include <string>

namespace rydpol::angular {

/// An exact half-integer j = twice / 2. Used both for magnitudes (J, L, S)
/// and for signed projections (m_J, q).
class HalfInt {
public:
  constexpr HalfInt() = default;
  /// Integer value j (so twice = 2 j).
  constexpr HalfInt(int j) : twice_(2 * j) {}

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  constexpr bool is_half_odd() const { return twice_ % 2 != 0; }
  /// 2j + 1
  constexpr int multiplicity() const { return twice_ + 1; }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const {
    return from_twice(twice_ + o.twice_);
  }
  constexpr HalfInt operator-(HalfInt o) const {
    return from_twice(twice_ - o.twice_);
  }
  constexpr HalfInt &operator+=(HalfInt o) {
    twice_ += o.twice_;
    return *this;
  }
  constexpr HalfInt &operator-=(HalfInt o) {
    twice_ -= o.twice_;
    return *this;
  }
  constexpr auto operator<=>(const HalfInt &) const = default;

  std::string str() const;

private:
  int twice_ = 0;
};

constexpr HalfInt half(int twice) { return HalfInt::from_twice(twice); }
constexpr HalfInt abs(HalfInt h) {
  return HalfInt::from_twice(h.twice() < 0 ? -h.twice() : h.twice());
}

/// (-1)^k for an integer-valued half-integer k. Throws if k is not integral.
int phase(HalfInt k);

/// |j1 - j2| <= j3 <= j1 + j2 and j1 + j2 + j3 integral.
bool triangle(HalfInt j1, HalfInt j2, HalfInt j3);

/// Wigner 3-j symbol (j1 j2 j3; m1 m2 m3), Condon-Shortley phase.
/// Zero when a selection rule fails. Throws ErrorCode::invalid_argument if
/// some m has a different doubled-parity from its j, or a j is negative.
double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2,
                HalfInt m3);

/// Wigner 6-j symbol {a b c; d e f}. Zero when any of the triads
/// {a,b,c}, {a,e,f}, {d,b,f}, {d,e,c} is non-triangular.
double wigner6j(HalfInt a, HalfInt b, HalfInt c, HalfInt d, HalfInt e,
                HalfInt f);

/// Dipole transition class label p in {-1, 0, +1} between r1 = |L, J> and
/// r2 = |L+1, J'>:
///   p = +1 : J = L + 1/2, J' = J + 1
///   p =  0 : J = L + 1/2, J' = J
///   p = -1 : J = L - 1/2, J' = J + 1
/// Returns the orbital angular momentum L of the lower-L level r1.
/// Throws ErrorCode::invalid_argument for inconsistent (J, p).
int orbital_l(HalfInt J, int p);

/// J' = J + |p|.
constexpr HalfInt upper_j(HalfInt J, int p) { return J + HalfInt(std::abs(p)); }

/// The six-j symbol {L+1 J' 1/2; J L 1} of the r1 -> r2 dipole element,
/// evaluated by its closed form for class p.
double six_j_closed_form(HalfInt J, int p);

/// sqrt((2J+1)(2J'+1)(L+1)) times six_j_closed_form: the J-dependent reduced
/// factor that multiplies the 3-j symbol in the r1 -> r2 dipole element.
double reduced_factor(HalfInt J, int p);

/// <L+1, J', mJp | r_q | L, J, mJ> with the radial integral set to 1,
/// evaluated from the closed-form reduced factor of class p.
/// Zero (not an error) when mJp != mJ + q.
double dipole_angular_factor(HalfInt J, int p, HalfInt mJ, HalfInt mJp,
                             HalfInt q);

/// Label of a fine-structure sublevel |L, S=1/2, J, m>.
struct FineLevel {
  int L = 0;
  HalfInt J;
  HalfInt m;
};

/// Generic <final | r_q | initial> for S = 1/2 from the general Wigner-Eckart
/// reduction with a generic six-j symbol. Radial integral set to 1 and the
/// orbital reduced element taken as (-1)^L' sqrt(max(L, L')).
/// Zero unless |L - L'| == 1 and m' == m + q.
double dipole_matrix_element(const FineLevel &initial, const FineLevel &final,
                             HalfInt q);

} // namespace rydpol::angular
