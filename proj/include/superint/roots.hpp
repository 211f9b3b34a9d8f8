#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "superint/catalog.hpp"

namespace superint {

/// y^3 + 3 p y + 2 q = 0
struct DepressedCubic {
    double p = 0, q = 0;
    double discriminant() const { return q * q + p * p * p; }
};

/// Case 8 cubic V^3 - 2bx V^2 + b^2 x^2 V - d = 0 shifted by V = y + 2bx/3.
DepressedCubic depressed_cubic(double b, double x, double d);

struct Root {
    double value;
    int multiplicity = 1;
};

struct RootSet {
    std::vector<Root> roots;  // ascending
    double D = 0;
    int count() const;  // with multiplicity
    std::vector<double> values() const;  // expanded by multiplicity
};

/// Trigonometric form for D < 0, Cardano radicals for D > 0. |D| below
/// 1e-12 of q^2 + |p|^3 counts as a multiple root.
RootSet cubic_roots(const DepressedCubic& c);

class BranchDomainError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Residual of the Case 8 cubic relative to the sum of its term magnitudes.
double case8_residual(double b, double d, double x, double V);

/// Real branch 1..3 of the Case 8 potential, labelled like the radical
/// formulas: with u the cube root and w = (-1 + i sqrt3)/2,
///   V1 = 2bx/3 + u + v,  V2 = 2bx/3 + w u + conj(w) v,  V3 = 2bx/3 + conj(w) u + w v
/// and v = -p/u. For D < 0 these are the trigonometric roots with angles
/// theta/3, (theta + 2 pi)/3, (theta - 2 pi)/3. At D = 0 branch 1 is the
/// simple root and 2, 3 the double one. Throws BranchDomainError when the
/// branch is complex at x.
double case8_potential(double b, double d, double x, int branch);

/// Radical formula for branch k. The cube root is real when its radicand is
/// (D >= 0) and principal otherwise. With printed = true the denominator
/// radicand 2 + d - 2b^3x^3 and the factors (1 -+ i sqrt3)/2 are used as
/// typeset; otherwise 27d - 2b^3x^3 and (-1 -+ i sqrt3)/2.
std::complex<double> case8_radical(double b, double d, double x, int branch, bool printed = false);

/// Real roots of the Case 8 cubic along a grid of x, relabelled by
/// nearest continuation. NaN where a label has no real root.
struct BranchTrack {
    std::vector<double> x, D;
    std::vector<std::array<double, 3>> V;
    std::vector<std::size_t> crossings;  // grid indices where the real root count changes
};
BranchTrack track_case8_branches(double b, double d, const std::vector<double>& xs);

/// Case 6 quartic a4 V^4 + a3 V^3 + a2 V^2 + a1 V + a0 = 0 with
///   a4 = -9, a3 = 14 w x^2, a2 = 6d - 15/2 w^2 x^4,
///   a1 = 3/2 w^3 x^6 - 2 d w x^2, a0 = c x^2 - d^2 - d/2 w^2 x^4 - w^4 x^8 / 16
/// where w = omega^2. The variant printed = true keeps the typeset
/// coefficients (-3/4 w^2 x^4, -2 w x^2 and -d in a0).
std::array<double, 5> case6_quartic(double omega2, double c, double d, double x, bool printed = false);

/// c, d of the one-parameter family with a double root.
std::pair<double, double> case6_special_cd(double omega2, double b);

struct Case6ClosedForms {
    double V1, V2;        // omega^2/18 (2b + 5x^2 +- 4x sqrt(b + x^2))
    double V34;           // double root omega^2 x^2 / 2 - omega^2 b / 9
    double V34_printed;   // omega^2 x^2 / 2 - omega^2 b / 27
};
Case6ClosedForms case6_closed_forms(double omega2, double b, double x);

/// Real roots of a polynomial (coefficients highest degree first) by
/// companion-matrix eigenvalues, with nearby roots merged and polished.
std::vector<Root> real_polynomial_roots(const std::vector<double>& coeffs);

/// Relative residual |P(v)| / sum |a_k v^k|.
double polynomial_residual(const std::vector<double>& coeffs, double v);

std::vector<Root> case6_quartic_roots(double omega2, double c, double d, double x);
std::vector<Root> case6_quartic_roots_special(double omega2, double b, double x);

}  // namespace superint
