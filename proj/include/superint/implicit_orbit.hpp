#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "superint/catalog.hpp"

namespace superint {

/// Outside the classically allowed region (P1^2 < 0 or P2^2 < 0).
class RegionError : public DomainError {
public:
    using DomainError::DomainError;
};

struct OrbitSpec {
    SystemDef system;
    double E1 = 1.0, E2 = 1.0, k = 1.0;
    /// Picks the allowed interval containing these coordinates when the
    /// potential has several wells (walls on the axes).
    std::optional<double> x_hint, y_hint;
};

/// B = mu P1^3 + nu P1^2 P2 + rho P1 P2^2 + sigma P2^3 + phi P1 + psi P2,
/// coefficients read off the system's B by collecting momentum monomials.
struct MomentumCoefficients {
    Expr mu, nu, rho, sigma, phi, psi;
};
/// Throws ConfigurationError when B has other momentum monomials.
MomentumCoefficients momentum_coefficients(const SystemDef& s);

/// The orbit as the zero set of
///   R = (S1 - S2)^2 - 2k^2 (S1 + S2) + k^4,
///   S1 = P1^2 (mu P1^2 + rho P2^2 + phi)^2,  S2 = P2^2 (nu P1^2 + sigma P2^2 + psi)^2,
/// with P1^2 = 2(E1 - f(x)) and P2^2 = 2(E2 - g(y)). R is the product of the
/// four sign branches (s1 +- s2 +- k), s1 = P1(...), s2 = P2(...).
class ImplicitOrbit {
public:
    explicit ImplicitOrbit(const OrbitSpec& spec);

    const OrbitSpec& spec() const { return spec_; }

    struct Momenta {
        double P1sq, P2sq;
    };
    /// Throws RegionError outside the allowed region, SingularityError on a wall.
    Momenta momenta_sq(double x, double y) const;

    double residual(double x, double y) const;
    /// Sum of the magnitudes of the terms of R, for relative tests.
    double residual_scale(double x, double y) const;
    /// R computed as the explicit product of the four branches.
    double branch_product(double x, double y) const;

    /// R continued polynomially in P1^2, P2^2 (no region check); NaN on a wall.
    double continued(double x, double y) const;
    /// Strict interior: P1^2 > eps and P2^2 > eps.
    bool inside(double x, double y) const;
    double mask_eps() const { return eps_; }

private:
    struct Parts {
        double P1sq, P2sq, m1, m2;  // S1 = P1sq m1^2, S2 = P2sq m2^2
    };
    Parts parts(double x, double y, bool checked = true) const;

    OrbitSpec spec_;
    Program f_, g_;
    Program mu_, nu_, rho_, sigma_, phi_, psi_;
    double eps_;
};

/// Node lattice; nx x ny nodes.
struct ContourGrid {
    double x_lo = -1, x_hi = 1, y_lo = -1, y_hi = 1;
    int nx = 512, ny = 512;

    double dx() const { return (x_hi - x_lo) / (nx - 1); }
    double dy() const { return (y_hi - y_lo) / (ny - 1); }
    double cell() const { return std::max(dx(), dy()); }
};

/// Bounding box of the allowed region inflated by 5%. DomainError if unbounded.
ContourGrid default_grid(const OrbitSpec& spec, int n = 512);

using Polyline = std::vector<Eigen::Vector2d>;

/// Marching squares over R. Cells with no interior corner are skipped and
/// segments are kept when each end lies on an edge with an interior node,
/// so the curve is clipped to the allowed region at grid resolution while
/// tangencies with the region boundary are not cut. Saddles are resolved
/// by the cell-centre average.
std::vector<Polyline> orbit_contour(const ImplicitOrbit& orbit, const ContourGrid& grid);

/// max over a of the distance to the nearest point of b.
double directed_distance(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b);
/// Symmetric Hausdorff distance between two point clouds.
double hausdorff(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b);

/// Polyline vertices with extra points so that no gap exceeds spacing.
std::vector<Eigen::Vector2d> densify(const std::vector<Polyline>& lines, double spacing);

/// A phase point with E1 = p1^2/2 + f(x), E2 = p2^2/2 + g(y) and B = k.
/// Scans x across the allowed interval on a few y levels, over the four
/// momentum sign choices, and bisects on B - k. DomainError if none.
PhasePoint seed_orbit_point(const SystemDef& s, double E1, double E2, double k);

/// Algebraic conic a x^2 + b xy + c y^2 + d x + e y + f = 0 through the
/// points, with the RMS of the first-order geometric distance.
struct ConicFit {
    Eigen::Matrix<double, 6, 1> coeffs;
    double rms = 0;
    bool ellipse = false;  // b^2 - 4ac < 0
};
ConicFit fit_conic(const std::vector<Eigen::Vector2d>& pts);

}  // namespace superint
