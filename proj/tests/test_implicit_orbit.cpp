#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "superint/dynamics.hpp"
#include "superint/implicit_orbit.hpp"

using namespace superint;

namespace {

PhasePoint pt(double x, double y, double p1, double p2) {
    PhasePoint z;
    z << x, y, p1, p2;
    return z;
}

OrbitSpec spec_through(const SystemDef& s, const PhasePoint& z) {
    const Flow f(s);
    return {s, f.energy_x(z), f.energy_y(z), s.compile(s.B)(z), z[0], z[1]};
}

std::vector<Eigen::Vector2d> projection(const SystemDef& s, const PhasePoint& z, double t_end) {
    IntegratorConfig c;
    c.t_end = t_end;
    const UniformSeries u = resample(integrate(s, z, c), s, 0.002);
    std::vector<Eigen::Vector2d> out;
    for (std::size_t i = 0; i < u.t.size(); ++i) out.emplace_back(u.x[i], u.y[i]);
    return out;
}

}  // namespace

TEST_CASE("momentum coefficients of case 1") {
    const SystemDef s = build_system(1);
    const MomentumCoefficients c = momentum_coefficients(s);
    const PhasePoint z = pt(0.7, -1.3, 0, 0);
    const ParamSet& p = s.params;
    CHECK(eval(c.mu, z, p) == 0.0);
    CHECK(eval(c.nu, z, p) == 0.0);
    CHECK(eval(c.rho, z, p) == doctest::Approx(1.3));
    CHECK(eval(c.sigma, z, p) == doctest::Approx(0.7));
    CHECK(eval(c.phi, z, p) == doctest::Approx(-2.0 * std::pow(-1.3, 3)));
    CHECK(eval(c.psi, z, p) == doctest::Approx(2.0 * 0.7 * 1.69));
}

TEST_CASE("B outside the cubic form is rejected") {
    const SystemDef s = custom_system(Expr(0), Expr(0), {}, P1() * P2());
    CHECK_THROWS_AS(momentum_coefficients(s), ConfigurationError);
}

TEST_CASE("region error outside the allowed region") {
    const ImplicitOrbit o({build_system(1), 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(o.residual(5.0, 0.0), RegionError);
    CHECK_NOTHROW(o.residual(0.1, 0.1));
    CHECK_FALSE(o.inside(5.0, 0.0));
}

TEST_CASE("squaring construction equals the product of the four branches") {
    std::mt19937_64 rng(11);
    for (int id = 1; id <= 8; ++id) {
        CAPTURE(id);
        const SystemDef s = build_system(id);
        OrbitSpec sp{s, 3.0, 2.5, 1.7};
        if (s.figure.start) {
            sp = spec_through(s, *s.figure.start);
            sp.k *= 0.9;
        }
        const ImplicitOrbit o(sp);
        const ContourGrid g = default_grid(o.spec());
        std::uniform_real_distribution<double> ux(g.x_lo, g.x_hi), uy(g.y_lo, g.y_hi);
        int checked = 0;
        for (int i = 0; i < 2000 && checked < 200; ++i) {
            const double x = ux(rng), y = uy(rng);
            if (std::fabs(x) < 1e-3 || std::fabs(y) < 1e-3 || !o.inside(x, y)) continue;
            const double r = o.residual(x, y), b = o.branch_product(x, y);
            CHECK(std::fabs(r - b) <= 1e-10 * o.residual_scale(x, y));
            ++checked;
        }
        CHECK(checked == 200);
    }
}

TEST_CASE("residual vanishes along numeric trajectories") {
    for (int id : {1, 2, 3, 4, 6}) {
        CAPTURE(id);
        const SystemDef s = build_system(id);
        const PhasePoint z0 = *s.figure.start;
        const ImplicitOrbit o(spec_through(s, z0));
        IntegratorConfig c;
        c.t_end = 50;
        const TrajectoryRecord r = integrate(s, z0, c);
        double worst = 0;
        for (std::size_t i = 0; i < r.size(); i += 7) {
            try {
                worst = std::max(worst, std::fabs(o.residual(r.z[i][0], r.z[i][1])) /
                                            o.residual_scale(r.z[i][0], r.z[i][1]));
            } catch (const RegionError&) {
                // turning points may sit a rounding error outside
            }
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("harmonic orbit: polynomial vanishes on the ellipse") {
    // x = a1 sin(wt + c1), y = a2 sin(wt + c2)
    const SystemDef s = build_system(1);
    const double w = std::sqrt(2.0), a1 = 1.3, a2 = 0.8, c1 = 0.4, c2 = 1.9;
    auto state = [&](double t) {
        return pt(a1 * std::sin(w * t + c1), a2 * std::sin(w * t + c2), a1 * w * std::cos(w * t + c1),
                  a2 * w * std::cos(w * t + c2));
    };
    const ImplicitOrbit o(spec_through(s, state(0.0)));
    CHECK(o.spec().E1 == doctest::Approx(0.5 * w * w * a1 * a1));
    for (int i = 0; i < 100; ++i) {
        const PhasePoint z = state(0.0731 * i);
        double r;
        try {
            r = o.residual(z[0], z[1]);
        } catch (const RegionError&) {
            continue;
        }
        CHECK(std::fabs(r) <= 1e-10 * o.residual_scale(z[0], z[1]));
    }
}

TEST_CASE("harmonic contour is elliptic along the flow") {
    // the level set holds the orbit and its mirror image; fit the part the flow traces
    const SystemDef s = build_system(1);
    const PhasePoint z0 = *s.figure.start;
    const OrbitSpec sp = spec_through(s, z0);
    const ContourGrid g = default_grid(sp);
    const auto all = densify(orbit_contour(ImplicitOrbit(sp), g), g.cell() / 4);
    const auto traj = projection(s, z0, 2 * std::numbers::pi / std::sqrt(2.0));
    std::vector<Eigen::Vector2d> near;
    for (const auto& p : all)
        if (directed_distance({p}, traj) < 2 * g.cell()) near.push_back(p);
    REQUIRE(near.size() > 100);
    const ConicFit cf = fit_conic(near);
    CHECK(cf.ellipse);
    CHECK(cf.rms < 1e-3 * std::hypot(g.x_hi - g.x_lo, g.y_hi - g.y_lo));
    CHECK(hausdorff(near, traj) < 2 * g.cell());
}

TEST_CASE("caption trajectories lie on the implicit curve") {
    // the level set may hold mirror orbits too, so only trajectory -> curve is bounded
    for (int id : {1, 2, 3, 6}) {
        CAPTURE(id);
        const SystemDef s = build_system(id);
        const PhasePoint z0 = *s.figure.start;
        const OrbitSpec sp = spec_through(s, z0);
        const ContourGrid g = default_grid(sp);
        const auto pts = densify(orbit_contour(ImplicitOrbit(sp), g), g.cell() / 4);
        CHECK(directed_distance(projection(s, z0, 60), pts) < 2 * g.cell());
    }
}

TEST_CASE("figure 8 curve is one closed polyline") {
    const SystemDef s = build_system(8);
    const OrbitSpec sp{s, 1, 1, 1};
    const auto lines = orbit_contour(ImplicitOrbit(sp), default_grid(sp));
    REQUIRE(lines.size() == 1);
    CHECK((lines[0].front() - lines[0].back()).norm() < 1e-12);
    CHECK(lines[0].size() > 100);
}

TEST_CASE("inconsistent k gives an empty zero set") {
    const OrbitSpec sp{build_system(1), 1, 1, 1e3};
    CHECK(orbit_contour(ImplicitOrbit(sp), default_grid(sp, 64)).empty());
}

TEST_CASE("unbounded region has no default grid") {
    CHECK_THROWS_AS(default_grid({build_system(8, {}, "simple"), 1, 1, 1}), DomainError);
}

TEST_CASE("seed point carries the requested integrals") {
    for (int id : {5, 7, 8}) {
        CAPTURE(id);
        const SystemDef s = build_system(id);
        const PhasePoint z = seed_orbit_point(s, 1, 1, 1);
        const Flow f(s);
        CHECK(f.energy_x(z) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.energy_y(z) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.compile(s.B)(z) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(seed_orbit_point(build_system(8), 1, 1, 1e4), DomainError);
}

TEST_CASE("hausdorff distance") {
    const std::vector<Eigen::Vector2d> a = {{0, 0}, {1, 0}, {2, 0}};
    const std::vector<Eigen::Vector2d> b = {{0, 0.5}, {2, 0.5}};
    CHECK(directed_distance(b, a) == doctest::Approx(0.5));
    CHECK(directed_distance(a, b) == doctest::Approx(std::hypot(1.0, 0.5)));
    CHECK(hausdorff(a, b) == doctest::Approx(std::hypot(1.0, 0.5)));
}
