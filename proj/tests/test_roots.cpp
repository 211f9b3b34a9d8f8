#include <doctest.h>

#include <cmath>
#include <random>

#include "superint/roots.hpp"

using namespace superint;

namespace {

// Independent oracle: all eigenvalues of the companion matrix of a monic cubic.
std::vector<std::complex<double>> companion3(double a2, double a1, double a0) {
    Eigen::Matrix3d M;
    M << -a2, -a1, -a0, 1, 0, 0, 0, 1, 0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(M);
    std::vector<std::complex<double>> out;
    for (int i = 0; i < 3; ++i) out.push_back(es.eigenvalues()[i]);
    return out;
}

std::vector<double> real_parts(const std::vector<std::complex<double>>& z, double tol) {
    std::vector<double> out;
    for (auto v : z)
        if (std::fabs(v.imag()) <= tol * std::max(1.0, std::abs(v))) out.push_back(v.real());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("depressed cubic") {
    auto c = depressed_cubic(3, 1, 2);
    CHECK(c.p == doctest::Approx(-1.0));
    CHECK(c.q == doctest::Approx(0.0));
    c = depressed_cubic(0, 0.7, 0);
    CHECK(c.p == 0.0);
    CHECK(c.q == 0.0);
    c = depressed_cubic(3, 1, 0);
    CHECK(c.p == doctest::Approx(-1.0));
    CHECK(c.q == doctest::Approx(1.0));
    CHECK(c.discriminant() == doctest::Approx(0.0));
}

TEST_CASE("cubic roots: multiple roots") {
    RootSet r = cubic_roots({0, 0});
    REQUIRE(r.roots.size() == 1);
    CHECK(r.roots[0].value == 0.0);
    CHECK(r.roots[0].multiplicity == 3);

    r = cubic_roots({-1, 1});
    REQUIRE(r.roots.size() == 2);
    CHECK(r.roots[0].value == doctest::Approx(-2.0));
    CHECK(r.roots[0].multiplicity == 1);
    CHECK(r.roots[1].value == doctest::Approx(1.0));
    CHECK(r.roots[1].multiplicity == 2);
    CHECK(r.count() == 3);
}

TEST_CASE("case 8 potential at d = 0") {
    CHECK(case8_potential(1, 0, 2, 2) == doctest::Approx(2.0));  // V = bx, double
    CHECK(case8_potential(1, 0, 2, 3) == doctest::Approx(2.0));
    CHECK(case8_potential(1, 0, 2, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(case8_potential(2.5, 0, -1.2, 1) == doctest::Approx(0.0).scale(1.0));
    CHECK(case8_potential(2.5, 0, -1.2, 2) == doctest::Approx(-3.0));
}

TEST_CASE("case 8 potential against the companion oracle") {
    // b = 1, d = 1, x = 1: V^3 - 2V^2 + V - 1 has one real root
    const auto z = real_parts(companion3(-2, 1, -1), 1e-9);
    REQUIRE(z.size() == 1);
    const double v = case8_potential(1, 1, 1, 1);
    CHECK(v == doctest::Approx(z[0]).epsilon(1e-10));
    CHECK(case8_residual(1, 1, 1, v) < 1e-14);
    CHECK_THROWS_AS(case8_potential(1, 1, 1, 2), BranchDomainError);

    // b = 1, d = 1, x = 2 with the shift-consistent cubic V^3 - 2bxV^2 + b^2x^2V - d
    const auto z2 = real_parts(companion3(-4, 4, -1), 1e-9);
    const RootSet rs = cubic_roots(depressed_cubic(1, 2, 1));
    REQUIRE(static_cast<int>(z2.size()) == rs.count());
    for (std::size_t i = 0; i < z2.size(); ++i) CHECK(rs.values()[i] + 4.0 / 3.0 == doctest::Approx(z2[i]).epsilon(1e-10));
    for (int k = 1; k <= 3; ++k) CHECK(case8_residual(1, 1, 2, case8_potential(1, 1, 2, k)) < 1e-10);
}

TEST_CASE("discriminant classification matches the oracle root count") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const double b = U(rng), d = U(rng), x = U(rng);
        const DepressedCubic c = depressed_cubic(b, x, d);
        const double scale = c.q * c.q + std::fabs(c.p * c.p * c.p);
        if (std::fabs(c.discriminant()) < 1e-6 * scale) continue;
        const RootSet rs = cubic_roots(c);
        const auto z = real_parts(companion3(0, 3 * c.p, 2 * c.q), 1e-7);
        CHECK(static_cast<int>(z.size()) == rs.count());
        CHECK((c.discriminant() < 0) == (rs.count() == 3));
        for (double y : rs.values()) {
            const double res = std::fabs(y * y * y + 3 * c.p * y + 2 * c.q) /
                               (std::fabs(y * y * y) + std::fabs(3 * c.p * y) + std::fabs(2 * c.q));
            CHECK(res < 1e-10);
        }
        ++checked;
    }
    CHECK(checked > 9000);
}

TEST_CASE("radical formulas agree with the numeric roots") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const double b = U(rng), d = U(rng), x = U(rng);
        const DepressedCubic c = depressed_cubic(b, x, d);
        if (std::fabs(c.discriminant()) < 1e-6 * (c.q * c.q + std::fabs(c.p * c.p * c.p))) continue;
        for (int k = 1; k <= 3; ++k) {
            const auto z = case8_radical(b, d, x, k);
            if (c.discriminant() > 0 && k > 1) {
                CHECK(std::fabs(z.imag()) > 1e-8);
                continue;
            }
            CHECK(std::fabs(z.imag()) < 1e-8 * std::max(1.0, std::abs(z)));
            const double v = case8_potential(b, d, x, k);
            CHECK(std::fabs(z.real() - v) < 1e-8 * std::max(1.0, std::fabs(v)));
        }
        ++checked;
    }
    CHECK(checked > 900);
}

TEST_CASE("typeset radicals do not solve the cubic") {
    // b = d = 1, x = 2: three real roots, the typeset branches miss them
    for (int j = 1; j <= 3; ++j) {
        const auto z = case8_radical(1, 1, 2, j, true);
        bool hit = false;
        for (int k = 1; k <= 3; ++k)
            if (std::abs(z - std::complex<double>(case8_potential(1, 1, 2, k), 0)) < 1e-6) hit = true;
        CHECK_FALSE(hit);
    }
}

TEST_CASE("branch tracking is continuous and logs discriminant crossings") {
    std::vector<double> xs;
    for (int i = 0; i <= 400; ++i) xs.push_back(-2.0 + 4.0 * i / 400);
    // D = 0 at (bx)^3 = 27 d / 4, i.e. x = 3 / cbrt(4) for b = d = 1
    const BranchTrack t = track_case8_branches(1, 1, xs);
    REQUIRE(t.crossings.size() == 1);
    const double xc = 3.0 / std::cbrt(4.0);
    CHECK(t.x[t.crossings[0]] == doctest::Approx(xc).epsilon(0.02));
    for (std::size_t i = 1; i < t.x.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            if (std::isnan(t.V[i][k]) || std::isnan(t.V[i - 1][k])) continue;
            CHECK(std::fabs(t.V[i][k] - t.V[i - 1][k]) < 0.2);
        }
    }
}

TEST_CASE("case 6 quartic") {
    // c = d = 0, x = 0: -9 V^4
    auto r = case6_quartic_roots(1.0, 0.0, 0.0, 0.0);
    REQUIRE(r.size() == 1);
    CHECK(r[0].value == 0.0);
    CHECK(r[0].multiplicity == 4);

    // special family at b = omega2 = 1, x = 0: roots +-1/9, each double
    r = case6_quartic_roots_special(1.0, 1.0, 0.0);
    REQUIRE(r.size() == 2);
    CHECK(r[0].value == doctest::Approx(-1.0 / 9).epsilon(1e-10));
    CHECK(r[1].value == doctest::Approx(1.0 / 9).epsilon(1e-10));
    CHECK(r[0].multiplicity == 2);
    CHECK(r[1].multiplicity == 2);
    const auto cf = case6_closed_forms(1.0, 1.0, 0.0);
    CHECK(cf.V1 == doctest::Approx(1.0 / 9));
    CHECK(cf.V2 == doctest::Approx(1.0 / 9));
}

TEST_CASE("closed forms of the special family satisfy the quartic") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> Uw(0.3, 3.0), Ub(0.0, 4.0), Ux(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double w = Uw(rng), b = Ub(rng), x = Ux(rng);
        const auto [c, d] = case6_special_cd(w, b);
        const auto q = case6_quartic(w, c, d, x);
        const std::vector<double> qv(q.begin(), q.end());
        const auto cf = case6_closed_forms(w, b, x);
        CHECK(polynomial_residual(qv, cf.V1) < 1e-9);
        CHECK(polynomial_residual(qv, cf.V2) < 1e-9);
        CHECK(polynomial_residual(qv, cf.V34) < 1e-9);
        // numeric roots cover the closed forms
        const auto roots = case6_quartic_roots(w, c, d, x);
        for (double v : {cf.V1, cf.V2, cf.V34}) {
            bool found = false;
            for (const auto& rt : roots) found |= std::fabs(rt.value - v) < 1e-6 * std::max(1.0, std::fabs(v));
            CHECK(found);
        }
        for (const auto& rt : roots) CHECK(polynomial_residual(qv, rt.value) < 1e-9);
    }
}

TEST_CASE("typeset double root -omega^2 b / 27 at x = 0" * doctest::should_fail()) {
    // recorded example; the quartic's double root at x = 0 is -omega^2 b / 9
    const auto cf = case6_closed_forms(1.0, 1.0, 0.0);
    const auto roots = case6_quartic_roots_special(1.0, 1.0, 0.0);
    bool found = false;
    for (const auto& rt : roots) found |= std::fabs(rt.value - cf.V34_printed) < 1e-9;
    CHECK(found);
}

TEST_CASE("typeset quartic coefficients are inconsistent with the closed forms") {
    const auto [c, d] = case6_special_cd(1.0, 1.0);
    const auto q = case6_quartic(1.0, c, d, 0.8, true);
    const auto cf = case6_closed_forms(1.0, 1.0, 0.8);
    CHECK(polynomial_residual({q.begin(), q.end()}, cf.V1) > 1e-3);
}
