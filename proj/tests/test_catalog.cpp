#include <doctest.h>

#include <cmath>

#include "superint/catalog.hpp"

using namespace superint;

namespace {

struct Named {
    int id;
    std::string variant;
};

std::vector<Named> all_systems() {
    std::vector<Named> out;
    for (int c = 1; c <= 8; ++c)
        for (const auto& v : variants(c))
            if (!(v == "printed" && c == 5)) out.push_back({c, v});
    return out;
}

}  // namespace

TEST_CASE("every catalogued B and A Poisson-commute with H") {
    for (const auto& [id, v] : all_systems()) {
        CAPTURE(id);
        CAPTURE(v);
        const SystemDef s = build_system(id, {}, v);
        const Sampler smp = s.sampler(7, 200);
        const ZeroTest ha = is_zero(poisson_bracket(s.H, s.A), smp, s.params, 1e-9);
        const ZeroTest hb = is_zero(poisson_bracket(s.H, s.B), smp, s.params, 1e-9);
        CHECK(ha.zero);
        CHECK(hb.zero);
        CHECK(ha.skipped == 0);
        CHECK(hb.max_residual < 1e-9);
    }
}

TEST_CASE("case 5 with the printed epsilon rule is not an integral") {
    const SystemDef s = build_system(5, {}, "printed");
    const ZeroTest hb = is_zero(poisson_bracket(s.H, s.B), s.sampler(), s.params, 1e-9);
    CHECK_FALSE(hb.zero);
    CHECK(hb.max_residual > 1e-2);
}

TEST_CASE("non-default parameters keep the integrals") {
    const SystemDef s2 = build_system(2, {{"omega2", 0.7}, {"b", 1.3}, {"c", -0.4}});
    CHECK(is_zero(poisson_bracket(s2.H, s2.B), s2.sampler(3), s2.params).zero);
    const SystemDef s5 = build_system(5, {{"beta1", 1.7}, {"beta2", 0.6}});
    CHECK(is_zero(poisson_bracket(s5.H, s5.B), s5.sampler(3), s5.params).zero);
    const SystemDef s6 = build_system(6, {{"omega2", 2.5}, {"b", 1.0}}, "V2");
    CHECK(is_zero(poisson_bracket(s6.H, s6.B), s6.sampler(3), s6.params).zero);
    const SystemDef s8 = build_system(8, {{"a", 0.8}, {"b", 1.4}, {"d", -2.0}}, "general");
    CHECK(std::isfinite(s8.x_lo));
    CHECK(is_zero(poisson_bracket(s8.H, s8.B), s8.sampler(3), s8.params).zero);
}

TEST_CASE("perturbing one coefficient of B breaks conservation") {
    const SystemDef s = build_system(1);
    const Expr bad = s.B + q(1, 100) * X() * pow(P2(), Rational(3));  // 1% on the x p2^3 term
    CHECK(is_zero(poisson_bracket(s.H, bad), s.sampler(), s.params, 1e-3).zero == false);
}

TEST_CASE("H, A, B are functionally independent") {
    for (const auto& [id, v] : all_systems()) {
        CAPTURE(id);
        const SystemDef s = build_system(id, {}, v);
        const Eigen::Matrix4Xd pts = s.sampler(11, 20).draw();
        std::vector<Program> grads;
        for (const Expr* e : {&s.H, &s.A, &s.B})
            for (Var w : {Var::x, Var::y, Var::p1, Var::p2}) grads.emplace_back(partial(*e, w), s.params);
        int full_rank = 0;
        for (int j = 0; j < pts.cols(); ++j) {
            Eigen::Matrix<double, 3, 4> J;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 4; ++c) J(r, c) = grads[4 * r + c](PhasePoint(pts.col(j)));
            Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(J);
            const auto sv = svd.singularValues();
            if (sv[2] > 1e-8 * sv[0]) ++full_rank;
        }
        CHECK(full_rank >= 18);
    }
}

TEST_CASE("catalog examples") {
    const SystemDef s1 = build_system(1, {{"omega2", 2.0}});
    const PhasePoint pt = phase_point(0.3, -1.1, 0.7, 2.0);
    // H = p1^2/2 + p2^2/2 + x^2 + y^2 at omega2 = 2
    CHECK(eval(s1.H, pt, s1.params) == doctest::Approx(0.5 * 0.49 + 0.5 * 4.0 + 0.09 + 1.21));

    const SystemDef s4 = build_system(4);
    CHECK(eval(s4.A, pt, s4.params) == doctest::Approx(0.49 - 4.0 + 9 * 0.09 - 1.21));

    // Case 7 B at a point with xy > 0 uses eps = -1
    const SystemDef s7 = build_system(7);
    const PhasePoint q7 = phase_point(0.25, 0.5, 1.0, 2.0);
    CHECK(eval(s7.B, q7, s7.params) == doctest::Approx(1.0 + 3.0 * 0.5 * 1.0 - 1.5 * 2.0));
    CHECK(s7.branch.epsilon(0.25, 0.5) == -1);
    CHECK(s7.branch.epsilon(-0.25, 0.5) == 1);

    const auto [f5, g5] = separated_potentials(build_system(5));
    CHECK(eval(f5, phase_point(4, 9, 0, 0), {{"beta1", 1}, {"beta2", 1}}) == doctest::Approx(2.0));
    CHECK(eval(g5, phase_point(4, 9, 0, 0), {{"beta1", 1}, {"beta2", 1}}) == doctest::Approx(3.0));
    const SystemDef s3 = build_system(3);
    const auto [f3, g3] = separated_potentials(s3);
    CHECK(eval(f3, phase_point(2, 1, 0, 0), s3.params) == doctest::Approx(2 * 4 + 3 * 2));
    CHECK(eval(g3, phase_point(2, 1, 0, 0), s3.params) == doctest::Approx(0.5 + 2.0));
    CHECK_FALSE(depends_on(f3, Var::y));
    CHECK_FALSE(depends_on(g3, Var::x));
}

TEST_CASE("separated potentials reproduce H") {
    for (const auto& [id, v] : all_systems()) {
        const SystemDef s = build_system(id, {}, v);
        const Expr kin = q(1, 2) * (P1() * P1() + P2() * P2());
        CHECK(is_zero(s.H - kin - s.f_x - s.g_y, s.sampler(), s.params, 1e-14).zero);
        CHECK_FALSE(depends_on(s.f_x, Var::y));
        CHECK_FALSE(depends_on(s.g_y, Var::x));
    }
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(build_system(9), ConfigurationError);
    CHECK_THROWS_AS(build_system(0), ConfigurationError);
    CHECK_THROWS_AS(build_system(1, {{"b", 1.0}}), ConfigurationError);
    CHECK_THROWS_AS(build_system(6, {{"b", -1.0}}), DomainError);
    CHECK_THROWS_AS(build_system(8, {{"d", 0.0}}, "general"), DomainError);
    CHECK_THROWS_AS(build_system(4, {}, "V1"), ConfigurationError);
}

TEST_CASE("turning intervals") {
    const SystemDef s1 = build_system(1, {{"omega2", 2.0}});
    const Boundedness b1 = boundedness_bound(s1, 1.0, 0.5);
    CHECK(b1.bounded);
    CHECK(b1.x.hi == doctest::Approx(std::sqrt(2.0 * 1.0) / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(b1.x.lo == doctest::Approx(-1.0).epsilon(1e-10));

    const SystemDef s8 = build_system(8);
    const Boundedness b8 = boundedness_bound(s8, 1.0, 1.0);
    CHECK(b8.bounded);
    CHECK(b8.x.lo == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(b8.x.hi == doctest::Approx(1.0).epsilon(1e-10));

    const SystemDef s6 = build_system(6, {{"b", 1.0}, {"omega2", 1.0}});
    for (double E : {0.5, 5.0, 500.0}) CHECK(boundedness_bound(s6, E, 1.0).bounded);

    const SystemDef lin = build_system(8, {}, "double");
    CHECK_FALSE(boundedness_bound(lin, 1.0, 1.0, 0.0, 0.0).bounded);

    CHECK_THROWS_AS(boundedness_bound(s1, -1.0, 1.0), DomainError);

    // Case 2 walls: interval stays on the side of the hint
    const SystemDef s2 = build_system(2);
    const Boundedness b2 = boundedness_bound(s2, 20.0, 20.0, 1.0, -1.0);
    CHECK(b2.bounded);
    CHECK(b2.x.lo > 0.0);
    CHECK(b2.y.hi < 0.0);
}

TEST_CASE("json export") {
    const auto j = to_json(build_system(5));
    CHECK(j["case"] == 5);
    CHECK(j["params"]["beta1"] == 1.0);
    CHECK(parse_sexpr(j["B_sexpr"].get<std::string>()) == build_system(5).B);
}

TEST_CASE("free particle custom system") {
    const SystemDef s = custom_system(Expr(0), Expr(0), {});
    CHECK(eval(s.H, phase_point(1, 2, 3, 4), s.params) == doctest::Approx(12.5));
    CHECK_THROWS_AS(custom_system(Y(), Expr(0), {}), ConfigurationError);
}
