#include "superint/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace superint {

namespace {

const Expr& x() { return X(); }
const Expr& y() { return Y(); }
const Expr& p1() { return P1(); }
const Expr& p2() { return P2(); }

Expr sq(const Expr& e) { return pow(e, Rational(2)); }
Expr cube(const Expr& e) { return pow(e, Rational(3)); }
Expr half() { return q(1, 2); }

// Real cube root sign(w) |w|^(1/3).
Expr cbrt_signed(const Expr& w) { return sign(w) * pow(abs(w), Rational(1, 3)); }

void check_case(int case_id) {
    if (case_id < 1 || case_id > 8) throw ConfigurationError("case id must be in 1..8, got " + std::to_string(case_id));
}

std::string default_variant(int case_id) {
    switch (case_id) {
        case 5:
        case 7: return "normalized";
        case 6: return "V1";
        case 8: return "particular";
        default: return "standard";
    }
}

ParamSet merge(ParamSet defaults, const ParamSet& overrides, int case_id) {
    for (const auto& [k, v] : overrides) {
        auto it = defaults.find(k);
        if (it == defaults.end())
            throw ConfigurationError("parameter '" + k + "' is not used by case " + std::to_string(case_id));
        if (!std::isfinite(v)) throw ConfigurationError("parameter '" + k + "' must be finite");
        it->second = v;
    }
    return defaults;
}

void finish(SystemDef& s) {
    const Expr kin = half() * (sq(p1()) + sq(p2()));
    s.H = kin + s.f_x + s.g_y;
}

FigureSetup caption_start(const std::string& caption) {
    FigureSetup f;
    f.start = phase_point(5.0, -2.0, -1.5, -1.2);
    f.t_end = 400.0;
    f.caption = caption;
    return f;
}

FigureSetup caption_integrals(const std::string& caption) {
    FigureSetup f;
    f.E1 = f.E2 = f.k = 1.0;
    f.t_end = 200.0;
    f.caption = caption;
    return f;
}

}  // namespace

int BranchRule::epsilon(double xv, double yv) const {
    const double s = (xv > 0 ? 1.0 : (xv < 0 ? -1.0 : 0.0)) * (yv > 0 ? 1.0 : (yv < 0 ? -1.0 : 0.0));
    switch (kind) {
        case Kind::none: return 1;
        case Kind::eps_minus_sign_xy: return static_cast<int>(-s);
        case Kind::eps_plus_sign_xy: return static_cast<int>(s);
    }
    return 1;
}

const char* to_string(Degeneration d) {
    switch (d) {
        case Degeneration::u2_enveloping: return "u(2)-enveloping";
        case Degeneration::quadratic_consequence: return "quadratic-algebra consequence";
        case Degeneration::heisenberg: return "Heisenberg";
        case Degeneration::solvable_lie: return "solvable-Lie";
        case Degeneration::irreducible_cubic: return "irreducible-cubic";
    }
    return "?";
}

std::vector<std::string> variants(int case_id) {
    check_case(case_id);
    switch (case_id) {
        case 5:
        case 7: return {"normalized", "printed"};
        case 6: return {"V1", "V2", "V3"};
        case 8: return {"particular", "general", "double", "simple"};
        default: return {"standard"};
    }
}

ParamSet default_params(int case_id, const std::string& variant) {
    check_case(case_id);
    switch (case_id) {
        case 1: return {{"omega2", 2.0}};
        case 2: return {{"omega2", 2.0}, {"b", 2.0}, {"c", 3.0}};
        case 3: return {{"omega2", 1.0}, {"b", 2.0}, {"c", 3.0}};
        case 4: return {{"omega2", 1.0}};
        case 5: return {{"beta1", 1.0}, {"beta2", 1.0}};
        // b = 9 corresponds to the caption's d = 3 through d = omega^4 b^2 / 27
        case 6: return {{"omega2", 1.0}, {"b", 9.0}};
        case 7: return {{"a", 1.0}, {"b", 1.0}};
        case 8:
            if (variant == "general") return {{"a", 1.0}, {"b", 1.0}, {"d", 1.0}};
            return {{"a", 1.0}, {"b", 1.0}};
    }
    return {};
}

SystemDef build_system(int case_id, const ParamSet& overrides, const std::string& variant_in) {
    check_case(case_id);
    const std::string variant = variant_in.empty() ? default_variant(case_id) : variant_in;
    const auto vs = variants(case_id);
    if (std::find(vs.begin(), vs.end(), variant) == vs.end())
        throw ConfigurationError("case " + std::to_string(case_id) + " has no variant '" + variant + "'");

    SystemDef s;
    s.case_id = case_id;
    s.variant = variant;
    s.params = merge(default_params(case_id, variant), overrides, case_id);
    const Expr w2 = par("omega2"), a = par("a"), b = par("b"), c = par("c");
    const Expr x2 = sq(x()), y2 = sq(y());

    switch (case_id) {
        case 1: {
            s.title = "isotropic harmonic oscillator";
            s.f_x = w2 / q(2) * x2;
            s.g_y = w2 / q(2) * y2;
            s.A = sq(p1()) - sq(p2()) + w2 * (x2 - y2);
            s.B = x() * cube(p2()) - y() * p1() * sq(p2()) - w2 * cube(y()) * p1() + w2 * x() * y2 * p2();
            s.expected = Degeneration::u2_enveloping;
            s.figure = caption_start("omega2=2, x0=5, y0=-2, vx0=-1.5, vy0=-1.2, t=[0,400]");
            break;
        }
        case 2: {
            s.title = "oscillator with inverse-square walls";
            s.f_x = w2 / q(2) * x2 + b / x2;
            s.g_y = w2 / q(2) * y2 + c / y2;
            s.A = sq(p1()) - sq(p2()) + w2 * (x2 - y2) + q(2) * b / x2 - q(2) * c / y2;
            s.B = x() * p1() * sq(p2()) - y() * sq(p1()) * p2() + x() * y() * (q(-2) * b / cube(x()) + w2 * x()) * p2() -
                  x() * y() * (q(-2) * c / cube(y()) + w2 * y()) * p1();
            s.singular = SingularSet::both;
            s.expected = Degeneration::quadratic_consequence;
            s.figure = caption_start("omega2=2, b=2, c=3, x0=5, y0=-2, vx0=-1.5, vy0=-1.2, t=[0,400]");
            break;
        }
        case 3: {
            s.title = "2:1 oscillator with wall and linear term";
            s.f_x = q(2) * w2 * x2 + c * x();
            s.g_y = w2 / q(2) * y2 + b / y2;
            s.A = sq(p1()) - sq(p2()) + w2 * (q(4) * x2 - y2) - q(2) * b / y2 + q(2) * c * x();
            s.B = p1() * sq(p2()) + (q(2) * b / y2 - w2 * y2) * p1() + (q(4) * w2 * x() * y() + c * y()) * p2();
            s.singular = SingularSet::y_zero;
            s.expected = Degeneration::quadratic_consequence;
            s.figure = caption_start("omega2=1, b=2, c=3, x0=5, y0=-2, vx0=-1.5, vy0=-1.2, t=[0,400]");
            break;
        }
        case 4: {
            s.title = "anisotropic oscillator 3:1";
            s.f_x = q(9) * w2 / q(2) * x2;
            s.g_y = w2 / q(2) * y2;
            s.A = sq(p1()) - sq(p2()) + w2 * (q(9) * x2 - y2);
            s.B = -y() * p1() * sq(p2()) + x() * cube(p2()) + q(1, 3) * w2 * cube(y()) * p1() -
                  q(3) * w2 * x() * y2 * p2();
            s.expected = Degeneration::irreducible_cubic;
            s.figure = caption_start("omega2=1, x0=5, y0=-2, vx0=-1.5, vy0=-1.2, t=[0,400]");
            break;
        }
        case 5: {
            s.title = "square-root potential in both coordinates";
            const Expr b1 = par("beta1"), b2 = par("beta2");
            s.f_x = sq(b1) * sqrt_abs(x());
            s.g_y = sq(b2) * sqrt_abs(y());
            s.A = half() * (sq(p1()) - sq(p2())) + s.f_x - s.g_y;
            const Expr fx = pow(b2, Rational(4)) * (cube(p1()) + q(3) * sq(b1) * sqrt_abs(x()) * p1());
            const Expr gy = pow(b1, Rational(4)) * (cube(p2()) + q(3) * sq(b2) * sqrt_abs(y()) * p2());
            if (variant == "printed") {
                s.B = fx + sign(x() * y()) * gy;
                s.branch = {BranchRule::Kind::eps_plus_sign_xy, "eps = +1 for xy > 0, -1 for xy < 0 (fails {H,B} = 0)"};
            } else {
                s.B = sign(x()) * fx - sign(y()) * gy;
                s.branch = {BranchRule::Kind::eps_minus_sign_xy,
                            "B = sign(x) (x-part + eps y-part), eps = -sign(xy)"};
            }
            s.singular = SingularSet::both;
            s.expected = Degeneration::heisenberg;
            s.expect_C_constant = true;
            s.figure = caption_integrals("beta1=beta2=1, E1=E2=k=1");
            break;
        }
        case 6: {
            if (s.params.at("b") < 0.0 && variant != "V3")
                throw DomainError("case 6 needs b >= 0 so that b + x^2 > 0 for every x");
            s.title = "quartic-root potential";
            Expr V;
            if (variant == "V3") {
                V = w2 / q(2) * x2 - w2 * b / q(9);
            } else {
                const Expr root = q(4) * x() * pow(abs(b + x2), Rational(1, 2));
                V = w2 / q(18) * (q(2) * b + q(5) * x2 + (variant == "V1" ? root : -root));
            }
            const Expr Vx = partial(V, Var::x);
            s.f_x = V;
            s.g_y = w2 / q(2) * y2;
            s.A = half() * (sq(p1()) - sq(p2())) - w2 / q(2) * y2 + V;
            const Expr m = w2 / q(2) * x2 - q(3) * V;
            s.B = -y() * cube(p1()) + x() * sq(p1()) * p2() + m * y() * p1() - m * Vx * p2() / w2;
            s.expected = Degeneration::irreducible_cubic;
            s.figure = caption_start("omega2=1, d=3 (b=9), x0=5, y0=-2, vx0=-1.5, vy0=-1.2, t=[0,400]");
            break;
        }
        case 7: {
            s.title = "square root in x, modulus in y";
            s.f_x = sq(b) * sqrt_abs(x());
            s.g_y = sq(a) * abs(y());
            s.A = half() * (sq(p1()) - sq(p2())) - s.g_y + s.f_x;
            const Expr fx = cube(p1()) + q(3) * sq(b) * sqrt_abs(x()) * p1();
            const Expr gy = q(3) * pow(b, Rational(4)) / (q(2) * sq(a)) * p2();
            if (variant == "printed") {
                s.B = fx - sign(x() * y()) * gy;
                s.branch = {BranchRule::Kind::eps_minus_sign_xy, "eps = -1 for xy > 0, +1 for xy < 0"};
            } else {
                s.B = sign(x()) * fx - sign(y()) * gy;
                s.branch = {BranchRule::Kind::eps_minus_sign_xy,
                            "B = sign(x) (x-part + eps y-part), eps = -sign(xy)"};
            }
            s.singular = SingularSet::both;
            s.expected = Degeneration::heisenberg;
            s.expect_C_constant = true;
            s.figure = caption_integrals("a=b=1, E1=E2=k=1");
            break;
        }
        case 8: {
            s.expected = Degeneration::solvable_lie;
            if (variant == "particular") {
                s.title = "modulus potential in both coordinates";
                s.f_x = sq(b) * abs(x());
                s.g_y = sq(a) * abs(y());
                s.A = half() * (sq(p1()) - sq(p2())) - s.g_y + s.f_x;
                s.B = sign(x()) * sq(a) * cube(p1()) - sign(y()) * sq(b) * sq(p1()) * p2() +
                      q(2) * sq(a) * sq(b) * x() * p1() - q(2) * pow(b, Rational(4)) * sign(y()) * abs(x()) * p2();
                s.singular = SingularSet::both;
                s.figure = caption_integrals("a=b=1, E1=E2=k=1");
                break;
            }
            Expr V;
            if (variant == "double") {
                s.title = "linear potential (double root V = bx)";
                V = b * x();
            } else if (variant == "simple") {
                s.title = "linear potential in y (simple root V = 0)";
                V = Expr(0);
            } else {
                s.title = "cubic-root potential";
                const double bv = s.params.at("b"), dv = s.params.at("d");
                if (dv == 0.0) throw DomainError("general case 8 branch needs d != 0; use the double or simple variant");
                const double db3 = dv * bv * bv * bv;
                if (db3 != 0.0) {
                    const double edge = std::cbrt(27.0 * dv / (4.0 * bv * bv * bv));
                    if (db3 > 0) s.x_hi = edge;
                    else s.x_lo = edge;
                }
                const Expr d = par("d");
                const Expr pp = -sq(b * x() / q(3));
                const Expr qq = cube(b * x() / q(3)) - d / q(2);
                const Expr rootD = pow(abs(sq(qq) + cube(pp)), Rational(1, 2));
                V = q(2) * b * x() / q(3) + cbrt_signed(-qq + rootD) + cbrt_signed(-qq - rootD);
                s.singular = SingularSet::x_zero;
            }
            s.f_x = V;
            s.g_y = a * y();
            s.A = half() * (sq(p1()) - sq(p2())) - a * y() + V;
            s.B = a * cube(p1()) - b * sq(p1()) * p2() + a * (q(3) * V - b * x()) * p1() - q(2) * b * V * p2();
            break;
        }
    }
    finish(s);
    return s;
}

SystemDef custom_system(const Expr& f_x, const Expr& g_y, const ParamSet& params, const Expr& B) {
    if (depends_on(f_x, Var::y) || depends_on(f_x, Var::p1) || depends_on(f_x, Var::p2))
        throw ConfigurationError("f must depend on x only");
    if (depends_on(g_y, Var::x) || depends_on(g_y, Var::p1) || depends_on(g_y, Var::p2))
        throw ConfigurationError("g must depend on y only");
    SystemDef s;
    s.case_id = 0;
    s.variant = "custom";
    s.title = "custom separable system";
    s.params = params;
    s.f_x = f_x;
    s.g_y = g_y;
    s.A = half() * (sq(p1()) - sq(p2())) + f_x - g_y;
    s.B = B;
    if (!is_smooth_everywhere(f_x) || !is_smooth_everywhere(g_y)) s.singular = SingularSet::both;
    finish(s);
    return s;
}

Sampler SystemDef::sampler(std::uint64_t seed, int count) const {
    Sampler out;
    out.seed = seed;
    out.count = count;
    out.singular = singular;
    const double margin = 0.05;
    if (std::isfinite(x_hi)) out.hi[0] = std::min(out.hi[0], x_hi - margin);
    if (std::isfinite(x_lo)) out.lo[0] = std::max(out.lo[0], x_lo + margin);
    return out;
}

Potentials separated_potentials(const SystemDef& s) { return {s.f_x, s.g_y}; }

namespace {

// Outward search for the first crossing of level E starting from a point
// where f < E. Returns +-inf if none within `reach`.
double turning_point(const std::function<double(double)>& f, double start, double E, double dir, double reach,
                     double limit) {
    double step = 1e-3;
    double inside = start;
    while (true) {
        const double probe = inside + dir * step;
        // past the edge of the real domain the 1D motion is not defined
        if (dir > 0 ? probe >= limit : probe <= limit) return dir * std::numeric_limits<double>::infinity();
        double v;
        try {
            v = f(probe);
        } catch (const SingularityError&) {
            v = std::numeric_limits<double>::infinity();
        }
        if (v > E) {
            double lo = inside, hi = probe;  // lo inside the well, hi outside
            for (int i = 0; i < 200 && std::fabs(hi - lo) > 1e-14 * std::max(1.0, std::fabs(lo)); ++i) {
                const double mid = 0.5 * (lo + hi);
                double vm;
                try {
                    vm = f(mid);
                } catch (const SingularityError&) {
                    vm = std::numeric_limits<double>::infinity();
                }
                (vm > E ? hi : lo) = mid;
            }
            return 0.5 * (lo + hi);
        }
        if (std::fabs(probe - start) > reach) return dir * std::numeric_limits<double>::infinity();
        inside = probe;
        step *= 1.5;
    }
}

TurningRange level_interval(const Program& pot, int coord, double E, std::optional<double> hint, double lo_lim,
                            double hi_lim, const char* name) {
    auto f = [&](double v) {
        PhasePoint pt = PhasePoint::Zero();
        pt[coord] = v;
        return pot(pt);
    };
    double start;
    if (hint) {
        start = *hint;
    } else {
        // coarse scan for the minimum on a symmetric window
        const double L = std::min({50.0, std::isfinite(hi_lim) ? hi_lim : 50.0, std::isfinite(lo_lim) ? -lo_lim : 50.0});
        double best = std::numeric_limits<double>::infinity();
        start = 0.0;
        const int n = 20001;
        for (int i = 0; i < n; ++i) {
            const double v = -L + 2.0 * L * i / (n - 1);
            if (v <= lo_lim || v >= hi_lim) continue;
            try {
                const double fv = f(v);
                if (fv < best) {
                    best = fv;
                    start = v;
                }
            } catch (const SingularityError&) {
            }
        }
    }
    double f0;
    try {
        f0 = f(start);
    } catch (const SingularityError&) {
        throw DomainError(std::string("potential singular at the start of the ") + name + " search");
    }
    if (f0 > E) throw DomainError(std::string(name) + "-energy is below the potential at the start point");
    const double reach = 1e6;
    TurningRange r;
    r.lo = turning_point(f, start, E, -1.0, reach, lo_lim);
    r.hi = turning_point(f, start, E, +1.0, reach, hi_lim);
    return r;
}

}  // namespace

Boundedness boundedness_bound(const SystemDef& s, double E1, double E2, std::optional<double> x_hint,
                              std::optional<double> y_hint) {
    const Program f(s.f_x, s.params), g(s.g_y, s.params);
    Boundedness out;
    out.x = level_interval(f, 0, E1, x_hint, s.x_lo, s.x_hi, "x");
    out.y = level_interval(g, 1, E2, y_hint, -std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(), "y");
    out.bounded = out.x.bounded() && out.y.bounded();
    return out;
}

TurningRange turning_interval(const SystemDef& s, int coord, double E, std::optional<double> hint) {
    if (coord == 0) return level_interval(Program(s.f_x, s.params), 0, E, hint, s.x_lo, s.x_hi, "x");
    if (coord == 1)
        return level_interval(Program(s.g_y, s.params), 1, E, hint, -std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity(), "y");
    throw ConfigurationError("coordinate index must be 0 (x) or 1 (y)");
}

nlohmann::json to_json(const SystemDef& s) {
    nlohmann::json j;
    j["case"] = s.case_id;
    j["variant"] = s.variant;
    j["title"] = s.title;
    j["params"] = s.params;
    j["H"] = to_infix(s.H);
    j["A"] = to_infix(s.A);
    j["B"] = to_infix(s.B);
    j["f"] = to_infix(s.f_x);
    j["g"] = to_infix(s.g_y);
    j["B_sexpr"] = to_sexpr(s.B);
    j["singular_set"] = to_string(s.singular);
    j["branch_rule"] = s.branch.description;
    j["expected_degeneration"] = to_string(s.expected);
    return j;
}

}  // namespace superint
