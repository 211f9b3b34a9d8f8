#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "superint/eval.hpp"
#include "superint/expr.hpp"

namespace superint {

/// Raised when the requested parameters put the potential outside its real
/// domain (e.g. b + x^2 < 0 under the square root of Case 6).
class DomainError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

/// Quadrant sign rule that fixes the relative sign of the x and y parts of B.
/// Our B expressions carry this rule through sign(x), sign(y) factors, so the
/// rule is descriptive metadata plus a pointwise evaluator.
struct BranchRule {
    enum class Kind { none, eps_minus_sign_xy, eps_plus_sign_xy } kind = Kind::none;
    std::string description;

    /// epsilon at (x, y); 0 on the axes. Always +1 when kind is none.
    int epsilon(double x, double y) const;
};

/// Expected algebraic structure, used by classification tests.
enum class Degeneration { u2_enveloping, quadratic_consequence, heisenberg, solvable_lie, irreducible_cubic };
const char* to_string(Degeneration d);

/// Initial data from the figure captions: either a phase point or the
/// triple of integral values (E1, E2, k).
struct FigureSetup {
    std::optional<PhasePoint> start;
    double E1 = 1.0, E2 = 1.0, k = 1.0;
    double t_end = 400.0;
    std::string caption;
};

struct SystemDef {
    int case_id = 0;
    std::string variant;
    std::string title;
    ParamSet params;
    Expr H, A, B;
    Expr f_x, g_y;
    SingularSet singular = SingularSet::none;
    BranchRule branch;
    Degeneration expected = Degeneration::irreducible_cubic;
    bool expect_C_constant = false;
    /// Open x-interval on which the potential is real (Case 8 general branch).
    double x_lo = -std::numeric_limits<double>::infinity();
    double x_hi = std::numeric_limits<double>::infinity();
    FigureSetup figure;

    /// Sampler over the default box, clipped to the x-domain, with this
    /// system's singular set excluded.
    Sampler sampler(std::uint64_t seed = 20240521, int count = 200) const;
    /// The case's H, A or B compiled with its parameters.
    Program compile(const Expr& e) const { return Program(e, params); }
};

/// Parameter names accepted by a case, with defaults.
ParamSet default_params(int case_id, const std::string& variant = "");
std::vector<std::string> variants(int case_id);

/// Builds Case 1..8. Overrides must name parameters of that case.
SystemDef build_system(int case_id, const ParamSet& overrides = {}, const std::string& variant = "");

/// H = (p1^2 + p2^2)/2 + f(x) + g(y) with A = (p1^2 - p2^2)/2 + f - g and the
/// given B (0 if omitted). Handy for free motion and for negative controls.
SystemDef custom_system(const Expr& f_x, const Expr& g_y, const ParamSet& params, const Expr& B = Expr(0));

struct Potentials {
    Expr f_x, g_y;
};
Potentials separated_potentials(const SystemDef& s);

struct TurningRange {
    double lo = 0.0, hi = 0.0;  // infinite when the level set is unbounded on that side
    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

struct Boundedness {
    bool bounded = false;
    TurningRange x, y;
};

/// Turning intervals of the two 1D motions at energies E1, E2, found by
/// outward search and bisection from the potential minimum (or from the
/// given hint coordinates). Throws DomainError if E is below the minimum.
Boundedness boundedness_bound(const SystemDef& s, double E1, double E2, std::optional<double> x_hint = {},
                              std::optional<double> y_hint = {});

/// One coordinate (0 = x, 1 = y) of the above.
TurningRange turning_interval(const SystemDef& s, int coord, double E, std::optional<double> hint = {});

/// Exports case id, variant, parameters and expression strings.
nlohmann::json to_json(const SystemDef& s);

/// Symbols shared by the catalog.
inline const Expr& X() {
    static const Expr e = var(Var::x);
    return e;
}
inline const Expr& Y() {
    static const Expr e = var(Var::y);
    return e;
}
inline const Expr& P1() {
    static const Expr e = var(Var::p1);
    return e;
}
inline const Expr& P2() {
    static const Expr e = var(Var::p2);
    return e;
}

}  // namespace superint
