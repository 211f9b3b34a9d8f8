#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "superint/catalog.hpp"

namespace superint {

/// Coefficients of the cubic algebra
///   {A,C} = alpha A^2 + 2 beta AB + gamma A + delta B + eps
///   {B,C} = mu A^3 + nu A^2 + rho B^2 + 2 sigma AB + xi A + eta B + zeta
/// with gamma, delta, nu, eta linear in H, eps, xi quadratic and zeta cubic.
/// After the Jacobi reduction rho = -beta, sigma = -alpha, eta = -gamma.
struct StructureConstants {
    double alpha0 = 0, beta0 = 0, mu0 = 0;
    std::array<double, 2> gamma{}, delta{}, nu{};
    std::array<double, 3> eps{}, xi{};
    std::array<double, 4> zeta{};
    // only meaningful for the unconstrained fit
    double rho0 = 0, sigma0 = 0;
    std::array<double, 2> eta{};

    bool constrained = true;
    double residual = 0;   // max relative residual over both relations
    double condition = 0;  // of the column-scaled design matrix
    int samples = 0;

    /// Named view in a fixed order: alpha0, beta0, mu0, gamma0, gamma1, ...
    std::vector<std::pair<std::string, double>> named() const;
    double get(const std::string& name) const;
};

class DegenerateSamplingError : public SamplingError {
public:
    using SamplingError::SamplingError;
};

struct FitOptions {
    int samples = 400;
    double max_condition = 1e10;
    int max_resamples = 4;
};

Expr compute_C(const SystemDef& s);

/// Least-squares fit of the structure constants from sampled values of
/// {A,C} and {B,C}. With constrained = true the Jacobi relations are built
/// in (19 unknowns); otherwise rho, sigma, eta are fitted freely.
StructureConstants fit_structure_constants(const SystemDef& s, const Expr& C, const Sampler& sampler,
                                           bool constrained = true, const FitOptions& opt = {});

/// The fitted right-hand sides as expressions in A, B, H.
Expr ac_polynomial(const SystemDef& s, const StructureConstants& sc);
Expr bc_polynomial(const SystemDef& s, const StructureConstants& sc);

struct JacobiResult {
    double fitted = 0;    // max relative |{A, P_BC} - {B, P_AC}| with P the fitted polynomials
    double identity = 0;  // max relative |{A,{B,C}} - {B,{A,C}}| with the exact C
};

/// Jacobi check of the fitted algebra. The literal bracket identity holds for
/// any A, B by the Jacobi identity of the Poisson bracket, so the meaningful
/// residual is the one built from the fitted closure polynomials.
JacobiResult verify_jacobi(const SystemDef& s, const Expr& C, const StructureConstants& sc, const Sampler& sampler);

/// K = C^2 - 2 alpha A^2 B - 2 beta A B^2 - 2 gamma A B - delta B^2 - 2 eps B
///     + mu/2 A^4 + 2/3 nu A^3 + xi A^2 + 2 zeta A.
Expr casimir_expr(const SystemDef& s, const StructureConstants& sc, const Expr& C);

struct CasimirFit {
    std::array<double, 5> k{};
    double residual = 0;
    int samples = 0;
};

CasimirFit fit_casimir_polynomial(const SystemDef& s, const Expr& K, const Sampler& sampler);

/// Decision tree: C constant -> Heisenberg; C linear in (A, H) and {B,C}
/// linear -> solvable Lie; cases 2, 3 -> quadratic consequence; case 1 ->
/// u(2) enveloping; otherwise irreducible cubic.
Degeneration classify_degeneration(const SystemDef& s, const StructureConstants& sc, const Expr& C,
                                   const Sampler& sampler);

/// Values printed for each case, as functions of its parameters.
struct PrintedAlgebra {
    std::vector<std::pair<std::string, double>> constants;  // only the ones printed
    std::array<double, 5> casimir{};
    std::vector<std::string> allowlist;  // constants known to be misprinted
    std::vector<std::string> notes;
};
PrintedAlgebra printed_algebra(const SystemDef& s);

struct Discrepancy {
    std::string name;
    double fitted, printed;
    bool allowed;
};

struct AlgebraReport {
    int case_id = 0;
    std::string variant;
    ParamSet params;
    StructureConstants constants;
    StructureConstants unconstrained;
    CasimirFit casimir;
    JacobiResult jacobi;
    double bracket_HA = 0, bracket_HB = 0;
    double casimir_brackets = 0;  // max relative {K,A}, {K,B}, {K,C}
    Degeneration degeneration = Degeneration::irreducible_cubic;
    std::vector<Discrepancy> discrepancies;
    bool passed = false;  // every non-allowlisted printed value reproduced
    std::vector<std::string> notes;
};

/// Runs the whole verification for one system.
AlgebraReport verify_system(const SystemDef& s, std::uint64_t seed = 20240521, double tol = 1e-9);

nlohmann::json to_json(const StructureConstants& sc);
nlohmann::json to_json(const AlgebraReport& r);

/// {h1, b1} = b1 for the Case 8 pair h1 = -B/(2ab), b1 = (H + A)/2 (with a^2,
/// b^2 for the particular system). Returns the max relative residual.
double solvable_pair_residual(const SystemDef& s, const Sampler& sampler);

}  // namespace superint
