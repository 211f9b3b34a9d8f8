#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "superint/rational.hpp"

namespace superint {

/// Canonical phase-space coordinates of a two degree of freedom system.
enum class Var : int { x = 0, y = 1, p1 = 2, p2 = 3 };

inline constexpr Var kPositions[2] = {Var::x, Var::y};
inline constexpr Var kMomenta[2] = {Var::p1, Var::p2};

const char* var_name(Var v);

enum class Kind { rational, real, var, param, sum, product, power, abs, sign };

/// Raised when an expression would violate a construction invariant,
/// e.g. a fractional power of an expression that may be negative.
class ConstructionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class Expr;

namespace detail {
struct Node;
}

/// Immutable symbolic expression over x, y, p1, p2 and named parameters.
///
/// Expressions are kept in a light canonical form: sums and products are
/// flattened, constants folded, like terms and like factors merged, and
/// children sorted by a structural order. Two expressions that reach the same
/// canonical form compare equal; no deeper simplification is attempted.
class Expr {
public:
    Expr();  // the constant 0
    Expr(int value);
    Expr(Rational value);

    static Expr real(double value);
    static Expr variable(Var v);
    static Expr param(std::string name);

    Kind kind() const;
    const Rational& rational_value() const;  // rational constants
    double real_value() const;               // real constants
    Var var() const;                         // variables
    const std::string& name() const;         // parameters
    const Rational& exponent() const;        // powers
    const std::vector<Expr>& args() const;   // sums, products, abs, sign, power base

    bool is_constant() const { return kind() == Kind::rational || kind() == Kind::real; }
    bool is_zero() const;
    bool is_one() const;
    /// Numeric value of a constant node.
    double constant_value() const;

    std::size_t hash() const;
    const detail::Node* id() const { return node_.get(); }

    friend bool operator==(const Expr& a, const Expr& b);
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

private:
    explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const detail::Node> node_;

    friend struct ExprFactory;
};

/// Total structural order used to sort children (-1, 0, +1).
int compare(const Expr& a, const Expr& b);

Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
/// Power with rational exponent. Non-integer exponents are only allowed on
/// |u| or nonnegative constants.
Expr pow(const Expr& base, Rational exponent);
Expr abs(const Expr& e);
Expr sign(const Expr& e);
/// |e|^(1/2), the only square root the catalog needs.
Expr sqrt_abs(const Expr& e);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

inline Expr var(Var v) { return Expr::variable(v); }
inline Expr par(std::string name) { return Expr::param(std::move(name)); }
inline Expr q(std::int64_t n, std::int64_t d = 1) { return Expr(Rational(n, d)); }

/// Exact partial derivative. Uses d|u| = sign(u) du and d sign(u) = 0, valid
/// away from the zero set of u.
Expr partial(const Expr& e, Var v);

/// {f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i).
Expr poisson_bracket(const Expr& f, const Expr& g);

/// Distributes products over sums and expands positive integer powers of sums.
Expr expand(const Expr& e);

bool depends_on(const Expr& e, Var v);
/// True when e has no abs/sign nodes and no negative or fractional powers of
/// anything containing a variable.
bool is_smooth_everywhere(const Expr& e);
/// Parameter names referenced anywhere in e, sorted.
std::vector<std::string> parameters(const Expr& e);
/// Replaces parameters by the given expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& values);
/// Number of distinct nodes in the expression DAG.
std::size_t dag_size(const Expr& e);

/// Coefficients of p1^i p2^j after expansion; keys are (i, j). Throws
/// ConstructionError if a coefficient still depends on momenta (e.g. |p1|).
std::map<std::pair<int, int>, Expr> collect_momenta(const Expr& e);

/// S-expression text form. Grammar:
///   expr   := number | real | symbol | '(' op expr+ ')'
///   number := -?[0-9]+ ('/' [0-9]+)?
///   real   := '#' <C floating literal>          e.g. #1.4142135623730951
///   symbol := x | y | p1 | p2 | <identifier>    identifiers are parameters
///   op     := '+' | '*' | 'abs' | 'sign' | '^'  ('^' takes expr then number)
std::string to_sexpr(const Expr& e);
Expr parse_sexpr(const std::string& text);

/// Human-readable infix form; not parseable.
std::string to_infix(const Expr& e);

}  // namespace superint

template <>
struct std::hash<superint::Expr> {
    std::size_t operator()(const superint::Expr& e) const noexcept { return e.hash(); }
};
