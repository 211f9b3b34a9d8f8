#include "superint/expr.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace superint {

namespace detail {

struct Node {
    Kind kind = Kind::rational;
    Rational q;  // rational value, or exponent of a power
    double real = 0.0;
    Var var = Var::x;
    std::string name;
    std::vector<Expr> args;
    std::size_t hash = 0;
    unsigned varmask = 0;  // bit i set when Var(i) occurs below this node
};

}  // namespace detail

using detail::Node;

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

int kind_rank(Kind k) {
    switch (k) {
        case Kind::rational: return 0;
        case Kind::real: return 1;
        case Kind::var: return 2;
        case Kind::param: return 3;
        case Kind::power: return 4;
        case Kind::abs: return 5;
        case Kind::sign: return 6;
        case Kind::product: return 7;
        case Kind::sum: return 8;
    }
    return 9;
}

}  // namespace

struct ExprFactory {
    static Expr make(Node n) {
        std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
        switch (n.kind) {
            case Kind::rational: h = mix(h, n.q.hash()); break;
            case Kind::real: h = mix(h, std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(n.real))); break;
            case Kind::var:
                h = mix(h, static_cast<std::size_t>(n.var));
                n.varmask = 1u << static_cast<int>(n.var);
                break;
            case Kind::param: h = mix(h, std::hash<std::string>{}(n.name)); break;
            case Kind::power: h = mix(h, n.q.hash()); [[fallthrough]];
            default:
                for (const auto& a : n.args) {
                    h = mix(h, a.hash());
                    n.varmask |= a.node_->varmask;
                }
        }
        n.hash = h;
        return Expr(std::make_shared<const Node>(std::move(n)));
    }
    static const Node& node(const Expr& e) { return *e.node_; }
};

namespace {

const Node& N(const Expr& e) { return ExprFactory::node(e); }

Expr make_rational(Rational r) {
    Node n;
    n.kind = Kind::rational;
    n.q = r;
    return ExprFactory::make(std::move(n));
}

Expr make_raw(Kind k, std::vector<Expr> args, Rational exponent = Rational(1)) {
    Node n;
    n.kind = k;
    n.args = std::move(args);
    n.q = exponent;
    return ExprFactory::make(std::move(n));
}

const Expr& zero_expr() {
    static const Expr z = make_rational(Rational(0));
    return z;
}

const Expr& one_expr() {
    static const Expr o = make_rational(Rational(1));
    return o;
}

// Numeric coefficient that stays exact until a real constant joins in.
struct Coef {
    Rational r{1};
    double d = 1.0;
    bool is_real = false;

    static Coef from(const Expr& c) {
        Coef out;
        if (c.kind() == Kind::rational) {
            out.r = c.rational_value();
        } else {
            out.is_real = true;
            out.d = c.real_value();
        }
        return out;
    }
    static Coef zero() {
        Coef c;
        c.r = Rational(0);
        return c;
    }
    double value() const { return is_real ? d : r.to_double(); }
    bool is_zero() const { return is_real ? d == 0.0 : r.is_zero(); }
    bool is_one() const { return is_real ? d == 1.0 : r.is_one(); }
    void add(const Coef& o) {
        if (is_real || o.is_real) {
            d = value() + o.value();
            is_real = true;
        } else {
            r += o.r;
        }
    }
    void mul(const Coef& o) {
        if (is_real || o.is_real) {
            d = value() * o.value();
            is_real = true;
        } else {
            r *= o.r;
        }
    }
    Expr to_expr() const { return is_real ? Expr::real(d) : Expr(r); }
};

struct ExprHash {
    std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// Splits a term into numeric coefficient and the remaining canonical factor.
std::pair<Coef, Expr> split_coefficient(const Expr& t) {
    if (t.kind() == Kind::product && t.args().front().is_constant()) {
        const auto& a = t.args();
        Coef c = Coef::from(a.front());
        if (a.size() == 2) return {c, a[1]};
        return {c, make_raw(Kind::product, std::vector<Expr>(a.begin() + 1, a.end()))};
    }
    return {Coef{}, t};
}

bool nonnegative(const Expr& e) {
    switch (e.kind()) {
        case Kind::rational:
        case Kind::real: return e.constant_value() >= 0.0;
        case Kind::abs: return true;
        case Kind::power: return e.args()[0].kind() == Kind::abs || (e.exponent().is_integer() && e.exponent().num() % 2 == 0);
        case Kind::product:
            return std::all_of(e.args().begin(), e.args().end(), [](const Expr& f) { return nonnegative(f); });
        default: return false;
    }
}

}  // namespace

const char* var_name(Var v) {
    switch (v) {
        case Var::x: return "x";
        case Var::y: return "y";
        case Var::p1: return "p1";
        case Var::p2: return "p2";
    }
    return "?";
}

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(int value) : Expr(make_rational(Rational(value))) {}
Expr::Expr(Rational value) : Expr(make_rational(value)) {}

Expr Expr::real(double value) {
    if (!std::isfinite(value)) throw ConstructionError("non-finite real constant");
    Node n;
    n.kind = Kind::real;
    n.real = value == 0.0 ? 0.0 : value;  // fold -0.0
    return ExprFactory::make(std::move(n));
}

Expr Expr::variable(Var v) {
    Node n;
    n.kind = Kind::var;
    n.var = v;
    return ExprFactory::make(std::move(n));
}

Expr Expr::param(std::string name) {
    if (name.empty()) throw ConstructionError("empty parameter name");
    Node n;
    n.kind = Kind::param;
    n.name = std::move(name);
    return ExprFactory::make(std::move(n));
}

Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::rational_value() const { return node_->q; }
double Expr::real_value() const { return node_->real; }
Var Expr::var() const { return node_->var; }
const std::string& Expr::name() const { return node_->name; }
const Rational& Expr::exponent() const { return node_->q; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
std::size_t Expr::hash() const { return node_->hash; }

bool Expr::is_zero() const {
    return (kind() == Kind::rational && node_->q.is_zero()) || (kind() == Kind::real && node_->real == 0.0);
}

bool Expr::is_one() const {
    return (kind() == Kind::rational && node_->q.is_one()) || (kind() == Kind::real && node_->real == 1.0);
}

double Expr::constant_value() const {
    if (kind() == Kind::rational) return node_->q.to_double();
    if (kind() == Kind::real) return node_->real;
    throw std::logic_error("constant_value on non-constant expression");
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const Node& x = *a.node_;
    const Node& y = *b.node_;
    if (x.hash != y.hash || x.kind != y.kind) return false;
    switch (x.kind) {
        case Kind::rational: return x.q == y.q;
        case Kind::real: return x.real == y.real;
        case Kind::var: return x.var == y.var;
        case Kind::param: return x.name == y.name;
        case Kind::power:
            if (!(x.q == y.q)) return false;
            [[fallthrough]];
        default:
            if (x.args.size() != y.args.size()) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
                if (!(x.args[i] == y.args[i])) return false;
            return true;
    }
}

int compare(const Expr& a, const Expr& b) {
    if (a.id() == b.id()) return 0;
    const int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    auto cmp = [](auto u, auto v) { return u < v ? -1 : (v < u ? 1 : 0); };
    switch (a.kind()) {
        case Kind::rational: return cmp(a.rational_value(), b.rational_value());
        case Kind::real: return cmp(a.real_value(), b.real_value());
        case Kind::var: return cmp(static_cast<int>(a.var()), static_cast<int>(b.var()));
        case Kind::param: return cmp(a.name(), b.name());
        case Kind::power: {
            if (int c = compare(a.args()[0], b.args()[0]); c != 0) return c;
            return cmp(a.exponent(), b.exponent());
        }
        default: {
            const auto& x = a.args();
            const auto& y = b.args();
            if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (int c = compare(x[i], y[i]); c != 0) return c;
            return 0;
        }
    }
}

Expr sum(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    for (auto& t : terms) {
        if (t.kind() == Kind::sum) {
            flat.insert(flat.end(), t.args().begin(), t.args().end());
        } else {
            flat.push_back(std::move(t));
        }
    }

    Coef constant = Coef::zero();
    std::vector<std::pair<Expr, Coef>> groups;
    std::unordered_map<Expr, std::size_t, ExprHash> index;
    for (const auto& t : flat) {
        if (t.is_constant()) {
            constant.add(Coef::from(t));
            continue;
        }
        auto [c, rest] = split_coefficient(t);
        auto it = index.find(rest);
        if (it == index.end()) {
            index.emplace(rest, groups.size());
            groups.emplace_back(rest, c);
        } else {
            groups[it->second].second.add(c);
        }
    }

    std::vector<Expr> out;
    for (const auto& [rest, c] : groups) {
        if (c.is_zero()) continue;
        out.push_back(c.is_one() ? rest : product({c.to_expr(), rest}));
    }
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    if (!constant.is_zero()) out.insert(out.begin(), constant.to_expr());
    if (out.empty()) return zero_expr();
    if (out.size() == 1) return out.front();
    return make_raw(Kind::sum, std::move(out));
}

Expr product(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    flat.reserve(factors.size());
    for (auto& f : factors) {
        if (f.kind() == Kind::product) {
            flat.insert(flat.end(), f.args().begin(), f.args().end());
        } else {
            flat.push_back(std::move(f));
        }
    }

    Coef coef;
    std::vector<std::pair<Expr, Rational>> groups;
    std::unordered_map<Expr, std::size_t, ExprHash> index;
    auto add_group = [&](const Expr& base, Rational e) {
        auto it = index.find(base);
        if (it == index.end()) {
            index.emplace(base, groups.size());
            groups.emplace_back(base, e);
        } else {
            groups[it->second].second += e;
        }
    };
    for (const auto& f : flat) {
        if (f.is_constant()) {
            coef.mul(Coef::from(f));
            if (coef.is_zero()) return zero_expr();
            continue;
        }
        if (f.kind() == Kind::power) {
            add_group(f.args()[0], f.exponent());
        } else {
            add_group(f, Rational(1));
        }
    }

    // |u|^(2n) -> u^(2n), then merge again with any plain powers of u.
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [base, e] : groups) {
            if (base.kind() == Kind::abs && e.is_integer() && e.num() % 2 == 0 && !e.is_zero()) {
                Expr inner = base.args()[0];
                Rational ex = e;
                e = Rational(0);
                index.erase(base);
                base = zero_expr();
                add_group(inner, ex);
                changed = true;
                break;
            }
        }
    }

    std::vector<Expr> out;
    for (const auto& [base, e] : groups) {
        if (e.is_zero()) continue;
        if (base.kind() == Kind::sign) {
            if (!e.is_integer()) throw ConstructionError("fractional power of sign()");
            if (e.num() % 2 != 0) out.push_back(base);
            continue;
        }
        out.push_back(e.is_one() ? base : make_raw(Kind::power, {base}, e));
    }
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    if (out.empty()) return coef.to_expr();
    if (!coef.is_one()) out.insert(out.begin(), coef.to_expr());
    if (out.size() == 1) return out.front();
    return make_raw(Kind::product, std::move(out));
}

Expr pow(const Expr& base, Rational r) {
    if (r.is_zero()) return one_expr();
    if (r.is_one()) return base;
    const bool integer = r.is_integer();
    switch (base.kind()) {
        case Kind::rational: {
            const Rational c = base.rational_value();
            if (integer) {
                if (c.is_zero() && r.num() < 0) throw ConstructionError("0 raised to a negative power");
                return Expr(c.pow(r.num()));
            }
            if (c.num() < 0) throw ConstructionError("fractional power of a negative constant");
            return Expr::real(std::pow(c.to_double(), r.to_double()));
        }
        case Kind::real: {
            const double c = base.real_value();
            if (!integer && c < 0) throw ConstructionError("fractional power of a negative constant");
            if (c == 0.0 && r.num() < 0) throw ConstructionError("0 raised to a negative power");
            return Expr::real(std::pow(c, r.to_double()));
        }
        case Kind::power: {
            const Expr& b = base.args()[0];
            if (!integer && b.kind() != Kind::abs)
                throw ConstructionError("fractional power of a possibly negative expression");
            return pow(b, base.exponent() * r);
        }
        case Kind::product: {
            if (!integer && !nonnegative(base))
                throw ConstructionError("fractional power of a possibly negative expression");
            std::vector<Expr> fs;
            for (const auto& f : base.args()) fs.push_back(pow(f, r));
            return product(std::move(fs));
        }
        case Kind::abs:
            if (integer && r.num() % 2 == 0) return pow(base.args()[0], r);
            return make_raw(Kind::power, {base}, r);
        case Kind::sign:
            if (!integer) throw ConstructionError("fractional power of sign()");
            return r.num() % 2 == 0 ? one_expr() : base;
        default:
            if (!integer) throw ConstructionError("fractional power of a possibly negative expression");
            return make_raw(Kind::power, {base}, r);
    }
}

Expr abs(const Expr& e) {
    switch (e.kind()) {
        case Kind::rational: return Expr(e.rational_value().num() < 0 ? -e.rational_value() : e.rational_value());
        case Kind::real: return Expr::real(std::fabs(e.real_value()));
        case Kind::abs: return e;
        case Kind::sign: return one_expr();
        case Kind::power:
            if (nonnegative(e)) return e;
            if (e.exponent().is_integer()) return pow(abs(e.args()[0]), e.exponent());
            return make_raw(Kind::abs, {e});
        case Kind::product: {
            std::vector<Expr> fs;
            for (const auto& f : e.args()) fs.push_back(abs(f));
            return product(std::move(fs));
        }
        default: return make_raw(Kind::abs, {e});
    }
}

Expr sign(const Expr& e) {
    switch (e.kind()) {
        case Kind::rational:
        case Kind::real: {
            const double v = e.constant_value();
            return Expr(v > 0 ? 1 : (v < 0 ? -1 : 0));
        }
        case Kind::abs: return one_expr();
        case Kind::sign: return e;
        case Kind::power:
            if (nonnegative(e)) return one_expr();
            return sign(e.args()[0]);  // odd integer power
        case Kind::product: {
            std::vector<Expr> fs;
            for (const auto& f : e.args()) fs.push_back(sign(f));
            return product(std::move(fs));
        }
        default: return make_raw(Kind::sign, {e});
    }
}

Expr sqrt_abs(const Expr& e) { return pow(abs(e), Rational(1, 2)); }

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return sum({a, product({Expr(-1), b})}); }
Expr operator-(const Expr& a) { return product({Expr(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return product({a, pow(b, Rational(-1))}); }
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

bool depends_on(const Expr& e, Var v) { return (N(e).varmask >> static_cast<int>(v)) & 1u; }

namespace {

Expr partial_memo(const Expr& e, Var v, std::unordered_map<const Node*, Expr>& memo) {
    if (!depends_on(e, v)) return zero_expr();
    if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
    Expr out;
    switch (e.kind()) {
        case Kind::var: out = one_expr(); break;
        case Kind::sum: {
            std::vector<Expr> ts;
            for (const auto& a : e.args()) ts.push_back(partial_memo(a, v, memo));
            out = sum(std::move(ts));
            break;
        }
        case Kind::product: {
            const auto& fs = e.args();
            std::vector<Expr> ts;
            for (std::size_t i = 0; i < fs.size(); ++i) {
                Expr d = partial_memo(fs[i], v, memo);
                if (d.is_zero()) continue;
                std::vector<Expr> p(fs);
                p[i] = d;
                ts.push_back(product(std::move(p)));
            }
            out = sum(std::move(ts));
            break;
        }
        case Kind::power: {
            const Expr& b = e.args()[0];
            const Rational r = e.exponent();
            out = product({Expr(r), pow(b, r - Rational(1)), partial_memo(b, v, memo)});
            break;
        }
        case Kind::abs: {
            const Expr& u = e.args()[0];
            out = product({sign(u), partial_memo(u, v, memo)});
            break;
        }
        default: out = zero_expr();  // sign, constants, params
    }
    memo.emplace(e.id(), out);
    return out;
}

}  // namespace

Expr partial(const Expr& e, Var v) {
    std::unordered_map<const Node*, Expr> memo;
    return partial_memo(e, v, memo);
}

Expr poisson_bracket(const Expr& f, const Expr& g) {
    std::vector<Expr> terms;
    for (int i = 0; i < 2; ++i) {
        const Var qv = kPositions[i], pv = kMomenta[i];
        terms.push_back(partial(f, qv) * partial(g, pv));
        terms.push_back(-(partial(f, pv) * partial(g, qv)));
    }
    return sum(std::move(terms));
}

namespace {

// Product of two already expanded expressions, distributed term by term.
Expr mul_expanded(const Expr& a, const Expr& b) {
    const std::vector<Expr> ta = a.kind() == Kind::sum ? a.args() : std::vector<Expr>{a};
    const std::vector<Expr> tb = b.kind() == Kind::sum ? b.args() : std::vector<Expr>{b};
    std::vector<Expr> out;
    out.reserve(ta.size() * tb.size());
    for (const auto& t : ta)
        for (const auto& u : tb) out.push_back(t * u);
    return sum(std::move(out));
}

Expr expand_memo(const Expr& e, std::unordered_map<Expr, Expr, ExprHash>& memo) {
    if (auto it = memo.find(e); it != memo.end()) return it->second;
    Expr out = e;
    switch (e.kind()) {
        case Kind::sum: {
            std::vector<Expr> ts;
            for (const auto& a : e.args()) ts.push_back(expand_memo(a, memo));
            out = sum(std::move(ts));
            break;
        }
        case Kind::product: {
            Expr acc = one_expr();
            for (const auto& f : e.args()) acc = mul_expanded(acc, expand_memo(f, memo));
            out = acc;
            break;
        }
        case Kind::power: {
            Expr b = expand_memo(e.args()[0], memo);
            const Rational r = e.exponent();
            if (b.kind() == Kind::sum && r.is_integer() && r.num() > 1) {
                Expr acc = b;
                for (std::int64_t i = 1; i < r.num(); ++i) acc = mul_expanded(acc, b);
                out = acc;
            } else {
                out = pow(b, r);
            }
            break;
        }
        case Kind::abs: out = abs(expand_memo(e.args()[0], memo)); break;
        case Kind::sign: out = sign(expand_memo(e.args()[0], memo)); break;
        default: break;
    }
    memo.emplace(e, out);
    return out;
}

}  // namespace

Expr expand(const Expr& e) {
    std::unordered_map<Expr, Expr, ExprHash> memo;
    return expand_memo(e, memo);
}

bool is_smooth_everywhere(const Expr& e) {
    if (N(e).varmask == 0) return true;
    switch (e.kind()) {
        case Kind::abs:
        case Kind::sign: return false;
        case Kind::power: {
            const Rational r = e.exponent();
            if (!r.is_integer() || r.num() < 0) return false;
            return is_smooth_everywhere(e.args()[0]);
        }
        default:
            return std::all_of(e.args().begin(), e.args().end(), [](const Expr& a) { return is_smooth_everywhere(a); });
    }
}

std::vector<std::string> parameters(const Expr& e) {
    std::set<std::string> names;
    std::unordered_set<const Node*> seen;
    std::function<void(const Expr&)> walk = [&](const Expr& u) {
        if (!seen.insert(u.id()).second) return;
        if (u.kind() == Kind::param) names.insert(u.name());
        for (const auto& a : u.args()) walk(a);
    };
    walk(e);
    return {names.begin(), names.end()};
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& values) {
    std::unordered_map<const Node*, Expr> memo;
    std::function<Expr(const Expr&)> go = [&](const Expr& u) -> Expr {
        if (auto it = memo.find(u.id()); it != memo.end()) return it->second;
        Expr out = u;
        switch (u.kind()) {
            case Kind::param:
                if (auto it = values.find(u.name()); it != values.end()) out = it->second;
                break;
            case Kind::sum:
            case Kind::product: {
                std::vector<Expr> as;
                for (const auto& a : u.args()) as.push_back(go(a));
                out = u.kind() == Kind::sum ? sum(std::move(as)) : product(std::move(as));
                break;
            }
            case Kind::power: out = pow(go(u.args()[0]), u.exponent()); break;
            case Kind::abs: out = abs(go(u.args()[0])); break;
            case Kind::sign: out = sign(go(u.args()[0])); break;
            default: break;
        }
        memo.emplace(u.id(), out);
        return out;
    };
    return go(e);
}

std::size_t dag_size(const Expr& e) {
    std::unordered_set<const Node*> seen;
    std::function<void(const Expr&)> walk = [&](const Expr& u) {
        if (!seen.insert(u.id()).second) return;
        for (const auto& a : u.args()) walk(a);
    };
    walk(e);
    return seen.size();
}

std::map<std::pair<int, int>, Expr> collect_momenta(const Expr& e) {
    const Expr ex = expand(e);
    std::vector<Expr> terms = ex.kind() == Kind::sum ? ex.args() : std::vector<Expr>{ex};
    std::map<std::pair<int, int>, std::vector<Expr>> parts;
    for (const auto& t : terms) {
        std::vector<Expr> factors = t.kind() == Kind::product ? t.args() : std::vector<Expr>{t};
        int i = 0, j = 0;
        std::vector<Expr> rest;
        for (const auto& f : factors) {
            const Expr* base = &f;
            std::int64_t n = 1;
            if (f.kind() == Kind::power && f.exponent().is_integer() && f.exponent().num() > 0) {
                base = &f.args()[0];
                n = f.exponent().num();
            }
            if (base->kind() == Kind::var && base->var() == Var::p1) {
                i += static_cast<int>(n);
            } else if (base->kind() == Kind::var && base->var() == Var::p2) {
                j += static_cast<int>(n);
            } else if (depends_on(f, Var::p1) || depends_on(f, Var::p2)) {
                throw ConstructionError("expression is not polynomial in the momenta: " + to_infix(f));
            } else {
                rest.push_back(f);
            }
        }
        parts[{i, j}].push_back(product(std::move(rest)));
    }
    std::map<std::pair<int, int>, Expr> out;
    for (auto& [key, ts] : parts) {
        Expr s = sum(std::move(ts));
        if (!s.is_zero()) out.emplace(key, s);
    }
    return out;
}

namespace {

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_sexpr(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case Kind::rational: out += e.rational_value().to_string(); return;
        case Kind::real: out += "#" + format_real(e.real_value()); return;
        case Kind::var: out += var_name(e.var()); return;
        case Kind::param: out += e.name(); return;
        case Kind::power:
            out += "(^ ";
            write_sexpr(e.args()[0], out);
            out += " " + e.exponent().to_string() + ")";
            return;
        default: break;
    }
    out += e.kind() == Kind::sum ? "(+" : e.kind() == Kind::product ? "(*" : e.kind() == Kind::abs ? "(abs" : "(sign";
    for (const auto& a : e.args()) {
        out += ' ';
        write_sexpr(a, out);
    }
    out += ')';
}

class SexprParser {
public:
    explicit SexprParser(const std::string& s) : s_(s) {}

    Expr parse_all() {
        Expr e = parse();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConstructionError("sexpr parse error at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string atom() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
               s_[pos_] != ')')
            ++pos_;
        if (start == pos_) fail("expected atom");
        return s_.substr(start, pos_ - start);
    }

    static bool is_number(const std::string& a) {
        std::size_t i = (a[0] == '-') ? 1 : 0;
        if (i >= a.size()) return false;
        bool slash = false;
        for (; i < a.size(); ++i) {
            if (a[i] == '/' && !slash && i + 1 < a.size()) {
                slash = true;
                continue;
            }
            if (!std::isdigit(static_cast<unsigned char>(a[i]))) return false;
        }
        return true;
    }

    static Rational to_rational(const std::string& a) {
        const auto slash = a.find('/');
        if (slash == std::string::npos) return Rational(std::stoll(a));
        return Rational(std::stoll(a.substr(0, slash)), std::stoll(a.substr(slash + 1)));
    }

    Expr parse() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (s_[pos_] != '(') {
            const std::string a = atom();
            if (a[0] == '#') {
                double v = 0;
                auto res = std::from_chars(a.data() + 1, a.data() + a.size(), v);
                if (res.ec != std::errc() || res.ptr != a.data() + a.size()) fail("bad real literal " + a);
                return Expr::real(v);
            }
            if (is_number(a)) return Expr(to_rational(a));
            for (Var v : {Var::x, Var::y, Var::p1, Var::p2})
                if (a == var_name(v)) return Expr::variable(v);
            if (!(std::isalpha(static_cast<unsigned char>(a[0])) || a[0] == '_')) fail("bad symbol " + a);
            return Expr::param(a);
        }
        ++pos_;
        const std::string op = atom();
        std::vector<Expr> args;
        if (op == "^") {
            Expr base = parse();
            const std::string ex = atom();
            if (!is_number(ex)) fail("exponent must be a rational literal");
            expect_close();
            return pow(base, to_rational(ex));
        }
        while (true) {
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated list");
            if (s_[pos_] == ')') break;
            args.push_back(parse());
        }
        expect_close();
        if (op == "+") return sum(std::move(args));
        if (op == "*") return product(std::move(args));
        if (op == "abs" && args.size() == 1) return abs(args[0]);
        if (op == "sign" && args.size() == 1) return sign(args[0]);
        fail("unknown operator " + op);
    }

    void expect_close() {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
        ++pos_;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

void write_infix(const Expr& e, std::string& out, int parent_prec);

void write_factor_list(const std::vector<Expr>& fs, std::string& out) {
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (i) out += '*';
        write_infix(fs[i], out, 2);
    }
}

// precedence: 1 = sum, 2 = product, 3 = power
void write_infix(const Expr& e, std::string& out, int parent_prec) {
    switch (e.kind()) {
        case Kind::rational: {
            const std::string s = e.rational_value().to_string();
            const bool wrap = parent_prec >= 2 && (!e.rational_value().is_integer() || e.rational_value().num() < 0);
            out += wrap ? "(" + s + ")" : s;
            return;
        }
        case Kind::real: {
            const std::string s = format_real(e.real_value());
            out += (parent_prec >= 2 && e.real_value() < 0) ? "(" + s + ")" : s;
            return;
        }
        case Kind::var: out += var_name(e.var()); return;
        case Kind::param: out += e.name(); return;
        case Kind::abs:
            out += '|';
            write_infix(e.args()[0], out, 0);
            out += '|';
            return;
        case Kind::sign:
            out += "sign(";
            write_infix(e.args()[0], out, 0);
            out += ')';
            return;
        case Kind::power: {
            write_infix(e.args()[0], out, 3);
            const Rational r = e.exponent();
            out += '^';
            out += r.is_integer() && r.num() > 0 ? r.to_string() : "(" + r.to_string() + ")";
            return;
        }
        case Kind::product: {
            if (parent_prec > 2) out += '(';
            const auto& fs = e.args();
            if (fs.front().is_constant() && fs.front().constant_value() == -1.0) {
                out += '-';
                write_factor_list(std::vector<Expr>(fs.begin() + 1, fs.end()), out);
            } else {
                write_factor_list(fs, out);
            }
            if (parent_prec > 2) out += ')';
            return;
        }
        case Kind::sum: {
            if (parent_prec >= 2) out += '(';
            bool first = true;
            for (const auto& t : e.args()) {
                std::string piece;
                write_infix(t, piece, 1);
                if (!first) {
                    if (piece.front() == '-') {
                        out += " - ";
                        piece.erase(0, 1);
                    } else {
                        out += " + ";
                    }
                }
                out += piece;
                first = false;
            }
            if (parent_prec >= 2) out += ')';
            return;
        }
    }
}

}  // namespace

std::string to_sexpr(const Expr& e) {
    std::string out;
    write_sexpr(e, out);
    return out;
}

Expr parse_sexpr(const std::string& text) { return SexprParser(text).parse_all(); }

std::string to_infix(const Expr& e) {
    std::string out;
    write_infix(e, out, 0);
    return out;
}

}  // namespace superint
