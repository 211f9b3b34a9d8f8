#include "superint/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace superint {

namespace {

constexpr double kMultipleTol = 1e-12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double horner(const std::vector<double>& a, double v) {
    double r = 0;
    for (double c : a) r = r * v + c;
    return r;
}

std::vector<double> derivative(const std::vector<double>& a) {
    std::vector<double> out;
    const std::size_t n = a.size() - 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(a[i] * static_cast<double>(n - i));
    return out;
}

// a few Newton steps, kept only while |f| decreases
double polish(const std::vector<double>& f, double v) {
    if (f.size() < 2) return v;
    const std::vector<double> df = derivative(f);
    double fv = horner(f, v);
    for (int it = 0; it < 8 && fv != 0.0; ++it) {
        const double dv = horner(df, v);
        if (dv == 0.0) break;
        const double w = v - fv / dv;
        const double fw = horner(f, w);
        if (!(std::fabs(fw) < std::fabs(fv))) break;
        v = w;
        fv = fw;
    }
    return v;
}

std::vector<double> case8_coeffs(double b, double d, double x) { return {1.0, -2.0 * b * x, b * b * x * x, -d}; }

}  // namespace

DepressedCubic depressed_cubic(double b, double x, double d) {
    const double t = b * x / 3.0;
    return {-t * t, t * t * t - d / 2.0};
}

int RootSet::count() const {
    int n = 0;
    for (const auto& r : roots) n += r.multiplicity;
    return n;
}

std::vector<double> RootSet::values() const {
    std::vector<double> out;
    for (const auto& r : roots)
        for (int i = 0; i < r.multiplicity; ++i) out.push_back(r.value);
    return out;
}

RootSet cubic_roots(const DepressedCubic& c) {
    const double p = c.p, q = c.q;
    RootSet out;
    out.D = c.discriminant();
    const double scale = q * q + std::fabs(p * p * p);
    const std::vector<double> f = {1.0, 0.0, 3.0 * p, 2.0 * q};
    if (std::fabs(out.D) <= kMultipleTol * scale) {
        const double u = std::cbrt(-q);
        if (u == 0.0) {
            out.roots = {{0.0, 3}};
        } else {
            out.roots = {{polish(f, 2.0 * u), 1}, {-u, 2}};
        }
    } else if (out.D > 0) {
        // larger-magnitude radical first to avoid cancellation; u v = -p
        const double s = std::sqrt(out.D);
        const double t = std::cbrt(-q - std::copysign(s, q));
        out.roots = {{polish(f, t - p / t), 1}};
    } else {
        const double r = std::sqrt(-p);
        const double theta = std::acos(std::clamp(-q / (r * r * r), -1.0, 1.0));
        for (int k = 0; k < 3; ++k)
            out.roots.push_back({polish(f, 2.0 * r * std::cos((theta - 2.0 * std::numbers::pi * k) / 3.0)), 1});
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) { return a.value < b.value; });
    return out;
}

double case8_residual(double b, double d, double x, double V) {
    const std::vector<double> a = case8_coeffs(b, d, x);
    return polynomial_residual(a, V);
}

double case8_potential(double b, double d, double x, int branch) {
    if (branch < 1 || branch > 3) throw ConfigurationError("case 8 branch must be 1, 2 or 3");
    const DepressedCubic c = depressed_cubic(b, x, d);
    const double s = 2.0 * b * x / 3.0;
    const double D = c.discriminant();
    const double scale = c.q * c.q + std::fabs(c.p * c.p * c.p);
    const std::vector<double> f = case8_coeffs(b, d, x);
    double y;
    if (std::fabs(D) <= kMultipleTol * scale) {
        const double u = std::cbrt(-c.q);
        y = branch == 1 ? 2.0 * u : -u;
        return branch == 1 ? polish(f, y + s) : y + s;
    }
    if (D > 0) {
        if (branch != 1)
            throw BranchDomainError("case 8 branch " + std::to_string(branch) + " is complex at x = " +
                                    std::to_string(x));
        const double sq = std::sqrt(D);
        const double t = std::cbrt(-c.q - std::copysign(sq, c.q));
        y = t - c.p / t;
    } else {
        const double r = std::sqrt(-c.p);
        const double theta = std::acos(std::clamp(-c.q / (r * r * r), -1.0, 1.0));
        const double shift = branch == 1 ? 0.0 : branch == 2 ? 2.0 * std::numbers::pi : -2.0 * std::numbers::pi;
        y = 2.0 * r * std::cos((theta + shift) / 3.0);
    }
    return polish(f, y + s);
}

std::complex<double> case8_radical(double b, double d, double x, int branch, bool printed) {
    using C = std::complex<double>;
    if (branch < 1 || branch > 3) throw ConfigurationError("case 8 branch must be 1, 2 or 3");
    const double s = 2.0 * b * x / 3.0;
    const double b3x3 = b * b * b * x * x * x;
    const double disc = 27.0 * d * d - 4.0 * b3x3 * d;
    // either square root gives the same sum u + v; take the one that adds to 27d - 2b^3x^3
    C root = std::sqrt(C(disc, 0.0));
    if (disc >= 0.0 && 27.0 * d - 2.0 * b3x3 < 0.0) root = -root;
    const C Rnum = 27.0 * d - 2.0 * b3x3 + 3.0 * std::sqrt(3.0) * root;
    const C Rden = (printed ? 2.0 + d : 27.0 * d) - 2.0 * b3x3 + 3.0 * std::sqrt(3.0) * root;
    auto cube_root = [&](C z) {
        if (disc >= 0.0) return C(std::cbrt(z.real()), 0.0);
        return std::pow(z, 1.0 / 3.0);
    };
    const C cn = cube_root(Rnum), cd = cube_root(Rden);
    if (std::abs(cn) == 0.0 || std::abs(cd) == 0.0) return C(s, 0.0);
    const double c2 = std::cbrt(2.0);
    const C u = cn / (3.0 * c2);
    const C v = c2 * b * b * x * x / (3.0 * cd);
    const C w(-0.5, std::sqrt(3.0) / 2.0);
    // the typeset factors are -w and -conj(w)
    const C fu = printed ? -w : w;
    const C fv = std::conj(fu);
    switch (branch) {
        case 1: return s + u + v;
        case 2: return s + fu * u + fv * v;
        default: return s + std::conj(fu) * u + std::conj(fv) * v;
    }
}

BranchTrack track_case8_branches(double b, double d, const std::vector<double>& xs) {
    BranchTrack t;
    std::array<double, 3> prev{kNaN, kNaN, kNaN};
    std::size_t prev_count = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const RootSet rs = cubic_roots(depressed_cubic(b, x, d));
        std::vector<double> vals = rs.values();
        for (double& v : vals) v = polish(case8_coeffs(b, d, x), v + 2.0 * b * x / 3.0);
        std::sort(vals.begin(), vals.end());
        while (vals.size() < 3) vals.push_back(kNaN);

        std::array<double, 3> cur{};
        if (i == 0) {
            std::copy(vals.begin(), vals.end(), cur.begin());
        } else {
            // best permutation of the new roots onto the old labels
            std::array<int, 3> perm{0, 1, 2}, best = perm;
            // lexicographic: first keep live labels alive, then minimise the moves
            std::pair<int, double> best_cost{4, 0.0};
            do {
                std::pair<int, double> cost{0, 0.0};
                for (int k = 0; k < 3; ++k) {
                    const double a = prev[k], v = vals[perm[k]];
                    if (std::isnan(a)) continue;
                    if (std::isnan(v)) ++cost.first;
                    else cost.second += std::fabs(a - v);
                }
                if (cost < best_cost) {
                    best_cost = cost;
                    best = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            for (int k = 0; k < 3; ++k) cur[k] = vals[best[k]];
        }
        const std::size_t count = rs.roots.size() == 1 && rs.roots[0].multiplicity == 1 ? 1 : 3;
        if (i > 0 && count != prev_count) t.crossings.push_back(i);
        prev_count = count;
        t.x.push_back(x);
        t.D.push_back(rs.D);
        t.V.push_back(cur);
        prev = cur;
    }
    return t;
}

std::array<double, 5> case6_quartic(double omega2, double c, double d, double x, bool printed) {
    const double w = omega2, x2 = x * x, x4 = x2 * x2;
    if (printed)
        return {-9.0, 14.0 * w * x2, 6.0 * d - 0.75 * w * w * x4, 1.5 * w * w * w * x4 * x2 - 2.0 * w * x2,
                c * x2 - d - 0.5 * d * w * w * x4 - w * w * w * w * x4 * x4 / 16.0};
    return {-9.0, 14.0 * w * x2, 6.0 * d - 7.5 * w * w * x4, 1.5 * w * w * w * x4 * x2 - 2.0 * d * w * x2,
            c * x2 - d * d - 0.5 * d * w * w * x4 - w * w * w * w * x4 * x4 / 16.0};
}

std::pair<double, double> case6_special_cd(double omega2, double b) {
    const double w2 = omega2 * omega2;
    return {8.0 * w2 * w2 * b * b * b / 729.0, w2 * b * b / 27.0};
}

Case6ClosedForms case6_closed_forms(double omega2, double b, double x) {
    if (b + x * x < 0.0) throw DomainError("b + x^2 < 0: closed forms are complex");
    const double r = 4.0 * x * std::sqrt(b + x * x);
    const double base = 2.0 * b + 5.0 * x * x;
    return {omega2 / 18.0 * (base + r), omega2 / 18.0 * (base - r), omega2 * x * x / 2.0 - omega2 * b / 9.0,
            omega2 * x * x / 2.0 - omega2 * b / 27.0};
}

double polynomial_residual(const std::vector<double>& a, double v) {
    double mag = 0, pw = 1;
    for (auto it = a.rbegin(); it != a.rend(); ++it) {
        mag += std::fabs(*it) * pw;
        pw *= std::fabs(v);
    }
    const double r = std::fabs(horner(a, v));
    return mag == 0.0 ? r : r / mag;
}

std::vector<Root> real_polynomial_roots(const std::vector<double>& coeffs) {
    std::vector<double> a = coeffs;
    while (!a.empty() && a.front() == 0.0) a.erase(a.begin());
    if (a.size() <= 1) return {};
    int zeros = 0;
    while (a.size() > 1 && a.back() == 0.0) {
        a.pop_back();
        ++zeros;
    }
    std::vector<double> cand;
    const int n = static_cast<int>(a.size()) - 1;
    if (n > 0) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j) M(0, j) = -a[j + 1] / a[0];
        for (int i = 1; i < n; ++i) M(i, i - 1) = 1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
        for (int i = 0; i < n; ++i) {
            const auto lam = es.eigenvalues()[i];
            if (std::fabs(lam.imag()) <= 1e-6 * std::max(1.0, std::abs(lam))) cand.push_back(lam.real());
        }
    }
    std::sort(cand.begin(), cand.end());
    std::vector<Root> out;
    for (double v : cand) {
        if (!out.empty() && std::fabs(v - out.back().value) <= 1e-6 * std::max(1.0, std::fabs(v)))
            ++out.back().multiplicity;
        else
            out.push_back({v, 1});
    }
    for (auto& r : out) {
        // a root of multiplicity m is a simple root of the (m-1)th derivative
        std::vector<double> f = a;
        for (int k = 1; k < r.multiplicity; ++k) f = derivative(f);
        r.value = polish(f, r.value);
    }
    if (zeros > 0) {
        auto it = std::find_if(out.begin(), out.end(), [](const Root& r) { return r.value == 0.0; });
        if (it != out.end()) it->multiplicity += zeros;
        else out.push_back({0.0, zeros});
    }
    std::sort(out.begin(), out.end(), [](const Root& l, const Root& r) { return l.value < r.value; });
    return out;
}

std::vector<Root> case6_quartic_roots(double omega2, double c, double d, double x) {
    const auto q = case6_quartic(omega2, c, d, x);
    return real_polynomial_roots({q.begin(), q.end()});
}

std::vector<Root> case6_quartic_roots_special(double omega2, double b, double x) {
    const auto [c, d] = case6_special_cd(omega2, b);
    return case6_quartic_roots(omega2, c, d, x);
}

}  // namespace superint
