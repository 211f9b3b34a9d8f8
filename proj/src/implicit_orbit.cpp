#include "superint/implicit_orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace superint {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

PhasePoint xy(double x, double y) {
    PhasePoint pt;
    pt << x, y, 0.0, 0.0;
    return pt;
}

}  // namespace

MomentumCoefficients momentum_coefficients(const SystemDef& s) {
    MomentumCoefficients c{Expr(0), Expr(0), Expr(0), Expr(0), Expr(0), Expr(0)};
    for (const auto& [key, coeff] : collect_momenta(s.B)) {
        const auto [i, j] = key;
        if (key == std::make_pair(3, 0)) c.mu = coeff;
        else if (key == std::make_pair(2, 1)) c.nu = coeff;
        else if (key == std::make_pair(1, 2)) c.rho = coeff;
        else if (key == std::make_pair(0, 3)) c.sigma = coeff;
        else if (key == std::make_pair(1, 0)) c.phi = coeff;
        else if (key == std::make_pair(0, 1)) c.psi = coeff;
        else
            throw ConfigurationError("B has a p1^" + std::to_string(i) + " p2^" + std::to_string(j) +
                                     " term; the orbit equation needs odd cubic form");
    }
    return c;
}

ImplicitOrbit::ImplicitOrbit(const OrbitSpec& spec)
    : spec_(spec), f_(spec.system.f_x, spec.system.params), g_(spec.system.g_y, spec.system.params) {
    const MomentumCoefficients c = momentum_coefficients(spec.system);
    const ParamSet& p = spec.system.params;
    mu_ = Program(c.mu, p);
    nu_ = Program(c.nu, p);
    rho_ = Program(c.rho, p);
    sigma_ = Program(c.sigma, p);
    phi_ = Program(c.phi, p);
    psi_ = Program(c.psi, p);
    eps_ = 1e-12 * std::max({1.0, std::fabs(spec.E1), std::fabs(spec.E2)});
}

ImplicitOrbit::Momenta ImplicitOrbit::momenta_sq(double x, double y) const {
    const PhasePoint pt = xy(x, y);
    const Momenta m{2.0 * (spec_.E1 - f_(pt)), 2.0 * (spec_.E2 - g_(pt))};
    if (m.P1sq < 0 || m.P2sq < 0) throw RegionError("point outside the allowed region");
    return m;
}

ImplicitOrbit::Parts ImplicitOrbit::parts(double x, double y, bool checked) const {
    const PhasePoint pt = xy(x, y);
    const Momenta m = checked ? momenta_sq(x, y) : Momenta{2.0 * (spec_.E1 - f_(pt)), 2.0 * (spec_.E2 - g_(pt))};
    return {m.P1sq, m.P2sq, mu_(pt) * m.P1sq + rho_(pt) * m.P2sq + phi_(pt),
            nu_(pt) * m.P1sq + sigma_(pt) * m.P2sq + psi_(pt)};
}

double ImplicitOrbit::residual(double x, double y) const {
    const Parts p = parts(x, y);
    const double S1 = p.P1sq * p.m1 * p.m1, S2 = p.P2sq * p.m2 * p.m2, k2 = spec_.k * spec_.k;
    return (S1 - S2) * (S1 - S2) - 2.0 * k2 * (S1 + S2) + k2 * k2;
}

double ImplicitOrbit::residual_scale(double x, double y) const {
    const Parts p = parts(x, y);
    const double S1 = p.P1sq * p.m1 * p.m1, S2 = p.P2sq * p.m2 * p.m2, k2 = spec_.k * spec_.k;
    return (S1 + S2) * (S1 + S2) + 2.0 * k2 * (S1 + S2) + k2 * k2;
}

double ImplicitOrbit::branch_product(double x, double y) const {
    const Parts p = parts(x, y);
    const double s1 = std::sqrt(p.P1sq) * p.m1, s2 = std::sqrt(p.P2sq) * p.m2, k = spec_.k;
    return (s1 + s2 - k) * (s1 + s2 + k) * (s1 - s2 - k) * (s1 - s2 + k);
}

double ImplicitOrbit::continued(double x, double y) const {
    try {
        const Parts p = parts(x, y, false);
        const double S1 = p.P1sq * p.m1 * p.m1, S2 = p.P2sq * p.m2 * p.m2, k2 = spec_.k * spec_.k;
        return (S1 - S2) * (S1 - S2) - 2.0 * k2 * (S1 + S2) + k2 * k2;
    } catch (const SingularityError&) {
        return kNaN;
    }
}

bool ImplicitOrbit::inside(double x, double y) const {
    try {
        const PhasePoint pt = xy(x, y);
        return 2.0 * (spec_.E1 - f_(pt)) > eps_ && 2.0 * (spec_.E2 - g_(pt)) > eps_;
    } catch (const SingularityError&) {
        return false;
    }
}

ContourGrid default_grid(const OrbitSpec& spec, int n) {
    if (n < 2) throw ConfigurationError("grid needs at least 2 nodes per axis");
    const TurningRange rx = turning_interval(spec.system, 0, spec.E1, spec.x_hint);
    const TurningRange ry = turning_interval(spec.system, 1, spec.E2, spec.y_hint);
    if (!rx.bounded() || !ry.bounded()) throw DomainError("allowed region is unbounded");
    const double mx = 0.05 * (rx.hi - rx.lo), my = 0.05 * (ry.hi - ry.lo);
    return {rx.lo - mx, rx.hi + mx, ry.lo - my, ry.hi + my, n, n};
}

std::vector<Polyline> orbit_contour(const ImplicitOrbit& orbit, const ContourGrid& g) {
    if (g.nx < 2 || g.ny < 2 || !(g.x_hi > g.x_lo) || !(g.y_hi > g.y_lo))
        throw ConfigurationError("degenerate contour grid");
    const int nx = g.nx, ny = g.ny;
    const double dx = g.dx(), dy = g.dy();
    std::vector<double> v(static_cast<std::size_t>(nx) * ny);
    std::vector<char> in(v.size());
    auto at = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(j) * nx + i]; };
    auto inner = [&](int i, int j) { return in[static_cast<std::size_t>(j) * nx + i] != 0; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double x = g.x_lo + i * dx, y = g.y_lo + j * dy;
            at(i, j) = orbit.continued(x, y);
            in[static_cast<std::size_t>(j) * nx + i] = orbit.inside(x, y);
        }
    }
    auto edge_inside = [&](long id) {
        const long node = id / 2;
        const int i = static_cast<int>(node % nx), j = static_cast<int>(node / nx);
        return inner(i, j) || (id % 2 == 0 ? inner(i + 1, j) : inner(i, j + 1));
    };

    // edge ids: horizontal (i,j)-(i+1,j) -> 2(j nx + i), vertical (i,j)-(i,j+1) -> 2(j nx + i) + 1
    std::unordered_map<long, Eigen::Vector2d> points;
    auto edge_point = [&](long id) {
        auto it = points.find(id);
        if (it != points.end()) return id;
        const long node = id / 2;
        const int i = static_cast<int>(node % nx), j = static_cast<int>(node / nx);
        const int i2 = id % 2 == 0 ? i + 1 : i, j2 = id % 2 == 0 ? j : j + 1;
        const double va = at(i, j), vb = at(i2, j2);
        const double t = va / (va - vb);
        points.emplace(id, Eigen::Vector2d(g.x_lo + (i + t * (i2 - i)) * dx, g.y_lo + (j + t * (j2 - j)) * dy));
        return id;
    };
    std::vector<std::pair<long, long>> segs;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
            if (!std::isfinite(c[0]) || !std::isfinite(c[1]) || !std::isfinite(c[2]) || !std::isfinite(c[3]))
                continue;
            if (!inner(i, j) && !inner(i + 1, j) && !inner(i + 1, j + 1) && !inner(i, j + 1)) continue;
            const long base = 2L * (static_cast<long>(j) * nx + i);
            const long e[4] = {base, 2L * (static_cast<long>(j) * nx + i + 1) + 1,
                               2L * (static_cast<long>(j + 1) * nx + i), base + 1};
            const bool pos[4] = {c[0] > 0, c[1] > 0, c[2] > 0, c[3] > 0};
            // edge k joins corner k and k+1
            std::vector<int> hit;
            for (int k = 0; k < 4; ++k)
                if (pos[k] != pos[(k + 1) % 4]) hit.push_back(k);
            if (hit.size() == 2) {
                segs.emplace_back(edge_point(e[hit[0]]), edge_point(e[hit[1]]));
            } else if (hit.size() == 4) {
                const bool centre = (c[0] + c[1] + c[2] + c[3]) > 0;
                if (centre == pos[0]) {
                    segs.emplace_back(edge_point(e[0]), edge_point(e[1]));
                    segs.emplace_back(edge_point(e[2]), edge_point(e[3]));
                } else {
                    segs.emplace_back(edge_point(e[3]), edge_point(e[0]));
                    segs.emplace_back(edge_point(e[1]), edge_point(e[2]));
                }
            }
        }
    }

    std::erase_if(segs, [&](const auto& sg) { return !edge_inside(sg.first) || !edge_inside(sg.second); });

    std::unordered_map<long, std::vector<std::size_t>> by_edge;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        by_edge[segs[s].first].push_back(s);
        by_edge[segs[s].second].push_back(s);
    }
    std::vector<bool> used(segs.size(), false);
    auto next = [&](long edge, std::size_t from) -> long {
        for (std::size_t s : by_edge[edge]) {
            if (s == from || used[s]) continue;
            used[s] = true;
            return s;
        }
        return -1;
    };
    std::vector<Polyline> out;
    for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        used[s0] = true;
        std::vector<long> chain = {segs[s0].first, segs[s0].second};
        // forward
        for (std::size_t cur = s0;;) {
            const long s = next(chain.back(), cur);
            if (s < 0) break;
            cur = static_cast<std::size_t>(s);
            chain.push_back(segs[cur].first == chain.back() ? segs[cur].second : segs[cur].first);
        }
        // backward, for open curves
        std::vector<long> head;
        for (std::size_t cur = s0;;) {
            const long from = head.empty() ? chain.front() : head.back();
            const long s = next(from, cur);
            if (s < 0) break;
            cur = static_cast<std::size_t>(s);
            head.push_back(segs[cur].first == from ? segs[cur].second : segs[cur].first);
        }
        Polyline line;
        for (auto it = head.rbegin(); it != head.rend(); ++it) line.push_back(points.at(*it));
        for (long id : chain) line.push_back(points.at(id));
        out.push_back(std::move(line));
    }
    return out;
}

std::vector<Eigen::Vector2d> densify(const std::vector<Polyline>& lines, double spacing) {
    std::vector<Eigen::Vector2d> out;
    for (const auto& l : lines) {
        for (std::size_t i = 0; i < l.size(); ++i) {
            out.push_back(l[i]);
            if (i + 1 == l.size()) break;
            const double len = (l[i + 1] - l[i]).norm();
            const int n = static_cast<int>(std::ceil(len / spacing));
            for (int k = 1; k < n; ++k) out.push_back(l[i] + (l[i + 1] - l[i]) * (static_cast<double>(k) / n));
        }
    }
    return out;
}

namespace {

// Static 2-d tree for nearest-point queries.
class KdTree {
public:
    explicit KdTree(const std::vector<Eigen::Vector2d>& pts) : pts_(pts), idx_(pts.size()) {
        for (std::size_t i = 0; i < idx_.size(); ++i) idx_[i] = i;
        build(0, idx_.size(), 0);
    }

    double nearest(const Eigen::Vector2d& q) const {
        double best = std::numeric_limits<double>::infinity();
        search(q, 0, idx_.size(), 0, best);
        return std::sqrt(best);
    }

private:
    void build(std::size_t lo, std::size_t hi, int axis) {
        if (hi - lo <= 8) return;
        const std::size_t mid = (lo + hi) / 2;
        std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                         [&](std::size_t a, std::size_t b) { return pts_[a][axis] < pts_[b][axis]; });
        build(lo, mid, 1 - axis);
        build(mid + 1, hi, 1 - axis);
    }

    void search(const Eigen::Vector2d& q, std::size_t lo, std::size_t hi, int axis, double& best) const {
        if (hi - lo <= 8) {
            for (std::size_t k = lo; k < hi; ++k) best = std::min(best, (pts_[idx_[k]] - q).squaredNorm());
            return;
        }
        const std::size_t mid = (lo + hi) / 2;
        const Eigen::Vector2d& m = pts_[idx_[mid]];
        best = std::min(best, (m - q).squaredNorm());
        const double d = q[axis] - m[axis];
        if (d < 0) {
            search(q, lo, mid, 1 - axis, best);
            if (d * d < best) search(q, mid + 1, hi, 1 - axis, best);
        } else {
            search(q, mid + 1, hi, 1 - axis, best);
            if (d * d < best) search(q, lo, mid, 1 - axis, best);
        }
    }

    const std::vector<Eigen::Vector2d>& pts_;
    std::vector<std::size_t> idx_;
};

}  // namespace

double directed_distance(const std::vector<Eigen::Vector2d>& from, const std::vector<Eigen::Vector2d>& to) {
    if (from.empty() || to.empty()) return std::numeric_limits<double>::infinity();
    const KdTree tree(to);
    double d = 0;
    for (const auto& p : from) d = std::max(d, tree.nearest(p));
    return d;
}

double hausdorff(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b) {
    return std::max(directed_distance(a, b), directed_distance(b, a));
}

PhasePoint seed_orbit_point(const SystemDef& s, double E1, double E2, double k) {
    const TurningRange rx = turning_interval(s, 0, E1), ry = turning_interval(s, 1, E2);
    if (!rx.bounded() || !ry.bounded()) throw DomainError("allowed region is unbounded");
    const Program f(s.f_x, s.params), g(s.g_y, s.params), B(s.B, s.params);
    auto point = [&](double x, double y, int s1, int s2) {
        PhasePoint z;
        z << x, y, 0.0, 0.0;
        const double P1 = std::sqrt(std::max(0.0, 2.0 * (E1 - f(z))));
        const double P2 = std::sqrt(std::max(0.0, 2.0 * (E2 - g(z))));
        z[2] = s1 * P1;
        z[3] = s2 * P2;
        return z;
    };
    auto h = [&](double x, double y, int s1, int s2) {
        try {
            return B(point(x, y, s1, s2)) - k;
        } catch (const SingularityError&) {
            return kNaN;
        }
    };
    const int n = 2000;
    const double Ly = ry.hi - ry.lo, Lx = rx.hi - rx.lo;
    for (double fy : {0.37, 0.63, 0.21, 0.79, 0.5, 0.1, 0.9}) {
        const double y = ry.lo + fy * Ly;
        for (int s1 : {1, -1}) {
            for (int s2 : {1, -1}) {
                double xa = rx.lo + Lx / n, ha = h(xa, y, s1, s2);
                for (int i = 2; i < n; ++i) {
                    const double xb = rx.lo + Lx * i / n, hb = h(xb, y, s1, s2);
                    if (std::isfinite(ha) && std::isfinite(hb) && (ha <= 0) != (hb <= 0) &&
                        (xa > 0) == (xb > 0)) {
                        double a = xa, b = xb, fa = ha;
                        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::fabs(a)); ++it) {
                            const double m = 0.5 * (a + b), fm = h(m, y, s1, s2);
                            if ((fm <= 0) == (fa <= 0)) {
                                a = m;
                                fa = fm;
                            } else {
                                b = m;
                            }
                        }
                        const double xr = 0.5 * (a + b);
                        const PhasePoint z = point(xr, y, s1, s2);
                        const double scale = std::fabs(Program(s.B, s.params).with_scale(z).scale);
                        if (std::fabs(h(xr, y, s1, s2)) <= 1e-9 * (1.0 + scale + std::fabs(k))) return z;
                    }
                    xa = xb;
                    ha = hb;
                }
            }
        }
    }
    throw DomainError("no phase point with these integral values was found");
}

ConicFit fit_conic(const std::vector<Eigen::Vector2d>& pts) {
    if (pts.size() < 6) throw ConfigurationError("a conic fit needs at least 6 points");
    const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd M(n, 6);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = pts[i].x(), y = pts[i].y();
        M.row(i) << x * x, x * y, y * y, x, y, 1.0;
    }
    const Eigen::VectorXd cs = M.colwise().norm().cwiseMax(1e-300);
    const Eigen::MatrixXd Ms = M * cs.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ms, Eigen::ComputeThinV);
    ConicFit out;
    out.coeffs = svd.matrixV().col(5).cwiseQuotient(cs);
    const auto& c = out.coeffs;
    double ss = 0;
    for (const auto& p : pts) {
        const double x = p.x(), y = p.y();
        const double F = c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5];
        const Eigen::Vector2d grad(2 * c[0] * x + c[1] * y + c[3], c[1] * x + 2 * c[2] * y + c[4]);
        const double d = F / std::max(grad.norm(), 1e-300);
        ss += d * d;
    }
    out.rms = std::sqrt(ss / static_cast<double>(n));
    out.ellipse = c[1] * c[1] - 4 * c[0] * c[2] < 0;
    return out;
}

}  // namespace superint
