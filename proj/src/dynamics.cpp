#include "superint/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/FFT>

namespace superint {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double param(const SystemDef& s, const char* name) {
    auto it = s.params.find(name);
    if (it == s.params.end()) throw ConfigurationError(std::string("missing parameter ") + name);
    return it->second;
}

PhasePoint at_coord(int c, double v) {
    PhasePoint pt = PhasePoint::Zero();
    pt[c] = v;
    return pt;
}

// Dormand-Prince 5(4)
struct Dopri {
    static constexpr double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
    static constexpr double a[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static constexpr double e[7] = {71.0 / 57600, 0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525,
                                    -1.0 / 40};

    // returns the error norm; z_new receives the 5th order solution
    static double step(const Flow& f, const PhasePoint& z, double h, const IntegratorConfig& cfg, PhasePoint& z_new) {
        PhasePoint k[7];
        k[0] = f.rhs(z);
        for (int s = 1; s < 7; ++s) {
            PhasePoint zs = z;
            for (int j = 0; j < s; ++j) zs += h * a[s][j] * k[j];
            k[s] = f.rhs(zs);
            if (s == 6) z_new = zs;
        }
        PhasePoint err = PhasePoint::Zero();
        for (int j = 0; j < 7; ++j) err += h * e[j] * k[j];
        const PhasePoint sc =
            (cfg.atol + cfg.rtol * z.cwiseAbs().cwiseMax(z_new.cwiseAbs()).array()).matrix();
        return err.cwiseQuotient(sc).cwiseAbs().maxCoeff();
    }
};

struct Core {
    std::vector<double> t;
    std::vector<PhasePoint> z;
    std::vector<AxisCrossing> crossings;
    RunStatus status = RunStatus::completed;
    std::string message;
    long rejected = 0;
};

bool tracked(Flow::Axis a) { return a == Flow::Axis::kink; }

// Carries coordinate c (0 or 1) across its axis using the 1D energy of
// that coordinate; the other coordinate moves by an Euler step of the
// same (tiny) duration.
double hop(const Flow& f, PhasePoint& z, int c, double tol) {
    const int p = c + 2, oc = 1 - c, op = 3 - c;
    const double E = c == 0 ? f.energy_x(z) : f.energy_y(z);
    const double q0 = z[c], p0 = z[p];
    const double q1 = q0 == 0.0 ? std::copysign(0.5 * tol, p0) : -q0;
    PhasePoint probe = z;
    probe[c] = q1;
    const double pot = (c == 0 ? f.energy_x(probe) : f.energy_y(probe)) - 0.5 * p0 * p0;
    const double p1 = std::copysign(std::sqrt(std::max(0.0, 2.0 * (E - pot))), p0);
    const double dt = 2.0 * std::fabs(q1 - q0) / (std::fabs(p0) + std::fabs(p1));
    z[c] = q1;
    z[p] = p1;
    z[oc] += z[op] * dt;
    try {
        z[op] += (oc == 0 ? f.force_x(z[oc]) : f.force_y(z[oc])) * dt;
    } catch (const SingularityError&) {
    }
    return dt;
}

Core run(const Flow& f, const PhasePoint& z0, double t_end, const IntegratorConfig& cfg, bool keep) {
    Core out;
    double t = 0.0;
    PhasePoint z = z0;
    auto push = [&] {
        if (keep) {
            out.t.push_back(t);
            out.z.push_back(z);
        }
    };
    push();
    const Flow::Axis axes[2] = {f.axis_x(), f.axis_y()};

    if (cfg.method == Method::leapfrog) {
        const double h = cfg.max_step;
        try {
            const long n = static_cast<long>(std::ceil(t_end / h - 1e-9));
            for (long i = 0; i < n; ++i) {
                const double hh = i + 1 == n ? t_end - t : h;
                z[2] += 0.5 * hh * f.force_x(z[0]);
                z[3] += 0.5 * hh * f.force_y(z[1]);
                z[0] += hh * z[2];
                z[1] += hh * z[3];
                z[2] += 0.5 * hh * f.force_x(z[0]);
                z[3] += 0.5 * hh * f.force_y(z[1]);
                t += hh;
                push();
                if (z.head<2>().norm() > cfg.escape_radius) {
                    out.status = RunStatus::escaped;
                    out.message = "left the escape radius";
                    break;
                }
            }
        } catch (const SingularityError& e) {
            out.status = RunStatus::aborted;
            out.message = std::string("singular force: ") + e.what();
        }
        if (!keep) {
            out.t.push_back(t);
            out.z.push_back(z);
        }
        return out;
    }

    double h = std::min(cfg.max_step, 1e-3);
    long steps = 0;
    while (t < t_end) {
        if (++steps > cfg.max_steps) {
            out.status = RunStatus::aborted;
            out.message = "step budget exhausted";
            break;
        }
        if (z.head<2>().norm() > cfg.escape_radius) {
            out.status = RunStatus::escaped;
            out.message = "left the escape radius";
            break;
        }
        bool walled = false;
        for (int c = 0; c < 2; ++c)
            if (axes[c] == Flow::Axis::wall && std::fabs(z[c]) < cfg.barrier_guard) walled = true;
        if (walled) {
            out.status = RunStatus::aborted;
            out.message = "reached the singular wall guard";
            break;
        }
        if (cfg.localize_crossings) {
            bool hopped = false;
            for (int c = 0; c < 2; ++c) {
                if (!tracked(axes[c])) continue;
                if (std::fabs(z[c]) < cfg.crossing_tol && z[c] * z[c + 2] <= 0.0 && z[c + 2] != 0.0) {
                    const double dt = hop(f, z, c, cfg.crossing_tol);
                    out.crossings.push_back({t + 0.5 * dt, c == 0 ? 'x' : 'y'});
                    t += dt;
                    hopped = true;
                }
            }
            if (hopped) {
                push();
                continue;
            }
        }
        double hs = std::min({h, t_end - t, cfg.max_step});
        if (cfg.localize_crossings) {
            for (int c = 0; c < 2; ++c) {
                if (!tracked(axes[c])) continue;
                if (z[c] * z[c + 2] < 0.0) hs = std::min(hs, 0.5 * std::fabs(z[c] / z[c + 2]));
            }
        }
        const double hmin = 1e-15 * std::max(1.0, std::fabs(t));
        if (hs < hmin && t_end - t > hmin) {
            out.status = RunStatus::aborted;
            out.message = "step size underflow at t = " + std::to_string(t);
            break;
        }
        PhasePoint zn;
        double err;
        try {
            err = Dopri::step(f, z, hs, cfg, zn);
        } catch (const SingularityError&) {
            ++out.rejected;
            h = 0.25 * hs;
            continue;
        }
        if (!std::isfinite(err)) {
            ++out.rejected;
            h = 0.25 * hs;
            continue;
        }
        if (cfg.localize_crossings) {
            bool crossed = false;
            for (int c = 0; c < 2; ++c)
                if (tracked(axes[c]) && z[c] * zn[c] < 0.0) crossed = true;
            if (crossed) {
                ++out.rejected;
                h = 0.5 * hs;
                continue;
            }
        }
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (err <= 1.0) {
            t += hs;
            z = zn;
            push();
            h = hs * fac;
        } else {
            ++out.rejected;
            h = hs * std::min(1.0, fac);
        }
    }
    if (!keep) {
        out.t.push_back(t);
        out.z.push_back(z);
    }
    return out;
}

// Gauss-Legendre nodes on [-1, 1] by Golub-Welsch.
struct Gauss {
    Eigen::VectorXd x, w;
    explicit Gauss(int n) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        x = es.eigenvalues();
        w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    }
    template <class F>
    double apply(const F& f, double a, double b) const {
        const double m = 0.5 * (a + b), r = 0.5 * (b - a);
        double s = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i) s += w[i] * f(m + r * x[i]);
        return r * s;
    }
};

template <class F>
double adaptive_gauss(const F& f, double a, double b, double tol, int depth = 0) {
    static const Gauss g(10);
    const double whole = g.apply(f, a, b);
    const double m = 0.5 * (a + b);
    const double halves = g.apply(f, a, m) + g.apply(f, m, b);
    if (std::fabs(whole - halves) <= tol * std::max(1.0, std::fabs(halves)) || depth > 40) return halves;
    return adaptive_gauss(f, a, m, tol, depth + 1) + adaptive_gauss(f, m, b, tol, depth + 1);
}

template <class F>
double golden_min(const F& f, double a, double b, int iters = 80) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && b - a > 1e-15 * std::max(1.0, std::fabs(a)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(atol > 0) || !(rtol > 0)) throw ConfigurationError("tolerances must be positive");
    if (!(t_end > 0)) throw ConfigurationError("t_end must be positive");
    if (!(max_step > 0)) throw ConfigurationError("max_step must be positive");
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::escaped: return "escaped";
        case RunStatus::aborted: return "aborted";
    }
    return "?";
}

Flow::Flow(const SystemDef& s)
    : s_(&s),
      fx_(s.f_x, s.params),
      gy_(s.g_y, s.params),
      dfx_(partial(s.f_x, Var::x), s.params),
      dgy_(partial(s.g_y, Var::y), s.params) {
    auto classify = [&](const Program& pot, const Expr& e, int c) {
        try {
            pot(at_coord(c, 0.0));
        } catch (const SingularityError&) {
            return Axis::wall;
        }
        return is_smooth_everywhere(e) ? Axis::smooth : Axis::kink;
    };
    ax_ = classify(fx_, s.f_x, 0);
    ay_ = classify(gy_, s.g_y, 1);
}

double Flow::force_x(double x) const { return -dfx_(at_coord(0, x)); }
double Flow::force_y(double y) const { return -dgy_(at_coord(1, y)); }
double Flow::energy_x(const PhasePoint& z) const { return 0.5 * z[2] * z[2] + fx_(at_coord(0, z[0])); }
double Flow::energy_y(const PhasePoint& z) const { return 0.5 * z[3] * z[3] + gy_(at_coord(1, z[1])); }

PhasePoint Flow::rhs(const PhasePoint& z) const {
    PhasePoint d;
    d << z[2], z[3], force_x(z[0]), force_y(z[1]);
    return d;
}

TrajectoryRecord integrate(const SystemDef& s, const PhasePoint& z0, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!z0.allFinite()) throw ConfigurationError("initial point must be finite");
    const Flow f(s);
    Core c = run(f, z0, cfg.t_end, cfg, true);
    TrajectoryRecord rec;
    rec.t = std::move(c.t);
    rec.z = std::move(c.z);
    rec.crossings = std::move(c.crossings);
    rec.status = c.status;
    rec.message = std::move(c.message);
    rec.rejected = c.rejected;
    const Program H(s.H, s.params), A(s.A, s.params), B(s.B, s.params);
    auto safe = [](const Program& p, const PhasePoint& z) {
        try {
            return p(z);
        } catch (const SingularityError&) {
            return kNaN;
        }
    };
    for (const auto& z : rec.z) {
        rec.H.push_back(safe(H, z));
        rec.A.push_back(safe(A, z));
        rec.B.push_back(safe(B, z));
    }
    return rec;
}

PhasePoint propagate(const SystemDef& s, const PhasePoint& z0, double dt, const IntegratorConfig& cfg) {
    if (dt <= 0) return z0;
    const Flow f(s);
    return run(f, z0, dt, cfg, false).z.back();
}

DriftStats conservation_drift(const TrajectoryRecord& rec, const SystemDef& s) {
    DriftStats d;
    if (rec.size() == 0) return d;
    auto denom = [&](const Expr& e, double v0) {
        // fall back on the term magnitude when the integral starts near zero
        double scale = std::fabs(v0);
        try {
            scale = Program(e, s.params).with_scale(rec.z.front()).scale;
        } catch (const SingularityError&) {
        }
        return std::fabs(v0) >= 1e-3 * scale && v0 != 0.0 ? std::fabs(v0) : std::max(scale, 1e-300);
    };
    auto series_drift = [&](const std::vector<double>& v, const Expr& e) {
        double m = 0;
        const double den = denom(e, v.front());
        for (double x : v)
            if (std::isfinite(x)) m = std::max(m, std::fabs(x - v.front()) / den);
        return m;
    };
    d.H = series_drift(rec.H, s.H);
    d.A = series_drift(rec.A, s.A);
    if (is_smooth_everywhere(s.B)) {
        d.B = series_drift(rec.B, s.B);
        return d;
    }
    // B carries quadrant signs: compare within each quadrant segment
    auto quadrant = [](const PhasePoint& z) { return (z[0] >= 0 ? 1 : 0) + (z[1] >= 0 ? 2 : 0); };
    const double den = denom(s.B, rec.B.front());
    std::size_t start = 0;
    d.B_segments = 0;
    for (std::size_t i = 0; i <= rec.size(); ++i) {
        if (i < rec.size() && quadrant(rec.z[i]) == quadrant(rec.z[start])) continue;
        ++d.B_segments;
        double ref = kNaN;
        for (std::size_t j = start; j < i; ++j) {
            if (!std::isfinite(rec.B[j])) continue;
            if (std::isnan(ref)) ref = rec.B[j];
            d.B = std::max(d.B, std::fabs(rec.B[j] - ref) / den);
        }
        start = i;
    }
    return d;
}

UniformSeries resample(const TrajectoryRecord& rec, const SystemDef& s, double dt) {
    (void)s;
    UniformSeries out;
    out.dt = dt;
    if (rec.size() < 2) return out;
    const double T = rec.t.back();
    std::size_t j = 0;
    for (long n = 0;; ++n) {
        const double t = n * dt;
        if (t > T) break;
        while (j + 2 < rec.size() && rec.t[j + 1] < t) ++j;
        const double t0 = rec.t[j], t1 = rec.t[j + 1], h = t1 - t0;
        const double u = h > 0 ? std::clamp((t - t0) / h, 0.0, 1.0) : 0.0;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
        const PhasePoint &a = rec.z[j], &b = rec.z[j + 1];
        out.t.push_back(t);
        out.x.push_back(h00 * a[0] + h10 * h * a[2] + h01 * b[0] + h11 * h * b[2]);
        out.y.push_back(h00 * a[1] + h10 * h * a[3] + h01 * b[1] + h11 * h * b[3]);
    }
    return out;
}

std::vector<Peak> spectrum_peaks(const std::vector<double>& signal, double dt, double rel_threshold) {
    const std::size_t N = signal.size();
    if (N < 16) return {};
    double mean = 0;
    for (double v : signal) mean += v;
    mean /= static_cast<double>(N);
    std::vector<double> w(N), xs(N);
    const double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
    for (std::size_t n = 0; n < N; ++n) {
        const double r = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(N - 1);
        w[n] = a0 - a1 * std::cos(r) + a2 * std::cos(2 * r) - a3 * std::cos(3 * r);
        xs[n] = (signal[n] - mean) * w[n];
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> X;
    fft.fwd(X, xs);
    const std::size_t half = N / 2;
    std::vector<double> mag(half + 1);
    for (std::size_t k = 0; k <= half; ++k) mag[k] = std::abs(X[k]);
    const double mx = *std::max_element(mag.begin() + 1, mag.end());
    auto dtft = [&](double f) {
        std::complex<double> s = 0;
        const std::complex<double> step = std::polar(1.0, -2.0 * std::numbers::pi * f * dt);
        std::complex<double> ph = 1.0;
        for (std::size_t n = 0; n < N; ++n) {
            s += xs[n] * ph;
            ph *= step;
        }
        return std::abs(s);
    };
    const double df = 1.0 / (static_cast<double>(N) * dt);
    std::vector<Peak> out;
    for (std::size_t k = 2; k < half; ++k) {
        if (mag[k] < rel_threshold * mx || mag[k] < mag[k - 1] || mag[k] < mag[k + 1]) continue;
        const double f = golden_min([&](double fr) { return -dtft(fr); }, (k - 1) * df, (k + 1) * df, 60);
        out.push_back({f, dtft(f)});
    }
    std::sort(out.begin(), out.end(), [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    return out;
}

SineFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& v, double omega_guess) {
    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
    auto solve = [&](double om, Eigen::Vector3d& c) {
        Eigen::MatrixXd M(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) M.row(i) << 1.0, std::sin(om * t[i]), std::cos(om * t[i]);
        c = M.colPivHouseholderQr().solve(rhs);
        return (M * c - rhs).squaredNorm();
    };
    Eigen::Vector3d c;
    const double om = golden_min(
        [&](double w) {
            Eigen::Vector3d cc;
            return solve(w, cc);
        },
        omega_guess * 0.98, omega_guess * 1.02, 200);
    const double ss = solve(om, c);
    SineFit f;
    f.omega = om;
    f.mean = c[0];
    f.amp = std::hypot(c[1], c[2]);
    f.phase = std::atan2(c[2], c[1]);
    f.rms = std::sqrt(ss / static_cast<double>(n));
    return f;
}

PeriodEstimate detect_period(const TrajectoryRecord& rec, const SystemDef& s, double tol,
                             const IntegratorConfig& cfg) {
    PeriodEstimate pe;
    pe.method = "phase-recurrence";
    if (rec.status == RunStatus::escaped) {
        pe.message = "trajectory escaped; no period";
        return pe;
    }
    if (rec.size() < 8) {
        pe.message = "record too short";
        return pe;
    }
    PhasePoint lo = rec.z.front(), hi = rec.z.front();
    for (const auto& z : rec.z) {
        lo = lo.cwiseMin(z);
        hi = hi.cwiseMax(z);
    }
    pe.diameter = (hi - lo).norm();
    const PhasePoint& z0 = rec.z.front();
    std::vector<double> d(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) d[i] = (rec.z[i] - z0).norm();

    // continuous minimum of the return distance near record index i
    auto refine = [&](std::size_t i) {
        const std::size_t a = i - 1, b = std::min(i + 1, rec.size() - 1);
        auto dist = [&](double tt) { return (propagate(s, rec.z[a], tt - rec.t[a], cfg) - z0).norm(); };
        const double tm = golden_min(dist, rec.t[a], rec.t[b], 60);
        return std::make_pair(tm, dist(tm));
    };
    auto nearest_index = [&](double tt) {
        const auto it = std::lower_bound(rec.t.begin(), rec.t.end(), tt);
        std::size_t j = static_cast<std::size_t>(it - rec.t.begin());
        if (j >= rec.size()) j = rec.size() - 1;
        if (j > 0 && std::fabs(rec.t[j - 1] - tt) < std::fabs(rec.t[j] - tt)) --j;
        return std::max<std::size_t>(j, 1);
    };

    bool departed = false;
    for (std::size_t i = 1; i + 1 < rec.size(); ++i) {
        if (!departed) {
            departed = d[i] > 0.05 * pe.diameter;
            continue;
        }
        if (!(d[i] <= d[i - 1] && d[i] <= d[i + 1] && d[i] < 0.05 * pe.diameter)) continue;
        const auto [T, dist] = refine(i);
        if (dist >= tol * pe.diameter) continue;
        // the multiples must return too (rejects aliases)
        bool ok = true;
        for (int m = 2; m * T <= rec.t.back() && ok; ++m) {
            const std::size_t j = nearest_index(m * T);
            if (j + 1 >= rec.size()) break;
            ok = refine(j).second < m * tol * pe.diameter;
        }
        if (!ok) continue;
        pe.found = true;
        pe.T = T;
        pe.return_distance = dist;
        pe.relative = dist / pe.diameter;
        break;
    }
    if (!pe.found) pe.message = "no return within t_end";

    // frequency cross-check
    const double dt = std::min(0.05, rec.t.back() / 4096.0);
    const UniformSeries u = resample(rec, s, dt);
    const auto px = spectrum_peaks(u.x, dt), py = spectrum_peaks(u.y, dt);
    if (!px.empty()) pe.fx = px.front().freq;
    if (!py.empty()) pe.fy = py.front().freq;
    if (pe.found) {
        auto near_int = [](double v) { return v > 0.5 && std::fabs(v - std::round(v)) < 0.02 * std::max(1.0, v); };
        const bool hx = px.empty() || near_int(pe.T * pe.fx);
        const bool hy = py.empty() || near_int(pe.T * pe.fy);
        pe.confidence = hx && hy ? "high" : "low";
    }
    return pe;
}

AnalyticForms analytic_forms(const SystemDef& s, double E1, double E2) {
    const double w2 = param(s, "omega2"), w = std::sqrt(w2);
    auto root = [](double r, const char* what) {
        if (r < 0) throw DomainError(std::string("negative amplitude radicand for ") + what);
        return std::sqrt(r);
    };
    auto soft = [](double r) { return r >= 0 ? std::sqrt(r) : kNaN; };
    AnalyticForms f;
    switch (s.case_id) {
        case 1:
            f.x = {false, 0.0, root(2 * E1 / w2, "x"), w, 0};
            f.y = {false, 0.0, root(2 * E2 / w2, "y"), w, 0};
            f.x.amp_printed = f.x.amp;
            f.y.amp_printed = f.y.amp;
            break;
        case 2: {
            const double b = param(s, "b"), c = param(s, "c");
            f.x = {true, E1 / w2, root(E1 * E1 / (w2 * w2) - 2 * b / w2, "x^2"), 2 * w,
                   soft(E1 * E1 / (2 * w2 * w2) - 2 * b / w2)};
            f.y = {true, E2 / w2, root(E2 * E2 / (w2 * w2) - 2 * c / w2, "y^2"), 2 * w,
                   soft(E2 * E2 / (2 * w2 * w2) - 2 * c / w2)};
            break;
        }
        case 3: {
            const double b = param(s, "b"), c = param(s, "c");
            f.x = {false, -c / (4 * w2), root(E1 / (2 * w2) + c * c / (16 * w2 * w2), "x"), 2 * w,
                   soft(E1 / w2 + c * c / (32 * w2))};
            f.y = {true, E2 / w2, root(E2 * E2 / (w2 * w2) - 2 * b / w2, "y^2"), 2 * w,
                   soft(E2 * E2 / (w2 * w2) - 2 * c / w2)};
            break;
        }
        case 4:
            f.x = {false, 0.0, root(2 * E1 / (9 * w2), "x"), 3 * w, 0};
            f.y = {false, 0.0, root(2 * E2 / w2, "y"), w, 0};
            f.x.amp_printed = f.x.amp;
            f.y.amp_printed = f.y.amp;
            break;
        default: throw ConfigurationError("closed-form trajectories exist for cases 1-4 only");
    }
    return f;
}

QuadratureInverse::QuadratureInverse(const SystemDef& s, double E1) : f_(s.f_x, s.params), E_(E1) {
    const TurningRange r = turning_interval(s, 0, E1);
    if (!r.bounded()) throw DomainError("x motion is unbounded at this energy");
    lo_ = r.lo;
    hi_ = r.hi;
    half_ = time_to(hi_);
}

double QuadratureInverse::time_to(double x) const {
    // x = lo + (hi - lo)(1 - cos th)/2 removes the turning-point singularities
    const double L = hi_ - lo_;
    const double th = std::acos(std::clamp(1.0 - 2.0 * (x - lo_) / L, -1.0, 1.0));
    auto g = [&](double t) {
        const double xv = lo_ + 0.5 * L * (1.0 - std::cos(t));
        const double rad = 2.0 * (E_ - f_(at_coord(0, xv)));
        return 0.5 * L * std::sin(t) / std::sqrt(std::max(rad, 1e-300));
    };
    return adaptive_gauss(g, 0.0, th, 1e-12);
}

double QuadratureInverse::x_at(double t) const {
    const double P = 2.0 * half_;
    double tau = std::fmod(t, P);
    if (tau < 0) tau += P;
    if (tau > half_) tau = P - tau;
    double a = lo_, b = hi_;
    for (int i = 0; i < 100 && b - a > 1e-14 * std::max(1.0, std::fabs(a)); ++i) {
        const double m = 0.5 * (a + b);
        (time_to(m) < tau ? a : b) = m;
    }
    return 0.5 * (a + b);
}

std::pair<double, double> analytic_trajectory(const SystemDef& s, double t, double E1, double E2, double c1,
                                              double c2) {
    if (s.case_id == 6) {
        if (s.variant == "V3") throw ConfigurationError("V3 is a shifted oscillator; use the numeric flow");
        const QuadratureInverse qi(s, E1);
        const double w = std::sqrt(param(s, "omega2"));
        const double amp = std::sqrt(2 * E2) / w;
        return {qi.x_at(t + c1), amp * std::sin(w * t + c2)};
    }
    const AnalyticForms f = analytic_forms(s, E1, E2);
    return {f.x.mean + f.x.amp * std::sin(f.x.omega * t + c1), f.y.mean + f.y.amp * std::sin(f.y.omega * t + c2)};
}

bool boundedness_check(const SystemDef& s, const PhasePoint& z0) {
    const Flow f(s);
    try {
        return boundedness_bound(s, f.energy_x(z0), f.energy_y(z0), z0[0], z0[1]).bounded;
    } catch (const DomainError&) {
        return false;
    }
}

void write_csv(std::ostream& os, const TrajectoryRecord& rec) {
    char buf[64];
    auto num = [&](double v) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        os.write(buf, p - buf);
    };
    os << "t,x,y,p1,p2,H,A,B\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
        num(rec.t[i]);
        for (int c = 0; c < 4; ++c) {
            os << ',';
            num(rec.z[i][c]);
        }
        for (double v : {rec.H[i], rec.A[i], rec.B[i]}) {
            os << ',';
            num(v);
        }
        os << '\n';
    }
}

}  // namespace superint
