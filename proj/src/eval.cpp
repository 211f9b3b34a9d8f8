#include "superint/eval.hpp"

#include <algorithm>
#include <unordered_map>

namespace superint {

PhasePoint phase_point(double x, double y, double p1, double p2) {
    PhasePoint pt(x, y, p1, p2);
    if (!pt.allFinite()) throw ConfigurationError("phase point has non-finite component");
    return pt;
}

Program::Program(const Expr& e, const ParamSet& params) {
    std::unordered_map<const detail::Node*, int> slot;
    // Iterative post-order so deep trees cannot overflow the stack.
    std::vector<std::pair<Expr, bool>> stack{{e, false}};
    while (!stack.empty()) {
        auto [u, expanded] = stack.back();
        stack.pop_back();
        if (slot.count(u.id())) continue;
        if (!expanded) {
            stack.push_back({u, true});
            for (const auto& a : u.args())
                if (!slot.count(a.id())) stack.push_back({a, false});
            continue;
        }
        Instr in{};
        switch (u.kind()) {
            case Kind::rational:
            case Kind::real:
                in.op = Op::constant;
                in.c = u.constant_value();
                break;
            case Kind::param: {
                auto it = params.find(u.name());
                if (it == params.end()) throw ConfigurationError("unbound parameter '" + u.name() + "'");
                in.op = Op::constant;
                in.c = it->second;
                break;
            }
            case Kind::var:
                in.op = Op::var;
                in.var = static_cast<int>(u.var());
                break;
            case Kind::sum: in.op = Op::sum; break;
            case Kind::product: in.op = Op::product; break;
            case Kind::power:
                in.op = Op::power;
                in.c = u.exponent().to_double();
                in.int_exp = u.exponent().is_integer();
                break;
            case Kind::abs: in.op = Op::abs; break;
            case Kind::sign: in.op = Op::sign; break;
        }
        in.first = static_cast<int>(args_.size());
        in.count = static_cast<int>(u.args().size());
        for (const auto& a : u.args()) args_.push_back(slot.at(a.id()));
        slot.emplace(u.id(), static_cast<int>(ops_.size()));
        ops_.push_back(in);
    }
}

template <typename Scalar>
Scalar Program::run(const PhasePointT<Scalar>& pt, std::vector<Scalar>* mags) const {
    using std::abs;
    using std::pow;
    std::vector<Scalar> v(ops_.size());
    if (mags) mags->assign(ops_.size(), Scalar(0));
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        const Instr& in = ops_[i];
        const int* a = args_.data() + in.first;
        Scalar r(0), m(0);
        switch (in.op) {
            case Op::constant:
                r = Scalar(in.c);
                m = abs(r);
                break;
            case Op::var:
                r = pt[in.var];
                m = abs(r);
                break;
            case Op::sum:
                for (int k = 0; k < in.count; ++k) {
                    r += v[a[k]];
                    if (mags) m += (*mags)[a[k]];
                }
                break;
            case Op::product:
                r = Scalar(1);
                m = Scalar(1);
                for (int k = 0; k < in.count; ++k) {
                    r *= v[a[k]];
                    if (mags) m *= (*mags)[a[k]];
                }
                break;
            case Op::power: {
                const Scalar b = v[a[0]];
                if (in.c < 0 && b == Scalar(0)) throw SingularityError("negative power of zero");
                if (in.int_exp) {
                    const long n = static_cast<long>(in.c);
                    Scalar base = n < 0 ? Scalar(1) / b : b;
                    unsigned long e = static_cast<unsigned long>(n < 0 ? -n : n);
                    r = Scalar(1);
                    while (e) {
                        if (e & 1u) r *= base;
                        base *= base;
                        e >>= 1u;
                    }
                } else {
                    r = pow(b, Scalar(in.c));
                }
                if (mags) m = in.c > 0 ? pow((*mags)[a[0]], Scalar(in.c)) : abs(r);
                break;
            }
            case Op::abs:
                r = abs(v[a[0]]);
                if (mags) m = (*mags)[a[0]];
                break;
            case Op::sign: {
                const Scalar u = v[a[0]];
                r = u > Scalar(0) ? Scalar(1) : (u < Scalar(0) ? Scalar(-1) : Scalar(0));
                m = Scalar(1);
                break;
            }
        }
        if (!std::isfinite(static_cast<double>(r))) throw SingularityError("non-finite intermediate value");
        v[i] = r;
        if (mags) (*mags)[i] = m;
    }
    return v.empty() ? Scalar(0) : v.back();
}

template double Program::run<double>(const PhasePointT<double>&, std::vector<double>*) const;
template long double Program::run<long double>(const PhasePointT<long double>&, std::vector<long double>*) const;

Eigen::VectorXd Program::operator()(const Eigen::Matrix4Xd& pts) const {
    Eigen::VectorXd out(pts.cols());
    for (Eigen::Index j = 0; j < pts.cols(); ++j) out[j] = (*this)(PhasePoint(pts.col(j)));
    return out;
}

double eval(const Expr& e, const PhasePoint& pt, const ParamSet& params) { return Program(e, params)(pt); }

const char* to_string(SingularSet s) {
    switch (s) {
        case SingularSet::none: return "none";
        case SingularSet::x_zero: return "x=0";
        case SingularSet::y_zero: return "y=0";
        case SingularSet::both: return "x=0,y=0";
    }
    return "?";
}

UniformStream::UniformStream(std::uint64_t seed) : engine_(seed) {}

double UniformStream::next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Eigen::Matrix4Xd Sampler::draw() const {
    if (!(lo.allFinite() && hi.allFinite()) || (hi - lo).minCoeff() <= 0.0)
        throw ConfigurationError("sampler box must be finite and non-empty");
    if (!(exclusion > 0.0)) throw ConfigurationError("sampler exclusion distance must be positive");
    if (count <= 0) throw ConfigurationError("sampler count must be positive");
    const bool ex = excludes_x_zero(singular), ey = excludes_y_zero(singular);
    if ((ex && std::max(std::fabs(lo[0]), std::fabs(hi[0])) <= exclusion) ||
        (ey && std::max(std::fabs(lo[1]), std::fabs(hi[1])) <= exclusion))
        throw SamplingError("sampler box lies inside the excluded band");
    UniformStream rng(seed);
    Eigen::Matrix4Xd pts(4, count);
    int filled = 0, tries = 0;
    while (filled < count) {
        if (++tries > 1000 * count) throw SamplingError("too many rejected samples");
        PhasePoint p;
        for (int i = 0; i < 4; ++i) p[i] = rng.uniform(lo[i], hi[i]);
        if (ex && std::fabs(p[0]) < exclusion) continue;
        if (ey && std::fabs(p[1]) < exclusion) continue;
        pts.col(filled++) = p;
    }
    return pts;
}

ZeroTest is_zero(const Program& p, const Eigen::Matrix4Xd& pts, double tol) {
    ZeroTest out;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        try {
            auto [v, scale] = p.with_scale(PhasePoint(pts.col(j)));
            out.max_residual = std::max(out.max_residual, std::fabs(v) / (1.0 + scale));
            ++out.evaluated;
        } catch (const SingularityError&) {
            ++out.skipped;
        }
    }
    if (out.evaluated == 0) throw SamplingError("every sampled point is singular");
    out.zero = out.max_residual <= tol;
    return out;
}

ZeroTest is_zero(const Expr& e, const Sampler& s, const ParamSet& params, double tol) {
    return is_zero(Program(e, params), s.draw(), tol);
}

double bracket_oracle(const Expr& f, const Expr& g, const PhasePoint& pt, const ParamSet& params, double h) {
    if (!(h > 0.0)) throw ConfigurationError("finite-difference step must be positive");
    if (!is_smooth_everywhere(f) || !is_smooth_everywhere(g)) {
        if (std::fabs(pt[0]) <= h || std::fabs(pt[1]) <= h)
            throw SingularityError("finite-difference stencil touches a coordinate axis");
    }
    const Program pf(f, params), pg(g, params);
    auto grad = [&](const Program& p) {
        Eigen::Vector4d d;
        for (int i = 0; i < 4; ++i) {
            PhasePoint a = pt, b = pt;
            a[i] += h;
            b[i] -= h;
            d[i] = (p(a) - p(b)) / (2.0 * h);
        }
        return d;
    };
    const Eigen::Vector4d df = grad(pf), dg = grad(pg);
    return df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1];
}

}  // namespace superint
