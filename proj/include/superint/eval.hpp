#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "superint/expr.hpp"

namespace superint {

class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unbound parameter, bad case id, malformed override and similar.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (x, y, p1, p2).
template <typename Scalar>
using PhasePointT = Eigen::Matrix<Scalar, 4, 1>;
using PhasePoint = PhasePointT<double>;

/// Builds a phase point, rejecting NaN and infinities.
PhasePoint phase_point(double x, double y, double p1, double p2);

using ParamSet = std::map<std::string, double>;

/// Value of e and a magnitude scale: the same tree evaluated with every sum
/// replaced by the sum of absolute values. Used for relative residuals.
template <typename Scalar>
struct Valued {
    Scalar value;
    Scalar scale;
};

/// Expression compiled to a flat tape with parameters bound. Cheap to
/// evaluate many times; immutable once built.
class Program {
public:
    Program() = default;
    Program(const Expr& e, const ParamSet& params);

    template <typename Scalar>
    Scalar operator()(const PhasePointT<Scalar>& pt) const {
        return run<Scalar>(pt, nullptr);
    }

    template <typename Scalar>
    Valued<Scalar> with_scale(const PhasePointT<Scalar>& pt) const {
        std::vector<Scalar> mags;
        Scalar v = run<Scalar>(pt, &mags);
        return {v, mags.back()};
    }

    /// Evaluates at every column of pts.
    Eigen::VectorXd operator()(const Eigen::Matrix4Xd& pts) const;

    std::size_t size() const { return ops_.size(); }

private:
    enum class Op : std::uint8_t { constant, var, sum, product, power, abs, sign };
    struct Instr {
        Op op;
        int var = 0;
        double c = 0.0;       // constant value or exponent
        bool int_exp = false;  // exponent is an integer
        int first = 0, count = 0;  // range into args_
    };

    template <typename Scalar>
    Scalar run(const PhasePointT<Scalar>& pt, std::vector<Scalar>* mags) const;

    std::vector<Instr> ops_;
    std::vector<int> args_;
};

double eval(const Expr& e, const PhasePoint& pt, const ParamSet& params);

/// Which coordinate lines are excluded from sampling and derivative use.
enum class SingularSet { none, x_zero, y_zero, both };

inline bool excludes_x_zero(SingularSet s) { return s == SingularSet::x_zero || s == SingularSet::both; }
inline bool excludes_y_zero(SingularSet s) { return s == SingularSet::y_zero || s == SingularSet::both; }
const char* to_string(SingularSet s);

/// Deterministic uniform sampler over a box in phase space.
struct Sampler {
    std::uint64_t seed = 20240521;
    int count = 200;
    PhasePoint lo = PhasePoint::Constant(-5.0);
    PhasePoint hi = PhasePoint::Constant(5.0);
    double exclusion = 1e-2;
    SingularSet singular = SingularSet::none;

    /// Draws count points as columns; throws ConfigurationError on bad bounds.
    Eigen::Matrix4Xd draw() const;
    /// Same box, different stream.
    Sampler reseeded(std::uint64_t s) const {
        Sampler out = *this;
        out.seed = s;
        return out;
    }
};

/// Portable uniform [0,1) stream (mt19937_64 with 53-bit mantissa mapping).
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed);
    double next();
    double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

struct ZeroTest {
    bool zero = false;
    double max_residual = 0.0;  // max |v| / (1 + scale)
    int evaluated = 0;
    int skipped = 0;  // points that hit a singularity
};

/// Numeric identity test: |e(pt)| <= tol * (1 + scale(pt)) at every sample.
ZeroTest is_zero(const Expr& e, const Sampler& s, const ParamSet& params, double tol = 1e-9);
ZeroTest is_zero(const Program& p, const Eigen::Matrix4Xd& pts, double tol = 1e-9);

/// Central-difference estimate of {f, g} at pt with step h.
double bracket_oracle(const Expr& f, const Expr& g, const PhasePoint& pt, const ParamSet& params, double h);

}  // namespace superint
