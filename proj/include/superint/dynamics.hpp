#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "superint/catalog.hpp"

namespace superint {

enum class Method { dopri5, leapfrog };

struct IntegratorConfig {
    Method method = Method::dopri5;
    double atol = 1e-13;
    double rtol = 1e-11;
    double max_step = 0.05;  // also the fixed step of leapfrog
    double t_end = 400.0;
    bool localize_crossings = true;
    double crossing_tol = 1e-10;
    double escape_radius = 1e6;
    double barrier_guard = 1e-6;  // abort when this close to an infinite wall
    long max_steps = 20'000'000;

    void validate() const;  // throws ConfigurationError
};

struct AxisCrossing {
    double t;
    char axis;  // 'x' or 'y'
};

enum class RunStatus { completed, escaped, aborted };
const char* to_string(RunStatus s);

struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<PhasePoint> z;
    std::vector<double> H, A, B;  // NaN where an integral is singular
    std::vector<AxisCrossing> crossings;
    RunStatus status = RunStatus::completed;
    std::string message;
    long rejected = 0;

    std::size_t size() const { return t.size(); }
};

/// Hamilton's equations x' = p1, y' = p2, p1' = -f'(x), p2' = -g'(y) for a
/// separable system. Holds the compiled forces and the axis treatment.
class Flow {
public:
    explicit Flow(const SystemDef& s);

    PhasePoint rhs(const PhasePoint& z) const;
    double force_x(double x) const;
    double force_y(double y) const;
    double energy_x(const PhasePoint& z) const;  // p1^2/2 + f(x)
    double energy_y(const PhasePoint& z) const;

    /// Axis of a coordinate: smooth, kink (finite potential, crossed by
    /// localization) or wall (potential infinite on the axis).
    enum class Axis { smooth, kink, wall };
    Axis axis_x() const { return ax_; }
    Axis axis_y() const { return ay_; }

    const SystemDef& system() const { return *s_; }

private:
    const SystemDef* s_;
    Program fx_, gy_, dfx_, dgy_;
    Axis ax_, ay_;
};

TrajectoryRecord integrate(const SystemDef& s, const PhasePoint& z0, const IntegratorConfig& cfg = {});

/// State after time dt (no record kept).
PhasePoint propagate(const SystemDef& s, const PhasePoint& z0, double dt, const IntegratorConfig& cfg = {});

struct DriftStats {
    double H = 0, A = 0, B = 0;  // max relative deviation from the initial (segment) value
    int B_segments = 1;
};

/// Relative drift of the integrals over the record. When B carries
/// quadrant sign factors it is compared per quadrant segment.
DriftStats conservation_drift(const TrajectoryRecord& rec, const SystemDef& s);

struct PeriodEstimate {
    bool found = false;
    double T = 0;
    double return_distance = 0;  // absolute, in phase space
    double relative = 0;         // return_distance / diameter
    double diameter = 0;
    std::string method;          // "phase-recurrence"
    double fx = 0, fy = 0;       // dominant frequencies of x(t), y(t)
    std::string confidence;      // "high" when T fx and T fy are near integers
    std::string message;
};

PeriodEstimate detect_period(const TrajectoryRecord& rec, const SystemDef& s, double tol = 1e-4,
                             const IntegratorConfig& cfg = {});

/// Uniform resampling by cubic Hermite interpolation (velocities from the flow).
struct UniformSeries {
    double dt = 0;
    std::vector<double> t, x, y;
};
UniformSeries resample(const TrajectoryRecord& rec, const SystemDef& s, double dt);

/// Spectral peaks of a uniformly sampled signal (mean removed, 4-term
/// Blackman-Harris window), each refined on the continuous frequency axis.
struct Peak {
    double freq;  // cycles per unit time
    double magnitude;
};
std::vector<Peak> spectrum_peaks(const std::vector<double>& signal, double dt, double rel_threshold = 1e-3);

/// Least-squares fit v(t) = mean + amp sin(omega t + phase) with omega refined.
struct SineFit {
    double mean = 0, amp = 0, omega = 0, phase = 0;
    double rms = 0;  // residual
};
SineFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& v, double omega_guess);

/// Closed-form trajectories. For each coordinate the form is
/// q(t) = mean + amp sin(omega t + phase), q being x or x^2 (y or y^2).
struct AnalyticComponent {
    bool squared = false;
    double mean = 0, amp = 0, omega = 0;
    double amp_printed = 0;  // amplitude as typeset
};
struct AnalyticForms {
    AnalyticComponent x, y;
};
/// Cases 1-4. Throws DomainError when an amplitude radicand is negative.
AnalyticForms analytic_forms(const SystemDef& s, double E1, double E2);

/// Values (x or x^2, y or y^2) at time t for phases c1, c2. Case 6 (V1, V2)
/// inverts the quadrature for x and uses the harmonic form for y, with
/// c1 the time offset from the left turning point.
std::pair<double, double> analytic_trajectory(const SystemDef& s, double t, double E1, double E2, double c1,
                                              double c2);

/// t(x) = integral dx / sqrt(2 (E1 - V(x))) from the left turning point,
/// and the inverse over the full oscillation. Cases with separable f.
class QuadratureInverse {
public:
    QuadratureInverse(const SystemDef& s, double E1);
    double x_lo() const { return lo_; }
    double x_hi() const { return hi_; }
    double half_period() const { return half_; }
    double time_to(double x) const;  // from x_lo, monotone branch
    double x_at(double t) const;     // periodic, starting at x_lo moving right

private:
    Program f_;
    double E_, lo_, hi_, half_;
};

/// Both 1D level sets bounded at the energies of z0.
bool boundedness_check(const SystemDef& s, const PhasePoint& z0);

void write_csv(std::ostream& os, const TrajectoryRecord& rec);

}  // namespace superint
