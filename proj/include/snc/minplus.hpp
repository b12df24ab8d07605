// minplus.hpp - Curves, bounding functions and the min-plus operators over them.
//
// Curves are deterministic envelopes of time (arrival and service curves).
// Bounding functions are non-increasing [0,1]-valued tail bounds attached to
// stochastic arrival and service curves.
//
// All values are immutable; every operation here is a pure function.

#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace snc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// b + r*t for t >= 0. The value at t = 0 is b.
struct Affine {
    double burst = 0.0;
    double rate = 0.0;
};

// R * max(t - T, 0)
struct RateLatency {
    double rate = 0.0;
    double latency = 0.0;
};

// One segment of a piecewise-affine curve: on [start, next.start) the value
// is value + slope * (t - start).
struct Segment {
    double start = 0.0;
    double value = 0.0;
    double slope = 0.0;
};

struct PiecewiseAffine {
    std::vector<Segment> segments;
};

class Curve {
public:
    using Representation = std::variant<Affine, RateLatency, PiecewiseAffine>;

    static Curve affine(double burst, double rate);
    static Curve rate(double rate) { return affine(0.0, rate); }
    static Curve rate_latency(double rate, double latency);
    // Segments must start at t = 0, be strictly increasing in start, have
    // non-negative slopes and never step down.
    static Curve piecewise(std::vector<Segment> segments);

    double operator()(double t) const;
    // lim_{s -> t-} f(s); equals f(0) at t = 0.
    double left_limit(double t) const;
    // Slope as t -> infinity.
    double asymptotic_rate() const;

    // Equivalent piecewise-affine form (right-continuous).
    PiecewiseAffine as_piecewise() const;

    const Representation& representation() const { return rep_; }

private:
    explicit Curve(Representation rep) : rep_(std::move(rep)) {}
    Representation rep_;
};

// e^{-theta x}
struct Exponential {
    double theta = 0.0;
};

// P{X > x} for X ~ Erlang(k, theta): the k-fold Stieltjes self-convolution of
// Exponential(theta).
struct ErlangTail {
    double theta = 0.0;
    int k = 1;
};

// P{X1 + X2 > x} for independent exponentials with distinct rates.
struct HypoExponentialTail {
    double theta1 = 0.0;
    double theta2 = 0.0;
};

// 1 for x < L, 0 for x >= L (a packet of constant length L).
struct PointMassTail {
    double length = 0.0;
};

// Sampled values p_j at increasing x_j. Between samples the left value is
// held, so the grid never understates a non-increasing function.
struct EmpiricalGrid {
    std::vector<double> xs;
    std::vector<double> ps;
};

// min(1, a * e^{-theta x}); a may exceed 1.
struct ScaledExponential {
    double scale = 1.0;
    double theta = 0.0;
};

class BoundingFunction;

struct Clamped {
    std::shared_ptr<const BoundingFunction> inner;
};

class BoundingFunction {
public:
    using Representation = std::variant<Exponential, ErlangTail, HypoExponentialTail, PointMassTail,
                                        EmpiricalGrid, ScaledExponential, Clamped>;

    static BoundingFunction exponential(double theta);
    static BoundingFunction erlang_tail(double theta, int k);
    static BoundingFunction hypoexponential_tail(double theta1, double theta2);
    static BoundingFunction point_mass(double length);
    // F == 0 on [0, inf).
    static BoundingFunction zero() { return point_mass(0.0); }
    static BoundingFunction grid(std::vector<double> xs, std::vector<double> ps);
    // min(1, scale * e^{-theta x})
    static BoundingFunction scaled_exponential(double scale, double theta);
    static BoundingFunction clamped(BoundingFunction inner);

    // Value at x; 1 for x < 0.
    double operator()(double x) const;

    // True when F(x) -> 0 as x -> infinity, i.e. 1 - F is a proper CDF.
    bool is_proper() const;

    const Representation& representation() const { return rep_; }

private:
    explicit BoundingFunction(Representation rep) : rep_(std::move(rep)) {}
    Representation rep_;
};

// Strictly increasing evaluation points starting at 0.
class XGrid {
public:
    // points >= 2 uniform samples over [0, x_max].
    static XGrid uniform(double x_max, std::size_t points = 10000);
    static XGrid from_points(std::vector<double> xs);

    std::span<const double> points() const { return xs_; }
    std::size_t size() const { return xs_.size(); }
    double back() const { return xs_.back(); }
    bool is_uniform() const { return uniform_; }

private:
    XGrid(std::vector<double> xs, bool uniform) : xs_(std::move(xs)), uniform_(uniform) {}
    std::vector<double> xs_;
    bool uniform_;
};

// (f (x) g)(y) = inf_{0<=x<=y} f(x) + g(y-x), evaluated exactly at one point.
double minplus_convolve_at(const Curve& f, const Curve& g, double y);

// Closed forms for Affine/RateLatency pairs. Other pairs are tabulated on a
// uniform grid over [0, horizon] and returned as a piecewise-affine curve.
Curve minplus_convolve_curves(const Curve& f, const Curve& g, double horizon = 100.0,
                              std::size_t points = 10000);

// sup_{s>=0} inf{tau >= 0 : alpha(s) <= beta(s + tau)}; kInfinity when the
// supremum diverges.
double horizontal_distance(const Curve& alpha, const Curve& beta);

// min(1, inf_{0<=y<=x} F1(y) + F2(x-y)) on the grid.
BoundingFunction convolve_bounding(const BoundingFunction& f1, const BoundingFunction& f2,
                                   const XGrid& grid);
// Same, at a single point, using `points` uniform samples over [0, x].
double convolve_bounding_at(const BoundingFunction& f1, const BoundingFunction& f2, double x,
                            std::size_t points = 10000);

// 1 - (F1 * F2)(x) with Fi = 1 - F̄i and (F1 * F2)(x) = int_0^x F1(x-y) dF2(y):
// the tail of the sum of two independent random variables.
BoundingFunction stieltjes_convolve_tail(const BoundingFunction& f1, const BoundingFunction& f2,
                                         const XGrid& grid);
double stieltjes_convolve_tail_at(const BoundingFunction& f1, const BoundingFunction& f2,
                                  double x, std::size_t points = 10000);

double eval_curve(const Curve& f, double t);
double eval_bounding(const BoundingFunction& f, double x);

}  // namespace snc
