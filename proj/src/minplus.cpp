#include "snc/minplus.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace snc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// Index of the segment covering t (t >= 0).
std::size_t segment_index(const PiecewiseAffine& f, double t) {
    auto it = std::upper_bound(f.segments.begin(), f.segments.end(), t,
                               [](double v, const Segment& s) { return v < s.start; });
    return static_cast<std::size_t>(std::distance(f.segments.begin(), it)) - 1;
}

double eval_piecewise(const PiecewiseAffine& f, double t) {
    const Segment& s = f.segments[segment_index(f, t)];
    return s.value + s.slope * (t - s.start);
}

double segment_end(const PiecewiseAffine& f, std::size_t k) {
    return k + 1 < f.segments.size() ? f.segments[k + 1].start : kInfinity;
}

// inf{t >= 0 : f(t) >= v}
double lower_inverse(const PiecewiseAffine& f, double v) {
    for (std::size_t k = 0; k < f.segments.size(); ++k) {
        const Segment& s = f.segments[k];
        if (v <= s.value) return s.start;
        if (s.slope > 0.0) {
            double t = s.start + (v - s.value) / s.slope;
            if (t < segment_end(f, k)) return t;
        }
    }
    return kInfinity;
}

// inf{t >= 0 : f(t) > v}
double upper_inverse(const PiecewiseAffine& f, double v) {
    for (std::size_t k = 0; k < f.segments.size(); ++k) {
        const Segment& s = f.segments[k];
        if (v < s.value) return s.start;
        if (s.slope > 0.0) {
            double t = s.start + (v - s.value) / s.slope;
            if (t < segment_end(f, k)) return t;
        }
    }
    return kInfinity;
}

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<double> tabulate(const BoundingFunction& f, std::span<const double> xs) {
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(), [&](double x) { return f(x); });
    return out;
}

struct ScaledRate {
    double scale;
    double theta;
};

std::optional<ScaledRate> as_scaled_exponential(const BoundingFunction::Representation& r) {
    if (const auto* e = std::get_if<Exponential>(&r)) return ScaledRate{1.0, e->theta};
    if (const auto* e = std::get_if<ScaledExponential>(&r)) return ScaledRate{e->scale, e->theta};
    return std::nullopt;
}

// Stationary point of a e^{-alpha y} + b e^{-beta (x - y)} over y in R.
double scaled_pair_argmin(ScaledRate f, ScaledRate g, double x) {
    return (g.theta * x + std::log((f.scale * f.theta) / (g.scale * g.theta))) / (f.theta + g.theta);
}

// inf over y in [0, x]; the sum is convex so the clamped stationary point
// is the minimiser.
double scaled_pair_minplus(ScaledRate f, ScaledRate g, double x) {
    if (x <= 0.0) return f.scale + g.scale;
    double y = std::clamp(scaled_pair_argmin(f, g, x), 0.0, x);
    return f.scale * std::exp(-f.theta * y) + g.scale * std::exp(-g.theta * (x - y));
}

double erlang_tail_value(double theta, int k, double x) {
    if (x < 0.0) return 1.0;
    double term = 1.0;
    double sum = 1.0;
    double z = theta * x;
    for (int n = 1; n < k; ++n) {
        term *= z / n;
        sum += term;
    }
    return clamp01(std::exp(-z) * sum);
}

}  // namespace

// ---------------------------------------------------------------------------
// Curve

Curve Curve::affine(double burst, double rate) {
    require(burst >= 0.0 && rate >= 0.0, "affine curve needs burst >= 0 and rate >= 0");
    return Curve(Affine{burst, rate});
}

Curve Curve::rate_latency(double rate, double latency) {
    require(rate >= 0.0 && latency >= 0.0, "rate-latency curve needs rate >= 0 and latency >= 0");
    return Curve(RateLatency{rate, latency});
}

Curve Curve::piecewise(std::vector<Segment> segments) {
    require(!segments.empty(), "piecewise curve needs at least one segment");
    require(segments.front().start == 0.0, "piecewise curve must start at t = 0");
    require(segments.front().value >= 0.0, "piecewise curve must be non-negative");
    for (std::size_t k = 0; k < segments.size(); ++k) {
        require(segments[k].slope >= 0.0 && std::isfinite(segments[k].slope),
                "piecewise curve slopes must be finite and non-negative");
        if (k == 0) continue;
        const Segment& prev = segments[k - 1];
        require(segments[k].start > prev.start, "piecewise breakpoints must be strictly increasing");
        double reached = prev.value + prev.slope * (segments[k].start - prev.start);
        require(segments[k].value >= reached - 1e-12 * std::max(1.0, std::abs(reached)),
                "piecewise curve must be non-decreasing");
    }
    return Curve(PiecewiseAffine{std::move(segments)});
}

double Curve::operator()(double t) const {
    require(t >= 0.0, "curve evaluated at negative time");
    return std::visit(overloaded{
                          [&](const Affine& a) { return a.burst + a.rate * t; },
                          [&](const RateLatency& r) { return r.rate * std::max(t - r.latency, 0.0); },
                          [&](const PiecewiseAffine& p) { return eval_piecewise(p, t); },
                      },
                      rep_);
}

double Curve::left_limit(double t) const {
    require(t >= 0.0, "curve evaluated at negative time");
    if (t == 0.0) return (*this)(0.0);
    if (const auto* p = std::get_if<PiecewiseAffine>(&rep_)) {
        std::size_t k = segment_index(*p, t);
        if (p->segments[k].start == t) {
            const Segment& prev = p->segments[k - 1];
            return prev.value + prev.slope * (t - prev.start);
        }
    }
    return (*this)(t);
}

double Curve::asymptotic_rate() const {
    return std::visit(overloaded{
                          [](const Affine& a) { return a.rate; },
                          [](const RateLatency& r) { return r.rate; },
                          [](const PiecewiseAffine& p) { return p.segments.back().slope; },
                      },
                      rep_);
}

PiecewiseAffine Curve::as_piecewise() const {
    return std::visit(overloaded{
                          [](const Affine& a) { return PiecewiseAffine{{{0.0, a.burst, a.rate}}}; },
                          [](const RateLatency& r) {
                              if (r.latency == 0.0) return PiecewiseAffine{{{0.0, 0.0, r.rate}}};
                              return PiecewiseAffine{{{0.0, 0.0, 0.0}, {r.latency, 0.0, r.rate}}};
                          },
                          [](const PiecewiseAffine& p) { return p; },
                      },
                      rep_);
}

// ---------------------------------------------------------------------------
// BoundingFunction

BoundingFunction BoundingFunction::exponential(double theta) {
    require(theta > 0.0 && std::isfinite(theta), "exponential bounding function needs theta > 0");
    return BoundingFunction(Exponential{theta});
}

BoundingFunction BoundingFunction::erlang_tail(double theta, int k) {
    require(theta > 0.0 && k >= 1, "Erlang tail needs theta > 0 and k >= 1");
    return BoundingFunction(ErlangTail{theta, k});
}

BoundingFunction BoundingFunction::hypoexponential_tail(double theta1, double theta2) {
    require(theta1 > 0.0 && theta2 > 0.0, "hypoexponential tail needs positive rates");
    if (nearly_equal(theta1, theta2)) return erlang_tail(theta1, 2);
    return BoundingFunction(HypoExponentialTail{theta1, theta2});
}

BoundingFunction BoundingFunction::point_mass(double length) {
    require(length >= 0.0 && std::isfinite(length), "point mass needs a finite length >= 0");
    return BoundingFunction(PointMassTail{length});
}

BoundingFunction BoundingFunction::grid(std::vector<double> xs, std::vector<double> ps) {
    require(!xs.empty() && xs.size() == ps.size(), "empirical grid needs matching non-empty x and p");
    for (std::size_t j = 0; j < xs.size(); ++j) {
        require(ps[j] >= 0.0 && ps[j] <= 1.0, "empirical grid probabilities must lie in [0,1]");
        if (j == 0) continue;
        require(xs[j] > xs[j - 1], "empirical grid x must be strictly increasing");
        require(ps[j] <= ps[j - 1], "empirical grid must be non-increasing");
    }
    return BoundingFunction(EmpiricalGrid{std::move(xs), std::move(ps)});
}

BoundingFunction BoundingFunction::scaled_exponential(double scale, double theta) {
    require(scale >= 0.0 && theta > 0.0, "scaled exponential needs scale >= 0 and theta > 0");
    return BoundingFunction(ScaledExponential{scale, theta});
}

BoundingFunction BoundingFunction::clamped(BoundingFunction inner) {
    return BoundingFunction(Clamped{std::make_shared<const BoundingFunction>(std::move(inner))});
}

double BoundingFunction::operator()(double x) const {
    if (x < 0.0) return 1.0;
    return std::visit(
        overloaded{
            [&](const Exponential& e) { return std::exp(-e.theta * x); },
            [&](const ErlangTail& e) { return erlang_tail_value(e.theta, e.k, x); },
            [&](const HypoExponentialTail& h) {
                double v = (h.theta2 * std::exp(-h.theta1 * x) - h.theta1 * std::exp(-h.theta2 * x)) /
                           (h.theta2 - h.theta1);
                return clamp01(v);
            },
            [&](const PointMassTail& p) { return x < p.length ? 1.0 : 0.0; },
            [&](const EmpiricalGrid& g) {
                if (x < g.xs.front()) return 1.0;
                auto it = std::upper_bound(g.xs.begin(), g.xs.end(), x);
                return g.ps[static_cast<std::size_t>(std::distance(g.xs.begin(), it)) - 1];
            },
            [&](const ScaledExponential& s) { return std::min(1.0, s.scale * std::exp(-s.theta * x)); },
            [&](const Clamped& c) { return clamp01((*c.inner)(x)); },
        },
        rep_);
}

bool BoundingFunction::is_proper() const {
    return std::visit(overloaded{
                          [](const EmpiricalGrid& g) { return g.ps.back() == 0.0; },
                          [](const Clamped& c) { return c.inner->is_proper(); },
                          [](const auto&) { return true; },
                      },
                      rep_);
}

// ---------------------------------------------------------------------------
// XGrid

XGrid XGrid::uniform(double x_max, std::size_t points) {
    require(points >= 2, "grid needs at least two points");
    require(x_max > 0.0 && std::isfinite(x_max), "grid range must be positive and finite");
    std::vector<double> xs(points);
    for (std::size_t i = 0; i < points; ++i)
        xs[i] = x_max * static_cast<double>(i) / static_cast<double>(points - 1);
    return XGrid(std::move(xs), true);
}

XGrid XGrid::from_points(std::vector<double> xs) {
    require(!xs.empty(), "grid must not be empty");
    require(xs.front() == 0.0, "grid must start at 0");
    for (std::size_t i = 1; i < xs.size(); ++i) require(xs[i] > xs[i - 1], "grid must be strictly increasing");
    bool uniform = xs.size() >= 2;
    if (uniform) {
        double step = xs[1];
        for (std::size_t i = 2; i < xs.size() && uniform; ++i)
            uniform = std::abs(xs[i] - step * static_cast<double>(i)) <= 1e-9 * xs[i];
    }
    return XGrid(std::move(xs), uniform);
}

// ---------------------------------------------------------------------------
// Curve operators

double minplus_convolve_at(const Curve& f, const Curve& g, double y) {
    require(y >= 0.0, "convolution evaluated at negative time");
    auto pf = f.as_piecewise();
    auto pg = g.as_piecewise();
    std::vector<double> cands{0.0, y};
    for (const auto& s : pf.segments)
        if (s.start > 0.0 && s.start < y) cands.push_back(s.start);
    for (const auto& s : pg.segments)
        if (s.start > 0.0 && s.start < y) cands.push_back(y - s.start);
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    double best = kInfinity;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        double c = cands[i];
        double rest = std::max(y - c, 0.0);
        best = std::min(best, f(c) + g(rest));
        if (i + 1 < cands.size()) {
            double next = cands[i + 1];
            best = std::min(best, f(c) + g.left_limit(rest));
            best = std::min(best, f.left_limit(next) + g(std::max(y - next, 0.0)));
        }
    }
    return best;
}

Curve minplus_convolve_curves(const Curve& f, const Curve& g, double horizon, std::size_t points) {
    const auto& rf = f.representation();
    const auto& rg = g.representation();
    if (const auto* a = std::get_if<Affine>(&rf)) {
        if (const auto* b = std::get_if<Affine>(&rg))
            return Curve::affine(a->burst + b->burst, std::min(a->rate, b->rate));
    }
    if (const auto* a = std::get_if<RateLatency>(&rf)) {
        if (const auto* b = std::get_if<RateLatency>(&rg))
            return Curve::rate_latency(std::min(a->rate, b->rate), a->latency + b->latency);
    }
    const Affine* aff = std::get_if<Affine>(&rf);
    const RateLatency* rl = std::get_if<RateLatency>(&rg);
    if (!aff || !rl) {
        aff = std::get_if<Affine>(&rg);
        rl = std::get_if<RateLatency>(&rf);
    }
    if (aff && rl) {
        // b + min(r, R) * (t - T)^+
        double rate = std::min(aff->rate, rl->rate);
        if (aff->burst == 0.0) return Curve::rate_latency(rate, rl->latency);
        if (rl->latency == 0.0) return Curve::affine(aff->burst, rate);
        return Curve::piecewise({{0.0, aff->burst, 0.0}, {rl->latency, aff->burst, rate}});
    }

    require(points >= 2 && horizon > 0.0, "convolution grid needs points >= 2 and horizon > 0");
    double step = horizon / static_cast<double>(points - 1);
    std::vector<double> values(points);
    for (std::size_t i = 0; i < points; ++i) values[i] = minplus_convolve_at(f, g, step * static_cast<double>(i));
    std::vector<Segment> segs;
    segs.reserve(points);
    for (std::size_t i = 0; i + 1 < points; ++i) {
        double slope = std::max(0.0, (values[i + 1] - values[i]) / step);
        segs.push_back({step * static_cast<double>(i), values[i], slope});
    }
    segs.push_back({horizon, values.back(), std::min(f.asymptotic_rate(), g.asymptotic_rate())});
    for (std::size_t i = 1; i < segs.size(); ++i) {
        double reached = segs[i - 1].value + segs[i - 1].slope * (segs[i].start - segs[i - 1].start);
        segs[i].value = std::max(segs[i].value, reached);
    }
    return Curve::piecewise(std::move(segs));
}

double horizontal_distance(const Curve& alpha, const Curve& beta) {
    auto pa = alpha.as_piecewise();
    auto pb = beta.as_piecewise();
    double ra = alpha.asymptotic_rate();
    double rb = beta.asymptotic_rate();
    if (ra > rb) return kInfinity;
    if (rb == 0.0 && pa.segments.back().value > pb.segments.back().value) return kInfinity;

    std::vector<double> cands{0.0};
    for (const auto& s : pa.segments) cands.push_back(s.start);
    auto add_level = [&](double w) {
        for (std::size_t j = 0; j < pa.segments.size(); ++j) {
            const Segment& s = pa.segments[j];
            if (s.slope <= 0.0) continue;
            double t = s.start + (w - s.value) / s.slope;
            if (t >= s.start && t < segment_end(pa, j)) cands.push_back(t);
        }
    };
    for (std::size_t k = 0; k < pb.segments.size(); ++k) {
        const Segment& s = pb.segments[k];
        add_level(s.value);
        double end = segment_end(pb, k);
        if (std::isfinite(end)) add_level(s.value + s.slope * (end - s.start));
    }

    double sup = 0.0;
    for (double s : cands) {
        std::size_t j = segment_index(pa, s);
        double v = eval_piecewise(pa, s);
        sup = std::max(sup, lower_inverse(pb, v) - s);
        if (pa.segments[j].slope > 0.0) sup = std::max(sup, upper_inverse(pb, v) - s);
        if (s > 0.0) sup = std::max(sup, lower_inverse(pb, alpha.left_limit(s)) - s);
    }
    return sup;
}

// ---------------------------------------------------------------------------
// Bounding-function operators

BoundingFunction convolve_bounding(const BoundingFunction& f1, const BoundingFunction& f2,
                                   const XGrid& grid) {
    const auto& r1 = f1.representation();
    const auto& r2 = f2.representation();
    auto xs = grid.points();
    std::vector<double> out(xs.size());

    auto s1 = as_scaled_exponential(r1);
    auto s2 = as_scaled_exponential(r2);
    if (s1 && s2) {
        // With both scales >= 1 the unconstrained minimum is
        // k e^{-theta1 theta2 x / (theta1 + theta2)}, and wherever the
        // constrained one differs the value is clamped to 1 anyway.
        if (s1->scale >= 1.0 && s2->scale >= 1.0) {
            double kappa = std::log((s1->scale * s1->theta) / (s2->scale * s2->theta));
            double sum = s1->theta + s2->theta;
            double k = s1->scale * std::exp(-s1->theta * kappa / sum) + s2->scale * std::exp(s2->theta * kappa / sum);
            return BoundingFunction::scaled_exponential(k, s1->theta * s2->theta / sum);
        }
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::min(1.0, scaled_pair_minplus(*s1, *s2, xs[i]));
        for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
        return BoundingFunction::grid({xs.begin(), xs.end()}, std::move(out));
    }

    const BoundingFunction* shifted = nullptr;
    double shift = 0.0;
    if (const auto* p = std::get_if<PointMassTail>(&r2)) {
        shifted = &f1;
        shift = p->length;
    } else if (const auto* p = std::get_if<PointMassTail>(&r1)) {
        shifted = &f2;
        shift = p->length;
    }
    if (shifted && shift == 0.0) return BoundingFunction::clamped(*shifted);
    if (shifted) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] >= shift ? clamp01((*shifted)(xs[i] - shift)) : 1.0;
        return BoundingFunction::grid({xs.begin(), xs.end()}, std::move(out));
    }

    if (grid.is_uniform()) {
        auto t1 = tabulate(f1, xs);
        auto t2 = tabulate(f2, xs);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double best = kInfinity;
            for (std::size_t j = 0; j <= i; ++j) best = std::min(best, t1[j] + t2[i - j]);
            out[i] = std::min(1.0, best);
        }
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double best = kInfinity;
            for (std::size_t j = 0; j <= i; ++j) best = std::min(best, f1(xs[j]) + f2(xs[i] - xs[j]));
            out[i] = std::min(1.0, best);
        }
    }
    for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
    return BoundingFunction::grid({xs.begin(), xs.end()}, std::move(out));
}

double convolve_bounding_at(const BoundingFunction& f1, const BoundingFunction& f2, double x,
                            std::size_t points) {
    if (x <= 0.0) return std::min(1.0, f1(0.0) + f2(0.0));
    return convolve_bounding(f1, f2, XGrid::uniform(x, points))(x);
}

BoundingFunction stieltjes_convolve_tail(const BoundingFunction& f1, const BoundingFunction& f2,
                                         const XGrid& grid) {
    require(f1.is_proper() && f2.is_proper(),
            "Stieltjes convolution needs proper distributions (tail must vanish at infinity)");
    const auto& r1 = f1.representation();
    const auto& r2 = f2.representation();

    auto erlang_of = [](const BoundingFunction::Representation& r) -> std::optional<ErlangTail> {
        if (const auto* e = std::get_if<Exponential>(&r)) return ErlangTail{e->theta, 1};
        if (const auto* e = std::get_if<ErlangTail>(&r)) return *e;
        return std::nullopt;
    };
    auto k1 = erlang_of(r1);
    auto k2 = erlang_of(r2);
    if (k1 && k2) {
        if (nearly_equal(k1->theta, k2->theta)) return BoundingFunction::erlang_tail(k1->theta, k1->k + k2->k);
        if (k1->k == 1 && k2->k == 1) return BoundingFunction::hypoexponential_tail(k1->theta, k2->theta);
    }

    auto xs = grid.points();
    std::vector<double> out(xs.size());
    const BoundingFunction* shifted = nullptr;
    double shift = 0.0;
    if (const auto* p = std::get_if<PointMassTail>(&r2)) {
        shifted = &f1;
        shift = p->length;
    } else if (const auto* p = std::get_if<PointMassTail>(&r1)) {
        shifted = &f2;
        shift = p->length;
    }
    if (shifted && shift == 0.0) return *shifted;
    if (shifted) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = clamp01((*shifted)(xs[i] - shift));
        return BoundingFunction::grid({xs.begin(), xs.end()}, std::move(out));
    }

    // P{X1 + X2 <= x} = F1(x) F2(0) + sum over cells (y_j, y_{j+1}] of the
    // trapezoidal average of F1(x - y) times the F2 increment.
    auto cdf1 = [&](double x) { return 1.0 - f1(x); };
    auto cdf2 = [&](double x) { return 1.0 - f2(x); };
    double atom2 = cdf2(0.0);
    if (grid.is_uniform()) {
        std::vector<double> c1(xs.size()), d2(xs.size(), 0.0);
        for (std::size_t k = 0; k < xs.size(); ++k) c1[k] = cdf1(xs[k]);
        for (std::size_t j = 0; j + 1 < xs.size(); ++j) d2[j] = cdf2(xs[j + 1]) - cdf2(xs[j]);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double mass = c1[i] * atom2;
            for (std::size_t j = 0; j < i; ++j) mass += 0.5 * (c1[i - j] + c1[i - j - 1]) * d2[j];
            out[i] = clamp01(1.0 - mass);
        }
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double x = xs[i];
            double mass = cdf1(x) * atom2;
            for (std::size_t j = 0; j < i; ++j)
                mass += 0.5 * (cdf1(x - xs[j]) + cdf1(x - xs[j + 1])) * (cdf2(xs[j + 1]) - cdf2(xs[j]));
            out[i] = clamp01(1.0 - mass);
        }
    }
    for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
    return BoundingFunction::grid({xs.begin(), xs.end()}, std::move(out));
}

double stieltjes_convolve_tail_at(const BoundingFunction& f1, const BoundingFunction& f2, double x,
                                  std::size_t points) {
    if (x < 0.0) return 1.0;
    if (x == 0.0) return stieltjes_convolve_tail(f1, f2, XGrid::uniform(1.0, 2))(0.0);
    return stieltjes_convolve_tail(f1, f2, XGrid::uniform(x, points))(x);
}

double eval_curve(const Curve& f, double t) { return f(t); }

double eval_bounding(const BoundingFunction& f, double x) { return f(x); }

}  // namespace snc
