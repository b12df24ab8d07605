#include "snc/bounds.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

namespace snc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

void require_tau(double tau) { require(tau >= 0.0 && std::isfinite(tau), "tau must be finite and >= 0"); }

bool mgf_le_one(double v) { return v <= 1.0 + 1e-12; }

// Grids need a positive range; tau = 0 still evaluates at x = 0.
XGrid grid_for(double x_max, std::size_t points) { return XGrid::uniform(x_max > 0.0 ? x_max : 1.0, points); }

BoundingFunction leftover_bounding(const BoundingFunction& crossing, const BoundingFunction& lengths, bool independent,
                                   const XGrid& grid) {
    return independent ? stieltjes_convolve_tail(crossing, lengths, grid)
                       : convolve_bounding(crossing, lengths, grid);
}

void check_cross_rates(const FlowSAC& crossing, const FlowSAC& traversing, double capacity) {
    require(capacity > 0.0, "capacity must be positive");
    require(crossing.rate < capacity, "r^c < C");
    require(traversing.rate < capacity - crossing.rate, "r^f < C - r^c");
}

DelayBound scaled_delay_bound(std::string name, BoundingFunction g, double service_rate) {
    return DelayBound(std::move(name), [g = std::move(g), service_rate](double tau) {
        require_tau(tau);
        return g(service_rate * tau);
    });
}

}  // namespace

FlowSAC sac_compound_poisson(double lambda, double mu, double theta) {
    require(lambda > 0.0 && mu > 0.0, "lambda > 0 and mu > 0");
    require(theta > 0.0 && theta < mu, "0 < theta < mu");
    return {lambda / (mu - theta), BoundingFunction::exponential(theta)};
}

double compound_poisson_log_mgf(const CompoundPoissonSpec& spec, double theta) {
    spec.validate();
    return std::visit(overloaded{
                          [&](const ExponentialLength& e) {
                              return theta < e.mu ? spec.lambda * theta / (e.mu - theta) : kInfinity;
                          },
                          [&](const DeterministicLength& d) { return spec.lambda * std::expm1(theta * d.length); },
                      },
                      spec.lengths);
}

FlowSAC sac_compound_poisson(const CompoundPoissonSpec& spec, double theta) {
    spec.validate();
    require(theta > 0.0, "theta > 0");
    double log_mgf = compound_poisson_log_mgf(spec, theta);
    require(std::isfinite(log_mgf), "theta inside the MGF domain (theta < mu)");
    return {log_mgf / theta, BoundingFunction::exponential(theta)};
}

double max_theta_for_rate(const CompoundPoissonSpec& spec, double rate) {
    spec.validate();
    if (spec.mean_rate() >= rate) return 0.0;
    if (const auto* e = std::get_if<ExponentialLength>(&spec.lengths)) return e->mu - spec.lambda / rate;
    // r(theta) is increasing from the mean rate; bisect r(theta) = rate.
    double lo = 0.0;
    double hi = 1.0;
    while (compound_poisson_log_mgf(spec, hi) / hi <= rate) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (compound_poisson_log_mgf(spec, mid) / mid <= rate)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

BoundingFunction length_ccdf(const CompoundPoissonSpec& spec) {
    spec.validate();
    return std::visit(overloaded{
                          [](const ExponentialLength& e) { return BoundingFunction::exponential(e.mu); },
                          [](const DeterministicLength& d) { return BoundingFunction::point_mass(d.length); },
                      },
                      spec.lengths);
}

ServiceCurveResult ssc_single_flow(double capacity, const BoundingFunction& length_ccdf) {
    require(capacity > 0.0, "capacity must be positive");
    return {Curve::rate(capacity), length_ccdf};
}

double delay_bound_cor1(const BoundingFunction& length_ccdf, const FlowSAC& traversing, double capacity, double tau,
                        std::size_t points) {
    require(capacity > 0.0, "capacity must be positive");
    require(traversing.rate <= capacity, "r^f <= C");
    require_tau(tau);
    double x = capacity * tau;
    return convolve_bounding(length_ccdf, traversing.bounding, grid_for(x, points))(x);
}

double delay_bound_thm2(const FlowSAC& traversing, double capacity, double tau) {
    require(capacity > 0.0, "capacity must be positive");
    require(traversing.rate <= capacity, "r^f <= C");
    require_tau(tau);
    return traversing.bounding(capacity * tau);
}

ServiceCurveResult ssc_leftover_thm3(const FlowSAC& crossing, const BoundingFunction& aggregate_length_ccdf,
                                     double capacity, const XGrid& grid) {
    require(capacity > 0.0, "capacity must be positive");
    require(crossing.rate < capacity, "r^c < C");
    return {Curve::rate(capacity - crossing.rate), convolve_bounding(crossing.bounding, aggregate_length_ccdf, grid)};
}

ServiceCurveResult ssc_thm4(const FlowSAC& crossing, const BoundingFunction& length_ccdf, double capacity,
                            bool independent, const XGrid& grid) {
    require(capacity > 0.0, "capacity must be positive");
    require(crossing.rate < capacity, "r^c < C");
    return {Curve::rate(capacity - crossing.rate), leftover_bounding(crossing.bounding, length_ccdf, independent, grid)};
}

DelayBound make_cor2_bound(const FlowSAC& crossing, const BoundingFunction& aggregate_length_ccdf,
                           const FlowSAC& traversing, double capacity, double tau_max, std::size_t points) {
    check_cross_rates(crossing, traversing, capacity);
    double rate = capacity - crossing.rate;
    auto grid = grid_for(rate * tau_max, points);
    auto g = convolve_bounding(crossing.bounding, aggregate_length_ccdf, grid);
    return scaled_delay_bound("cor2", convolve_bounding(g, traversing.bounding, grid), rate);
}

DelayBound make_cor3_bound(const FlowSAC& crossing, const BoundingFunction& length_ccdf, const FlowSAC& traversing,
                           double capacity, bool independent, double tau_max, std::size_t points) {
    check_cross_rates(crossing, traversing, capacity);
    double rate = capacity - crossing.rate;
    auto grid = grid_for(rate * tau_max, points);
    auto g = leftover_bounding(crossing.bounding, length_ccdf, independent, grid);
    return scaled_delay_bound(independent ? "cor3_independent" : "cor3_dependent",
                              convolve_bounding(g, traversing.bounding, grid), rate);
}

DelayBound make_thm5_bound(const FlowSAC& crossing, const FlowSAC& traversing, double capacity, bool independent,
                           double tau_max, std::size_t points) {
    require(capacity > 0.0, "capacity must be positive");
    require(traversing.rate + crossing.rate < capacity, "r^f + r^c < C");
    double rate = capacity - crossing.rate;
    auto grid = grid_for(rate * tau_max, points);
    return scaled_delay_bound(independent ? "thm5_independent" : "thm5_dependent",
                              leftover_bounding(crossing.bounding, traversing.bounding, independent, grid), rate);
}

double delay_bound_cor2(const FlowSAC& crossing, const BoundingFunction& aggregate_length_ccdf,
                        const FlowSAC& traversing, double capacity, double tau, std::size_t points) {
    require_tau(tau);
    return make_cor2_bound(crossing, aggregate_length_ccdf, traversing, capacity, tau, points)(tau);
}

double delay_bound_cor3(const FlowSAC& crossing, const BoundingFunction& length_ccdf, const FlowSAC& traversing,
                        double capacity, double tau, bool independent, std::size_t points) {
    require_tau(tau);
    return make_cor3_bound(crossing, length_ccdf, traversing, capacity, independent, tau, points)(tau);
}

double delay_bound_thm5(const FlowSAC& crossing, const FlowSAC& traversing, double capacity, double tau,
                        bool independent, std::size_t points) {
    require_tau(tau);
    return make_thm5_bound(crossing, traversing, capacity, independent, tau, points)(tau);
}

Thm6Params thm6_default_params(double lambda_f, double lambda_c, double mu, double capacity) {
    require(lambda_f >= 0.0 && lambda_c >= 0.0 && lambda_f + lambda_c > 0.0, "arrival intensities >= 0, not both 0");
    require(mu > 0.0 && capacity > 0.0, "mu > 0 and C > 0");
    double theta = mu - (lambda_f + lambda_c) / capacity;
    require(theta > 0.0, "rho < 1");
    return {theta, lambda_c / (mu - theta)};
}

std::pair<double, double> thm6_mgf_terms(double lambda_f, double lambda_c, double mu, double capacity,
                                         const Thm6Params& params) {
    require(params.theta >= 0.0 && params.theta < mu, "0 <= theta < mu");
    double denom = mu - params.theta;
    double crossing = std::exp(params.theta * (lambda_c / denom - params.crossing_rate));
    double aggregate = std::exp(params.theta * ((lambda_f + lambda_c) / denom - capacity));
    return {crossing, aggregate};
}

double delay_bound_thm6(double lambda_f, double lambda_c, double mu, double capacity, double tau,
                        std::optional<Thm6Params> params) {
    require_tau(tau);
    Thm6Params p = params ? *params : thm6_default_params(lambda_f, lambda_c, mu, capacity);
    require(p.crossing_rate < capacity, "r^c < C");
    auto [crossing, aggregate] = thm6_mgf_terms(lambda_f, lambda_c, mu, capacity, p);
    require(mgf_le_one(crossing), "E[exp(theta (A^c(1) - r^c))] <= 1");
    require(mgf_le_one(aggregate), "E[exp(theta (A^f(1) + A^c(1) - C))] <= 1");
    return std::exp(-p.theta * (capacity - p.crossing_rate) * tau);
}

double exact_mm1_delay_ccdf(double lambda, double mu, double tau) {
    require(lambda >= 0.0 && lambda < mu, "0 <= lambda < mu");
    require_tau(tau);
    return std::exp(-(mu - lambda) * tau);
}

double exact_mm1_priority_mean_delay(double lambda_f, double lambda_c, double mu) {
    require(lambda_f >= 0.0 && lambda_c >= 0.0 && mu > 0.0, "lambda >= 0 and mu > 0");
    double rho_c = lambda_c / mu;
    double rho = (lambda_f + lambda_c) / mu;
    require(rho < 1.0, "rho < 1");
    return rho / (mu * (1.0 - rho_c) * (1.0 - rho)) + 1.0 / mu;
}

double mean_delay_bound_loose(double lambda_f, double lambda_c, double mu) {
    return 2.0 * mean_delay_bound(lambda_f, lambda_c, mu);
}

double mean_delay_bound(double lambda_f, double lambda_c, double mu) {
    require(lambda_f > 0.0 && lambda_c >= 0.0 && mu > 0.0, "lambda_f > 0, lambda_c >= 0, mu > 0");
    double rho = (lambda_f + lambda_c) / mu;
    require(rho < 1.0, "rho < 1");
    return (1.0 / (mu * (1.0 - rho))) * (1.0 + lambda_c / lambda_f);
}

double mean_delay_bound_by_share(double rho, double share, double mu) {
    require(rho >= 0.0 && rho < 1.0, "0 <= rho < 1");
    require(share >= 0.0 && share < 1.0, "0 <= share < 1 (share = 1 leaves rho^f = 0: unbounded)");
    require(mu > 0.0, "mu > 0");
    // 1 + rho^c / rho^f = 1 / (1 - share), which stays finite as rho -> 0.
    return 1.0 / (mu * (1.0 - rho) * (1.0 - share));
}

double exact_mm1_priority_mean_delay_by_share(double rho, double share, double mu) {
    require(rho >= 0.0 && rho < 1.0, "0 <= rho < 1");
    require(share >= 0.0 && share <= 1.0, "0 <= share <= 1");
    require(mu > 0.0, "mu > 0");
    double rho_c = share * rho;
    return rho / (mu * (1.0 - rho_c) * (1.0 - rho)) + 1.0 / mu;
}

double mean_from_ccdf(const std::function<double(double)>& ccdf) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double tau) { return ccdf(tau); }, 1e-12);
}

}  // namespace snc
