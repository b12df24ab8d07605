// bounds.hpp - Stochastic service curves and delay bounds for a constant-capacity node.
//
// Traffic is described by v.b.c stochastic arrival curves r * t with a
// bounding function F̄ (FlowSAC). Service is described by a service curve
// with bounding function Ḡ (ServiceCurveResult). The delay bounds return
// P{D > tau} upper bounds for every packet of the traversing flow.
//
// Notation used in names: `f` is the traversing flow, `c` the crossing flow,
// `Fl` the traversing packet-length CCDF and `Flg` the length CCDF of the
// aggregate of both flows.

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "snc/minplus.hpp"
#include "snc/traffic.hpp"

namespace snc {

// A violated stability or parameter precondition; what() names it.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FlowSAC {
    double rate = 0.0;
    BoundingFunction bounding = BoundingFunction::zero();
};

struct ServiceCurveResult {
    Curve curve = Curve::rate(0.0);
    BoundingFunction bounding = BoundingFunction::zero();
};

class DelayBound {
public:
    DelayBound(std::string provenance, std::function<double(double)> eval)
        : provenance_(std::move(provenance)), eval_(std::move(eval)) {}
    double operator()(double tau) const { return eval_(tau); }
    const std::string& provenance() const { return provenance_; }

private:
    std::string provenance_;
    std::function<double(double)> eval_;
};

// Grid resolution for bounds without a closed form.
inline constexpr std::size_t kDefaultGridPoints = 4000;

// ---------------------------------------------------------------------------
// Arrival curves

// Compound Poisson with Exp(mu) lengths: r = lambda / (mu - theta), F̄ = e^{-theta x}.
FlowSAC sac_compound_poisson(double lambda, double mu, double theta);
// Any supported length law: r = log E[e^{theta A(1)}] / theta, F̄ = e^{-theta x}.
FlowSAC sac_compound_poisson(const CompoundPoissonSpec& spec, double theta);
// log E[e^{theta A(1)}] = lambda (E[e^{theta l}] - 1); infinite past the MGF domain.
double compound_poisson_log_mgf(const CompoundPoissonSpec& spec, double theta);
// Largest theta whose SAC rate stays <= rate (0 when none is positive).
double max_theta_for_rate(const CompoundPoissonSpec& spec, double rate);
// CCDF of the packet length distribution.
BoundingFunction length_ccdf(const CompoundPoissonSpec& spec);

// ---------------------------------------------------------------------------
// Single flow

// Service curve C t with Ḡ = F̄^l.
ServiceCurveResult ssc_single_flow(double capacity, const BoundingFunction& length_ccdf);

// P{D > tau} <= (F̄^l (x) F̄^f)(C tau); needs r^f <= C.
double delay_bound_cor1(const BoundingFunction& length_ccdf, const FlowSAC& traversing, double capacity,
                        double tau, std::size_t points = kDefaultGridPoints);
// P{D > tau} <= F̄^f(C tau); needs r^f <= C.
double delay_bound_thm2(const FlowSAC& traversing, double capacity, double tau);

// ---------------------------------------------------------------------------
// Cross traffic

// Leftover service (C - r^c) t with Ḡ = F̄^c (x) F̄^{l^g}; needs r^c < C.
ServiceCurveResult ssc_leftover_thm3(const FlowSAC& crossing, const BoundingFunction& aggregate_length_ccdf,
                                     double capacity, const XGrid& grid);
// Service (C - r^c) t with Ḡ = F̄^c (x) F̄^l, or 1 - F^c * F^l when the
// flows are independent; needs r^c < C.
ServiceCurveResult ssc_thm4(const FlowSAC& crossing, const BoundingFunction& length_ccdf, double capacity,
                            bool independent, const XGrid& grid);

// (F̄^c (x) F̄^{l^g} (x) F̄^f)((C - r^c) tau); needs r^f < C - r^c.
double delay_bound_cor2(const FlowSAC& crossing, const BoundingFunction& aggregate_length_ccdf,
                        const FlowSAC& traversing, double capacity, double tau,
                        std::size_t points = kDefaultGridPoints);
// Dependent: (F̄^c (x) F̄^l (x) F̄^f)((C - r^c) tau).
// Independent: ((1 - F^c * F^l) (x) F̄^f)((C - r^c) tau).
double delay_bound_cor3(const FlowSAC& crossing, const BoundingFunction& length_ccdf, const FlowSAC& traversing,
                        double capacity, double tau, bool independent, std::size_t points = kDefaultGridPoints);
// Dependent: (F̄^c (x) F̄^f)((C - r^c) tau). Independent: (1 - F^c * F^f)((C - r^c) tau).
// Needs r^f + r^c < C.
double delay_bound_thm5(const FlowSAC& crossing, const FlowSAC& traversing, double capacity, double tau,
                        bool independent, std::size_t points = kDefaultGridPoints);

// Grid-backed versions for evaluating many tau in [0, tau_max]; the bounding
// function is tabulated once and read with left-hold interpolation.
DelayBound make_cor2_bound(const FlowSAC& crossing, const BoundingFunction& aggregate_length_ccdf,
                           const FlowSAC& traversing, double capacity, double tau_max,
                           std::size_t points = kDefaultGridPoints);
DelayBound make_cor3_bound(const FlowSAC& crossing, const BoundingFunction& length_ccdf, const FlowSAC& traversing,
                           double capacity, bool independent, double tau_max,
                           std::size_t points = kDefaultGridPoints);
DelayBound make_thm5_bound(const FlowSAC& crossing, const FlowSAC& traversing, double capacity, bool independent,
                           double tau_max, std::size_t points = kDefaultGridPoints);

// Compound Poisson inputs with Exp(mu) lengths and independent increments.
struct Thm6Params {
    double theta = 0.0;
    double crossing_rate = 0.0;  // r^c
};
// theta = mu - (lambda_f + lambda_c) / C and r^c = lambda_c / (mu - theta).
Thm6Params thm6_default_params(double lambda_f, double lambda_c, double mu, double capacity);
// E[e^{theta (A^c(1) - r^c)}] and E[e^{theta (A^f(1) + A^c(1) - C)}].
std::pair<double, double> thm6_mgf_terms(double lambda_f, double lambda_c, double mu, double capacity,
                                         const Thm6Params& params);
// e^{-theta (C - r^c) tau}; both MGF terms must be <= 1.
double delay_bound_thm6(double lambda_f, double lambda_c, double mu, double capacity, double tau,
                        std::optional<Thm6Params> params = std::nullopt);

// ---------------------------------------------------------------------------
// Exact queueing results and mean-delay bounds

// M/M/1 system-time CCDF e^{-(mu - lambda) tau}.
double exact_mm1_delay_ccdf(double lambda, double mu, double tau);
// Low-priority mean system time in a two-class non-preemptive M/M/1.
double exact_mm1_priority_mean_delay(double lambda_f, double lambda_c, double mu);
// (2 / (mu (1 - rho))) (1 + rho^c / rho^f)
double mean_delay_bound_loose(double lambda_f, double lambda_c, double mu);
// (1 / (mu (1 - rho))) (1 + rho^c / rho^f)
double mean_delay_bound(double lambda_f, double lambda_c, double mu);
// The same bound by total load and cross share rho^c / rho; defined at rho = 0.
double mean_delay_bound_by_share(double rho, double share, double mu);
double exact_mm1_priority_mean_delay_by_share(double rho, double share, double mu);

// E[D] = int_0^inf P{D > tau} dtau.
double mean_from_ccdf(const std::function<double(double)>& ccdf);

}  // namespace snc
