// validation.hpp - Monte Carlo and sample-path checks tying simulation to the bounds.
//
// Sample-path checks evaluate both sides of an inequality exactly (sups and
// infs over step functions are taken at jump instants and their left limits)
// and compare with a relative tolerance. Dominance checks compare an
// empirical delay CCDF, lowered by its DKW half-width, with a bound.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snc/bounds.hpp"
#include "snc/node_sim.hpp"

namespace snc {

inline constexpr double kPathTolerance = 1e-9;

// sqrt(ln(2 / delta) / (2 n))
double dkw_halfwidth(std::size_t n, double delta);

struct EmpiricalCcdf {
    std::vector<double> grid;
    std::vector<double> p_emp;  // fraction of samples > grid[j]
    std::vector<double> halfwidth;
    std::size_t samples = 0;
    double delta = 0.01;
};

EmpiricalCcdf estimate_delay_ccdf(std::span<const double> delays, std::span<const double> grid, double delta = 0.01);

struct CheckReport {
    std::string name;
    std::size_t trials = 0;
    std::size_t violations = 0;
    std::size_t skipped = 0;
    // Largest lhs - rhs seen; positive values are violations before tolerance.
    double worst_margin = -kInfinity;

    bool passed() const { return violations == 0; }
    // Record one comparison lhs <= rhs under relative tolerance tol.
    void compare(double lhs, double rhs, double tol = kPathTolerance);
    // Record one comparison a == b under relative tolerance tol.
    void equal(double a, double b, double tol = kPathTolerance);
    void absorb(const CheckReport& other);
    // `check=... trials=... violations=... worst_margin=... verdict=PASS`
    std::string to_string() const;
};

// Passes iff p_emp[j] - halfwidth[j] <= bound(grid[j]) for every j.
CheckReport check_dominance(const EmpiricalCcdf& emp, const DelayBound& bound);
// |p_emp[j] - exact(grid[j])| <= tol for every j.
CheckReport check_two_sided(const EmpiricalCcdf& emp, const std::function<double(double)>& exact, double tol,
                            std::string name = "two_sided");

// sup_{0<=s<=t} {A(s, t) - r (t - s)}
double sup_excess(const Trace& trace, double rate, double t);

// A^f (x) R t (t) - A^{f*}(t) <= R [d^{i(t)} - V^{i(t)}(R)] + l^{i(t)}
CheckReport check_lemma1(const Trace& traversing, const SimResult& result, double rate, std::span<const double> times);
// d^i = V^i(C) for a single-flow run.
CheckReport check_lemma2(const Trace& traversing, const SimResult& result);
// A^f (x) C t (t) - A^{f*}(t) <= l^{i(t)}
CheckReport check_thm1_pathwise(const Trace& traversing, const SimResult& result, std::span<const double> times);
// d^i <= V^i(C - r^c) + sup_s {A^c(s, d^i) - r^c (d^i - s)} / (C - r^c)
CheckReport check_lemma4(const Trace& traversing, const Trace& crossing, const SimResult& result, double crossing_rate);
// A^f (x) (C - r^c) t (t) - A^{f*}(t) <= sup_s {A^c(s, d^{i(t)}) - r^c (d^{i(t)} - s)} + l^{i(t)}
CheckReport check_lemma5(const Trace& traversing, const Trace& crossing, const SimResult& result, double crossing_rate,
                         std::span<const double> times);
// d^{g,j} = max(a^{g,j}, d^{g,j-1}) + l^{g,j} / C on the output order.
CheckReport check_aggregate_recurrence(const SimResult& result);
// Output-order positions j with a^{g,j} < a^{g,j-1}.
std::size_t count_arrival_inversions(const SimResult& result);
// No idling while work is queued, C x busy time = bits served per busy
// period, FIFO per flow and A*^g = A*^f + A*^c at every departure.
CheckReport check_work_conservation(const SimResult& result);

// P{A(t) - A (x) alpha(t) > x} <= F(x) + 3 sqrt(F(x)(1 - F(x)) / N), one trial per x.
CheckReport check_sac_empirical(const CompoundPoissonSpec& spec, const Curve& alpha, const BoundingFunction& bounding,
                                std::size_t replications, double t, std::span<const double> xs, std::uint64_t seed);

// Runs fn(0..n-1) over hardware threads; results must go to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct ReplicationPlan {
    CompoundPoissonSpec traversing;
    std::optional<CompoundPoissonSpec> crossing;
    NodeConfig node;
    std::size_t replications = 100000;
    std::size_t sample_index = 200;  // traversing packet whose delay is kept
    std::uint64_t seed = 1;
};

// One delay per independent replication, so the samples are i.i.d.
std::vector<double> replicated_delays(const ReplicationPlan& plan);

// Delays of traversing packets from one long run, warm-up prefix dropped.
std::vector<double> long_run_delays(const CompoundPoissonSpec& traversing,
                                    const std::optional<CompoundPoissonSpec>& crossing, const NodeConfig& node,
                                    std::size_t packets, double warmup_fraction, std::uint64_t seed);

struct MeanEstimate {
    double mean = 0.0;
    double halfwidth = 0.0;  // 95% batch-means interval
    std::size_t batches = 0;
};
MeanEstimate batch_means(std::span<const double> samples, std::size_t batches = 50);

// CSV `tau,p_emp,halfwidth,bound`.
void save_ccdf_csv(const EmpiricalCcdf& emp, const DelayBound& bound, const std::filesystem::path& path);

}  // namespace snc
