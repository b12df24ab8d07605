#include "snc/validation.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace snc {
namespace {

const PacketRecord& record_of(const SimResult& result, Flow flow, std::size_t index) {
    return result.flow(flow)[index - 1];
}

std::vector<double> sorted_copy(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

double dkw_halfwidth(std::size_t n, double delta) {
    if (n == 0) throw std::invalid_argument("DKW band needs at least one sample");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

EmpiricalCcdf estimate_delay_ccdf(std::span<const double> delays, std::span<const double> grid, double delta) {
    if (delays.empty()) throw std::invalid_argument("empty delay sample");
    if (grid.empty()) throw std::invalid_argument("empty tau grid");
    auto sorted = sorted_copy(delays);
    EmpiricalCcdf out;
    out.grid.assign(grid.begin(), grid.end());
    std::sort(out.grid.begin(), out.grid.end());
    out.samples = sorted.size();
    out.delta = delta;
    double hw = dkw_halfwidth(sorted.size(), delta);
    for (double tau : out.grid) {
        auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau);
        out.p_emp.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
        out.halfwidth.push_back(hw);
    }
    return out;
}

void CheckReport::compare(double lhs, double rhs, double tol) {
    ++trials;
    double margin = lhs - rhs;
    worst_margin = std::max(worst_margin, margin);
    double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (margin > tol * scale) ++violations;
}

void CheckReport::equal(double a, double b, double tol) {
    ++trials;
    double margin = std::abs(a - b);
    worst_margin = std::max(worst_margin, margin);
    if (margin > tol * std::max({1.0, std::abs(a), std::abs(b)})) ++violations;
}

void CheckReport::absorb(const CheckReport& other) {
    trials += other.trials;
    violations += other.violations;
    skipped += other.skipped;
    worst_margin = std::max(worst_margin, other.worst_margin);
}

std::string CheckReport::to_string() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", worst_margin);
    std::string s = "check=" + name + " trials=" + std::to_string(trials) + " violations=" +
                    std::to_string(violations) + " worst_margin=" + buf;
    if (skipped) s += " skipped=" + std::to_string(skipped);
    s += passed() ? " verdict=PASS" : " verdict=FAIL";
    return s;
}

CheckReport check_dominance(const EmpiricalCcdf& emp, const DelayBound& bound) {
    CheckReport r{"dominance[" + bound.provenance() + "]"};
    for (std::size_t j = 0; j < emp.grid.size(); ++j) r.compare(emp.p_emp[j] - emp.halfwidth[j], bound(emp.grid[j]), 0.0);
    return r;
}

CheckReport check_two_sided(const EmpiricalCcdf& emp, const std::function<double(double)>& exact, double tol,
                            std::string name) {
    CheckReport r{std::move(name)};
    for (std::size_t j = 0; j < emp.grid.size(); ++j) {
        ++r.trials;
        double margin = std::abs(emp.p_emp[j] - exact(emp.grid[j])) - tol;
        r.worst_margin = std::max(r.worst_margin, margin);
        if (margin > 0.0) ++r.violations;
    }
    return r;
}

double sup_excess(const Trace& trace, double rate, double t) {
    double at_t = trace.cumulative(t);
    double best = at_t - trace.cumulative(0.0) - rate * t;
    best = std::max(best, 0.0);  // s = t
    for (const Packet& p : trace.packets()) {
        if (p.arrival > t) break;
        if (p.arrival <= 0.0) continue;
        best = std::max(best, at_t - trace.cumulative_before(p.arrival) - rate * (t - p.arrival));
    }
    return best;
}

CheckReport check_lemma1(const Trace& traversing, const SimResult& result, double rate,
                         std::span<const double> times) {
    CheckReport r{"lemma1"};
    auto v = virtual_time(traversing, rate);
    Curve beta = Curve::rate(rate);
    for (double t : times) {
        auto i = index_at(result, Flow::Traversing, t);
        if (!i) {
            ++r.skipped;
            continue;
        }
        const PacketRecord& p = record_of(result, Flow::Traversing, *i);
        double lhs = arrival_convolution(traversing, beta, t) - result.departed(Flow::Traversing, t);
        double rhs = rate * (p.departure - v.values[*i - 1]) + p.length;
        r.compare(lhs, rhs);
    }
    return r;
}

CheckReport check_lemma2(const Trace& traversing, const SimResult& result) {
    CheckReport r{"lemma2"};
    auto v = virtual_time(traversing, result.capacity());
    auto recs = result.flow(Flow::Traversing);
    if (recs.size() != v.values.size()) throw std::invalid_argument("simulation does not match the trace");
    for (std::size_t k = 0; k < recs.size(); ++k) {
        r.equal(recs[k].departure, v.values[k]);
    }
    return r;
}

CheckReport check_thm1_pathwise(const Trace& traversing, const SimResult& result, std::span<const double> times) {
    CheckReport r{"thm1_pathwise"};
    Curve beta = Curve::rate(result.capacity());
    for (double t : times) {
        auto i = index_at(result, Flow::Traversing, t);
        if (!i) {
            ++r.skipped;
            continue;
        }
        double lhs = arrival_convolution(traversing, beta, t) - result.departed(Flow::Traversing, t);
        r.compare(lhs, record_of(result, Flow::Traversing, *i).length);
    }
    return r;
}

CheckReport check_lemma4(const Trace& traversing, const Trace& crossing, const SimResult& result,
                         double crossing_rate) {
    const double cap = result.capacity();
    if (!(crossing_rate >= 0.0 && crossing_rate < cap)) throw PreconditionError("0 <= r^c < C");
    CheckReport r{"lemma4"};
    double leftover = cap - crossing_rate;
    auto v = virtual_time(traversing, leftover);
    auto recs = result.flow(Flow::Traversing);
    for (std::size_t k = 0; k < recs.size(); ++k) {
        double d = recs[k].departure;
        r.compare(d, v.values[k] + sup_excess(crossing, crossing_rate, d) / leftover);
    }
    return r;
}

CheckReport check_lemma5(const Trace& traversing, const Trace& crossing, const SimResult& result, double crossing_rate,
                         std::span<const double> times) {
    const double cap = result.capacity();
    if (!(crossing_rate >= 0.0 && crossing_rate < cap)) throw PreconditionError("0 <= r^c < C");
    CheckReport r{"lemma5"};
    Curve beta = Curve::rate(cap - crossing_rate);
    for (double t : times) {
        auto i = index_at(result, Flow::Traversing, t);
        if (!i) {
            ++r.skipped;
            continue;
        }
        const PacketRecord& p = record_of(result, Flow::Traversing, *i);
        double lhs = arrival_convolution(traversing, beta, t) - result.departed(Flow::Traversing, t);
        r.compare(lhs, sup_excess(crossing, crossing_rate, p.departure) + p.length);
    }
    return r;
}

CheckReport check_aggregate_recurrence(const SimResult& result) {
    CheckReport r{"aggregate_recurrence"};
    double prev = 0.0;
    for (const PacketRecord& p : result.output()) {
        double expect = std::max(p.arrival, prev) + p.length / result.capacity();
        r.equal(p.departure, expect);
        prev = p.departure;
    }
    return r;
}

std::size_t count_arrival_inversions(const SimResult& result) {
    auto out = result.output();
    std::size_t n = 0;
    for (std::size_t j = 1; j < out.size(); ++j)
        if (out[j].arrival < out[j - 1].arrival) ++n;
    return n;
}

CheckReport check_work_conservation(const SimResult& result) {
    CheckReport r{"work_conservation"};
    auto out = result.output();
    const double cap = result.capacity();
    // Earliest arrival among packets not yet served at output position j.
    std::vector<double> pending_min(out.size() + 1, kInfinity);
    for (std::size_t j = out.size(); j-- > 0;) pending_min[j] = std::min(pending_min[j + 1], out[j].arrival);

    double busy_start = 0.0;
    double busy_bits = 0.0;
    double prev_departure = 0.0;
    auto close_period = [&](double end) {
        if (busy_bits > 0.0) {
            r.equal(busy_bits, cap * (end - busy_start));
        }
    };
    for (std::size_t j = 0; j < out.size(); ++j) {
        const PacketRecord& p = out[j];
        if (j == 0 || p.start > prev_departure) {
            if (j > 0) close_period(prev_departure);
            // Idle until p.start: nothing unserved may have arrived earlier.
            r.compare(p.start, pending_min[j]);
            busy_start = p.start;
            busy_bits = 0.0;
        }
        busy_bits += p.length;
        prev_departure = p.departure;
        double total = result.departed_total(p.departure);
        double split = result.departed(Flow::Traversing, p.departure) + result.departed(Flow::Crossing, p.departure);
        r.equal(total, split);
    }
    close_period(prev_departure);
    for (Flow f : {Flow::Traversing, Flow::Crossing}) {
        auto recs = result.flow(f);
        for (std::size_t k = 1; k < recs.size(); ++k) r.compare(recs[k - 1].departure, recs[k].departure, 0.0);
    }
    return r;
}

CheckReport check_sac_empirical(const CompoundPoissonSpec& spec, const Curve& alpha, const BoundingFunction& bounding,
                                std::size_t replications, double t, std::span<const double> xs, std::uint64_t seed) {
    if (replications == 0) throw std::invalid_argument("replications must be >= 1");
    std::vector<double> gaps(replications);
    parallel_for(replications, [&](std::size_t k) {
        auto trace = generate_compound_poisson(spec, t, derive_seed(seed, k));
        gaps[k] = sac_gap(trace, alpha, t);
    });
    std::sort(gaps.begin(), gaps.end());
    CheckReport r{"sac_empirical"};
    const double n = static_cast<double>(replications);
    for (double x : xs) {
        auto above = gaps.end() - std::upper_bound(gaps.begin(), gaps.end(), x);
        double freq = static_cast<double>(above) / n;
        double f = bounding(x);
        r.compare(freq, f + 3.0 * std::sqrt(f * (1.0 - f) / n), 0.0);
    }
    return r;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = w; k < n; k += workers) fn(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

NodeInput make_input(const CompoundPoissonSpec& traversing, const std::optional<CompoundPoissonSpec>& crossing,
                     double horizon, std::uint64_t seed) {
    NodeInput in;
    in.traversing = generate_compound_poisson(traversing, horizon, derive_seed(seed, 0), Flow::Traversing);
    if (crossing) in.crossing = generate_compound_poisson(*crossing, horizon, derive_seed(seed, 1), Flow::Crossing);
    return in;
}

}  // namespace

std::vector<double> replicated_delays(const ReplicationPlan& plan) {
    if (plan.replications == 0 || plan.sample_index == 0) throw std::invalid_argument("empty replication plan");
    plan.node.validate();
    const double base = 1.5 * static_cast<double>(plan.sample_index) / plan.traversing.lambda;
    std::vector<double> out(plan.replications);
    parallel_for(plan.replications, [&](std::size_t k) {
        std::uint64_t seed = derive_seed(plan.seed, k);
        for (double horizon = base;; horizon *= 2.0) {
            auto in = make_input(plan.traversing, plan.crossing, horizon, seed);
            if (in.traversing.size() < plan.sample_index) continue;
            auto res = simulate(in, plan.node);
            const PacketRecord& p = res.flow(Flow::Traversing)[plan.sample_index - 1];
            // Arrivals after the service start cannot affect it.
            if (p.start > horizon) continue;
            out[k] = p.delay();
            return;
        }
    });
    return out;
}

std::vector<double> long_run_delays(const CompoundPoissonSpec& traversing,
                                    const std::optional<CompoundPoissonSpec>& crossing, const NodeConfig& node,
                                    std::size_t packets, double warmup_fraction, std::uint64_t seed) {
    if (packets == 0) throw std::invalid_argument("packets must be >= 1");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw std::invalid_argument("warm-up fraction in [0, 1)");
    for (double horizon = 1.02 * static_cast<double>(packets) / traversing.lambda + 100.0;; horizon *= 1.25) {
        auto in = make_input(traversing, crossing, horizon, seed);
        if (in.traversing.size() < packets) continue;
        auto res = simulate(in, node);
        auto recs = res.flow(Flow::Traversing);
        if (recs[packets - 1].start > horizon) continue;
        auto skip = static_cast<std::size_t>(warmup_fraction * static_cast<double>(packets));
        std::vector<double> out;
        out.reserve(packets - skip);
        for (std::size_t k = skip; k < packets; ++k) out.push_back(recs[k].delay());
        return out;
    }
}

MeanEstimate batch_means(std::span<const double> samples, std::size_t batches) {
    if (batches < 2 || samples.size() < batches) throw std::invalid_argument("need at least two non-empty batches");
    std::size_t per = samples.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t k = b * per; k < (b + 1) * per; ++k) s += samples[k];
        means[b] = s / static_cast<double>(per);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(batches);
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(batches - 1);
    boost::math::students_t dist(static_cast<double>(batches - 1));
    double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    return {m, q * std::sqrt(var / static_cast<double>(batches)), batches};
}

void save_ccdf_csv(const EmpiricalCcdf& emp, const DelayBound& bound, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "tau,p_emp,halfwidth,bound\n";
    char buf[160];
    for (std::size_t j = 0; j < emp.grid.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", emp.grid[j], emp.p_emp[j], emp.halfwidth[j],
                      bound(emp.grid[j]));
        out << buf;
    }
}

}  // namespace snc
