#include "snc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace snc {
namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
        throw ConfigError(key + ": not a number: '" + value + "'");
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError(key + ": not a non-negative integer: '" + value + "'");
    return v;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const std::filesystem::path& path) : out(path) {
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out << ',';
            out << c;
            first = false;
        }
        out << '\n';
    }
};

std::filesystem::path output_file(const ExperimentConfig& cfg, const std::string& name, RunOutcome& outcome) {
    std::filesystem::create_directories(cfg.out_dir);
    auto path = cfg.out_dir / name;
    outcome.files.push_back(path);
    return path;
}

CheckReport negative_control(const EmpiricalCcdf& emp, const DelayBound& wrong) {
    CheckReport dom = check_dominance(emp, wrong);
    CheckReport r{"negative_control[" + wrong.provenance() + "]"};
    r.trials = 1;
    r.violations = dom.passed() ? 1 : 0;
    r.worst_margin = -dom.worst_margin;
    return r;
}

CheckReport single_check(std::string name, bool ok, double margin) {
    CheckReport r{std::move(name)};
    r.trials = 1;
    r.violations = ok ? 0 : 1;
    r.worst_margin = margin;
    return r;
}

void write_ccdf_table(const std::filesystem::path& path, const EmpiricalCcdf& emp,
                      const std::vector<std::pair<std::string, std::function<double(double)>>>& columns) {
    CsvWriter csv(path);
    std::string header = "tau,p_emp,halfwidth";
    for (const auto& c : columns) header += "," + c.first;
    csv.out << header << '\n';
    for (std::size_t j = 0; j < emp.grid.size(); ++j) {
        csv.out << fmt(emp.grid[j]) << ',' << fmt(emp.p_emp[j]) << ',' << fmt(emp.halfwidth[j]);
        for (const auto& c : columns) csv.out << ',' << fmt(c.second(emp.grid[j]));
        csv.out << '\n';
    }
}

bool is_exponential(const ExperimentConfig& cfg) { return !cfg.length.has_value(); }

}  // namespace

CompoundPoissonSpec ExperimentConfig::traversing_spec() const {
    CompoundPoissonSpec s{lambda_f, ExponentialLength{mu}};
    if (length) s.lengths = DeterministicLength{*length};
    return s;
}

CompoundPoissonSpec ExperimentConfig::crossing_spec() const {
    CompoundPoissonSpec s{lambda_c, ExponentialLength{mu}};
    if (length) s.lengths = DeterministicLength{*length};
    return s;
}

NodeConfig ExperimentConfig::node() const {
    NodeConfig n{capacity, AggregateFifo{}};
    if (scheduler == "priority") n.scheduler = NonPreemptivePriority{Flow::Crossing};
    return n;
}

std::vector<double> ExperimentConfig::tau_grid() const {
    std::vector<double> g;
    auto n = static_cast<std::size_t>(std::floor(tau_max / tau_step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) g.push_back(static_cast<double>(k) * tau_step);
    return g;
}

void ExperimentConfig::validate() const {
    static const std::vector<std::string> scenarios = {"single-flow", "cross-traffic", "sweep", "pitfall",
                                                       "validate-all"};
    if (std::find(scenarios.begin(), scenarios.end(), scenario) == scenarios.end())
        throw ConfigError("scenario: unknown scenario '" + scenario + "'");
    if (scheduler != "priority" && scheduler != "fifo")
        throw ConfigError("node.scheduler: expected priority or fifo, got '" + scheduler + "'");
    if (!(capacity > 0.0)) throw ConfigError("node.capacity: C > 0");
    if (!(mu > 0.0)) throw ConfigError("traffic.mu: mu > 0");
    if (length && !(*length > 0.0)) throw ConfigError("traffic.length: L > 0");
    if (!(lambda_f > 0.0)) throw ConfigError("traffic.lambda_f: lambda_f > 0");
    if (!(lambda_c >= 0.0)) throw ConfigError("traffic.lambda_c: lambda_c >= 0");
    if (replications < 1) throw ConfigError("run.replications: replications >= 1");
    if (sample_index < 1) throw ConfigError("run.sample_index: sample_index >= 1");
    if (packets < 100) throw ConfigError("run.packets: packets >= 100");
    if (traces < 1) throw ConfigError("run.traces: traces >= 1");
    if (!(warmup >= 0.0 && warmup < 1.0)) throw ConfigError("run.warmup: 0 <= warmup < 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("run.delta: 0 < delta < 1");
    if (!(tau_step > 0.0 && tau_max >= 0.0)) throw ConfigError("run.tau_step > 0 and run.tau_max >= 0");
    if (theta && !(*theta > 0.0)) throw ConfigError("bound.theta: theta > 0");

    double mean_len = length ? *length : 1.0 / mu;
    double load_f = lambda_f * mean_len / capacity;
    double load_c = lambda_c * mean_len / capacity;
    if (scenario == "single-flow" && !(load_f < 1.0))
        throw ConfigError("stability: r^f <= C needs lambda_f E[l] < C (rho = " + fmt(load_f) + ")");
    if (scenario == "cross-traffic" || scenario == "validate-all") {
        if (!(load_f + load_c < 1.0)) throw ConfigError("stability: rho < 1 (rho = " + fmt(load_f + load_c) + ")");
        if (!is_exponential(*this)) throw ConfigError("traffic.length: the cross-traffic study needs Exp(mu) lengths");
    }
    if (theta && is_exponential(*this) && !(*theta < mu)) throw ConfigError("bound.theta: theta < mu");
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
        {"scenario", [&](auto&, auto& v) { cfg.scenario = v; }},
        {"traffic.lambda_f", [&](auto& k, auto& v) { cfg.lambda_f = parse_double(k, v); }},
        {"traffic.lambda_c", [&](auto& k, auto& v) { cfg.lambda_c = parse_double(k, v); }},
        {"traffic.mu", [&](auto& k, auto& v) { cfg.mu = parse_double(k, v); }},
        {"traffic.length", [&](auto& k, auto& v) { cfg.length = parse_double(k, v); }},
        {"node.capacity", [&](auto& k, auto& v) { cfg.capacity = parse_double(k, v); }},
        {"node.scheduler", [&](auto&, auto& v) { cfg.scheduler = v; }},
        {"run.replications", [&](auto& k, auto& v) { cfg.replications = parse_count(k, v); }},
        {"run.sample_index", [&](auto& k, auto& v) { cfg.sample_index = parse_count(k, v); }},
        {"run.packets", [&](auto& k, auto& v) { cfg.packets = parse_count(k, v); }},
        {"run.traces", [&](auto& k, auto& v) { cfg.traces = parse_count(k, v); }},
        {"run.warmup", [&](auto& k, auto& v) { cfg.warmup = parse_double(k, v); }},
        {"run.delta", [&](auto& k, auto& v) { cfg.delta = parse_double(k, v); }},
        {"run.tau_max", [&](auto& k, auto& v) { cfg.tau_max = parse_double(k, v); }},
        {"run.tau_step", [&](auto& k, auto& v) { cfg.tau_step = parse_double(k, v); }},
        {"run.seed", [&](auto& k, auto& v) { cfg.seed = parse_count(k, v); }},
        {"bound.theta", [&](auto& k, auto& v) { cfg.theta = parse_double(k, v); }},
        {"output.dir", [&](auto&, auto& v) { cfg.out_dir = v; }},
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string body = trim(line);
        if (body.empty()) continue;
        auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        it->second(key, value);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    return parse_config(in);
}

bool RunOutcome::passed() const {
    return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed(); });
}

void RunOutcome::append(RunOutcome other) {
    for (auto& v : other.reports) reports.push_back(std::move(v));
    for (auto& v : other.warnings) warnings.push_back(std::move(v));
    for (auto& v : other.notes) notes.push_back(std::move(v));
    for (auto& v : other.files) files.push_back(std::move(v));
}

// ---------------------------------------------------------------------------

RunOutcome run_single_flow(const ExperimentConfig& cfg) {
    cfg.validate();
    RunOutcome outcome;
    const auto spec = cfg.traversing_spec();
    const double cap = cfg.capacity;
    const double theta = cfg.theta ? *cfg.theta : max_theta_for_rate(spec, cap);
    if (!(theta > 0.0)) throw ConfigError("stability: no theta > 0 with r^f <= C");
    FlowSAC sac = sac_compound_poisson(spec, theta);
    if (!(sac.rate <= cap * (1.0 + 1e-12))) throw ConfigError("bound.theta: r^f <= C violated at this theta");
    sac.rate = std::min(sac.rate, cap);
    BoundingFunction fl = length_ccdf(spec);

    DelayBound thm2("thm2", [=](double tau) { return delay_bound_thm2(sac, cap, tau); });
    DelayBound cor1("cor1", [=](double tau) { return delay_bound_cor1(fl, sac, cap, tau); });
    DelayBound wrong("exp(-10 tau)", [](double tau) { return std::exp(-10.0 * tau); });

    auto grid = cfg.tau_grid();
    ReplicationPlan plan{spec, std::nullopt, cfg.node(), cfg.replications, cfg.sample_index, cfg.seed};
    auto delays = replicated_delays(plan);
    auto emp = estimate_delay_ccdf(delays, grid, cfg.delta);
    outcome.reports.push_back(check_dominance(emp, thm2));
    outcome.reports.push_back(check_dominance(emp, cor1));
    outcome.reports.push_back(negative_control(emp, wrong));

    std::vector<std::pair<std::string, std::function<double(double)>>> cols = {
        {"thm2", [&](double t) { return thm2(t); }}, {"cor1", [&](double t) { return cor1(t); }}};
    if (is_exponential(cfg)) {
        const double mu_c = cfg.mu * cap;
        auto exact = [=](double tau) { return exact_mm1_delay_ccdf(spec.lambda, mu_c, tau); };
        cols.insert(cols.begin(), {"exact", exact});
        auto long_run = long_run_delays(spec, std::nullopt, cfg.node(), cfg.packets, cfg.warmup, derive_seed(cfg.seed, 99));
        std::vector<double> probe = {0.5, 1.0, 2.0, 4.0};
        auto emp_long = estimate_delay_ccdf(long_run, probe, cfg.delta);
        outcome.reports.push_back(check_two_sided(emp_long, exact, 0.01, "exact_match"));
        CheckReport same{"thm2_equals_exact"};
        for (double tau : grid) same.equal(thm2(tau), exact(tau), 1e-12);
        if (cfg.theta) outcome.notes.push_back("theta override: thm2 need not equal the exact CCDF");
        else outcome.reports.push_back(same);
        write_ccdf_table(output_file(cfg, "single_flow_long_run.csv", outcome), emp_long, {{"exact", exact}});
    }
    write_ccdf_table(output_file(cfg, "single_flow.csv", outcome), emp, cols);
    save_ccdf_csv(emp, thm2, output_file(cfg, "ccdf_thm2.csv", outcome));
    save_ccdf_csv(emp, cor1, output_file(cfg, "ccdf_cor1.csv", outcome));
    outcome.notes.push_back("single-flow theta=" + fmt(theta) + " r^f=" + fmt(sac.rate) +
                            " samples=" + std::to_string(emp.samples) + " halfwidth=" + fmt(emp.halfwidth[0]));
    return outcome;
}

RunOutcome run_cross_traffic(const ExperimentConfig& cfg) {
    cfg.validate();
    RunOutcome outcome;
    const double cap = cfg.capacity;
    const double mu = cfg.mu;
    const double lf = cfg.lambda_f;
    const double lc = cfg.lambda_c;
    const double rho = (lf + lc) / (mu * cap);
    if (rho >= 0.9)
        outcome.warnings.push_back("rho = " + fmt(rho) +
                                   " >= 0.9: long-run estimates have high variance, increase run.packets");

    const double theta_max = mu - (lf + lc) / cap;
    const double theta = cfg.theta ? *cfg.theta : 0.95 * theta_max;
    if (!(theta < theta_max)) throw ConfigError("bound.theta: r^f + r^c < C needs theta < " + fmt(theta_max));
    FlowSAC traversing = sac_compound_poisson(lf, mu, theta);
    FlowSAC crossing = lc > 0.0 ? sac_compound_poisson(lc, mu, theta) : FlowSAC{0.0, BoundingFunction::zero()};
    BoundingFunction fl = BoundingFunction::exponential(mu);

    auto grid = cfg.tau_grid();
    const double tau_max = grid.back();
    std::vector<DelayBound> bounds = {
        make_cor2_bound(crossing, fl, traversing, cap, tau_max),
        make_cor3_bound(crossing, fl, traversing, cap, false, tau_max),
        make_cor3_bound(crossing, fl, traversing, cap, true, tau_max),
        make_thm5_bound(crossing, traversing, cap, false, tau_max),
        make_thm5_bound(crossing, traversing, cap, true, tau_max),
    };
    Thm6Params p6 = thm6_default_params(lf, lc, mu, cap);
    bounds.emplace_back("thm6", [=](double tau) { return delay_bound_thm6(lf, lc, mu, cap, tau, p6); });
    DelayBound wrong("exp(-10 tau)", [](double tau) { return std::exp(-10.0 * tau); });

    std::optional<CompoundPoissonSpec> cross_spec;
    if (lc > 0.0) cross_spec = cfg.crossing_spec();
    ReplicationPlan plan{cfg.traversing_spec(), cross_spec, cfg.node(), cfg.replications, cfg.sample_index, cfg.seed};
    auto delays = replicated_delays(plan);
    auto emp = estimate_delay_ccdf(delays, grid, cfg.delta);
    std::vector<std::pair<std::string, std::function<double(double)>>> cols;
    for (const auto& b : bounds) {
        outcome.reports.push_back(check_dominance(emp, b));
        save_ccdf_csv(emp, b, output_file(cfg, "ccdf_" + b.provenance() + ".csv", outcome));
        cols.push_back({b.provenance(), [&b](double t) { return b(t); }});
    }
    outcome.reports.push_back(negative_control(emp, wrong));
    write_ccdf_table(output_file(cfg, "cross_traffic.csv", outcome), emp, cols);

    auto long_run = long_run_delays(cfg.traversing_spec(), cross_spec, cfg.node(), cfg.packets, cfg.warmup,
                                    derive_seed(cfg.seed, 99));
    MeanEstimate m = batch_means(long_run);
    {
        CsvWriter csv(output_file(cfg, "cross_traffic_mean.csv", outcome));
        csv.row({"quantity", "value"});
        csv.row({"simulated_mean", fmt(m.mean)});
        csv.row({"ci95_halfwidth", fmt(m.halfwidth)});
        if (cfg.scheduler == "priority") {
            double exact = exact_mm1_priority_mean_delay(lf, lc, mu * cap);
            double tight = mean_delay_bound(lf, lc, mu * cap);
            double loose = mean_delay_bound_loose(lf, lc, mu * cap);
            csv.row({"exact_priority_mean", fmt(exact)});
            csv.row({"mean_bound_half", fmt(tight)});
            csv.row({"mean_bound", fmt(loose)});
            double rel = std::abs(m.mean - exact) / exact;
            outcome.reports.push_back(single_check("mean_within_2pct", rel <= 0.02, rel - 0.02));
            double hi = m.mean + m.halfwidth;
            bool order = exact <= hi && hi <= tight && tight <= loose;
            outcome.reports.push_back(single_check("mean_ordering", order, hi - tight));
            outcome.notes.push_back("mean exact=" + fmt(exact) + " simulated=" + fmt(m.mean) + " +- " +
                                    fmt(m.halfwidth) + " bound_half=" + fmt(tight) + " bound=" + fmt(loose));
        }
    }
    double thm6_mean = mean_from_ccdf([&](double tau) { return bounds.back()(tau); });
    double thm6_closed = 1.0 / (p6.theta * (cap - p6.crossing_rate));
    CheckReport integ{"thm6_mean_quadrature"};
    integ.equal(thm6_mean, thm6_closed, 1e-8);
    outcome.reports.push_back(integ);
    outcome.notes.push_back("cross-traffic theta=" + fmt(theta) + " r^f=" + fmt(traversing.rate) +
                            " r^c=" + fmt(crossing.rate) + " samples=" + std::to_string(emp.samples));
    return outcome;
}

std::vector<SweepCell> sweep_cells(double mu, std::span<const double> rhos, std::span<const double> shares) {
    std::vector<SweepCell> cells;
    for (double rho : rhos)
        for (double share : shares) {
            double exact = exact_mm1_priority_mean_delay_by_share(rho, share, mu);
            double bound = mean_delay_bound_by_share(rho, share, mu);
            cells.push_back({rho, share, exact, bound, bound / exact});
        }
    return cells;
}

RunOutcome run_sweep(const ExperimentConfig& cfg) {
    if (!(cfg.mu > 0.0)) throw ConfigError("traffic.mu: mu > 0");
    RunOutcome outcome;
    std::vector<double> axis;
    for (int k = 0; k <= 9; ++k) axis.push_back(k / 10.0);
    auto cells = sweep_cells(cfg.mu * cfg.capacity, axis, axis);
    CsvWriter csv(output_file(cfg, "sweep.csv", outcome));
    csv.row({"rho", "share", "exact", "bound", "ratio"});
    CheckReport r{"sweep_bound_dominates_exact"};
    double worst_ratio = 0.0;
    for (const auto& c : cells) {
        csv.row({fmt(c.rho), fmt(c.share), fmt(c.exact), fmt(c.bound), fmt(c.ratio)});
        r.compare(c.exact, c.bound, 0.0);
        worst_ratio = std::max(worst_ratio, c.ratio);
    }
    outcome.reports.push_back(r);
    outcome.notes.push_back("sweep cells=" + std::to_string(cells.size()) + " max ratio=" + fmt(worst_ratio));
    return outcome;
}

std::vector<PitfallRow> pitfall_table() {
    std::vector<double> arrivals = {1.0};
    std::vector<double> lengths = {2.0};
    Trace trace = Trace::from_arrivals(Flow::Traversing, arrivals, lengths, 4.0);
    NodeConfig node{1.0, AggregateFifo{}};
    SimResult sim = simulate(trace, node);
    std::vector<PitfallRow> rows;
    for (int t = 0; t <= 4; ++t) {
        double tt = t;
        rows.push_back({tt, cumulative_arrivals(trace, tt), sim.departed(Flow::Traversing, tt),
                        pitfall_output(trace, node.capacity, tt)});
    }
    return rows;
}

RunOutcome run_pitfall(const ExperimentConfig& cfg) {
    RunOutcome outcome;
    auto rows = pitfall_table();
    const double expect_a[] = {0, 2, 2, 2, 2};
    const double expect_actual[] = {0, 0, 0, 2, 2};
    const double expect_conv[] = {0, 1, 2, 2, 2};
    CheckReport r{"pitfall_table"};
    CsvWriter csv(output_file(cfg, "pitfall.csv", outcome));
    csv.row({"t", "A", "A_star_actual", "A_star_inf_convolution"});
    std::string diff;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& row = rows[k];
        csv.row({fmt(row.t), fmt(row.arrivals), fmt(row.actual_output), fmt(row.convolution_output)});
        r.equal(row.arrivals, expect_a[k], 0.0);
        r.equal(row.actual_output, expect_actual[k], 0.0);
        r.equal(row.convolution_output, expect_conv[k], 0.0);
        bool differs = row.actual_output != row.convolution_output;
        if (differs != (k == 1 || k == 2)) ++r.violations;
        if (differs)
            diff += " t=" + fmt(row.t) + " (actual " + fmt(row.actual_output) + ", inf-convolution " +
                    fmt(row.convolution_output) + ")";
    }
    outcome.reports.push_back(r);
    outcome.notes.push_back("pitfall differs at" + diff);
    return outcome;
}

RunOutcome run_lemma_suite(const ExperimentConfig& cfg) {
    RunOutcome outcome;
    const double cap = cfg.capacity;
    const double lf = cfg.lambda_f;
    const double lc = cfg.lambda_c > 0.0 ? cfg.lambda_c : cfg.lambda_f;
    CompoundPoissonSpec fspec{lf, ExponentialLength{cfg.mu}};
    CompoundPoissonSpec cspec{lc, ExponentialLength{cfg.mu}};
    const double horizon = 100.0 / (lf + lc);
    const std::vector<double> rates = {0.5 * cap, cap, 2.0 * cap};
    const std::vector<double> crossing_rates = {0.0, 0.25 * cap, 0.5 * cap, 0.9 * cap};
    const std::vector<NodeConfig> nodes = {{cap, AggregateFifo{}}, {cap, NonPreemptivePriority{Flow::Crossing}}};
    const std::vector<std::string> names = {"lemma1",     "lemma2",     "thm1_pathwise",        "lemma4",
                                            "lemma5",     "virtual_time_forms", "aggregate_recurrence",
                                            "work_conservation"};

    std::vector<std::vector<CheckReport>> per_trace(cfg.traces);
    std::vector<std::size_t> inversions(cfg.traces, 0);
    parallel_for(cfg.traces, [&](std::size_t k) {
        std::uint64_t seed = derive_seed(cfg.seed, k);
        Trace f = generate_compound_poisson(fspec, horizon, derive_seed(seed, 0), Flow::Traversing);
        Trace c = generate_compound_poisson(cspec, horizon, derive_seed(seed, 1), Flow::Crossing);
        std::map<std::string, CheckReport> acc;
        for (const auto& n : names) acc[n].name = n;
        std::mt19937_64 rng(derive_seed(seed, 2));

        auto times_for = [&](const SimResult& sim) {
            std::uniform_real_distribution<double> u(0.0, sim.last_departure());
            std::vector<double> ts;
            for (int j = 0; j < 100; ++j) ts.push_back(u(rng));
            for (const PacketRecord& p : sim.output()) {
                ts.push_back(p.arrival);
                ts.push_back(p.departure);
            }
            return ts;
        };

        {
            SimResult single = simulate(f, {cap, AggregateFifo{}});
            Trace fx = f.with_horizon(std::max(f.horizon(), single.last_departure()));
            auto ts = times_for(single);
            acc["lemma2"].absorb(check_lemma2(fx, single));
            acc["thm1_pathwise"].absorb(check_thm1_pathwise(fx, single, ts));
            for (double r : rates) acc["lemma1"].absorb(check_lemma1(fx, single, r, ts));
            acc["aggregate_recurrence"].absorb(check_aggregate_recurrence(single));
            acc["work_conservation"].absorb(check_work_conservation(single));
            for (double r : rates) {
                auto a = virtual_time(fx, r);
                auto b = virtual_time_closed_form(fx, r);
                for (std::size_t j = 0; j < a.values.size(); ++j)
                    acc["virtual_time_forms"].equal(a.values[j], b.values[j], 0.0);
            }
        }
        for (const NodeConfig& node : nodes) {
            SimResult sim = simulate(NodeInput{f, c}, node);
            double h = std::max(horizon, sim.last_departure());
            Trace fx = f.with_horizon(h);
            Trace cx = c.with_horizon(h);
            auto ts = times_for(sim);
            for (double r : rates) acc["lemma1"].absorb(check_lemma1(fx, sim, r, ts));
            for (double rc : crossing_rates) {
                acc["lemma4"].absorb(check_lemma4(fx, cx, sim, rc));
                acc["lemma5"].absorb(check_lemma5(fx, cx, sim, rc, ts));
            }
            acc["aggregate_recurrence"].absorb(check_aggregate_recurrence(sim));
            acc["work_conservation"].absorb(check_work_conservation(sim));
            if (std::holds_alternative<NonPreemptivePriority>(node.scheduler))
                inversions[k] = count_arrival_inversions(sim);
        }
        for (const auto& n : names) per_trace[k].push_back(acc[n]);
    });

    for (std::size_t j = 0; j < names.size(); ++j) {
        CheckReport total{names[j]};
        for (const auto& reps : per_trace) total.absorb(reps[j]);
        outcome.reports.push_back(total);
    }
    std::size_t inv = 0;
    for (auto v : inversions) inv += v;
    outcome.notes.push_back("lemma suite traces=" + std::to_string(cfg.traces) +
                            " priority arrival-order inversions=" + std::to_string(inv));
    return outcome;
}

RunOutcome run_validate_all(const ExperimentConfig& cfg) {
    cfg.validate();
    RunOutcome outcome;
    outcome.append(run_pitfall(cfg));
    outcome.append(run_lemma_suite(cfg));

    ExperimentConfig single = cfg;
    single.scenario = "single-flow";
    single.lambda_f = cfg.lambda_f + cfg.lambda_c;
    single.lambda_c = 0.0;
    single.scheduler = "fifo";
    outcome.append(run_single_flow(single));

    ExperimentConfig cross = cfg;
    cross.scenario = "cross-traffic";
    if (cross.lambda_c == 0.0) {
        cross.lambda_f = cfg.lambda_f / 2.0;
        cross.lambda_c = cfg.lambda_f / 2.0;
    }
    outcome.append(run_cross_traffic(cross));
    outcome.append(run_sweep(cfg));

    const auto spec = single.traversing_spec();
    const double theta = max_theta_for_rate(spec, cfg.capacity);
    FlowSAC sac = sac_compound_poisson(spec, theta);
    std::vector<double> xs = {1.0, 2.0, 4.0, 8.0};
    for (double t : {10.0, 100.0}) {
        auto r = check_sac_empirical(spec, Curve::rate(sac.rate), sac.bounding, 10000, t, xs,
                                     derive_seed(cfg.seed, 7));
        r.name += "[t=" + fmt(t) + "]";
        outcome.reports.push_back(r);
    }
    return outcome;
}

}  // namespace snc
