#include "snc/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace snc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** seeded through splitmix64; fixed algorithm so traces are
// reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        for (auto& s : s_) s = splitmix64(seed);
    }
    std::uint64_t next() {
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }
    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

bool arrival_order(const Packet& a, const Packet& b) {
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    if (a.flow != b.flow) return a.flow < b.flow;
    return a.index < b.index;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& field, std::size_t line, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v))
        throw TraceError("row " + std::to_string(line) + ": malformed " + what + " '" + field + "'");
    return v;
}

}  // namespace

char flow_code(Flow f) { return f == Flow::Traversing ? 'f' : 'c'; }

Trace::Trace(std::vector<Packet> packets, double horizon) : packets_(std::move(packets)), horizon_(horizon) {
    std::size_t next_index[2] = {1, 1};
    prefix_.reserve(packets_.size());
    double total = 0.0;
    for (std::size_t k = 0; k < packets_.size(); ++k) {
        const Packet& p = packets_[k];
        if (!(p.length > 0.0) || !std::isfinite(p.length)) throw TraceError("packet length must be positive");
        if (!(p.arrival >= 0.0) || !std::isfinite(p.arrival)) throw TraceError("packet arrival must be >= 0");
        if (k > 0 && arrival_order(p, packets_[k - 1])) throw TraceError("packets must be sorted by arrival");
        auto& expected = next_index[static_cast<int>(p.flow)];
        if (p.index != expected) throw TraceError("packet indices must be consecutive from 1 within a flow");
        ++expected;
        total += p.length;
        prefix_.push_back(total);
    }
    if (!packets_.empty() && packets_.back().arrival > horizon_)
        throw TraceError("trace horizon must cover every arrival");
    if (horizon_ < 0.0) throw TraceError("trace horizon must be >= 0");
}

Trace Trace::from_arrivals(Flow flow, std::span<const double> arrivals, std::span<const double> lengths,
                           double horizon) {
    if (arrivals.size() != lengths.size()) throw TraceError("arrival and length counts differ");
    std::vector<Packet> packets;
    packets.reserve(arrivals.size());
    for (std::size_t k = 0; k < arrivals.size(); ++k) packets.push_back({flow, arrivals[k], lengths[k], k + 1});
    return Trace(std::move(packets), horizon);
}

Trace Trace::with_horizon(double horizon) const { return Trace(packets_, std::max(horizon, horizon_)); }

Trace Trace::only(Flow flow) const {
    std::vector<Packet> kept;
    std::copy_if(packets_.begin(), packets_.end(), std::back_inserter(kept),
                 [&](const Packet& p) { return p.flow == flow; });
    return Trace(std::move(kept), horizon_);
}

double Trace::cumulative(double t) const {
    auto it = std::upper_bound(packets_.begin(), packets_.end(), t,
                               [](double v, const Packet& p) { return v < p.arrival; });
    auto n = static_cast<std::size_t>(std::distance(packets_.begin(), it));
    return n == 0 ? 0.0 : prefix_[n - 1];
}

double Trace::cumulative_before(double t) const {
    auto it = std::lower_bound(packets_.begin(), packets_.end(), t,
                               [](const Packet& p, double v) { return p.arrival < v; });
    auto n = static_cast<std::size_t>(std::distance(packets_.begin(), it));
    return n == 0 ? 0.0 : prefix_[n - 1];
}

Trace merge_traces(const Trace& a, const Trace& b) {
    std::vector<Packet> all(a.packets().begin(), a.packets().end());
    all.insert(all.end(), b.packets().begin(), b.packets().end());
    std::stable_sort(all.begin(), all.end(), arrival_order);
    return Trace(std::move(all), std::max(a.horizon(), b.horizon()));
}

void CompoundPoissonSpec::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
    std::visit(overloaded{
                   [](const ExponentialLength& e) {
                       if (!(e.mu > 0.0)) throw std::invalid_argument("mu must be positive");
                   },
                   [](const DeterministicLength& d) {
                       if (!(d.length > 0.0)) throw std::invalid_argument("packet length L must be positive");
                   },
               },
               lengths);
}

double CompoundPoissonSpec::mean_length() const {
    return std::visit(overloaded{
                          [](const ExponentialLength& e) { return 1.0 / e.mu; },
                          [](const DeterministicLength& d) { return d.length; },
                      },
                      lengths);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    splitmix64(state);
    return splitmix64(state);
}

Trace generate_compound_poisson(const CompoundPoissonSpec& spec, double horizon, std::uint64_t seed, Flow flow) {
    spec.validate();
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
    Rng gaps(derive_seed(seed, 0));
    Rng sizes(derive_seed(seed, 1));
    std::vector<Packet> packets;
    packets.reserve(static_cast<std::size_t>(spec.lambda * horizon * 1.05) + 16);
    double t = 0.0;
    for (;;) {
        t += gaps.exponential(spec.lambda);
        if (t > horizon) break;
        double length = std::visit(overloaded{
                                       [&](const ExponentialLength& e) { return sizes.exponential(e.mu); },
                                       [](const DeterministicLength& d) { return d.length; },
                                   },
                                   spec.lengths);
        // log1p(-u) with u = 0 gives a zero-length packet; redraw.
        while (!(length > 0.0)) length = sizes.exponential(std::get<ExponentialLength>(spec.lengths).mu);
        packets.push_back({flow, t, length, packets.size() + 1});
    }
    return Trace(std::move(packets), horizon);
}

double cumulative_arrivals(const Trace& trace, double t) {
    if (!(t >= 0.0) || t > trace.horizon()) throw std::out_of_range("time outside the trace horizon");
    return trace.cumulative(t);
}

double arrival_convolution(const Trace& trace, const Curve& f, double t) {
    if (!(t >= 0.0)) throw std::out_of_range("negative time");
    double best = trace.cumulative(0.0) + f(t);
    best = std::min(best, trace.cumulative(t) + f(0.0));
    // A is constant between arrivals and f(t - s) is non-increasing in s, so
    // the infimum over each gap is approached just before the next arrival.
    for (const Packet& p : trace.packets()) {
        if (p.arrival > t) break;
        if (p.arrival <= 0.0) continue;
        best = std::min(best, trace.cumulative_before(p.arrival) + f(t - p.arrival));
    }
    return best;
}

double arrival_convolution_lattice(const Trace& trace, const Curve& f, double t, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("lattice step must be positive");
    if (!(t >= 0.0)) throw std::out_of_range("negative time");
    auto steps = static_cast<long long>(std::llround(t / step));
    if (std::abs(static_cast<double>(steps) * step - t) > 1e-12 * std::max(1.0, t))
        throw std::invalid_argument("time is not a lattice point");
    double best = kInfinity;
    for (long long k = 0; k <= steps; ++k) {
        double s = static_cast<double>(k) * step;
        best = std::min(best, trace.cumulative(s) + f(static_cast<double>(steps - k) * step));
    }
    return best;
}

double sac_gap(const Trace& trace, const Curve& alpha, double t) {
    if (!(t >= 0.0) || t > trace.horizon()) throw std::out_of_range("time outside the trace horizon");
    return std::max(0.0, trace.cumulative(t) - arrival_convolution(trace, alpha, t));
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw TraceError("cannot open " + path.string() + " for writing");
    out << "flow,arrival,length\n";
    char buf[64];
    for (const Packet& p : trace.packets()) {
        out << flow_code(p.flow) << ',';
        auto r = std::to_chars(buf, buf + sizeof buf, p.arrival);
        out.write(buf, r.ptr - buf) << ',';
        r = std::to_chars(buf, buf + sizeof buf, p.length);
        out.write(buf, r.ptr - buf) << '\n';
    }
    if (!out) throw TraceError("failed writing " + path.string());
}

Trace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "flow,arrival,length")
        throw TraceError("row 1: expected header 'flow,arrival,length'");

    struct Row {
        Flow flow;
        double arrival;
        double length;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        if (fields.size() != 3)
            throw TraceError("row " + std::to_string(line_no) + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        Flow flow;
        if (fields[0] == "f")
            flow = Flow::Traversing;
        else if (fields[0] == "c")
            flow = Flow::Crossing;
        else
            throw TraceError("row " + std::to_string(line_no) + ": flow must be 'f' or 'c'");
        double arrival = parse_number(fields[1], line_no, "arrival");
        double length = parse_number(fields[2], line_no, "length");
        if (arrival < 0.0) throw TraceError("row " + std::to_string(line_no) + ": negative arrival");
        if (!(length > 0.0)) throw TraceError("row " + std::to_string(line_no) + ": length must be positive");
        if (!rows.empty() && arrival < rows.back().arrival)
            throw TraceError("row " + std::to_string(line_no) + ": arrivals not sorted");
        rows.push_back({flow, arrival, length});
    }

    // Equal arrivals: traversing before crossing, then file order.
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.flow < b.flow;
    });
    std::vector<Packet> packets;
    packets.reserve(rows.size());
    std::size_t next[2] = {1, 1};
    for (const Row& r : rows) packets.push_back({r.flow, r.arrival, r.length, next[static_cast<int>(r.flow)]++});
    double horizon = rows.empty() ? 0.0 : rows.back().arrival;
    return Trace(std::move(packets), horizon);
}

}  // namespace snc
