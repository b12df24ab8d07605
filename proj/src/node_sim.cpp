#include "snc/node_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace snc {
namespace {

void require_flow(const Trace& trace, Flow flow, const char* what) {
    for (const Packet& p : trace.packets())
        if (p.flow != flow) throw std::invalid_argument(what);
}

std::vector<const Packet*> packets_of(const Trace& trace, Flow flow) {
    std::vector<const Packet*> out;
    for (const Packet& p : trace.packets())
        if (p.flow == flow) out.push_back(&p);
    return out;
}

}  // namespace

void NodeConfig::validate() const {
    if (!(capacity > 0.0) || !std::isfinite(capacity)) throw std::invalid_argument("capacity must be positive");
}

SimResult::SimResult(std::vector<PacketRecord> output_order, double capacity)
    : output_(std::move(output_order)), capacity_(capacity) {
    for (const PacketRecord& r : output_) per_flow_[static_cast<int>(r.flow)].push_back(r);
    for (int f = 0; f < 2; ++f) {
        auto& recs = per_flow_[f];
        std::sort(recs.begin(), recs.end(),
                  [](const PacketRecord& a, const PacketRecord& b) { return a.index < b.index; });
        double total = 0.0;
        for (const PacketRecord& r : recs) departure_prefix_[f].push_back(total += r.length);
    }
    double total = 0.0;
    for (const PacketRecord& r : output_) output_prefix_.push_back(total += r.length);
}

double SimResult::departed(Flow f, double t) const {
    const auto& recs = per_flow_[static_cast<int>(f)];
    auto it = std::upper_bound(recs.begin(), recs.end(), t,
                               [](double v, const PacketRecord& r) { return v < r.departure; });
    auto n = static_cast<std::size_t>(std::distance(recs.begin(), it));
    return n == 0 ? 0.0 : departure_prefix_[static_cast<int>(f)][n - 1];
}

double SimResult::departed_total(double t) const {
    auto it = std::upper_bound(output_.begin(), output_.end(), t,
                               [](double v, const PacketRecord& r) { return v < r.departure; });
    auto n = static_cast<std::size_t>(std::distance(output_.begin(), it));
    return n == 0 ? 0.0 : output_prefix_[n - 1];
}

SimResult simulate(const NodeInput& input, const NodeConfig& config) {
    config.validate();
    require_flow(input.traversing, Flow::Traversing, "traversing trace holds crossing packets");
    require_flow(input.crossing, Flow::Crossing, "crossing trace holds traversing packets");

    auto f = input.traversing.packets();
    auto c = input.crossing.packets();
    const double cap = config.capacity;
    const auto* priority = std::get_if<NonPreemptivePriority>(&config.scheduler);

    std::vector<PacketRecord> out;
    out.reserve(f.size() + c.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double free_at = 0.0;
    while (i < f.size() || j < c.size()) {
        bool has_f = i < f.size();
        bool has_c = j < c.size();
        double next = std::min(has_f ? f[i].arrival : kInfinity, has_c ? c[j].arrival : kInfinity);
        // Selection instant: a completion frees the server before arrivals
        // at the same instant are considered, so both are eligible together.
        double instant = std::max(free_at, next);
        bool ready_f = has_f && f[i].arrival <= instant;
        bool ready_c = has_c && c[j].arrival <= instant;

        bool pick_f;
        if (ready_f && ready_c) {
            if (priority)
                pick_f = priority->high == Flow::Traversing;
            else
                pick_f = f[i].arrival <= c[j].arrival;
        } else {
            pick_f = ready_f;
        }
        const Packet& p = pick_f ? f[i++] : c[j++];
        double start = std::max(p.arrival, free_at);
        double departure = start + p.length / cap;
        out.push_back({p.flow, p.index, p.arrival, p.length, start, departure});
        free_at = departure;
    }
    return SimResult(std::move(out), cap);
}

SimResult simulate(const Trace& traversing, const NodeConfig& config) {
    return simulate(NodeInput{traversing, Trace{}}, config);
}

VirtualTimeSeq virtual_time(const Trace& trace, double rate, Flow flow) {
    if (!(rate > 0.0)) throw std::invalid_argument("virtual time rate must be positive");
    VirtualTimeSeq seq{rate, {}};
    double v = 0.0;
    for (const Packet* p : packets_of(trace, flow)) {
        v = std::max(p->arrival, v) + p->length / rate;
        seq.values.push_back(v);
    }
    return seq;
}

VirtualTimeSeq virtual_time_closed_form(const Trace& trace, double rate, Flow flow) {
    if (!(rate > 0.0)) throw std::invalid_argument("virtual time rate must be positive");
    auto pk = packets_of(trace, flow);
    VirtualTimeSeq seq{rate, std::vector<double>(pk.size())};
    for (std::size_t i = 0; i < pk.size(); ++i) {
        double best = -kInfinity;
        for (std::size_t j = 0; j <= i; ++j) {
            double v = pk[j]->arrival;
            for (std::size_t k = j; k <= i; ++k) v += pk[k]->length / rate;
            best = std::max(best, v);
        }
        seq.values[i] = best;
    }
    return seq;
}

double minplus_output(const Trace& trace, const Curve& beta, double t) {
    if (!(t >= 0.0) || t > trace.horizon()) throw std::out_of_range("time outside the trace horizon");
    return arrival_convolution(trace, beta, t);
}

double pitfall_output(const Trace& trace, double capacity, double t, TimeModel model) {
    if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
    Curve line = Curve::rate(capacity);
    if (const auto* d = std::get_if<DiscreteTime>(&model)) return arrival_convolution_lattice(trace, line, t, d->step);
    return arrival_convolution(trace, line, t);
}

std::optional<std::size_t> index_at(const SimResult& result, Flow flow, double t) {
    auto recs = result.flow(flow);
    auto it = std::lower_bound(recs.begin(), recs.end(), t,
                               [](const PacketRecord& r, double v) { return r.departure < v; });
    if (it == recs.end()) return std::nullopt;
    return it->index;
}

double virtual_delay(const SimResult& result, Flow flow, double t) {
    auto recs = result.flow(flow);
    // FIFO: A*(t') >= A(t) exactly when the last packet arrived by t has left.
    auto it = std::upper_bound(recs.begin(), recs.end(), t,
                               [](double v, const PacketRecord& r) { return v < r.arrival; });
    if (it == recs.begin()) return 0.0;
    return std::max(0.0, std::prev(it)->departure - t);
}

void save_sim_result(const SimResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "flow,index,arrival,departure,delay\n";
    char buf[64];
    auto put = [&](double v) {
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, r.ptr - buf);
    };
    for (const PacketRecord& r : result.output()) {
        out << flow_code(r.flow) << ',' << r.index << ',';
        put(r.arrival);
        out << ',';
        put(r.departure);
        out << ',';
        put(r.delay());
        out << '\n';
    }
}

}  // namespace snc
