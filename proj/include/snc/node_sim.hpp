// node_sim.hpp - Packet-level simulation of a work-conserving constant-capacity node.
//
// One server of capacity C bits/s serves a traversing flow f and optionally a
// crossing flow c, each FIFO. A packet departs once its last bit is served:
// departure = service start + length / C. Between flows the node serves in
// global arrival order (AggregateFifo) or by non-preemptive priority.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "snc/minplus.hpp"
#include "snc/traffic.hpp"

namespace snc {

struct AggregateFifo {};
struct NonPreemptivePriority {
    Flow high = Flow::Crossing;
};
using Scheduler = std::variant<AggregateFifo, NonPreemptivePriority>;

struct NodeConfig {
    double capacity = 1.0;
    Scheduler scheduler = AggregateFifo{};

    void validate() const;
};

struct PacketRecord {
    Flow flow = Flow::Traversing;
    std::size_t index = 0;
    double arrival = 0.0;
    double length = 0.0;
    double start = 0.0;
    double departure = 0.0;
    double delay() const { return departure - arrival; }
};

class SimResult {
public:
    SimResult(std::vector<PacketRecord> output_order, double capacity);

    // Packets in the order they leave on the output link (the aggregate g).
    std::span<const PacketRecord> output() const { return output_; }
    // Packets of one flow in index order.
    std::span<const PacketRecord> flow(Flow f) const { return per_flow_[static_cast<int>(f)]; }
    double capacity() const { return capacity_; }
    double last_departure() const { return output_.empty() ? 0.0 : output_.back().departure; }

    // A*(t) for one flow: bits with departure <= t.
    double departed(Flow f, double t) const;
    // A*^g(t)
    double departed_total(double t) const;

private:
    std::vector<PacketRecord> output_;
    std::vector<PacketRecord> per_flow_[2];
    std::vector<double> departure_prefix_[2];
    std::vector<double> output_prefix_;
    double capacity_ = 0.0;
};

struct NodeInput {
    Trace traversing;
    Trace crossing;  // may be empty
};

SimResult simulate(const NodeInput& input, const NodeConfig& config);
SimResult simulate(const Trace& traversing, const NodeConfig& config);

struct VirtualTimeSeq {
    double rate = 0.0;
    std::vector<double> values;  // values[i-1] = V^{f,i}(R)
};

// V^i = max(a^i, V^{i-1}) + l^i / R with V^0 = 0, over the packets of `flow`.
VirtualTimeSeq virtual_time(const Trace& trace, double rate, Flow flow = Flow::Traversing);
// max_{j<=i} a^j + sum_{k=j}^{i} l^k / R, O(n^2); summed in the same order as
// the recursion so both agree bit for bit.
VirtualTimeSeq virtual_time_closed_form(const Trace& trace, double rate, Flow flow = Flow::Traversing);

// A (x) beta (t), exact.
double minplus_output(const Trace& trace, const Curve& beta, double t);

// Time model for evaluating inf_{0<=s<=t} {A(s) + C (t - s)}.
struct ContinuousTime {};
struct DiscreteTime {
    double step = 1.0;
};
using TimeModel = std::variant<ContinuousTime, DiscreteTime>;

// The output a constant-rate node would have if A* = A (x) Ct held. It does
// not; this exists to compare against simulate().
double pitfall_output(const Trace& trace, double capacity, double t, TimeModel model = DiscreteTime{});

// i(t) = min{k : d^k >= t}, 1-based; nullopt when every packet of the flow
// departed before t.
std::optional<std::size_t> index_at(const SimResult& result, Flow flow, double t);

// D(t) = inf{tau >= 0 : A*(t + tau) >= A(t)}; A is rebuilt from the
// simulated packets of the flow.
double virtual_delay(const SimResult& result, Flow flow, double t);

// CSV `flow,index,arrival,departure,delay` in output order.
void save_sim_result(const SimResult& result, const std::filesystem::path& path);

}  // namespace snc
