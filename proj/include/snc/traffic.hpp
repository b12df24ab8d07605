// traffic.hpp - Packets, traces and compound Poisson arrival generation.
//
// A trace is the time-ordered packet sequence of one or both flows at the
// node. Its cumulative arrival function A(t) counts every packet whose
// arrival instant is <= t (right-continuous), matching the convention that a
// packet has arrived once its last bit has arrived.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "snc/minplus.hpp"

namespace snc {

enum class Flow : std::uint8_t { Traversing = 0, Crossing = 1 };

char flow_code(Flow f);  // 'f' or 'c'

struct Packet {
    Flow flow = Flow::Traversing;
    double arrival = 0.0;
    double length = 0.0;
    std::size_t index = 0;  // 1-based ordinal within its flow
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Trace {
public:
    Trace() = default;
    // Packets must be sorted by arrival with ties ordered traversing before
    // crossing, have positive lengths, and carry consecutive per-flow indices
    // from 1. The horizon must cover every arrival.
    Trace(std::vector<Packet> packets, double horizon);

    // Packets listed in arrival order; indices are assigned here.
    static Trace from_arrivals(Flow flow, std::span<const double> arrivals,
                               std::span<const double> lengths, double horizon);

    std::span<const Packet> packets() const { return packets_; }
    std::size_t size() const { return packets_.size(); }
    bool empty() const { return packets_.empty(); }
    double horizon() const { return horizon_; }
    double total_bits() const { return prefix_.empty() ? 0.0 : prefix_.back(); }

    // Same packets observed over a longer window with no further arrivals.
    Trace with_horizon(double horizon) const;

    // Packets of one flow, re-indexed implicitly (indices are kept).
    Trace only(Flow flow) const;

    // A(t) without the range check; t < 0 gives 0.
    double cumulative(double t) const;
    // A(t-) = bits of packets arriving strictly before t.
    double cumulative_before(double t) const;

private:
    std::vector<Packet> packets_;
    std::vector<double> prefix_;  // prefix_[k] = bits of packets [0, k]
    double horizon_ = 0.0;
};

// Merge per-flow traces into one arrival-ordered trace (ties f before c).
Trace merge_traces(const Trace& a, const Trace& b);

struct ExponentialLength {
    double mu = 1.0;  // mean length 1/mu bits
};
struct DeterministicLength {
    double length = 1.0;
};
using LengthDistribution = std::variant<ExponentialLength, DeterministicLength>;

struct CompoundPoissonSpec {
    double lambda = 1.0;  // packets per second
    LengthDistribution lengths = ExponentialLength{};

    void validate() const;
    double mean_length() const;
    double mean_rate() const { return lambda * mean_length(); }
};

// Independent seed for replication `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Trace generate_compound_poisson(const CompoundPoissonSpec& spec, double horizon, std::uint64_t seed,
                                Flow flow = Flow::Traversing);

// A(t); t must lie in [0, horizon].
double cumulative_arrivals(const Trace& trace, double t);

// inf_{0<=s<=t} {A(s) + f(t-s)} for any curve f, exact over the candidate
// instants (arrival epochs, their left limits, s = 0 and s = t). No range
// check: arrivals beyond the horizon are taken to be absent.
double arrival_convolution(const Trace& trace, const Curve& f, double t);
// Same infimum restricted to s on the lattice {0, step, 2 step, ...} (t must
// be a lattice point); the discrete-time system of the original model.
double arrival_convolution_lattice(const Trace& trace, const Curve& f, double t, double step);

// A(t) - inf_{0<=s<=t} {A(s) + alpha(t-s)}, clamped at 0; evaluated exactly
// over arrival epochs, their left limits and s in {0, t}.
double sac_gap(const Trace& trace, const Curve& alpha, double t);

// CSV with header `flow,arrival,length`.
void save_trace(const Trace& trace, const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path);

}  // namespace snc
