#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "snc/node_sim.hpp"

using namespace snc;

namespace {

Trace flow_trace(Flow flow, std::vector<double> a, std::vector<double> l, double horizon) {
    return Trace::from_arrivals(flow, a, l, horizon);
}

const NodeConfig kFifo{1.0, AggregateFifo{}};
const NodeConfig kPriority{1.0, NonPreemptivePriority{Flow::Crossing}};

}  // namespace

TEST_CASE("one-packet trace") {
    Trace t = flow_trace(Flow::Traversing, {1.0}, {2.0}, 4.0);
    SimResult r = simulate(t, kFifo);
    REQUIRE(r.output().size() == 1);
    CHECK(r.output()[0].departure == 3.0);
    CHECK(r.departed(Flow::Traversing, 1.0) == 0.0);
    CHECK(r.departed(Flow::Traversing, 2.0) == 0.0);
    CHECK(r.departed(Flow::Traversing, 3.0) == 2.0);
    CHECK(virtual_delay(r, Flow::Traversing, 1.0) == 2.0);
    CHECK(index_at(r, Flow::Traversing, 2.0) == std::optional<std::size_t>(1));
    CHECK(index_at(r, Flow::Traversing, 3.0) == std::optional<std::size_t>(1));
    CHECK_FALSE(index_at(r, Flow::Traversing, 3.5).has_value());
}

TEST_CASE("pitfall output on the one-packet trace") {
    Trace t = flow_trace(Flow::Traversing, {1.0}, {2.0}, 4.0);
    CHECK(pitfall_output(t, 1.0, 0.0) == 0.0);
    CHECK(pitfall_output(t, 1.0, 1.0) == 1.0);
    CHECK(pitfall_output(t, 1.0, 2.0) == 2.0);
    CHECK(pitfall_output(t, 1.0, 3.0) == 2.0);
    CHECK(pitfall_output(t, 1.0, 4.0) == 2.0);
    CHECK(pitfall_output(Trace{}, 1.0, 0.0) == 0.0);
    // In continuous time the infimum reaches A(1-) = 0 at t = 1.
    CHECK(pitfall_output(t, 1.0, 1.0, ContinuousTime{}) == 0.0);
    CHECK(pitfall_output(t, 1.0, 2.0, ContinuousTime{}) == 1.0);
}

TEST_CASE("min-plus output on the one-packet trace") {
    Trace t = flow_trace(Flow::Traversing, {1.0}, {2.0}, 4.0);
    CHECK(minplus_output(t, Curve::rate(1.0), 2.0) == 1.0);
    CHECK(minplus_output(Trace{}, Curve::rate(1.0), 0.0) == 0.0);
    CHECK(minplus_output(t, Curve::rate_latency(1.0, 100.0), 4.0) == 0.0);
    CHECK_THROWS_AS(minplus_output(t, Curve::rate(1.0), 5.0), std::out_of_range);
}

TEST_CASE("back-to-back packets") {
    SimResult r = simulate(flow_trace(Flow::Traversing, {0.0, 0.5}, {1.0, 1.0}, 1.0), kFifo);
    CHECK(r.flow(Flow::Traversing)[0].departure == 1.0);
    CHECK(r.flow(Flow::Traversing)[1].departure == 2.0);
}

TEST_CASE("non-preemptive priority") {
    Trace f = flow_trace(Flow::Traversing, {0.0}, {1.0}, 1.0);
    Trace c = flow_trace(Flow::Crossing, {0.5}, {1.0}, 1.0);
    SimResult r = simulate(NodeInput{f, c}, kPriority);
    CHECK(r.flow(Flow::Traversing)[0].departure == 1.0);
    CHECK(r.flow(Flow::Crossing)[0].departure == 2.0);

    // Crossing packet queued behind f1 overtakes the earlier f2.
    Trace f2 = flow_trace(Flow::Traversing, {0.0, 0.2}, {1.0, 1.0}, 1.0);
    SimResult r2 = simulate(NodeInput{f2, c}, kPriority);
    CHECK(r2.output()[1].flow == Flow::Crossing);
    CHECK(r2.flow(Flow::Traversing)[1].departure == 3.0);
    SimResult r3 = simulate(NodeInput{f2, c}, kFifo);
    CHECK(r3.output()[1].flow == Flow::Traversing);
}

TEST_CASE("completion before arrival at the same instant") {
    // c arrives exactly when f1 finishes; it wins the server over the queued f2.
    Trace f = flow_trace(Flow::Traversing, {0.0, 0.5}, {1.0, 1.0}, 1.0);
    Trace c = flow_trace(Flow::Crossing, {1.0}, {1.0}, 1.0);
    SimResult r = simulate(NodeInput{f, c}, kPriority);
    CHECK(r.flow(Flow::Crossing)[0].start == 1.0);
    CHECK(r.flow(Flow::Traversing)[1].departure == 3.0);
}

TEST_CASE("simultaneous arrivals") {
    SimResult r = simulate(flow_trace(Flow::Traversing, {1.0, 1.0}, {2.0, 3.0}, 1.0), kFifo);
    // D(t) at the tied instant is the delay of the last tied packet.
    CHECK(virtual_delay(r, Flow::Traversing, 1.0) == r.flow(Flow::Traversing)[1].delay());
    CHECK(virtual_delay(r, Flow::Traversing, 10.0) == 0.0);
    CHECK(virtual_delay(r, Flow::Traversing, 0.5) == 0.0);
}

TEST_CASE("virtual time") {
    Trace one = flow_trace(Flow::Traversing, {1.0}, {2.0}, 1.0);
    CHECK(virtual_time(one, 1.0).values == std::vector<double>{3.0});
    Trace two = flow_trace(Flow::Traversing, {0.0, 0.0}, {1.0, 1.0}, 0.0);
    CHECK(virtual_time(two, 2.0).values == std::vector<double>{0.5, 1.0});
    CHECK_THROWS(virtual_time(two, 0.0));
    CHECK_THROWS(virtual_time_closed_form(two, -1.0));

    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto t = generate_compound_poisson({0.8, ExponentialLength{1.0}}, 150.0, seed);
        for (double rate : {0.5, 1.0, 3.0}) {
            auto a = virtual_time(t, rate);
            auto b = virtual_time_closed_form(t, rate);
            CHECK(a.values == b.values);
            for (std::size_t k = 0; k < a.values.size(); ++k) {
                CHECK(a.values[k] >= t.packets()[k].arrival + t.packets()[k].length / rate);
                if (k) CHECK(a.values[k] >= a.values[k - 1]);
            }
        }
    }
}

TEST_CASE("single-flow departures equal the virtual time at C") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto t = generate_compound_poisson({0.9, ExponentialLength{1.0}}, 200.0, seed);
        double cap = 1.0 + 0.1 * static_cast<double>(seed % 5);
        SimResult r = simulate(t, {cap, AggregateFifo{}});
        auto v = virtual_time(t, cap);
        std::vector<double> a;
        std::vector<double> l;
        for (const Packet& p : t.packets()) {
            a.push_back(p.arrival);
            l.push_back(p.length);
        }
        auto expect = oracle::fifo_departures(a, l, cap);
        for (std::size_t k = 0; k < t.size(); ++k) {
            CHECK(r.flow(Flow::Traversing)[k].departure == v.values[k]);
            CHECK(r.flow(Flow::Traversing)[k].departure == expect[k]);
        }
    }
}

TEST_CASE("simulation invariants under both schedulers") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto f = generate_compound_poisson({0.4, ExponentialLength{1.0}}, 300.0, derive_seed(seed, 0));
        auto c = generate_compound_poisson({0.45, ExponentialLength{1.0}}, 300.0, derive_seed(seed, 1), Flow::Crossing);
        for (const NodeConfig& node : {kFifo, kPriority}) {
            SimResult r = simulate(NodeInput{f, c}, node);
            CHECK(r.output().size() == f.size() + c.size());
            for (const PacketRecord& p : r.output()) CHECK(p.departure >= p.arrival + p.length / node.capacity);
            for (Flow fl : {Flow::Traversing, Flow::Crossing}) {
                auto recs = r.flow(fl);
                for (std::size_t k = 1; k < recs.size(); ++k) CHECK(recs[k].departure >= recs[k - 1].departure);
            }
            double prev = 0.0;
            for (const PacketRecord& p : r.output()) {
                CHECK(p.departure == std::max(p.arrival, prev) + p.length / node.capacity);
                prev = p.departure;
            }
            double end = r.last_departure();
            CHECK(r.departed_total(end) == doctest::Approx(f.total_bits() + c.total_bits()));
            for (double t = 0.0; t <= end; t += end / 37.0)
                CHECK(r.departed_total(t) ==
                      doctest::Approx(r.departed(Flow::Traversing, t) + r.departed(Flow::Crossing, t)));
        }
    }
}

TEST_CASE("simulate rejects bad input") {
    Trace f = flow_trace(Flow::Traversing, {0.0}, {1.0}, 1.0);
    CHECK_THROWS(simulate(f, {0.0, AggregateFifo{}}));
    CHECK_THROWS(simulate(NodeInput{f, f}, kFifo));
}

TEST_CASE("overload is not an error") {
    auto f = generate_compound_poisson({3.0, ExponentialLength{1.0}}, 50.0, 4);
    SimResult r = simulate(f, kFifo);
    CHECK(r.output().size() == f.size());
}

TEST_CASE("sim result csv") {
    Trace f = flow_trace(Flow::Traversing, {0.0, 0.5}, {1.0, 1.0}, 1.0);
    auto path = std::filesystem::temp_directory_path() / "snc_sim.csv";
    save_sim_result(simulate(f, kFifo), path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "flow,index,arrival,departure,delay");
    std::string row;
    std::getline(in, row);
    CHECK(row == "f,1,0,1,1");
    std::getline(in, row);
    CHECK(row == "f,2,0.5,2,1.5");
}
