#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "snc/traffic.hpp"

using namespace snc;

namespace {

Trace one_packet() {
    std::vector<double> a = {1.0};
    std::vector<double> l = {2.0};
    return Trace::from_arrivals(Flow::Traversing, a, l, 4.0);
}

std::filesystem::path temp_file(const char* name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("compound Poisson generation") {
    CompoundPoissonSpec spec{1.0, ExponentialLength{1.0}};
    CHECK(generate_compound_poisson(spec, 0.0, 1).empty());

    auto a = generate_compound_poisson(spec, 100.0, 42);
    auto b = generate_compound_poisson(spec, 100.0, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.packets()[k].arrival == b.packets()[k].arrival);
        CHECK(a.packets()[k].length == b.packets()[k].length);
        CHECK(a.packets()[k].index == k + 1);
    }

    auto longer = generate_compound_poisson(spec, 200.0, 42);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(longer.packets()[k].arrival == a.packets()[k].arrival);

    auto big = generate_compound_poisson(spec, 1e5, 7);
    double rate = big.total_bits() / 1e5;
    CHECK(rate >= 0.99);
    CHECK(rate <= 1.01);

    CHECK_THROWS(generate_compound_poisson({0.0, ExponentialLength{1.0}}, 1.0, 1));
    CHECK_THROWS(generate_compound_poisson({1.0, ExponentialLength{-1.0}}, 1.0, 1));
    CHECK_THROWS(generate_compound_poisson(spec, -1.0, 1));
}

TEST_CASE("deterministic lengths") {
    CompoundPoissonSpec spec{2.0, DeterministicLength{3.0}};
    auto t = generate_compound_poisson(spec, 50.0, 3);
    for (const Packet& p : t.packets()) CHECK(p.length == 3.0);
    CHECK(spec.mean_rate() == 6.0);
}

TEST_CASE("interarrival times are exponential") {
    CompoundPoissonSpec spec{2.0, ExponentialLength{1.0}};
    auto t = generate_compound_poisson(spec, 50000.0, 5);
    double prev = 0.0;
    std::size_t above_half = 0;
    for (const Packet& p : t.packets()) {
        if (p.arrival - prev > 0.5) ++above_half;
        prev = p.arrival;
    }
    double frac = static_cast<double>(above_half) / static_cast<double>(t.size());
    CHECK(frac == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("seed streams are distinct") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}

TEST_CASE("cumulative arrivals") {
    Trace t = one_packet();
    CHECK(cumulative_arrivals(t, 0.0) == 0.0);
    CHECK(cumulative_arrivals(t, 1.0) == 2.0);
    CHECK(cumulative_arrivals(t, 3.0) == 2.0);
    CHECK(t.cumulative_before(1.0) == 0.0);
    CHECK_THROWS_AS(cumulative_arrivals(t, 5.0), std::out_of_range);
    CHECK_THROWS_AS(cumulative_arrivals(t, -0.5), std::out_of_range);

    Trace empty;
    CHECK(cumulative_arrivals(empty, 0.0) == 0.0);

    std::vector<double> a = {1.0, 1.0};
    std::vector<double> l = {2.0, 3.0};
    Trace tied = Trace::from_arrivals(Flow::Traversing, a, l, 2.0);
    CHECK(cumulative_arrivals(tied, 1.0) == 5.0);
    CHECK(cumulative_arrivals(tied, 2.0) == tied.total_bits());
}

TEST_CASE("cumulative arrivals are non-decreasing and right-continuous") {
    auto t = generate_compound_poisson({0.7, ExponentialLength{1.0}}, 200.0, 13);
    double prev = 0.0;
    for (double s = 0.0; s <= 200.0; s += 0.05) {
        double v = cumulative_arrivals(t, s);
        CHECK(v >= prev);
        prev = v;
    }
    for (const Packet& p : t.packets()) CHECK(t.cumulative(p.arrival) > t.cumulative_before(p.arrival));
    CHECK(cumulative_arrivals(t, 200.0) == doctest::Approx(t.total_bits()));
}

TEST_CASE("sac gap") {
    Trace t = one_packet();
    CHECK(sac_gap(t, Curve::rate(1.0), 1.0) == doctest::Approx(2.0));
    CHECK(sac_gap(t, Curve::affine(1e9, 1.0), 3.0) == 0.0);
    CHECK(sac_gap(Trace{}, Curve::rate(1.0), 0.0) == 0.0);

    // Exhaustive check over a fine grid of s for a random trace.
    auto r = generate_compound_poisson({1.0, ExponentialLength{1.0}}, 20.0, 17);
    Curve alpha = Curve::rate(1.2);
    for (double t0 : {5.0, 10.0, 20.0}) {
        double best = 0.0;
        for (double s = 0.0; s <= t0; s += 1e-4)
            best = std::max(best, r.cumulative(t0) - r.cumulative(s) - alpha(t0 - s));
        double gap = sac_gap(r, alpha, t0);
        CHECK(gap >= best - 1e-12);
        CHECK(gap <= best + 1.2e-4 + 1e-9);
    }
}

TEST_CASE("trace merge and selection") {
    std::vector<double> fa = {0.0, 2.0};
    std::vector<double> fl = {1.0, 1.0};
    std::vector<double> ca = {0.0, 1.0};
    std::vector<double> cl = {2.0, 2.0};
    Trace f = Trace::from_arrivals(Flow::Traversing, fa, fl, 3.0);
    Trace c = Trace::from_arrivals(Flow::Crossing, ca, cl, 3.0);
    Trace g = merge_traces(f, c);
    REQUIRE(g.size() == 4);
    CHECK(g.packets()[0].flow == Flow::Traversing);
    CHECK(g.packets()[1].flow == Flow::Crossing);
    CHECK(g.only(Flow::Crossing).size() == 2);
    CHECK(g.cumulative(1.0) == 5.0);
}

TEST_CASE("trace validation") {
    CHECK_THROWS_AS(Trace({{Flow::Traversing, 1.0, -1.0, 1}}, 2.0), TraceError);
    CHECK_THROWS_AS(Trace({{Flow::Traversing, 3.0, 1.0, 1}}, 2.0), TraceError);
    CHECK_THROWS_AS(Trace({{Flow::Traversing, 1.0, 1.0, 1}, {Flow::Traversing, 0.5, 1.0, 2}}, 2.0), TraceError);
}

TEST_CASE("trace csv round trip") {
    std::vector<double> fa = {0.25, 1.5};
    std::vector<double> fl = {1.0, 0.125};
    std::vector<double> ca = {1.0};
    std::vector<double> cl = {3.0};
    Trace g = merge_traces(Trace::from_arrivals(Flow::Traversing, fa, fl, 2.0),
                           Trace::from_arrivals(Flow::Crossing, ca, cl, 2.0));
    auto path = temp_file("snc_roundtrip.csv");
    save_trace(g, path);
    Trace back = load_trace(path);
    REQUIRE(back.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(back.packets()[k].flow == g.packets()[k].flow);
        CHECK(back.packets()[k].arrival == g.packets()[k].arrival);
        CHECK(back.packets()[k].length == g.packets()[k].length);
        CHECK(back.packets()[k].index == g.packets()[k].index);
    }

    auto random = generate_compound_poisson({2.0, ExponentialLength{0.3}}, 100.0, 99);
    save_trace(random, path);
    Trace r2 = load_trace(path);
    REQUIRE(r2.size() == random.size());
    for (std::size_t k = 0; k < r2.size(); ++k) {
        CHECK(r2.packets()[k].arrival == random.packets()[k].arrival);
        CHECK(r2.packets()[k].length == random.packets()[k].length);
    }
}

TEST_CASE("trace csv errors") {
    auto path = temp_file("snc_bad.csv");
    auto write = [&](const char* text) {
        std::ofstream out(path);
        out << text;
    };
    write("flow,arrival,length\n");
    CHECK(load_trace(path).empty());

    write("flow,arrival,length\nf,0.5,1\nf,1.0,-2\n");
    try {
        load_trace(path);
        FAIL("negative length accepted");
    } catch (const TraceError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }

    write("flow,arrival,length\nf,2.0,1\nc,1.0,1\n");
    CHECK_THROWS_AS(load_trace(path), TraceError);
    write("flow,arrival,length\nx,2.0,1\n");
    CHECK_THROWS_AS(load_trace(path), TraceError);
    write("time,size\n");
    CHECK_THROWS_AS(load_trace(path), TraceError);

    write("flow,arrival,length\nc,1.0,1\nf,1.0,2\n");
    Trace tied = load_trace(path);
    CHECK(tied.packets()[0].flow == Flow::Traversing);
}
