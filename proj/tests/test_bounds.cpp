#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "snc/bounds.hpp"

using namespace snc;

namespace {

FlowSAC exp_sac(double rate, double theta) { return {rate, BoundingFunction::exponential(theta)}; }

oracle::Fn fn(const BoundingFunction& f) {
    return [f](double x) { return f(x); };
}

}  // namespace

TEST_CASE("compound Poisson arrival curve") {
    FlowSAC s = sac_compound_poisson(0.5, 1.0, 0.5);
    CHECK(s.rate == doctest::Approx(1.0));
    CHECK(s.bounding(2.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(sac_compound_poisson(0.5, 1.0, 1e-9).rate == doctest::Approx(0.5).epsilon(1e-8));
    CHECK_THROWS_AS(sac_compound_poisson(0.5, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(sac_compound_poisson(0.5, 1.0, 0.0), PreconditionError);

    CompoundPoissonSpec spec{0.3, ExponentialLength{1.0}};
    CHECK(sac_compound_poisson(spec, 0.4).rate == doctest::Approx(0.3 / 0.6));
    CHECK(max_theta_for_rate(spec, 1.0) == doctest::Approx(0.7));

    CompoundPoissonSpec det{0.4, DeterministicLength{1.5}};
    double theta = max_theta_for_rate(det, 1.0);
    CHECK(theta > 0.0);
    CHECK(sac_compound_poisson(det, theta).rate == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(max_theta_for_rate(CompoundPoissonSpec{1.0, DeterministicLength{1.0}}, 1.0) == 0.0);
    CHECK(length_ccdf(det)(1.4) == 1.0);
    CHECK(length_ccdf(det)(1.5) == 0.0);
}

TEST_CASE("single-flow service curve") {
    ServiceCurveResult s = ssc_single_flow(1.0, BoundingFunction::exponential(1.0));
    CHECK(s.curve(3.0) == 3.0);
    CHECK(s.bounding(2.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(s.bounding(0.0) == 1.0);
    ServiceCurveResult d = ssc_single_flow(2.0, BoundingFunction::point_mass(1.5));
    CHECK(d.bounding(1.5) == 0.0);
    CHECK(d.bounding(10.0) == 0.0);
}

TEST_CASE("single-flow delay bounds") {
    auto fl = BoundingFunction::exponential(0.5);
    FlowSAC f = exp_sac(1.0, 0.5);
    CHECK(delay_bound_cor1(fl, f, 1.0, 8.0) == doctest::Approx(2.0 * std::exp(-2.0)));
    CHECK(std::abs(delay_bound_cor1(fl, f, 1.0, 8.0) - oracle::clamped_grid_minplus(fn(fl), fn(f.bounding), 8.0, 1e-4)) <=
          1e-6);
    CHECK(delay_bound_cor1(fl, f, 1.0, 0.0) == 1.0);
    CHECK(delay_bound_cor1(BoundingFunction::zero(), f, 1.0, 3.0) == doctest::Approx(std::exp(-1.5)));

    FlowSAC mm1 = sac_compound_poisson(0.5, 1.0, 0.5);
    CHECK(delay_bound_thm2(mm1, 1.0, 3.0) == doctest::Approx(std::exp(-1.5)));
    CHECK(delay_bound_thm2(mm1, 1.0, 0.0) == 1.0);

    auto exp1 = BoundingFunction::exponential(1.0);
    for (double tau = 0.0; tau <= 30.0; tau += 0.5) {
        double exact = exact_mm1_delay_ccdf(0.5, 1.0, tau);
        CHECK(delay_bound_thm2(mm1, 1.0, tau) == doctest::Approx(exact).epsilon(1e-12));
        CHECK(delay_bound_thm2(mm1, 1.0, tau) <= delay_bound_cor1(exp1, mm1, 1.0, tau) + 1e-15);
    }

    CHECK_THROWS_AS(delay_bound_thm2(exp_sac(1.2, 0.5), 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(delay_bound_cor1(fl, exp_sac(1.2, 0.5), 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(delay_bound_thm2(mm1, 1.0, -1.0), PreconditionError);
}

TEST_CASE("leftover service curves") {
    const double theta = 0.4;
    auto e = BoundingFunction::exponential(theta);
    auto grid = XGrid::uniform(20.0);
    ServiceCurveResult t3 = ssc_leftover_thm3(exp_sac(0.3, theta), e, 1.0, grid);
    CHECK(t3.curve(2.0) == doctest::Approx(1.4));
    ServiceCurveResult dep = ssc_thm4(exp_sac(0.3, theta), e, 1.0, false, grid);
    ServiceCurveResult ind = ssc_thm4(exp_sac(0.3, theta), e, 1.0, true, grid);
    CHECK(dep.curve(2.0) == doctest::Approx(1.4));
    for (double x = 0.0; x <= 20.0; x += 0.25) {
        double two = std::min(1.0, 2.0 * std::exp(-theta * x / 2.0));
        CHECK(t3.bounding(x) == doctest::Approx(two).epsilon(1e-12));
        CHECK(dep.bounding(x) == doctest::Approx(two).epsilon(1e-12));
        CHECK(ind.bounding(x) == doctest::Approx((1.0 + theta * x) * std::exp(-theta * x)).epsilon(1e-12));
        CHECK(std::abs(ind.bounding(x) - oracle::stieltjes_tail(fn(e), fn(e), x, 1e-3)) <= 1e-5);
        CHECK(ind.bounding(x) <= dep.bounding(x) + 1e-15);
    }
    ServiceCurveResult det = ssc_leftover_thm3({0.3, BoundingFunction::zero()}, e, 1.0, grid);
    for (double x = 0.0; x <= 20.0; x += 0.5) CHECK(det.bounding(x) == doctest::Approx(e(x)).epsilon(1e-12));
    CHECK_THROWS_AS(ssc_leftover_thm3(exp_sac(1.0, theta), e, 1.0, grid), PreconditionError);
    CHECK_THROWS_AS(ssc_thm4(exp_sac(1.5, theta), e, 1.0, true, grid), PreconditionError);
}

TEST_CASE("cross-traffic corollaries") {
    const double theta = 0.4;
    const double cap = 1.0;
    const double rc = 0.3;
    auto e = BoundingFunction::exponential(theta);
    FlowSAC c = exp_sac(rc, theta);
    FlowSAC f = exp_sac(0.4, theta);
    for (double tau = 0.0; tau <= 40.0; tau += 2.5) {
        double x = (cap - rc) * tau;
        double three = std::min(1.0, 3.0 * std::exp(-theta * x / 3.0));
        CHECK(delay_bound_cor3(c, e, f, cap, tau, false, 2000) == doctest::Approx(three).epsilon(1e-12));
        CHECK(delay_bound_cor2(c, e, f, cap, tau, 2000) == doctest::Approx(three).epsilon(1e-12));
        double indep = delay_bound_cor3(c, e, f, cap, tau, true, 2000);
        CHECK(indep <= three + 1e-12);
    }
    CHECK(delay_bound_cor3(c, e, f, cap, 0.0, true) == 1.0);
    CHECK(delay_bound_cor2(c, e, f, cap, 0.0) == 1.0);

    // Independent case against a direct oracle: Erlang-2 tail (x) e^{-theta x}.
    DelayBound b29 = make_cor3_bound(c, e, f, cap, true, 40.0, 4000);
    auto erlang = [&](double x) { return x < 0.0 ? 1.0 : (1.0 + theta * x) * std::exp(-theta * x); };
    for (double tau : {5.0, 12.0, 25.0, 40.0}) {
        double ref = oracle::clamped_grid_minplus(erlang, fn(e), (cap - rc) * tau, 1e-3);
        CHECK(b29(tau) >= ref - 1e-9);
        CHECK(b29(tau) <= ref + 5e-3);
    }
    CHECK_THROWS_AS(delay_bound_cor3(c, e, exp_sac(0.8, theta), cap, 1.0, false), PreconditionError);
    CHECK_THROWS_AS(delay_bound_cor2(exp_sac(1.0, theta), e, f, cap, 1.0), PreconditionError);
}

TEST_CASE("theorem 5") {
    const double theta = 0.45;
    const double cap = 1.0;
    const double lc = 0.25;
    FlowSAC c = sac_compound_poisson(lc, 1.0, theta);
    FlowSAC f = sac_compound_poisson(0.25, 1.0, theta);
    const double rc = c.rate;
    for (double tau = 0.0; tau <= 40.0; tau += 1.0) {
        double y = theta * (cap - rc) * tau;
        CHECK(delay_bound_thm5(c, f, cap, tau, true) == doctest::Approx((1.0 + y) * std::exp(-y)).epsilon(1e-12));
        CHECK(delay_bound_thm5(c, f, cap, tau, false) ==
              doctest::Approx(std::min(1.0, 2.0 * std::exp(-y / 2.0))).epsilon(1e-12));
    }
    CHECK(delay_bound_thm5(c, f, cap, 0.0, true) == 1.0);
    CHECK_THROWS_AS(delay_bound_thm5(exp_sac(0.6, theta), exp_sac(0.5, theta), cap, 1.0, true), PreconditionError);
}

TEST_CASE("theorem 6") {
    Thm6Params p = thm6_default_params(0.25, 0.25, 1.0, 1.0);
    CHECK(p.theta == doctest::Approx(0.5));
    CHECK(p.crossing_rate == doctest::Approx(0.5));
    auto [m1, m2] = thm6_mgf_terms(0.25, 0.25, 1.0, 1.0, p);
    CHECK(m1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    for (double tau : {0.0, 1.0, 4.0, 20.0})
        CHECK(delay_bound_thm6(0.25, 0.25, 1.0, 1.0, tau) == doctest::Approx(std::exp(-0.25 * tau)));
    CHECK(delay_bound_thm6(0.4995, 0.4995, 1.0, 1.0, 5.0) > 0.99);
    CHECK_THROWS_AS(delay_bound_thm6(0.25, 0.25, 1.0, 1.0, 1.0, Thm6Params{0.6, 0.5}), PreconditionError);
    CHECK_THROWS_AS(delay_bound_thm6(0.25, 0.25, 1.0, 1.0, 1.0, Thm6Params{0.5, 0.4}), PreconditionError);
    CHECK_THROWS_AS(thm6_default_params(0.5, 0.5, 1.0, 1.0), PreconditionError);
    CHECK(mean_from_ccdf([](double tau) { return delay_bound_thm6(0.25, 0.25, 1.0, 1.0, tau); }) ==
          doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("exact queueing results") {
    CHECK(exact_mm1_delay_ccdf(0.5, 1.0, 2.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(exact_mm1_delay_ccdf(0.5, 1.0, 0.0) == 1.0);
    CHECK(exact_mm1_delay_ccdf(0.0, 2.0, 1.0) == doctest::Approx(std::exp(-2.0)));
    CHECK_THROWS_AS(exact_mm1_delay_ccdf(1.0, 1.0, 1.0), PreconditionError);

    CHECK(exact_mm1_priority_mean_delay(0.25, 0.25, 1.0) == doctest::Approx(7.0 / 3.0));
    CHECK(exact_mm1_priority_mean_delay(0.3, 0.0, 1.0) == doctest::Approx(1.0 / 0.7));
    CHECK(exact_mm1_priority_mean_delay(0.4999, 0.5, 1.0) > 1e3);
    CHECK_THROWS_AS(exact_mm1_priority_mean_delay(0.5, 0.5, 1.0), PreconditionError);

    CHECK(mean_delay_bound_loose(0.25, 0.25, 1.0) == doctest::Approx(8.0));
    CHECK(mean_delay_bound(0.25, 0.25, 1.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(mean_delay_bound(0.0, 0.25, 1.0), PreconditionError);
    CHECK_THROWS_AS(mean_delay_bound_loose(0.6, 0.5, 1.0), PreconditionError);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.01, 0.49);
    for (int k = 0; k < 200; ++k) {
        double lf = u(rng);
        double lc = u(rng);
        CHECK(mean_delay_bound(lf, lc, 1.0) <= mean_delay_bound_loose(lf, lc, 1.0));
        CHECK(mean_delay_bound(lf, lc, 1.0) >= exact_mm1_priority_mean_delay(lf, lc, 1.0));
        double rho = lf + lc;
        double share = lc / rho;
        CHECK(mean_delay_bound_by_share(rho, share, 1.0) ==
              doctest::Approx(mean_delay_bound(lf, lc, 1.0)).epsilon(1e-12));
        CHECK(exact_mm1_priority_mean_delay_by_share(rho, share, 1.0) ==
              doctest::Approx(exact_mm1_priority_mean_delay(lf, lc, 1.0)).epsilon(1e-12));
    }
    CHECK(mean_delay_bound_by_share(0.0, 0.5, 1.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(mean_delay_bound_by_share(0.5, 1.0, 1.0), PreconditionError);
}

TEST_CASE("delay bounds are non-increasing and start at most 1") {
    const double theta = 0.45;
    FlowSAC c = sac_compound_poisson(0.25, 1.0, theta);
    FlowSAC f = sac_compound_poisson(0.25, 1.0, theta);
    auto fl = BoundingFunction::exponential(1.0);
    std::vector<DelayBound> bounds = {
        make_cor2_bound(c, fl, f, 1.0, 40.0, 1000),        make_cor3_bound(c, fl, f, 1.0, false, 40.0, 1000),
        make_cor3_bound(c, fl, f, 1.0, true, 40.0, 1000),  make_thm5_bound(c, f, 1.0, false, 40.0, 1000),
        make_thm5_bound(c, f, 1.0, true, 40.0, 1000),
    };
    for (const auto& b : bounds) {
        CHECK(b(0.0) <= 1.0);
        double prev = b(0.0);
        for (double tau = 0.1; tau <= 40.0; tau += 0.1) {
            double v = b(tau);
            CHECK(v >= 0.0);
            CHECK(v <= prev + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("integrating a CCDF") {
    CHECK(mean_from_ccdf([](double t) { return std::exp(-0.5 * t); }) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(mean_from_ccdf([](double t) { return (1.0 + t) * std::exp(-t); }) == doctest::Approx(2.0).epsilon(1e-9));
}
