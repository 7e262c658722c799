#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmmd/simulators.hpp"

using namespace cmmd;

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("sim1d log-output matches the closed-form location and scale") {
    const double x = 0.4;
    auto ys = sim1d_sample(x, 200000, 701);
    std::vector<double> logs(ys.size());
    std::transform(ys.begin(), ys.end(), logs.begin(), [](double y) { return std::log(y); });
    const double n = static_cast<double>(logs.size());
    const double sigma = sim1d_sigma(x);
    CHECK(std::fabs(mean_of(logs) - sim1d_mu(x)) < 5.0 * sigma / std::sqrt(n));
    CHECK(std_of(logs) == doctest::Approx(sigma).epsilon(0.01));
    // symmetry of log Y: skewness near zero
    const double m = mean_of(logs);
    double m3 = 0.0;
    for (double l : logs) m3 += std::pow(l - m, 3);
    m3 /= n * std::pow(std_of(logs), 3);
    CHECK(std::fabs(m3) < 0.02);
}

TEST_CASE("sim1d with zero latent noise is the deterministic sine curve") {
    for (double x : {0.0, 0.3, 0.7, 1.0}) {
        auto ys = sim1d_sample(x, 3, 702, 0.0);
        const double want = std::sin(2.0 * std::numbers::pi / 3.0 * x + std::numbers::pi / 6.0);
        for (double y : ys) CHECK(y == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("sim1d rejects inputs where the sine term is non-positive") {
    CHECK_THROWS_AS(sim1d_mu(1.5), DomainError);
    CHECK_THROWS_AS(sim1d_sample(2.0, 1, 0), DomainError);
}

TEST_CASE("black-scholes mean and median match the closed form") {
    const double x1 = 0.05, x2 = 0.3;
    auto ys = black_scholes_sample(x1, x2, 200000, 703);
    CHECK(mean_of(ys) == doctest::Approx(std::exp(x1)).epsilon(0.01));
    CHECK(median_of(ys) == doctest::Approx(std::exp(x1 - 0.5 * x2 * x2)).epsilon(0.01));
    for (double y : ys) CHECK(y > 0.0);
}

TEST_CASE("black-scholes collapses to a point mass at zero volatility") {
    auto ys = black_scholes_sample(0.08, 0.0, 5, 704);
    for (double y : ys) CHECK(y == doctest::Approx(std::exp(0.08)).epsilon(1e-12));
}

TEST_CASE("sde with nu=0 matches the OU closed-form moments") {
    SdeParams p;
    p.nu = 0.0;
    const double x1 = 1.3, x2 = 0.4;
    auto ys = sde_em_sample(x1, x2, 20000, 705, p);
    const double t = p.t_end;
    const double want_mean = x1 * (1.0 - std::exp(-t));
    const double want_std = x2 * std::sqrt((1.0 - std::exp(-2.0 * t)) / 2.0);
    CHECK(mean_of(ys) == doctest::Approx(want_mean).epsilon(0.01));
    CHECK(std_of(ys) == doctest::Approx(want_std).epsilon(0.03));
}

TEST_CASE("sde with zero diffusion reproduces the ODE solution") {
    auto ys = sde_em_sample(1.5, 0.0, 2, 706);
    const double want = 1.5 * (1.0 - std::exp(-10.0));
    // Euler with dt = 0.01 carries an O(dt) bias
    for (double y : ys) CHECK(y == doctest::Approx(want).epsilon(1e-3));
}

TEST_CASE("sir paths conserve population and deplete susceptibles monotonically") {
    SirParams p;
    p.population = 500;
    Rng rng(707);
    long prev_s = 400;
    double prev_t = 0.0;
    std::size_t events = 0;
    const long sf = sir_gillespie_final_s(400, 20, rng, p, [&](const SirEvent& e) {
        CHECK(e.s + e.i + e.r == p.population);
        CHECK(e.s <= prev_s);
        CHECK(e.s >= 0);
        CHECK(e.i >= 0);
        CHECK(e.time > prev_t);
        prev_s = e.s;
        prev_t = e.time;
        ++events;
    });
    CHECK(sf == prev_s);
    CHECK(events >= 20);  // at least the recoveries of the initial infecteds
}

TEST_CASE("sir trivial initial conditions") {
    SirParams p;
    p.population = 100;
    Rng rng(708);
    CHECK(sir_gillespie_final_s(60, 0, rng, p) == 60);  // absorbed immediately
    CHECK(sir_gillespie_final_s(0, 10, rng, p) == 0);   // recoveries only
    CHECK_THROWS_AS(sir_gillespie_final_s(-1, 5, rng, p), DomainError);
    CHECK_THROWS_AS(sir_gillespie_final_s(90, 20, rng, p), DomainError);
}

TEST_CASE("sir first waiting time is exponential with the total rate") {
    SirParams p;
    p.population = 2000;
    const long s0 = 1500, i0 = 100;
    const double total = p.beta * s0 * i0 / static_cast<double>(p.population) + p.gamma * i0;
    std::vector<double> waits;
    for (int rep = 0; rep < 20000; ++rep) {
        Rng rng(709, "wait", rep);
        bool first = true;
        sir_gillespie_final_s(s0, i0, rng, p, [&](const SirEvent& e) {
            if (first) {
                waits.push_back(e.time);
                first = false;
            }
        });
    }
    CHECK(mean_of(waits) == doctest::Approx(1.0 / total).epsilon(0.03));
    // exponential: P(T > mean) = 1/e
    const double frac =
        static_cast<double>(std::count_if(waits.begin(), waits.end(),
                                          [&](double w) { return w > 1.0 / total; })) /
        static_cast<double>(waits.size());
    CHECK(frac == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("sir qoi sign convention") {
    SirParams p;
    p.population = 300;
    auto mag = sir_gillespie_sample(200, 20, 50, 710, p);
    p.signed_qoi = true;
    auto sgn = sir_gillespie_sample(200, 20, 50, 710, p);
    for (std::size_t i = 0; i < mag.size(); ++i) {
        CHECK(mag[i] >= 0.0);
        CHECK(sgn[i] == -mag[i]);
    }
}

TEST_CASE("grid design centers points inside each cell") {
    ExperimentalDesign d;
    d.ranges = {{0.0, 1.0}};
    d.n_points = 3;
    d.sampling = DesignSampling::grid;
    auto pts = design_points(d);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0][0] == doctest::Approx(1.0 / 6.0));
    CHECK(pts[1][0] == doctest::Approx(0.5));
    CHECK(pts[2][0] == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("random design stays inside the ranges and is seed-stable") {
    ExperimentalDesign d;
    d.ranges = {{-2.0, 3.0}, {10.0, 11.0}};
    d.n_points = 40;
    d.seed = 9;
    auto a = design_points(d);
    auto b = design_points(d);
    REQUIRE(a.size() == 40);
    CHECK(a == b);
    for (const auto& x : a) {
        CHECK(x[0] >= -2.0);
        CHECK(x[0] <= 3.0);
        CHECK(x[1] >= 10.0);
        CHECK(x[1] <= 11.0);
    }
    CHECK_THROWS_AS(design_points(ExperimentalDesign{{{1.0, 1.0}}, 2, 1}), ConfigError);
}

TEST_CASE("generate_dataset produces N x R rows with per-point streams") {
    ExperimentalDesign d;
    d.ranges = {{0.0, 1.0}};
    d.n_points = 60;
    d.replications = 50;
    d.seed = 11;
    Dataset data = generate_dataset(d, Simulator::sim1d);
    CHECK(data.design_points.size() == 60);
    CHECK(data.total_rows() == 3000);
    CHECK(data.simulator == "sim1d");
    Dataset again = generate_dataset(d, Simulator::sim1d);
    CHECK(again.replications == data.replications);

    d.seed = 12;
    Dataset other = generate_dataset(d, Simulator::sim1d);
    CHECK(other.replications != data.replications);
}

TEST_CASE("generate_dataset rounds SIR design points to integers") {
    ExperimentalDesign d;
    d.ranges = {{1200.0, 1800.0}, {20.0, 200.0}};
    d.n_points = 5;
    d.replications = 2;
    d.seed = 13;
    Dataset data = generate_dataset(d, Simulator::sir);
    for (const auto& x : data.design_points)
        for (double v : x) CHECK(v == std::round(v));
}

TEST_CASE("generate_dataset rejects ranges outside the simulator domain") {
    ExperimentalDesign d;
    d.ranges = {{0.0, 1.5}};
    d.n_points = 2;
    CHECK_THROWS_AS(generate_dataset(d, Simulator::sim1d), DomainError);
    d.ranges = {{0.0, 1.0}, {0.0, 0.4}};
    CHECK_THROWS_AS(generate_dataset(d, Simulator::sim1d), DimensionMismatch);
}

TEST_CASE("reference distributions") {
    auto ref = reference_pdf(Simulator::sim1d, {0.5});
    CHECK(ref.kind == ReferenceDistribution::Kind::analytic_lognormal);
    CHECK(ref.mu == doctest::Approx(sim1d_mu(0.5)));
    CHECK(ref.sigma == doctest::Approx(sim1d_sigma(0.5)));

    auto bs = reference_pdf(Simulator::black_scholes, {0.05, 0.2});
    CHECK(bs.mu == doctest::Approx(0.05 - 0.5 * 0.04));
    CHECK(bs.sigma == doctest::Approx(0.2));
    CHECK_THROWS_AS(reference_pdf(Simulator::black_scholes, {0.05, 0.0}), DomainError);
    CHECK_THROWS_AS(reference_pdf(Simulator::sim1d, {1.4}), DomainError);

    auto sde_ref = reference_pdf(Simulator::sde, {1.0, 0.5}, 500);
    CHECK(sde_ref.kind == ReferenceDistribution::Kind::empirical);
    CHECK(sde_ref.pool.size() == 500);
    auto sde_again = reference_pdf(Simulator::sde, {1.0, 0.5}, 500);
    CHECK(sde_again.pool == sde_ref.pool);
}

TEST_CASE("lognormal_pdf integrates features correctly") {
    CHECK(lognormal_pdf(0.0, 1.0, -1.0) == 0.0);
    CHECK(lognormal_pdf(0.0, 1.0, 0.0) == 0.0);
    // mode of LN(mu, sigma) is exp(mu - sigma^2)
    const double mode = std::exp(0.2 - 0.09);
    CHECK(lognormal_pdf(0.2, 0.3, mode) > lognormal_pdf(0.2, 0.3, mode * 1.05));
    CHECK(lognormal_pdf(0.2, 0.3, mode) > lognormal_pdf(0.2, 0.3, mode * 0.95));
}

TEST_CASE("simulator name round trip") {
    for (Simulator s : {Simulator::sim1d, Simulator::black_scholes, Simulator::sde, Simulator::sir})
        CHECK(simulator_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(simulator_from_string("nope"), ConfigError);
}
