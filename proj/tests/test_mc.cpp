#include <cmath>
#include <vector>

#include "bitree/mc.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bitree;

namespace {

ModelParams with_sigma(double s) {
    ModelParams p;
    p.sigma_r = s;
    return p;
}

oracle::Cir cir_of(const ModelParams& p) { return {p.r0, p.kappa, p.theta, p.sigma_r}; }

struct Sample {
    double mean, mean_se, var, var_se, bond, bond_se;
};

Sample terminal_stats(const ModelParams& p, McScheme scheme, int paths, double T = 1.0, int steps = 300) {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0, b1 = 0, b2 = 0;
    for (int i = 0; i < paths; ++i) {
        Rng rng = path_rng(99, std::uint64_t(i));
        const RatePath path = simulate_rate_path(p, steps, T / steps, scheme, rng);
        const double x = path.r.back();
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        const double d = std::exp(-path.integral);
        b1 += d;
        b2 += d * d;
    }
    const double n = paths;
    const double m = s1 / n, v = s2 / n - m * m;
    const double m4 = s4 / n - 4 * m * s3 / n + 6 * m * m * s2 / n - 3 * m * m * m * m;  // central fourth moment
    const double bm = b1 / n;
    return {m, std::sqrt(v / n), v, std::sqrt(std::max(m4 - v * v, 0.0) / n), bm, std::sqrt((b2 / n - bm * bm) / n)};
}

}  // namespace

TEST_CASE("deterministic limit") {
    const ModelParams p = with_sigma(1e-8);
    const oracle::Cir c = cir_of(p);
    Rng rng = path_rng(1, 0);
    const RatePath w = simulate_rate_path(p, 300, 1.0 / 300, McScheme::weak_second_order, rng);
    CHECK(std::abs(w.r.back() - c.mean(1.0)) < 1e-6);
    CHECK(w.r.size() == 301);
    CHECK(w.integral == doctest::Approx(c.ode_integral(1.0)).epsilon(1e-6));
    Rng rng2 = path_rng(1, 0);
    const RatePath e = simulate_rate_path(p, 300, 1.0 / 300, McScheme::full_truncation_euler, rng2);
    CHECK(std::abs(e.r.back() - c.mean(1.0)) < 1e-4);
}

TEST_CASE("terminal mean, variance and bond price against the CIR closed forms") {
    for (double s : {0.08, 1.0, 3.0}) {
        const ModelParams p = with_sigma(s);
        const oracle::Cir c = cir_of(p);
        for (McScheme scheme : {McScheme::weak_second_order, McScheme::full_truncation_euler}) {
            const Sample st = terminal_stats(p, scheme, 40000);
            INFO("sigma_r=" << s << " scheme=" << to_string(scheme));
            CHECK(std::abs(st.mean - c.mean(1.0)) < 4 * st.mean_se);
            CHECK(std::abs(st.var - c.variance(1.0)) < 4 * st.var_se);
            if (scheme == McScheme::weak_second_order || s < 1.0)
                CHECK(std::abs(st.bond - c.bond(1.0)) < 4 * st.bond_se + 1e-4);
        }
    }
    CHECK(cir_of(ModelParams{}).mean(1.0) == doctest::Approx(0.075739).epsilon(1e-6));
}

TEST_CASE("Black-Scholes limit when the rate is deterministic") {
    for (double rho : {-0.25, 0.6}) {
        ModelParams p = with_sigma(1e-12);
        p.rho = rho;
        const double rbar = cir_of(p).ode_integral(1.0);
        const double bs = oracle::black_scholes_put(p.S0, 100.0, rbar, p.sigma_S, 1.0);
        const McResult r = mc_price(p, ContractSpec{100.0, 1.0}, McConfig{100000, 100, 5});
        CHECK(std::abs(r.price - bs) < 4 * r.std_error);
    }
}

TEST_CASE("degenerate strike and American rejection") {
    const McResult r = mc_price(ModelParams{}, ContractSpec{1e-6, 1.0}, McConfig{2000, 50});
    CHECK(r.price == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)mc_price(ModelParams{}, ContractSpec{100.0, 1.0, OptionKind::put, Exercise::american}, McConfig{}),
                    AmericanNotSupported);
    CHECK_THROWS_AS((void)mc_price(ModelParams{}, ContractSpec{}, McConfig{0}), McError);
}

TEST_CASE("reproducible and independent of the worker count") {
    McConfig a{30000, 60, 42, McScheme::weak_second_order, 1};
    McConfig b = a;
    b.workers = 5;
    const McResult r1 = mc_price(with_sigma(1.0), ContractSpec{}, a);
    const McResult r2 = mc_price(with_sigma(1.0), ContractSpec{}, a);
    const McResult r3 = mc_price(with_sigma(1.0), ContractSpec{}, b);
    CHECK(r1.price == r2.price);
    CHECK(r1.price == r3.price);
    CHECK(r1.std_error == r3.std_error);
    McConfig c = a;
    c.seed = 43;
    CHECK(mc_price(with_sigma(1.0), ContractSpec{}, c).price != r1.price);

    Rng x = path_rng(42, 17), y = path_rng(42, 17), z = path_rng(42, 18);
    CHECK(x() == y());
    CHECK(path_rng(42, 17)() != z());
}

TEST_CASE("rate noise and equity noise carry the model correlation") {
    for (double s : {0.08, 3.0})
        for (McScheme scheme : {McScheme::weak_second_order, McScheme::full_truncation_euler}) {
            const McResult r = mc_price(with_sigma(s), ContractSpec{}, McConfig{100000, 100, 3, scheme});
            INFO("sigma_r=" << s << " scheme=" << to_string(scheme));
            CHECK(std::abs(r.noise_correlation - (-0.25)) < 0.01);
            CHECK(r.std_error > 0.0);
        }
}

TEST_CASE("scheme names") {
    CHECK(scheme_from_string("euler") == McScheme::full_truncation_euler);
    CHECK(scheme_from_string("weak_second_order") == McScheme::weak_second_order);
    CHECK_THROWS_AS((void)scheme_from_string("milstein"), McError);
}
