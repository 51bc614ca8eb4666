#include <cmath>

#include "bitree/model.hpp"
#include "doctest.h"

using namespace bitree;

TEST_CASE("validate accepts the reference set and derives h and the Feller ratio") {
    const ModelParams p;
    const ContractSpec c{100.0, 1.0, OptionKind::put, Exercise::european};
    const auto v = validate(p, c, LatticeConfig{50});
    CHECK(v.h == doctest::Approx(0.02));
    CHECK(v.feller_ratio == doctest::Approx(15.625));
    CHECK(v.theta_star() == doctest::Approx(0.0006));
}

TEST_CASE("a violated Feller condition is accepted") {
    ModelParams p;
    p.sigma_r = 3.0;
    const auto v = validate(p, ContractSpec{}, LatticeConfig{50});
    CHECK(v.feller_ratio == doctest::Approx(0.1 / 9.0));
    CHECK(v.feller_ratio < 1.0);
}

namespace {

Violation violation_of(const ModelParams& p, const ContractSpec& c = {}, const LatticeConfig& l = {}) {
    try {
        (void)validate(p, c, l);
    } catch (const ValidationError& e) {
        return e.violation();
    }
    FAIL("expected a ValidationError");
    return Violation::NonPositivePrice;
}

}  // namespace

TEST_CASE("validate names the violation") {
    ModelParams p;
    p.rho = 1.0;
    CHECK(violation_of(p) == Violation::CorrelationOutOfRange);
    p.rho = -1.0;
    CHECK(violation_of(p) == Violation::CorrelationOutOfRange);

    ModelParams q;
    q.sigma_S = 0.0;
    CHECK(violation_of(q) == Violation::NonPositiveVolatility);
    q = {};
    q.sigma_r = -0.1;
    CHECK(violation_of(q) == Violation::NonPositiveVolatility);
    q = {};
    q.kappa = std::nan("");
    CHECK(violation_of(q) == Violation::NonPositiveMeanReversion);

    CHECK(violation_of({}, ContractSpec{0.0}) == Violation::NonPositiveStrike);
    CHECK(violation_of({}, ContractSpec{100.0, 0.0}) == Violation::NonPositiveMaturity);
    CHECK(violation_of({}, {}, LatticeConfig{0}) == Violation::NonPositiveSteps);
    // upper end of the admissible band is min(theta, r0)/2 = 0.03
    CHECK(violation_of({}, {}, LatticeConfig{50, 0.03}) == Violation::ThetaStarOutOfRange);
    CHECK(violation_of({}, {}, LatticeConfig{50, 0.0}) == Violation::ThetaStarOutOfRange);
    CHECK_NOTHROW((void)validate(ModelParams{}, ContractSpec{}, LatticeConfig{50, 0.0299}));
}

TEST_CASE("validate is idempotent") {
    ModelParams p;
    p.sigma_r = 1.0;
    const auto once = validate(p, ContractSpec{90.0, 2.0, OptionKind::call, Exercise::american}, LatticeConfig{77, 0.01});
    const auto twice = validate(once);
    CHECK(twice.h == once.h);
    CHECK(twice.feller_ratio == once.feller_ratio);
    CHECK(twice.theta_star() == once.theta_star());
    CHECK(twice.config.steps == once.config.steps);
    CHECK(twice.contract.strike == once.contract.strike);
}

TEST_CASE("rate drift") {
    const ModelParams p;
    CHECK(mu_r(p, 0.1) == 0.0);
    CHECK(mu_r(p, 0.06) == doctest::Approx(0.02));
    CHECK(mu_r(p, 0.0) == doctest::Approx(0.05));
    // affine and decreasing
    CHECK(mu_r(p, 0.3) - mu_r(p, 0.2) == doctest::Approx(mu_r(p, 0.2) - mu_r(p, 0.1)));
    CHECK(mu_r(p, 0.3) < mu_r(p, 0.2));
}

TEST_CASE("equity drift") {
    CHECK(mu_S(100.0, 0.06) == doctest::Approx(6.0));
    CHECK(mu_S(100.0, 0.0) == 0.0);
    CHECK(mu_S(100.0, 0.1) == doctest::Approx(10.0));
}

TEST_CASE("payoffs and parity of intrinsic values") {
    const ContractSpec put{100.0, 1.0, OptionKind::put};
    const ContractSpec call{100.0, 1.0, OptionKind::call};
    CHECK(payoff(put, 110.0) == 0.0);
    CHECK(payoff(put, 80.0) == 20.0);
    CHECK(payoff(call, 80.0) == 0.0);
    for (double S : {0.0, 50.0, 99.5, 100.0, 100.5, 180.0}) {
        if (payoff(put, S) > 0 || payoff(call, S) > 0) CHECK(payoff(put, S) + S - 100.0 == doctest::Approx(payoff(call, S)));
    }
}
