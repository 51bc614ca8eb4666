#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bitree {

struct ModelParams {
    double S0 = 100.0;
    double sigma_S = 0.25;
    double r0 = 0.06;
    double kappa = 0.5;
    double theta = 0.1;
    double sigma_r = 0.08;
    double rho = -0.25;

    // 2*kappa*theta/sigma_r^2; below 1 the rate can reach zero. Diagnostic only.
    [[nodiscard]] double feller_ratio() const { return 2.0 * kappa * theta / (sigma_r * sigma_r); }
};

enum class OptionKind { put, call };
enum class Exercise { european, american };

struct ContractSpec {
    double strike = 100.0;
    double maturity = 1.0;
    OptionKind kind = OptionKind::put;
    Exercise exercise = Exercise::european;
};

// exact_and_count solves the joint system as is and only counts nodes whose
// weights leave [0,1]; clamp_and_count projects the correction term first.
enum class ClampPolicy { exact_and_count, clamp_and_count };

struct LatticeConfig {
    int steps = 50;
    std::optional<double> theta_star;  // unset: min(theta, r0)/100
    ClampPolicy clamp_policy = ClampPolicy::exact_and_count;
};

enum class Violation {
    NonPositivePrice,
    NonPositiveVolatility,
    NonPositiveRate,
    NonPositiveMeanReversion,
    NonPositiveLongRunLevel,
    CorrelationOutOfRange,
    NonPositiveStrike,
    NonPositiveMaturity,
    NonPositiveSteps,
    ThetaStarOutOfRange,
};

std::string_view to_string(Violation v);

class ValidationError : public std::invalid_argument {
public:
    ValidationError(Violation v, const std::string& detail);
    [[nodiscard]] Violation violation() const noexcept { return violation_; }

private:
    Violation violation_;
};

struct ValidatedInputs {
    ModelParams params;
    ContractSpec contract;
    LatticeConfig config;  // theta_star always set after validation
    double h = 0.0;
    double feller_ratio = 0.0;

    [[nodiscard]] double theta_star() const { return *config.theta_star; }
};

double default_theta_star(const ModelParams& p);

// Throws ValidationError naming the first violated constraint.
ValidatedInputs validate(const ModelParams& params, const ContractSpec& contract, const LatticeConfig& config);
inline ValidatedInputs validate(const ValidatedInputs& v) { return validate(v.params, v.contract, v.config); }

// Checks only the model constants (used where no lattice is involved).
void validate_params(const ModelParams& params);

inline double mu_r(const ModelParams& p, double r) { return p.kappa * (p.theta - r); }
inline double mu_S(double S, double r) { return r * S; }

inline double payoff(const ContractSpec& c, double S) {
    const double x = c.kind == OptionKind::put ? c.strike - S : S - c.strike;
    return x > 0.0 ? x : 0.0;
}

std::string_view to_string(OptionKind k);
std::string_view to_string(Exercise e);

}  // namespace bitree
