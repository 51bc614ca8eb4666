#include "bitree/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bitree {

std::string_view to_string(Violation v) {
    switch (v) {
        case Violation::NonPositivePrice: return "NonPositivePrice";
        case Violation::NonPositiveVolatility: return "NonPositiveVolatility";
        case Violation::NonPositiveRate: return "NonPositiveRate";
        case Violation::NonPositiveMeanReversion: return "NonPositiveMeanReversion";
        case Violation::NonPositiveLongRunLevel: return "NonPositiveLongRunLevel";
        case Violation::CorrelationOutOfRange: return "CorrelationOutOfRange";
        case Violation::NonPositiveStrike: return "NonPositiveStrike";
        case Violation::NonPositiveMaturity: return "NonPositiveMaturity";
        case Violation::NonPositiveSteps: return "NonPositiveSteps";
        case Violation::ThetaStarOutOfRange: return "ThetaStarOutOfRange";
    }
    return "Unknown";
}

std::string_view to_string(OptionKind k) { return k == OptionKind::put ? "put" : "call"; }
std::string_view to_string(Exercise e) { return e == Exercise::european ? "european" : "american"; }

ValidationError::ValidationError(Violation v, const std::string& detail)
    : std::invalid_argument(std::string(to_string(v)) + ": " + detail), violation_(v) {}

namespace {

template <typename... Ts>
std::string cat(const Ts&... xs) {
    std::ostringstream os;
    (os << ... << xs);
    return os.str();
}

// NaN fails every comparison, so "!(x > 0)" rejects it too.
void require_positive(double x, Violation v, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(v, cat(name, " must be positive and finite, got ", x));
}

}  // namespace

double default_theta_star(const ModelParams& p) { return std::min(p.theta, p.r0) / 100.0; }

void validate_params(const ModelParams& p) {
    require_positive(p.S0, Violation::NonPositivePrice, "S0");
    require_positive(p.sigma_S, Violation::NonPositiveVolatility, "sigma_S");
    require_positive(p.r0, Violation::NonPositiveRate, "r0");
    require_positive(p.kappa, Violation::NonPositiveMeanReversion, "kappa");
    require_positive(p.theta, Violation::NonPositiveLongRunLevel, "theta");
    require_positive(p.sigma_r, Violation::NonPositiveVolatility, "sigma_r");
    if (!(p.rho > -1.0 && p.rho < 1.0))
        throw ValidationError(Violation::CorrelationOutOfRange, cat("rho must lie in (-1, 1), got ", p.rho));
}

ValidatedInputs validate(const ModelParams& params, const ContractSpec& contract, const LatticeConfig& config) {
    validate_params(params);
    require_positive(contract.strike, Violation::NonPositiveStrike, "K");
    require_positive(contract.maturity, Violation::NonPositiveMaturity, "T");
    if (config.steps < 1)
        throw ValidationError(Violation::NonPositiveSteps, cat("N must be at least 1, got ", config.steps));

    ValidatedInputs out{params, contract, config};
    const double upper = std::min(params.theta, params.r0) / 2.0;
    const double ts = config.theta_star.value_or(default_theta_star(params));
    if (!(ts > 0.0 && ts < upper))
        throw ValidationError(Violation::ThetaStarOutOfRange,
                              cat("theta_star must lie in (0, ", upper, "), got ", ts));
    out.config.theta_star = ts;
    out.h = contract.maturity / config.steps;
    out.feller_ratio = params.feller_ratio();
    return out;
}

}  // namespace bitree
