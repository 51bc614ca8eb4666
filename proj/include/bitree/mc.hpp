#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "bitree/model.hpp"

namespace bitree {

enum class McScheme { full_truncation_euler, weak_second_order };

std::string_view to_string(McScheme s);
McScheme scheme_from_string(std::string_view s);

struct McConfig {
    long paths = 1'000'000;
    int steps = 300;
    std::uint64_t seed = 20240601;
    McScheme scheme = McScheme::weak_second_order;
    int workers = 0;  // 0: one per hardware thread
};

struct McResult {
    double price = 0.0;
    double std_error = 0.0;
    long paths = 0;
    McScheme scheme = McScheme::weak_second_order;
    // Sample correlation between the rate Brownian motion at T and the full
    // equity noise; should sit near rho.
    double noise_correlation = 0.0;
    double seconds = 0.0;
};

class AmericanNotSupported : public std::invalid_argument {
public:
    AmericanNotSupported() : std::invalid_argument("Monte Carlo prices European exercise only") {}
};

class McError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Rng = std::mt19937_64;

// Independent stream for one path: the same (seed, path) always gives the
// same draws, whichever worker runs it.
Rng path_rng(std::uint64_t seed, std::uint64_t path);

// One CIR step of length h, plus the Brownian increment that drove it.
struct CirMove {
    double r = 0.0;   // new state; may dip below zero under Euler
    double dZ = 0.0;
};

class CirStepper {
public:
    CirStepper(const ModelParams& params, double h, McScheme scheme);
    CirMove step(double r, Rng& rng) const;
    [[nodiscard]] double h() const { return h_; }
    // Rate seen by drift, discounting and integrals.
    [[nodiscard]] double visible(double r) const { return r > 0.0 ? r : 0.0; }

private:
    CirMove euler(double r, Rng& rng) const;
    CirMove second_order(double r, Rng& rng) const;

    ModelParams p_;
    double h_;
    McScheme scheme_;
    double a_;          // kappa*theta
    double psi_half_;   // (1 - e^{-kappa h/2})/kappa
    double psi_full_;
    double decay_half_;
    double decay_full_;
    double threshold_;  // below it the two-point law replaces the splitting step
};

struct RatePath {
    std::vector<double> r;      // r_0 .. r_M, non-negative
    double integral = 0.0;      // trapezoidal integral of r over [0, T]
    double brownian = 0.0;      // Z_r(T)
};

RatePath simulate_rate_path(const ModelParams& params, int steps, double h, McScheme scheme, Rng& rng);

McResult mc_price(const ModelParams& params, const ContractSpec& contract, const McConfig& config);

}  // namespace bitree
