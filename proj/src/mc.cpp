#include "bitree/mc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

namespace bitree {

std::string_view to_string(McScheme s) {
    return s == McScheme::full_truncation_euler ? "full_truncation_euler" : "weak_second_order";
}

McScheme scheme_from_string(std::string_view s) {
    if (s == "full_truncation_euler" || s == "euler") return McScheme::full_truncation_euler;
    if (s == "weak_second_order" || s == "second_order") return McScheme::weak_second_order;
    throw McError("unknown Monte Carlo scheme '" + std::string(s) + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng path_rng(std::uint64_t seed, std::uint64_t path) { return Rng(splitmix64(splitmix64(seed) ^ path)); }

CirStepper::CirStepper(const ModelParams& params, double h, McScheme scheme)
    : p_(params), h_(h), scheme_(scheme), a_(params.kappa * params.theta) {
    const double k = params.kappa;
    psi_half_ = -std::expm1(-k * h / 2.0) / k;
    psi_full_ = -std::expm1(-k * h) / k;
    decay_half_ = std::exp(-k * h / 2.0);
    decay_full_ = std::exp(-k * h);
    const double s2 = params.sigma_r * params.sigma_r;
    threshold_ = 0.0;
    if (s2 > 4.0 * a_) {
        const double z = (s2 / 4.0 - a_) * psi_half_;
        const double t = std::sqrt(z / decay_half_) + params.sigma_r * std::sqrt(3.0 * h) / 2.0;
        threshold_ = (z + t * t) / decay_half_;
    }
}

CirMove CirStepper::step(double r, Rng& rng) const {
    return scheme_ == McScheme::full_truncation_euler ? euler(r, rng) : second_order(r, rng);
}

CirMove CirStepper::euler(double r, Rng& rng) const {
    std::normal_distribution<double> normal;
    const double w = std::sqrt(h_) * normal(rng);
    const double rp = visible(r);
    return {r + p_.kappa * (p_.theta - rp) * h_ + p_.sigma_r * std::sqrt(rp) * w, w};
}

// Ninomiya-Victoir splitting with a three-point driver away from zero; near
// zero a two-point law matching the first two conditional moments.
CirMove CirStepper::second_order(double r, Rng& rng) const {
    std::uniform_real_distribution<double> uniform;
    const double sigma = p_.sigma_r;
    if (r >= threshold_) {
        const double u = uniform(rng);
        const double y = u < 1.0 / 6.0 ? -std::sqrt(3.0) : (u < 2.0 / 6.0 ? std::sqrt(3.0) : 0.0);
        const double w = std::sqrt(h_) * y;
        const double shift = (a_ - sigma * sigma / 4.0) * psi_half_;
        const double root = std::sqrt(shift + decay_half_ * r) + sigma * w / 2.0;
        return {decay_half_ * root * root + shift, w};
    }

    const double u1 = r * decay_full_ + a_ * psi_full_;
    const double u2 = u1 * u1 + sigma * sigma * psi_full_ * (a_ * psi_full_ / 2.0 + r * decay_full_);
    const double pi = (1.0 - std::sqrt(1.0 - u1 * u1 / u2)) / 2.0;
    // the Brownian increment is Gaussian and drives the branch through its own
    // uniform, so the equity sees a proper N(0, h) increment comonotone with dr
    std::normal_distribution<double> normal;
    const double g = normal(rng);
    const bool up = std::erfc(-g / std::sqrt(2.0)) / 2.0 > 1.0 - pi;
    return {up ? u1 / (2.0 * pi) : u1 / (2.0 * (1.0 - pi)), std::sqrt(h_) * g};
}

RatePath simulate_rate_path(const ModelParams& params, int steps, double h, McScheme scheme, Rng& rng) {
    const CirStepper stepper(params, h, scheme);
    RatePath path;
    path.r.reserve(size_t(steps) + 1);
    double x = params.r0;
    path.r.push_back(x);
    for (int i = 0; i < steps; ++i) {
        const CirMove m = stepper.step(x, rng);
        path.integral += (stepper.visible(x) + stepper.visible(m.r)) / 2.0 * h;
        path.brownian += m.dZ;
        x = m.r;
        path.r.push_back(stepper.visible(x));
    }
    return path;
}

namespace {

struct Moments {
    double n = 0, sum = 0, sum2 = 0;
    double z = 0, e = 0, zz = 0, ee = 0, ze = 0;

    void merge(const Moments& o) {
        n += o.n;
        sum += o.sum;
        sum2 += o.sum2;
        z += o.z;
        e += o.e;
        zz += o.zz;
        ee += o.ee;
        ze += o.ze;
    }
};

constexpr long block_size = 4096;

}  // namespace

McResult mc_price(const ModelParams& params, const ContractSpec& contract, const McConfig& cfg) {
    validate_params(params);
    if (contract.exercise == Exercise::american) throw AmericanNotSupported();
    if (!(contract.strike > 0.0) || !(contract.maturity > 0.0)) throw McError("strike and maturity must be positive");
    if (cfg.paths < 1 || cfg.steps < 1) throw McError("paths and steps must be at least 1");

    const auto start = std::chrono::steady_clock::now();
    const double T = contract.maturity;
    const double h = T / cfg.steps;
    const CirStepper stepper(params, h, cfg.scheme);
    const double log_s0 = std::log(params.S0) - params.sigma_S * params.sigma_S * T / 2.0;
    const double orth = std::sqrt(1.0 - params.rho * params.rho);
    const double sqrt_t = std::sqrt(T);

    const long blocks = (cfg.paths + block_size - 1) / block_size;
    std::vector<Moments> partial(static_cast<size_t>(blocks));
    std::atomic<long> next_block{0};

    auto work = [&] {
        for (long b = next_block++; b < blocks; b = next_block++) {
            Moments m;
            const long end = std::min(cfg.paths, (b + 1) * block_size);
            for (long path = b * block_size; path < end; ++path) {
                Rng rng = path_rng(cfg.seed, std::uint64_t(path));
                double x = params.r0, integral = 0.0, z = 0.0;
                for (int i = 0; i < cfg.steps; ++i) {
                    const CirMove mv = stepper.step(x, rng);
                    integral += (stepper.visible(x) + stepper.visible(mv.r)) / 2.0 * h;
                    z += mv.dZ;
                    x = mv.r;
                }
                std::normal_distribution<double> normal;
                const double noise = params.rho * z + orth * sqrt_t * normal(rng);
                const double S = std::exp(log_s0 + integral + params.sigma_S * noise);
                const double v = std::exp(-integral) * payoff(contract, S);
                m.n += 1;
                m.sum += v;
                m.sum2 += v * v;
                m.z += z;
                m.e += noise;
                m.zz += z * z;
                m.ee += noise * noise;
                m.ze += z * noise;
            }
            partial[size_t(b)] = m;
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const long n_workers = std::min<long>(blocks, cfg.workers > 0 ? cfg.workers : long(hw));
    {
        std::vector<std::jthread> pool;
        for (long w = 1; w < n_workers; ++w) pool.emplace_back(work);
        work();
    }

    Moments total;
    for (const auto& m : partial) total.merge(m);  // fixed order: independent of scheduling

    McResult out;
    out.paths = cfg.paths;
    out.scheme = cfg.scheme;
    out.price = total.sum / total.n;
    if (total.n > 1) {
        const double var = std::max(0.0, (total.sum2 - total.n * out.price * out.price) / (total.n - 1));
        out.std_error = std::sqrt(var / total.n);
        const double cz = total.zz - total.z * total.z / total.n;
        const double ce = total.ee - total.e * total.e / total.n;
        const double cze = total.ze - total.z * total.e / total.n;
        out.noise_correlation = cze / std::sqrt(cz * ce);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace bitree
