#include "bitree/pricer.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

#include "bitree/acz.hpp"
#include "bitree/legacy.hpp"

namespace bitree {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::acz: return "acz";
        case Method::wei: return "wei";
        case Method::hst: return "hst";
    }
    return "unknown";
}

Method method_from_string(std::string_view s) {
    if (s == "acz") return Method::acz;
    if (s == "wei") return Method::wei;
    if (s == "hst") return Method::hst;
    throw std::invalid_argument("unknown lattice method '" + std::string(s) + "'");
}

PriceResult price(Method method, const ValidatedInputs& raw) {
    const ValidatedInputs in = validate(raw);
    const auto start = std::chrono::steady_clock::now();
    PriceResult out;
    out.method = method;
    out.steps = in.config.steps;
    switch (method) {
        case Method::acz: out.price = backward_induction(AczTree(in), in.contract, out.diagnostics); break;
        case Method::wei: out.price = backward_induction(WeiTree(in), in.contract, out.diagnostics); break;
        case Method::hst: out.price = backward_induction(HstTree(in), in.contract, out.diagnostics); break;
    }
    out.finite = std::isfinite(out.price);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

PriceResult price(Method method, const ModelParams& params, const ContractSpec& contract, const LatticeConfig& config) {
    return price(method, validate(params, contract, config));
}

std::vector<PriceResult> price_curve(Method method, const ModelParams& params, const ContractSpec& contract,
                                     std::span<const int> steps, const LatticeConfig& base) {
    std::vector<PriceResult> out;
    out.reserve(steps.size());
    for (int n : steps) {
        LatticeConfig cfg = base;
        cfg.steps = n;
        try {
            out.push_back(price(method, params, contract, cfg));
        } catch (const std::exception& e) {
            PriceResult bad;
            bad.method = method;
            bad.steps = n;
            bad.price = std::numeric_limits<double>::quiet_NaN();
            bad.error = e.what();
            out.push_back(std::move(bad));
        }
    }
    return out;
}

}  // namespace bitree
