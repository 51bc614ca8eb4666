#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bitree/model.hpp"
#include "bitree/transition.hpp"

namespace bitree {

enum class Method { acz, wei, hst };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);  // throws std::invalid_argument

struct Diagnostics {
    long nodes = 0;
    long marginal_clamps = 0;  // one-factor up-probability clipped to [0, 1]
    long joint_clamps = 0;     // joint correction projected (clamp_and_count)
    long infeasible = 0;       // weights left outside [0, 1]
    long near_zero = 0;        // product-form nodes below theta_star*sqrt(h)

    [[nodiscard]] long clamp_count() const { return marginal_clamps + joint_clamps; }
};

struct PriceResult {
    double price = 0.0;
    Method method = Method::acz;
    int steps = 0;
    bool finite = false;
    Diagnostics diagnostics;
    double seconds = 0.0;
    std::string error;  // set when the run itself failed
};

template <typename T>
concept Lattice = requires(const T& t, int i, int j, int k) {
    { t.steps() } -> std::convertible_to<int>;
    { t.h() } -> std::convertible_to<double>;
    { t.state(i, j, k) } -> std::same_as<NodeState>;
    { t.transition(i, j, k) } -> std::same_as<TransitionQuad>;
};

// v_N = payoff; v_i = e^{-r h} E[v_{i+1}], maxed with the payoff for American
// exercise. Returns v at the root. NaN is carried through on purpose.
template <Lattice L>
double backward_induction(const L& tree, const ContractSpec& contract, Diagnostics& diag) {
    const int n = tree.steps();
    const double h = tree.h();
    const bool american = contract.exercise == Exercise::american;

    std::vector<double> next(size_t(n + 1) * size_t(n + 1));
    std::vector<double> cur;
    for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k) next[size_t(j) * (n + 1) + k] = payoff(contract, tree.state(n, j, k).S);

    for (int i = n - 1; i >= 0; --i) {
        cur.assign(size_t(i + 1) * size_t(i + 1), 0.0);
        const size_t w = size_t(i) + 2;
        for (int j = 0; j <= i; ++j) {
            for (int k = 0; k <= i; ++k) {
                const TransitionQuad q = tree.transition(i, j, k);
                const NodeState s = tree.state(i, j, k);
                ++diag.nodes;
                diag.marginal_clamps += q.marginal_clamped;
                diag.joint_clamps += q.clamped;
                diag.infeasible += !q.feasible;
                diag.near_zero += q.regime == Regime::near_zero;

                const double expected = q.q_uu * next[q.j_up * w + q.k_up] + q.q_ud * next[q.j_up * w + q.k_down] +
                                        q.q_du * next[q.j_down * w + q.k_up] + q.q_dd * next[q.j_down * w + q.k_down];
                double v = std::exp(-s.r * h) * expected;
                // std::max would swallow a NaN continuation value
                if (american && !std::isnan(v)) v = std::max(v, payoff(contract, s.S));
                cur[size_t(j) * (i + 1) + k] = v;
            }
        }
        next.swap(cur);
    }
    return next[0];
}

PriceResult price(Method method, const ValidatedInputs& in);
PriceResult price(Method method, const ModelParams& params, const ContractSpec& contract, const LatticeConfig& config);

// One result per N, in order. A failing N yields a non-finite entry with
// `error` set; the sweep carries on.
std::vector<PriceResult> price_curve(Method method, const ModelParams& params, const ContractSpec& contract,
                                     std::span<const int> steps, const LatticeConfig& base = {});

}  // namespace bitree
