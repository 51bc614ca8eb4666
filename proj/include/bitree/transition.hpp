#pragma once

#include <array>

namespace bitree {

enum class Regime { standard, near_zero };

// Four successors of a node on a two-factor lattice. The first letter of each
// weight refers to the first factor (equity side), the second to the rate side.
struct TransitionQuad {
    int j_up = 1;
    int j_down = 0;
    int k_up = 1;
    int k_down = 0;
    double q_uu = 0.25;
    double q_ud = 0.25;
    double q_du = 0.25;
    double q_dd = 0.25;
    Regime regime = Regime::standard;
    bool marginal_clamped = false;  // a one-factor up-probability hit 0 or 1
    bool clamped = false;           // the joint correction was projected
    bool feasible = true;           // every weight in [0, 1]

    [[nodiscard]] std::array<double, 4> weights() const { return {q_uu, q_ud, q_du, q_dd}; }
    [[nodiscard]] double sum() const { return q_uu + q_ud + q_du + q_dd; }
};

struct NodeState {
    double S = 0.0;
    double r = 0.0;
};

}  // namespace bitree
