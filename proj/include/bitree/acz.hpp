#pragma once

#include <vector>

#include "bitree/equity_lattice.hpp"
#include "bitree/model.hpp"
#include "bitree/rate_lattice.hpp"
#include "bitree/transition.hpp"

namespace bitree {

// Joint (S, r) lattice: the product of the two marginal lattices with
// weights that also reproduce the local covariance.
class AczTree {
public:
    explicit AczTree(const ValidatedInputs& in);

    [[nodiscard]] int steps() const { return rates_.steps(); }
    [[nodiscard]] double h() const { return rates_.h(); }
    [[nodiscard]] double theta_star() const { return theta_star_; }
    [[nodiscard]] const ModelParams& params() const { return params_; }
    [[nodiscard]] const RateGrid& rates() const { return rates_; }
    [[nodiscard]] const EquityGrid& equity() const { return equity_; }

    [[nodiscard]] NodeState state(int i, int j, int k) const { return {equity_.node(i, j), rates_.node(i, k)}; }
    [[nodiscard]] const Branch& rate_branch(int i, int k) const { return rate_branches_[size_t(i) * size_t(i + 1) / 2 + k]; }

    [[nodiscard]] TransitionQuad transition(int i, int j, int k) const;

private:
    ModelParams params_;
    ClampPolicy policy_;
    double theta_star_;
    RateGrid rates_;
    EquityGrid equity_;
    std::vector<Branch> rate_branches_;
};

// Discrete local moments of (dS, dr) under a quad, minus their continuous
// targets. Second moments are raw (not centred), as are the fourth moments.
struct MomentDefects {
    double mean_S = 0.0;
    double mean_r = 0.0;
    double cov = 0.0;
    double var_S = 0.0;
    double var_r = 0.0;
    double fourth_S = 0.0;  // E[dS^4] itself, the target being zero
    double fourth_r = 0.0;
};

MomentDefects moment_defects(const AczTree& tree, int i, int j, int k, const TransitionQuad& quad);

}  // namespace bitree
