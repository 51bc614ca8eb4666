#include "bitree/equity_lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bitree {

EquityGrid::EquityGrid(const ModelParams& params, int steps, double h)
    : steps_(steps), h_(h), U0_(std::log(params.S0) / params.sigma_S), nodes_(steps) {
    const double sqrt_h = std::sqrt(h);
    for (int i = 0; i <= steps; ++i) {
        auto row = nodes_.row(i);
        for (int j = 0; j <= i; ++j) row[j] = std::exp(params.sigma_S * (U0_ + (2 * j - i) * sqrt_h));
    }
    nodes_.row(0)[0] = params.S0;
}

void EquityGrid::check(int i, int j) const {
    if (i < 0 || i > steps_ || j < 0 || j > i)
        throw std::out_of_range("equity node (" + std::to_string(i) + "," + std::to_string(j) + ") outside lattice");
}

double EquityGrid::node(int i, int j) const {
    check(i, j);
    return nodes_.row(i)[j];
}

Branch EquityGrid::branch(int i, int j, double r) const {
    check(i, j);
    if (i == steps_) throw std::out_of_range("no successor row after the last step");
    const double S = nodes_.row(i)[j];
    return two_point_branch(nodes_.row(i + 1), j, S + mu_S(S, r) * h_);
}

}  // namespace bitree
