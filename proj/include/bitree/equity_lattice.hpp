#pragma once

#include <span>

#include "bitree/model.hpp"
#include "bitree/rate_lattice.hpp"

namespace bitree {

// Log-price lattice U = log(S)/sigma_S with unit spacing in sqrt(h).
class EquityGrid {
public:
    EquityGrid(const ModelParams& params, int steps, double h);

    [[nodiscard]] int steps() const { return steps_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] double U0() const { return U0_; }

    [[nodiscard]] double node(int i, int j) const;
    [[nodiscard]] std::span<const double> row(int i) const { return nodes_.row(i); }

    // Move out of (i, j) when the short rate at the node is r.
    [[nodiscard]] Branch branch(int i, int j, double r) const;

private:
    void check(int i, int j) const;

    int steps_;
    double h_;
    double U0_;
    TriangularRows nodes_;
};

}  // namespace bitree
