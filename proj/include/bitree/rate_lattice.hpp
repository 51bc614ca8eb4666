#pragma once

#include <span>
#include <vector>

#include "bitree/model.hpp"

namespace bitree {

// Two-way move out of a node: successor indices on the next row and the
// probability of the up move. `raw` is the unclamped ratio.
struct Branch {
    int down = 0;
    int up = 1;
    double p = 0.5;
    double raw = 0.5;
    bool clamped = false;
};

// Triangular storage for rows 0..N, row i holding i+1 values.
class TriangularRows {
public:
    TriangularRows() = default;
    explicit TriangularRows(int steps) : steps_(steps), data_(size_t(steps + 1) * size_t(steps + 2) / 2) {}

    [[nodiscard]] std::span<double> row(int i) { return {data_.data() + offset(i), size_t(i + 1)}; }
    [[nodiscard]] std::span<const double> row(int i) const { return {data_.data() + offset(i), size_t(i + 1)}; }
    [[nodiscard]] int steps() const { return steps_; }

private:
    static size_t offset(int i) { return size_t(i) * size_t(i + 1) / 2; }
    int steps_ = 0;
    std::vector<double> data_;
};

// CIR lattice on R = 2 sqrt(r)/sigma_r, where the diffusion coefficient is one.
class RateGrid {
public:
    RateGrid(const ModelParams& params, int steps, double h);

    [[nodiscard]] int steps() const { return steps_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] double R0() const { return R0_; }

    [[nodiscard]] double transformed(int i, int k) const;
    [[nodiscard]] double node(int i, int k) const;
    [[nodiscard]] std::span<const double> row(int i) const { return nodes_.row(i); }

    // (k_d, k_u) for the move out of (i, k); requires i < N.
    [[nodiscard]] Branch branch(int i, int k) const;

    // Largest rate anywhere on the lattice.
    [[nodiscard]] double max_rate() const;

private:
    void check(int i, int k) const;

    ModelParams params_;
    int steps_;
    double h_;
    double sqrt_h_;
    double R0_;
    TriangularRows nodes_;
};

// Finds the down/up successor on a sorted row. Ties go to the set, so a
// target equal to a node value lands on it from either side.
Branch two_point_branch(std::span<const double> next_row, int from, double target);

}  // namespace bitree
