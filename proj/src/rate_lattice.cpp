#include "bitree/rate_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bitree {

Branch two_point_branch(std::span<const double> next, int from, double target) {
    const auto begin = next.begin();
    // k_d: last index in [0, from] whose value is <= target, else 0
    const auto d = std::upper_bound(begin, begin + from + 1, target);
    const int down = d == begin ? 0 : int(d - begin) - 1;
    // k_u: first index in [from+1, end) whose value is >= target, else the top
    const auto u = std::lower_bound(begin + from + 1, next.end(), target);
    const int up = u == next.end() ? int(next.size()) - 1 : int(u - begin);

    const double width = next[up] - next[down];
    if (!(width > 0.0)) throw std::logic_error("degenerate branch width at successor " + std::to_string(down));
    Branch b{down, up, 0.0, (target - next[down]) / width, false};
    b.p = std::clamp(b.raw, 0.0, 1.0);
    b.clamped = b.p != b.raw;
    return b;
}

RateGrid::RateGrid(const ModelParams& params, int steps, double h)
    : params_(params), steps_(steps), h_(h), sqrt_h_(std::sqrt(h)), R0_(2.0 * std::sqrt(params.r0) / params.sigma_r),
      nodes_(steps) {
    const double s2 = params.sigma_r * params.sigma_r;
    for (int i = 0; i <= steps; ++i) {
        auto row = nodes_.row(i);
        for (int k = 0; k <= i; ++k) {
            const double R = transformed(i, k);
            row[k] = R > 0.0 ? s2 * R * R / 4.0 : 0.0;
        }
    }
    // R0 squared back is r0 up to rounding; pin the root to the input
    nodes_.row(0)[0] = params.r0;
}

void RateGrid::check(int i, int k) const {
    if (i < 0 || i > steps_ || k < 0 || k > i)
        throw std::out_of_range("rate node (" + std::to_string(i) + "," + std::to_string(k) + ") outside lattice");
}

double RateGrid::transformed(int i, int k) const {
    check(i, k);
    return R0_ + (2 * k - i) * sqrt_h_;
}

double RateGrid::node(int i, int k) const {
    check(i, k);
    return nodes_.row(i)[k];
}

Branch RateGrid::branch(int i, int k) const {
    check(i, k);
    if (i == steps_) throw std::out_of_range("no successor row after the last step");
    const double r = nodes_.row(i)[k];
    return two_point_branch(nodes_.row(i + 1), k, r + mu_r(params_, r) * h_);
}

double RateGrid::max_rate() const {
    double m = 0.0;
    for (int i = 0; i <= steps_; ++i) m = std::max(m, nodes_.row(i).back());
    return m;
}

}  // namespace bitree
