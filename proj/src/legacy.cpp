#include "bitree/legacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bitree {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// int((x + 1)/2) with int(-y) = -int(y); a non-finite drift gives no shift and
// leaves the NaN to the probability.
long shift_of(double x) {
    const double y = (x + 1.0) / 2.0;
    if (!std::isfinite(y)) return 0;
    return static_cast<long>(std::trunc(std::clamp(y, -1e15, 1e15)));
}

// Clip to [0, 1] but let NaN through so the price reports it.
double clip_probability(double p, bool& clamped) {
    if (std::isnan(p)) return p;
    const double c = std::clamp(p, 0.0, 1.0);
    clamped = clamped || c != p;
    return c;
}

// Nodes that should be exactly zero come out of the affine grid as rounding
// noise; treat them as zero.
double snap(double R, double scale) { return std::abs(R) < 1e-12 * scale ? 0.0 : R; }

TransitionQuad product_quad(int jd, double pj, int kd, double pk, bool clamped) {
    TransitionQuad q;
    q.j_down = jd;
    q.j_up = jd + 1;
    q.k_down = kd;
    q.k_up = kd + 1;
    q.q_uu = pj * pk;
    q.q_ud = pj * (1.0 - pk);
    q.q_du = (1.0 - pj) * pk;
    q.q_dd = (1.0 - pj) * (1.0 - pk);
    q.marginal_clamped = clamped;
    for (double w : q.weights())
        if (!(w >= 0.0 && w <= 1.0)) q.feasible = false;
    return q;
}

void check_node(int i, int j, int k, int steps) {
    if (i < 0 || i >= steps || j < 0 || j > i || k < 0 || k > i)
        throw std::out_of_range("transition requested outside the lattice");
}

}  // namespace

WeiDrifts wei_drifts(const ModelParams& p, double R) {
    const double s2 = p.sigma_r * p.sigma_r;
    const double r = R > 0.0 ? s2 * R * R / 4.0 : 0.0;
    WeiDrifts d;
    d.mu_X = (r - p.sigma_S * p.sigma_S / 2.0) / p.sigma_S;
    d.mu_R = R == 0.0 ? nan : (p.kappa * (4.0 * p.theta - R * R * s2) - s2) / (2.0 * R * s2);
    d.mu_Y = (d.mu_X - p.rho * d.mu_R) / std::sqrt(1.0 - p.rho * p.rho);
    return d;
}

long wei_jump_shift(double mu, double h) { return shift_of(mu * std::sqrt(h)); }

WeiTree::WeiTree(const ValidatedInputs& in)
    : params_(in.params), steps_(in.config.steps), h_(in.h), sqrt_h_(std::sqrt(in.h)),
      R0_(2.0 * std::sqrt(in.params.r0) / in.params.sigma_r),
      sqrt_1mr2_(std::sqrt(1.0 - in.params.rho * in.params.rho)) {
    Y0_ = (std::log(params_.S0) / params_.sigma_S - params_.rho * R0_) / sqrt_1mr2_;
}

double WeiTree::R(int i, int k) const { return snap(R0_ + (2 * k - i) * sqrt_h_, std::abs(R0_) + i * sqrt_h_); }

NodeState WeiTree::state(int i, int j, int k) const {
    const double R = this->R(i, k);
    const double s2 = params_.sigma_r * params_.sigma_r;
    return {std::exp(params_.sigma_S * (sqrt_1mr2_ * Y(i, j) + params_.rho * R)), R > 0.0 ? s2 * R * R / 4.0 : 0.0};
}

TransitionQuad WeiTree::transition(int i, int j, int k) const {
    check_node(i, j, k, steps_);
    const double R = this->R(i, k);
    const WeiDrifts mu = wei_drifts(params_, R);
    bool clamped = false;

    const long kd = std::clamp<long>(k + wei_jump_shift(mu.mu_R, h_), 0, i);
    const double pk = clip_probability((mu.mu_R * h_ + R - this->R(i + 1, int(kd))) / (2.0 * sqrt_h_), clamped);

    const long jd = std::clamp<long>(j + wei_jump_shift(mu.mu_Y, h_), 0, i);
    const double pj = clip_probability((mu.mu_Y * h_ + Y(i, j) - Y(i + 1, int(jd))) / (2.0 * sqrt_h_), clamped);

    return product_quad(int(jd), pj, int(kd), pk, clamped);
}

HstDrifts hst_drifts(const ModelParams& p, double R) {
    HstDrifts d;
    const double r = R * R / 4.0;
    d.mu_X = (r - p.sigma_S * p.sigma_S / 2.0) / p.sigma_S;
    d.mu_R = R == 0.0 ? nan : (4.0 * p.kappa * p.theta - p.kappa * R * R - p.sigma_r * p.sigma_r) / (2.0 * std::abs(R));
    d.mu_1 = p.sigma_r * d.mu_X + d.mu_R;
    d.mu_2 = p.sigma_r * d.mu_X - d.mu_R;
    return d;
}

HstTree::HstTree(const ValidatedInputs& in)
    : params_(in.params), steps_(in.config.steps), h_(in.h),
      d1_(in.params.sigma_r * std::sqrt(2.0 * (1.0 + in.params.rho)) * std::sqrt(in.h)),
      d2_(in.params.sigma_r * std::sqrt(2.0 * (1.0 - in.params.rho)) * std::sqrt(in.h)) {
    const double X0 = std::log(params_.S0) / params_.sigma_S;
    const double R0 = 2.0 * std::sqrt(params_.r0);
    A0_ = params_.sigma_r * X0 + R0;
    B0_ = params_.sigma_r * X0 - R0;
}

double HstTree::R(int i, int j, int k) const {
    const double a = X1(i, j), b = X2(i, k);
    return snap((a - b) / 2.0, std::abs(a) + std::abs(b));
}

NodeState HstTree::state(int i, int j, int k) const {
    const double R = this->R(i, j, k);
    return {std::exp(params_.sigma_S * (X1(i, j) + X2(i, k)) / (2.0 * params_.sigma_r)), R * R / 4.0};
}

TransitionQuad HstTree::transition(int i, int j, int k) const {
    check_node(i, j, k, steps_);
    const HstDrifts mu = hst_drifts(params_, R(i, j, k));
    bool clamped = false;

    const long jd = std::clamp<long>(j + shift_of(mu.mu_1 * h_ / d1_), 0, i);
    const double pj = clip_probability((mu.mu_1 * h_ + X1(i, j) - X1(i + 1, int(jd))) / (2.0 * d1_), clamped);

    const long kd = std::clamp<long>(k + shift_of(mu.mu_2 * h_ / d2_), 0, i);
    const double pk = clip_probability((mu.mu_2 * h_ + X2(i, k) - X2(i + 1, int(kd))) / (2.0 * d2_), clamped);

    return product_quad(int(jd), pj, int(kd), pk, clamped);
}

}  // namespace bitree
