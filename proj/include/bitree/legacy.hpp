#pragma once

#include "bitree/model.hpp"
#include "bitree/transition.hpp"

namespace bitree {

struct WeiDrifts {
    double mu_X = 0.0;
    double mu_R = 0.0;
    double mu_Y = 0.0;
};

// Drifts of X = log(S)/sigma_S, R = 2 sqrt(r)/sigma_r and the decorrelated
// Y = (X - rho R)/sqrt(1 - rho^2). NaN at R = 0, where the R drift blows up.
WeiDrifts wei_drifts(const ModelParams& p, double R);

// Integer part truncated toward zero, int((mu*sqrt(h) + 1)/2).
long wei_jump_shift(double mu, double h);

// Product-form lattice on (Y, R). Index j runs over Y, k over R.
class WeiTree {
public:
    explicit WeiTree(const ValidatedInputs& in);

    [[nodiscard]] int steps() const { return steps_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] double R(int i, int k) const;
    [[nodiscard]] double Y(int i, int j) const { return Y0_ + (2 * j - i) * sqrt_h_; }
    [[nodiscard]] NodeState state(int i, int j, int k) const;
    [[nodiscard]] TransitionQuad transition(int i, int j, int k) const;

private:
    ModelParams params_;
    int steps_;
    double h_;
    double sqrt_h_;
    double R0_;
    double Y0_;
    double sqrt_1mr2_;
};

struct HstDrifts {
    double mu_X = 0.0;
    double mu_R = 0.0;  // drift of R = 2 sqrt(r)
    double mu_1 = 0.0;  // X1 = sigma_r X + R
    double mu_2 = 0.0;  // X2 = sigma_r X - R
};

HstDrifts hst_drifts(const ModelParams& p, double R);

// Product-form lattice on (X1, X2), whose noises are orthogonal. Index j runs
// over X1, k over X2; the two step sizes differ.
class HstTree {
public:
    explicit HstTree(const ValidatedInputs& in);

    [[nodiscard]] int steps() const { return steps_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] double step1() const { return d1_; }
    [[nodiscard]] double step2() const { return d2_; }
    [[nodiscard]] double X1(int i, int j) const { return A0_ + (2 * j - i) * d1_; }
    [[nodiscard]] double X2(int i, int k) const { return B0_ + (2 * k - i) * d2_; }
    [[nodiscard]] double R(int i, int j, int k) const;
    [[nodiscard]] NodeState state(int i, int j, int k) const;
    [[nodiscard]] TransitionQuad transition(int i, int j, int k) const;

private:
    ModelParams params_;
    int steps_;
    double h_;
    double d1_;
    double d2_;
    double A0_;
    double B0_;
};

}  // namespace bitree
