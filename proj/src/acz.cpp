#include "bitree/acz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bitree {

AczTree::AczTree(const ValidatedInputs& in)
    : params_(in.params), policy_(in.config.clamp_policy), theta_star_(in.theta_star()),
      rates_(in.params, in.config.steps, in.h), equity_(in.params, in.config.steps, in.h) {
    const int n = in.config.steps;
    rate_branches_.reserve(size_t(n) * size_t(n + 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= i; ++k) rate_branches_.push_back(rates_.branch(i, k));
}

TransitionQuad AczTree::transition(int i, int j, int k) const {
    if (i < 0 || i >= steps() || j < 0 || j > i || k < 0 || k > i)
        throw std::out_of_range("transition requested outside the lattice");

    const Branch& rb = rate_branch(i, k);
    const double r = rates_.row(i)[k];
    const double S = equity_.row(i)[j];
    const Branch eb = equity_.branch(i, j, r);
    const double p = rb.p;
    const double ph = eb.p;

    TransitionQuad q;
    q.j_up = eb.up;
    q.j_down = eb.down;
    q.k_up = rb.up;
    q.k_down = rb.down;
    q.marginal_clamped = rb.clamped || eb.clamped;

    double c = 0.0;
    const double h = rates_.h();
    if (r < theta_star_ * std::sqrt(h)) {
        q.regime = Regime::near_zero;
    } else {
        const auto s_next = equity_.row(i + 1);
        const auto r_next = rates_.row(i + 1);
        const double width = (s_next[eb.up] - s_next[eb.down]) * (r_next[rb.up] - r_next[rb.down]);
        c = (params_.rho * params_.sigma_r * std::sqrt(r) * params_.sigma_S * S * h -
             mu_S(S, r) * mu_r(params_, r) * h * h) / width;
        if (!std::isfinite(c)) throw std::runtime_error("non-finite joint correction");
        if (policy_ == ClampPolicy::clamp_and_count) {
            const double lo = std::max(-ph * p, -(1.0 - ph) * (1.0 - p));
            const double hi = std::min(ph * (1.0 - p), (1.0 - ph) * p);
            const double cc = std::clamp(c, lo, hi);
            q.clamped = cc != c;
            c = cc;
        }
    }
    q.q_uu = ph * p + c;
    q.q_ud = ph * (1.0 - p) - c;
    q.q_du = (1.0 - ph) * p - c;
    q.q_dd = (1.0 - ph) * (1.0 - p) + c;
    if (q.clamped) {
        // the projected weight is zero up to rounding
        for (double* w : {&q.q_uu, &q.q_ud, &q.q_du, &q.q_dd}) *w = std::max(*w, 0.0);
    }
    for (double w : q.weights())
        if (w < 0.0 || w > 1.0) q.feasible = false;
    return q;
}

MomentDefects moment_defects(const AczTree& tree, int i, int j, int k, const TransitionQuad& q) {
    const ModelParams& p = tree.params();
    const double h = tree.h();
    const auto [S, r] = tree.state(i, j, k);
    const auto s_next = tree.equity().row(i + 1);
    const auto r_next = tree.rates().row(i + 1);

    const double dSu = s_next[q.j_up] - S, dSd = s_next[q.j_down] - S;
    const double dru = r_next[q.k_up] - r, drd = r_next[q.k_down] - r;

    struct Leaf { double w, dS, dr; };
    const Leaf leaves[] = {{q.q_uu, dSu, dru}, {q.q_ud, dSu, drd}, {q.q_du, dSd, dru}, {q.q_dd, dSd, drd}};

    MomentDefects m;
    for (const auto& l : leaves) {
        m.mean_S += l.w * l.dS;
        m.mean_r += l.w * l.dr;
        m.cov += l.w * l.dS * l.dr;
        m.var_S += l.w * l.dS * l.dS;
        m.var_r += l.w * l.dr * l.dr;
        m.fourth_S += l.w * std::pow(l.dS, 4);
        m.fourth_r += l.w * std::pow(l.dr, 4);
    }
    m.mean_S -= mu_S(S, r) * h;
    m.mean_r -= mu_r(p, r) * h;
    m.cov -= p.rho * p.sigma_r * std::sqrt(r) * p.sigma_S * S * h;
    m.var_S -= p.sigma_S * p.sigma_S * S * S * h;
    m.var_r -= p.sigma_r * p.sigma_r * r * h;
    return m;
}

}  // namespace bitree
