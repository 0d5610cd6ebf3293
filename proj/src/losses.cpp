#include "akgc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace akgc {

namespace {

void check_mask(std::span<const double> negs, std::span<const char> mask, const char* who) {
    if (negs.size() != mask.size()) {
        throw std::invalid_argument(std::string(who) + ": negatives/mask length mismatch");
    }
}

double softplus(double x) { // log(1 + e^x), stable for both signs
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

double info_nce(double pos, std::span<const double> negs, std::span<const char> mask,
                double gamma_c, double tau, bool* all_masked) {
    double d_pos = 0.0, d_tau = 0.0;
    return info_nce_grad(pos, negs, mask, gamma_c, tau, 0.0, d_pos, std::span<double>{}, d_tau,
                         all_masked);
}

double info_nce_grad(double pos, std::span<const double> negs, std::span<const char> mask,
                     double gamma_c, double tau, double upstream, double& d_pos,
                     std::span<double> d_negs, double& d_tau, bool* all_masked) {
    check_mask(negs, mask, "info_nce");
    if (!d_negs.empty() && d_negs.size() != negs.size()) {
        throw std::invalid_argument("info_nce: gradient buffer length mismatch");
    }
    if (!(tau > 0.0)) throw std::invalid_argument("info_nce: tau must be positive");
    if (all_masked) *all_masked = false;

    const double s_pos = (pos - gamma_c) / tau;
    double max_s = s_pos;
    std::size_t live = 0;
    for (std::size_t i = 0; i < negs.size(); ++i) {
        if (mask[i]) continue;
        ++live;
        max_s = std::max(max_s, negs[i] / tau);
    }
    if (live == 0) {
        if (all_masked && !negs.empty()) *all_masked = true;
        return 0.0; // exp(s_pos) / exp(s_pos)
    }

    double denom = std::exp(s_pos - max_s);
    for (std::size_t i = 0; i < negs.size(); ++i) {
        if (!mask[i]) denom += std::exp(negs[i] / tau - max_s);
    }
    const double loss = -s_pos + max_s + std::log(denom);

    if (upstream != 0.0) {
        const double q_pos = std::exp(s_pos - max_s) / denom;
        d_pos += upstream * (q_pos - 1.0) / tau;
        // dL/dtau = -[(q_pos - 1)(pos - gamma_c) + sum_i q_i * neg_i] / tau^2
        double weighted = (q_pos - 1.0) * (pos - gamma_c);
        for (std::size_t i = 0; i < negs.size(); ++i) {
            if (mask[i]) continue;
            const double q_i = std::exp(negs[i] / tau - max_s) / denom;
            if (!d_negs.empty()) d_negs[i] += upstream * q_i / tau;
            weighted += q_i * negs[i];
        }
        d_tau += upstream * -weighted / (tau * tau);
    }
    return loss;
}

double self_adversarial(double pos, std::span<const double> negs, std::span<const char> mask,
                        double gamma_k) {
    double d_pos = 0.0;
    return self_adversarial_grad(pos, negs, mask, gamma_k, 0.0, d_pos, std::span<double>{});
}

double self_adversarial_grad(double pos, std::span<const double> negs, std::span<const char> mask,
                             double gamma_k, double upstream, double& d_pos,
                             std::span<double> d_negs) {
    check_mask(negs, mask, "self_adversarial");
    if (!d_negs.empty() && d_negs.size() != negs.size()) {
        throw std::invalid_argument("self_adversarial: gradient buffer length mismatch");
    }

    double loss = softplus(-(gamma_k + pos));
    if (upstream != 0.0) d_pos += upstream * (sigmoid(gamma_k + pos) - 1.0);

    double max_s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < negs.size(); ++i) {
        if (!mask[i]) max_s = std::max(max_s, negs[i]);
    }
    if (!std::isfinite(max_s)) return loss; // no unmasked negatives

    double z = 0.0;
    for (std::size_t i = 0; i < negs.size(); ++i) {
        if (!mask[i]) z += std::exp(negs[i] - max_s);
    }
    for (std::size_t i = 0; i < negs.size(); ++i) {
        if (mask[i]) continue;
        const double p_i = std::exp(negs[i] - max_s) / z; // detached weight
        loss += p_i * softplus(negs[i] + gamma_k);
        if (upstream != 0.0 && !d_negs.empty()) {
            d_negs[i] += upstream * p_i * sigmoid(negs[i] + gamma_k);
        }
    }
    return loss;
}

double alignment(const Vec& g_t_u, const Vec& h_s, const Vec& t_s, double gamma_m,
                 bool printed_margin) {
    Vec d_g, d_h, d_t;
    return alignment_grad(g_t_u, h_s, t_s, gamma_m, printed_margin, 0.0, d_g, d_h, d_t);
}

double alignment_grad(const Vec& g_t_u, const Vec& h_s, const Vec& t_s, double gamma_m,
                      bool printed_margin, double upstream, Vec& d_g, Vec& d_h, Vec& d_t) {
    const Eigen::Index dim = g_t_u.size();
    if (h_s.size() != dim || t_s.size() != dim) {
        throw std::invalid_argument("alignment: dimension mismatch");
    }
    if (dim == 0) throw std::invalid_argument("alignment: empty vectors");

    const Vec to_tail = g_t_u - t_s;
    const Vec to_head = g_t_u - h_s;
    const double mse = to_tail.squaredNorm() / static_cast<double>(dim);
    const double dist_t = to_tail.norm();
    const double dist_h = to_head.norm();
    const double hinge_arg =
        printed_margin ? dist_h - dist_t + gamma_m : dist_t - dist_h + gamma_m;
    const double hinge = std::max(hinge_arg, 0.0);

    if (upstream != 0.0) {
        if (d_g.size() != dim || d_h.size() != dim || d_t.size() != dim) {
            throw std::invalid_argument("alignment: gradient buffer dimension mismatch");
        }
        const double mse_coef = upstream * 2.0 / static_cast<double>(dim);
        d_g += mse_coef * to_tail;
        d_t -= mse_coef * to_tail;
        if (hinge_arg > 0.0) { // zero subgradient exactly at the kink
            const double sign = printed_margin ? -1.0 : 1.0;
            if (dist_t > 0.0) {
                const Vec gt = (upstream * sign / dist_t) * to_tail;
                d_g += gt;
                d_t -= gt;
            }
            if (dist_h > 0.0) {
                const Vec gh = (upstream * sign / dist_h) * to_head;
                d_g -= gh;
                d_h += gh;
            }
        }
    }
    return mse + hinge;
}

} // namespace akgc
