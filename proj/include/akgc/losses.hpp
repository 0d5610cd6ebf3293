#pragma once

#include "akgc/linalg.hpp"

#include <span>
#include <vector>

namespace akgc {

struct LossConfig {
    double gamma_c = 0.02; // additive margin inside the contrastive loss
    double gamma_k = 9.0;  // structure-score margin
    double gamma_m = 1.0;  // alignment ranking margin
};

// Contrastive loss over one query: the positive competes against the unmasked
// negatives, with the positive score reduced by gamma_c and everything scaled
// by 1/tau. Log-sum-exp stabilized. With zero unmasked negatives the loss is
// exactly 0; `all_masked` (when non-null) reports that a nonempty negative
// list was entirely masked.
double info_nce(double pos, std::span<const double> negs, std::span<const char> mask,
                double gamma_c, double tau, bool* all_masked = nullptr);

// Same value; additionally accumulates upstream-scaled gradients. d_negs must
// match negs in length; masked entries receive exactly nothing. d_tau
// accumulates the derivative with respect to tau itself (callers training
// log(tau) multiply by tau).
double info_nce_grad(double pos, std::span<const double> negs, std::span<const char> mask,
                     double gamma_c, double tau, double upstream, double& d_pos,
                     std::span<double> d_negs, double& d_tau, bool* all_masked = nullptr);

// Self-adversarial sigmoid loss over structure scores (higher = better):
//   L = -log sigmoid(gamma_k + pos) - sum_i p_i * log sigmoid(-neg_i - gamma_k)
// with p = softmax(unmasked negative scores), treated as constant weights.
double self_adversarial(double pos, std::span<const double> negs, std::span<const char> mask,
                        double gamma_k);

double self_adversarial_grad(double pos, std::span<const double> negs, std::span<const char> mask,
                             double gamma_k, double upstream, double& d_pos,
                             std::span<double> d_negs);

// Alignment of the projected tail representation with the structure space:
// mean squared error against t_s plus a Euclidean margin hinge. The default
// orientation pulls g(t_u) toward t_s and away from h_s; `printed_margin`
// flips the hinge to max(d(g,h_s) - d(g,t_s) + gamma_m, 0).
double alignment(const Vec& g_t_u, const Vec& h_s, const Vec& t_s, double gamma_m,
                 bool printed_margin = false);

double alignment_grad(const Vec& g_t_u, const Vec& h_s, const Vec& t_s, double gamma_m,
                      bool printed_margin, double upstream, Vec& d_g, Vec& d_h, Vec& d_t);

inline double total_loss(double unified, double structure, double align) {
    return unified + structure + align;
}

} // namespace akgc
