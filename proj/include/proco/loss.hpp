#pragma once

#include "proco/estimation.hpp"
#include "proco/vmf.hpp"

#include <Eigen/Core>

#include <span>

namespace proco {

// Shared knobs of the contrastive branch.
struct ProcoConfig {
    double tau = 0.1;    // temperature, > 0
    double alpha = 1.0;  // weight of the contrastive branch, >= 0
    int p = 0;           // feature dimension (even)
};

struct LossValueAndGrad {
    double value = 0.0;
    Eigen::VectorXd grad_z;  // gradient w.r.t. the input feature only
};

enum class ContrastVariant { kOut, kIn };

// -ln( pi_y e^{phi_y} / sum_j pi_j e^{phi_j} ), stable log-sum-exp.
double logit_adjustment_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& priors, int y);
// Gradient w.r.t. the logits: softmax(ln pi + phi) - onehot(y).
Eigen::VectorXd logit_adjustment_grad(const Eigen::VectorXd& logits, const Eigen::VectorXd& priors,
                                      int y);

// Empirical supervised contrastive loss over a concrete batch (the anchor
// itself must not be in the batch). Both placements of the log are supported;
// throws if the batch holds no positive for the anchor's label.
double supcon_empirical(const UnitVector& anchor, int anchor_label,
                        std::span<const LabeledFeature> batch, double tau, ContrastVariant variant);

// Per-class logits l_j = ln pi_j + ln C_p(kappa~_j) - ln C_p(kappa_j) with
// kappa~_j = ||kappa_j mu_j + z / tau||. These drive the closed-form loss and
// the pseudo-label posterior.
Eigen::VectorXd proco_class_logits(const ClassMixture& mix, const Eigen::VectorXd& z, double tau);

// Closed-form expected contrastive loss and its exact gradient w.r.t. z.
// Mixture parameters are constants (estimated out-of-band, no gradient).
// The core accepts any z in R^p so finite-difference probes and the chain
// rule through feature normalization stay well-defined off the sphere.
LossValueAndGrad proco_loss_at(const Eigen::VectorXd& z, int y, const ClassMixture& mix, double tau,
                               ContrastVariant variant);
LossValueAndGrad proco_loss(const UnitVector& z, int y, const ClassMixture& mix, double tau,
                            ContrastVariant variant);

// Large-concentration limit: softmax cross-entropy on logits
// ln pi_j + mu_j' z / tau + 1 / (2 tau^2 kappa_j).
double proco_asymptotic(const UnitVector& z, int y, const ClassMixture& mix, double tau);

struct CombinedLoss {
    double value = 0.0;        // la_value + alpha * proco_value
    double la_value = 0.0;
    double proco_value = 0.0;  // unweighted contrastive branch value (0 when alpha == 0)
    Eigen::VectorXd grad_logits;
    Eigen::VectorXd grad_z;
};

// Two-branch objective: logit adjustment on the classifier logits plus
// alpha times the closed-form contrastive loss (kIn) on the feature.
CombinedLoss combined_loss(const Eigen::VectorXd& classifier_logits, const UnitVector& z, int y,
                           const ClassMixture& mix, const Eigen::VectorXd& priors,
                           const ProcoConfig& config);

// max-shifted ln sum_j exp(v_j)
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace proco
