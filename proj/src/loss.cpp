#include "proco/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace proco {

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

namespace {
Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
    const double lse = log_sum_exp(v);
    return (v.array() - lse).exp();
}

void check_label(int y, int k) {
    if (y < 0 || y >= k) throw std::invalid_argument("class index out of range");
}

void check_priors(const Eigen::VectorXd& priors) {
    double s = 0.0;
    for (int i = 0; i < priors.size(); ++i) {
        if (!(priors[i] > 0.0)) throw std::invalid_argument("priors must be positive");
        s += priors[i];
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("priors must sum to 1");
}
}  // namespace

double logit_adjustment_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& priors, int y) {
    check_label(y, static_cast<int>(logits.size()));
    if (priors.size() != logits.size()) throw std::invalid_argument("priors/logits size mismatch");
    check_priors(priors);
    Eigen::VectorXd adjusted = logits + priors.array().log().matrix();
    return -adjusted[y] + log_sum_exp(adjusted);
}

Eigen::VectorXd logit_adjustment_grad(const Eigen::VectorXd& logits, const Eigen::VectorXd& priors,
                                      int y) {
    check_label(y, static_cast<int>(logits.size()));
    Eigen::VectorXd adjusted = logits + priors.array().log().matrix();
    Eigen::VectorXd g = softmax(adjusted);
    g[y] -= 1.0;
    return g;
}

double supcon_empirical(const UnitVector& anchor, int anchor_label,
                        std::span<const LabeledFeature> batch, double tau, ContrastVariant variant) {
    if (!(tau > 0.0)) throw std::invalid_argument("supcon_empirical: tau must be > 0");
    if (batch.empty()) throw std::invalid_argument("supcon_empirical: empty batch");

    Eigen::VectorXd scores(static_cast<Eigen::Index>(batch.size()));
    std::vector<Eigen::Index> positives;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const auto& f = batch[static_cast<std::size_t>(i)];
        if (f.z.size() != anchor.dim()) throw std::invalid_argument("supcon_empirical: dim mismatch");
        scores[i] = anchor.vec().dot(f.z) / tau;
        if (f.label == anchor_label) positives.push_back(i);
    }
    if (positives.empty())
        throw std::invalid_argument("supcon_empirical: batch holds no positive for the anchor");

    const double lse_all = log_sum_exp(scores);
    const double n_pos = static_cast<double>(positives.size());
    if (variant == ContrastVariant::kOut) {
        double mean_pos_score = 0.0;
        for (auto i : positives) mean_pos_score += scores[i];
        mean_pos_score /= n_pos;
        return -mean_pos_score + lse_all;
    }
    Eigen::VectorXd pos_scores(static_cast<Eigen::Index>(positives.size()));
    for (Eigen::Index i = 0; i < pos_scores.size(); ++i)
        pos_scores[i] = scores[positives[static_cast<std::size_t>(i)]];
    return std::log(n_pos) - log_sum_exp(pos_scores) + lse_all;
}

Eigen::VectorXd proco_class_logits(const ClassMixture& mix, const Eigen::VectorXd& z, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("proco: tau must be > 0");
    if (z.size() != mix.dim()) throw std::invalid_argument("proco: dimension mismatch");
    const int k = mix.num_classes();
    const int p = mix.dim();
    Eigen::VectorXd logits(k);
    for (int j = 0; j < k; ++j) {
        const auto& c = mix.component(j);
        const double kappa_tilde = (c.params.kappa * c.params.mu.vec() + z / tau).norm();
        logits[j] = std::log(c.prior) + log_vmf_constant(p, kappa_tilde) - mix.log_norm_const(j);
    }
    return logits;
}

LossValueAndGrad proco_loss_at(const Eigen::VectorXd& z, int y, const ClassMixture& mix, double tau,
                               ContrastVariant variant) {
    if (!(tau > 0.0)) throw std::invalid_argument("proco: tau must be > 0");
    if (z.size() != mix.dim()) throw std::invalid_argument("proco: dimension mismatch");
    const int k = mix.num_classes();
    const int p = mix.dim();
    check_label(y, k);

    Eigen::VectorXd logits(k);
    Eigen::MatrixXd tilted(p, k);  // kappa_j mu_j + z / tau per class
    Eigen::VectorXd kappa_tilde(k);
    Eigen::VectorXd resultant_tilde(k);  // A_p at the tilted concentration
    for (int j = 0; j < k; ++j) {
        const auto& c = mix.component(j);
        tilted.col(j) = c.params.kappa * c.params.mu.vec() + z / tau;
        kappa_tilde[j] = tilted.col(j).norm();
        const auto [log_c_tilde, a_tilde] = log_vmf_constant_and_resultant(p, kappa_tilde[j]);
        resultant_tilde[j] = a_tilde;
        logits[j] = std::log(c.prior) + log_c_tilde - mix.log_norm_const(j);
    }
    const double lse = log_sum_exp(logits);
    Eigen::VectorXd weights = (logits.array() - lse).exp();  // softmax over class logits
    if (variant == ContrastVariant::kIn) weights[y] -= 1.0;

    LossValueAndGrad out;
    out.grad_z = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < k; ++j) {
        if (kappa_tilde[j] <= 0.0) continue;  // analytic limit: zero contribution
        out.grad_z += weights[j] * resultant_tilde[j] / (tau * kappa_tilde[j]) * tilted.col(j);
    }

    if (variant == ContrastVariant::kIn) {
        out.value = -logits[y] + lse;
    } else {
        out.value = -mix.resultant(y) * mix.component(y).params.mu.vec().dot(z) / tau + lse;
        out.grad_z -= mix.resultant(y) / tau * mix.component(y).params.mu.vec();
    }
    return out;
}

LossValueAndGrad proco_loss(const UnitVector& z, int y, const ClassMixture& mix, double tau,
                            ContrastVariant variant) {
    return proco_loss_at(z.vec(), y, mix, tau, variant);
}

double proco_asymptotic(const UnitVector& z, int y, const ClassMixture& mix, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("proco: tau must be > 0");
    if (z.dim() != mix.dim()) throw std::invalid_argument("proco: dimension mismatch");
    const int k = mix.num_classes();
    check_label(y, k);
    Eigen::VectorXd logits(k);
    for (int j = 0; j < k; ++j) {
        const auto& c = mix.component(j);
        // Outside the kappa >> p regime the 1/kappa bias is clamped to keep the
        // value finite; the expansion is only meaningful for large kappa anyway.
        const double kappa = std::max(c.params.kappa, 1e-12);
        logits[j] = std::log(c.prior) + c.params.mu.dot(z) / tau + 1.0 / (2.0 * tau * tau * kappa);
    }
    return -logits[y] + log_sum_exp(logits);
}

CombinedLoss combined_loss(const Eigen::VectorXd& classifier_logits, const UnitVector& z, int y,
                           const ClassMixture& mix, const Eigen::VectorXd& priors,
                           const ProcoConfig& config) {
    if (!(config.alpha >= 0.0)) throw std::invalid_argument("combined_loss: alpha must be >= 0");
    CombinedLoss out;
    out.la_value = logit_adjustment_loss(classifier_logits, priors, y);
    out.grad_logits = logit_adjustment_grad(classifier_logits, priors, y);
    out.value = out.la_value;
    if (config.alpha > 0.0) {
        LossValueAndGrad rep = proco_loss(z, y, mix, config.tau, ContrastVariant::kIn);
        out.proco_value = rep.value;
        out.value += config.alpha * rep.value;
        out.grad_z = config.alpha * rep.grad_z;
    } else {
        out.grad_z = Eigen::VectorXd::Zero(z.dim());
    }
    return out;
}

}  // namespace proco
