#pragma once

#include "proco/datagen.hpp"
#include "proco/estimation.hpp"
#include "proco/loss.hpp"
#include "proco/vmf.hpp"

#include <nlohmann/json_fwd.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

namespace proco {

// Two-layer tanh encoder to R^p plus a linear classifier head on the
// pre-normalized representation u; the contrastive branch reads z = u/||u||.
class ToyModel {
public:
    struct Config {
        int p_raw = 32;
        int hidden = 32;
        int p = 16;
        int num_classes = 10;
        double init_scale = 0.5;  // scales the 1/sqrt(fan_in) uniform init
    };

    ToyModel(const Config& cfg, std::mt19937_64& rng);

    struct Activations {
        Eigen::VectorXd x, pre1, a, u, z, logits;
        double u_norm = 0.0;
    };
    Activations forward(const Eigen::VectorXd& x) const;

    struct Gradients {
        Eigen::MatrixXd w1, w2, wc;
        Eigen::VectorXd b1, b2, bc;
        void setZero();
        void axpy(double s, const Gradients& other);  // this += s * other
    };
    Gradients zero_gradients() const;

    // Accumulates parameter gradients for one sample given the loss gradients
    // w.r.t. the classifier logits and the normalized feature z.
    void backward(const Activations& acts, const Eigen::VectorXd& grad_logits,
                  const Eigen::VectorXd& grad_z, Gradients* grads) const;

    void sgd_step(const Gradients& grads, Gradients* velocity, double lr, double momentum);

    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& theta);

    const Config& config() const { return cfg_; }

    Eigen::MatrixXd w1, w2, wc;
    Eigen::VectorXd b1, b2, bc;

private:
    Config cfg_;
};

struct OptimConfig {
    double lr = 0.1;
    double momentum = 0.9;
    int epochs = 30;
    int batch_size = 64;
    double decay_factor = 0.1;    // lr multiplier after the decay point
    double decay_at = 0.8;        // fraction of epochs before decay
};

struct PseudoLabelConfig {
    double threshold = 0.95;   // in (0, 1); acceptance is >= threshold
    double weak_noise = 0.05;  // perturbation scale of the weak view
    double strong_noise = 0.25;
};

struct TrainConfig {
    ProcoConfig proco;  // tau, alpha; proco.p is the representation dimension
    OptimConfig optim;
    PseudoLabelConfig pseudo;
    GroupSplit split;
    int hidden = 32;
    double model_init_scale = 0.5;
    std::uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double mean_la = 0.0;
    double mean_proco = 0.0;
    int pseudo_accepted = 0;
    int pseudo_correct = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double overall_acc = 0.0;
    double many_acc = 0.0, medium_acc = 0.0, few_acc = 0.0;
    int many_total = 0, medium_total = 0, few_total = 0;
    int pseudo_accepted_total = 0;
    int pseudo_correct_total = 0;
    double pseudo_precision = 0.0;  // over accepted labels, vs hidden truth
    double pseudo_precision_many = 0.0, pseudo_precision_medium = 0.0, pseudo_precision_few = 0.0;
    std::uint64_t seed = 0;
    nlohmann::json config_echo() const;
    TrainConfig config;
};

struct EvalResult {
    double overall = 0.0;
    double many = 0.0, medium = 0.0, few = 0.0;
    int many_total = 0, medium_total = 0, few_total = 0;
    int correct = 0, total = 0;
};

// Classifier-branch accuracy overall and per count group; class_counts are the
// training-set counts used to assign each class to a group.
EvalResult evaluate(const ToyModel& model, const Eigen::MatrixXd& x, const std::vector<int>& y,
                    const std::vector<int>& class_counts, const GroupSplit& split);

struct PseudoLabel {
    int label = 0;
    double confidence = 0.0;
};

// Posterior over classes from the contrastive logits of the weak view;
// emits the argmax only when its probability reaches the threshold.
std::optional<PseudoLabel> pseudo_label(const UnitVector& z_weak, const ClassMixture& mix,
                                        double tau, const PseudoLabelConfig& cfg);

// Mini-batch SGD over the two-branch objective with the cross-epoch two-buffer
// parameter estimation. Deterministic under cfg.seed; throws on divergence.
TrainReport train(const Dataset& dataset, const TrainConfig& cfg);

// Labeled + unlabeled split for the semi-supervised protocol. The unlabeled
// true labels are kept only to score pseudo-label precision.
struct SemiSplit {
    Eigen::MatrixXd labeled_x;
    std::vector<int> labeled_y;
    Eigen::MatrixXd unlabeled_x;
    std::vector<int> unlabeled_true_y;
};
SemiSplit split_labels(const Dataset& dataset, double label_fraction, std::uint64_t seed);

TrainReport train_semisup(const Dataset& dataset, const SemiSplit& split, const TrainConfig& cfg);

nlohmann::json report_to_json(const TrainReport& report);
void write_report_json(const TrainReport& report, const std::filesystem::path& path);
void append_epoch_csv(const TrainReport& report, const std::filesystem::path& path);

}  // namespace proco
