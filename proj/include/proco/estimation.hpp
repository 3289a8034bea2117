#pragma once

#include "proco/vmf.hpp"

#include <nlohmann/json_fwd.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace proco {

struct LabeledFeature {
    Eigen::VectorXd z;  // unit-norm feature
    int label = 0;
};

// Per-class running count and running mean of unit features, mergeable by the
// exact weighted-mean rule so batch splits and update order do not matter.
class OnlineMoments {
public:
    OnlineMoments(int num_classes, int dim);

    void merge(int cls, const Eigen::VectorXd& batch_mean, std::int64_t count);
    void reset();

    std::int64_t count(int cls) const { return counts_.at(cls); }
    const Eigen::VectorXd& mean(int cls) const { return means_.at(cls); }
    int num_classes() const { return static_cast<int>(counts_.size()); }
    int dim() const { return dim_; }

private:
    int dim_;
    std::vector<std::int64_t> counts_;
    std::vector<Eigen::VectorXd> means_;
};

// Two-buffer epoch scheme: parameter queries always read the committed buffer
// (the completed previous epoch) while the current epoch accumulates from
// zero. commit_epoch swaps the roles and clears the accumulator.
class EpochEstimator {
public:
    static constexpr double kDefaultRMax = 1.0 - 1e-6;

    EpochEstimator(int num_classes, int dim, double r_max = kDefaultRMax);

    // Merges the batch into the accumulating buffer. Throws on out-of-range
    // labels or features whose norm deviates from 1 by more than 1e-6.
    void update(std::span<const LabeledFeature> batch);

    void commit_epoch();

    // MLE parameters from the committed buffer. Classes with no committed
    // samples fall back to the uniform distribution (kappa = 0).
    ClassMixture estimate_params(const Eigen::VectorXd& priors) const;

    const OnlineMoments& committed() const { return committed_; }
    const OnlineMoments& accumulating() const { return accumulating_; }
    int num_classes() const { return committed_.num_classes(); }
    int dim() const { return committed_.dim(); }
    double r_max() const { return r_max_; }

    nlohmann::json to_json() const;
    static EpochEstimator from_json(const nlohmann::json& j);

private:
    OnlineMoments committed_;
    OnlineMoments accumulating_;
    double r_max_;
};

// kappa_hat = R (p - R^2) / (1 - R^2), the closed-form approximation to the
// concentration MLE. Caller clamps R away from 1.
double kappa_from_resultant(int p, double r_bar);

}  // namespace proco
