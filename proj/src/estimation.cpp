#include "proco/estimation.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace proco {

OnlineMoments::OnlineMoments(int num_classes, int dim) : dim_(dim) {
    if (num_classes < 1) throw std::invalid_argument("OnlineMoments: need at least one class");
    if (dim < 1) throw std::invalid_argument("OnlineMoments: dim must be >= 1");
    counts_.assign(num_classes, 0);
    means_.assign(num_classes, Eigen::VectorXd::Zero(dim));
}

void OnlineMoments::merge(int cls, const Eigen::VectorXd& batch_mean, std::int64_t count) {
    if (cls < 0 || cls >= num_classes())
        throw std::invalid_argument("OnlineMoments: label " + std::to_string(cls) + " out of range");
    if (count <= 0) return;
    if (batch_mean.size() != dim_) throw std::invalid_argument("OnlineMoments: dimension mismatch");
    const std::int64_t n = counts_[cls];
    means_[cls] = (static_cast<double>(n) * means_[cls] + static_cast<double>(count) * batch_mean) /
                  static_cast<double>(n + count);
    counts_[cls] = n + count;
}

void OnlineMoments::reset() {
    for (auto& c : counts_) c = 0;
    for (auto& m : means_) m.setZero();
}

EpochEstimator::EpochEstimator(int num_classes, int dim, double r_max)
    : committed_(num_classes, dim), accumulating_(num_classes, dim), r_max_(r_max) {
    if (!(r_max > 0.0 && r_max < 1.0))
        throw std::invalid_argument("EpochEstimator: r_max must lie in (0, 1)");
}

void EpochEstimator::update(std::span<const LabeledFeature> batch) {
    for (const auto& f : batch) {
        if (f.label < 0 || f.label >= num_classes())
            throw std::invalid_argument("EpochEstimator: label " + std::to_string(f.label) +
                                        " out of range");
        if (f.z.size() != dim()) throw std::invalid_argument("EpochEstimator: dimension mismatch");
        if (std::abs(f.z.norm() - 1.0) > 1e-6)
            throw std::invalid_argument("EpochEstimator: feature norm deviates from 1 by more than 1e-6");
    }
    for (const auto& f : batch) accumulating_.merge(f.label, f.z, 1);
}

void EpochEstimator::commit_epoch() {
    committed_ = accumulating_;
    accumulating_.reset();
}

ClassMixture EpochEstimator::estimate_params(const Eigen::VectorXd& priors) const {
    const int k = num_classes();
    const int p = dim();
    if (priors.size() != k) throw std::invalid_argument("estimate_params: priors size mismatch");
    double prior_sum = 0.0;
    for (int j = 0; j < k; ++j) prior_sum += priors[j];
    if (std::abs(prior_sum - 1.0) > 1e-9)
        throw std::invalid_argument("estimate_params: priors must sum to 1");

    std::vector<ClassComponent> classes;
    classes.reserve(k);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(p);
    e1[0] = 1.0;
    for (int j = 0; j < k; ++j) {
        const double r = committed_.count(j) > 0 ? committed_.mean(j).norm() : 0.0;
        if (r <= 0.0) {
            // Unseen (or perfectly spread) class: uniform distribution; mu is a
            // placeholder that the kappa = 0 density never reads.
            classes.push_back({priors[j], VmfParams{UnitVector::require_unit(e1), 0.0}});
            continue;
        }
        const double r_bar = std::min(r, r_max_);
        UnitVector mu = UnitVector::normalize(committed_.mean(j));
        classes.push_back({priors[j], VmfParams{std::move(mu), kappa_from_resultant(p, r_bar)}});
    }
    return ClassMixture(p, std::move(classes));
}

double kappa_from_resultant(int p, double r_bar) {
    if (!(r_bar >= 0.0 && r_bar < 1.0))
        throw std::invalid_argument("kappa_from_resultant: R must lie in [0, 1)");
    return r_bar * (static_cast<double>(p) - r_bar * r_bar) / (1.0 - r_bar * r_bar);
}

namespace {
nlohmann::json moments_to_json(const OnlineMoments& m) {
    nlohmann::json classes = nlohmann::json::array();
    for (int j = 0; j < m.num_classes(); ++j) {
        std::vector<double> mean(m.mean(j).data(), m.mean(j).data() + m.dim());
        classes.push_back({{"n", m.count(j)}, {"mean", mean}});
    }
    return classes;
}

OnlineMoments moments_from_json(const nlohmann::json& j, int dim) {
    OnlineMoments m(static_cast<int>(j.size()), dim);
    for (int c = 0; c < static_cast<int>(j.size()); ++c) {
        const auto& entry = j.at(c);
        const std::int64_t n = entry.at("n").get<std::int64_t>();
        const auto mean = entry.at("mean").get<std::vector<double>>();
        if (static_cast<int>(mean.size()) != dim)
            throw std::invalid_argument("estimator JSON: mean dimension mismatch");
        if (n > 0)
            m.merge(c, Eigen::Map<const Eigen::VectorXd>(mean.data(), dim), n);
    }
    return m;
}
}  // namespace

nlohmann::json EpochEstimator::to_json() const {
    return {{"dim", dim()},
            {"num_classes", num_classes()},
            {"r_max", r_max_},
            {"committed", moments_to_json(committed_)},
            {"accumulating", moments_to_json(accumulating_)}};
}

EpochEstimator EpochEstimator::from_json(const nlohmann::json& j) {
    const int dim = j.at("dim").get<int>();
    const int k = j.at("num_classes").get<int>();
    EpochEstimator est(k, dim, j.at("r_max").get<double>());
    est.committed_ = moments_from_json(j.at("committed"), dim);
    est.accumulating_ = moments_from_json(j.at("accumulating"), dim);
    if (est.committed_.num_classes() != k || est.accumulating_.num_classes() != k)
        throw std::invalid_argument("estimator JSON: class count mismatch");
    return est;
}

}  // namespace proco
