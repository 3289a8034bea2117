#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace proco {

// Synthetic long-tailed sampling protocol: per-class counts decay
// exponentially, n_j = round(n_max * lambda^j) with lambda = gamma^{-1/(K-1)}
// so that the largest/smallest ratio equals the imbalance factor exactly.
struct LongTailSpec {
    int num_classes = 10;
    int n_max = 1000;
    double gamma = 100.0;  // imbalance factor, >= 1
    int p_raw = 32;        // raw input dimension
    double kappa_gen = 15.0;  // concentration of the per-class generator
    double sigma = 0.3;       // spread of the gaussian-then-normalize mode
    enum class Mode { kVmf, kGaussianNormalize } mode = Mode::kVmf;
    double min_angle_deg = 15.0;  // pairwise separation floor for the class means
    int test_per_class = 100;
    std::uint64_t seed = 0;
};

// Class partition by training count: many (> many_threshold),
// few (< few_threshold), medium otherwise.
struct GroupSplit {
    int many_threshold = 100;
    int few_threshold = 20;
};

enum class Group { kMany, kMedium, kFew };
Group classify_count(const GroupSplit& split, std::int64_t count);

std::vector<int> class_counts(const LongTailSpec& spec);

struct Dataset {
    LongTailSpec spec;
    Eigen::MatrixXd train_x;  // one sample per row
    std::vector<int> train_y;
    Eigen::MatrixXd test_x;  // balanced: test_per_class rows per class
    std::vector<int> test_y;
    std::vector<int> counts;   // per-class training counts
    Eigen::MatrixXd true_mu;   // ground-truth mean directions, one per row
    int mean_redraws = 0;      // re-draws needed to satisfy the separation floor
};

Dataset generate(const LongTailSpec& spec);

// train.csv / test.csv: label, then raw coordinates, one row per sample.
// dataset.json: spec plus ground-truth parameters.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace proco
