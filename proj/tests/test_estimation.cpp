#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "proco/estimation.hpp"
#include "proco/rng.hpp"
#include "proco/special_fn.hpp"
#include "proco/vmf.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace proco;

namespace {
Eigen::VectorXd basis(int p, int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e[i] = 1.0;
    return e;
}

std::vector<LabeledFeature> batch_of(std::initializer_list<std::pair<Eigen::VectorXd, int>> items) {
    std::vector<LabeledFeature> b;
    for (const auto& [z, y] : items) b.push_back({z, y});
    return b;
}
}  // namespace

TEST_CASE("update merges by the weighted-mean rule") {
    EpochEstimator est(2, 2);
    // first batch lands as the plain mean
    est.update(batch_of({{basis(2, 0), 0}, {basis(2, 0), 0}}));
    CHECK(est.accumulating().count(0) == 2);
    CHECK(est.accumulating().mean(0).isApprox(basis(2, 0)));

    // (n=2, mean=(1,0)) merged with (m=2, mean=(0,1)) -> (0.5, 0.5), n=4
    est.update(batch_of({{basis(2, 1), 0}, {basis(2, 1), 0}}));
    CHECK(est.accumulating().count(0) == 4);
    CHECK(est.accumulating().mean(0)[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(est.accumulating().mean(0)[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(est.accumulating().count(1) == 0);
}

TEST_CASE("update rejects bad input") {
    EpochEstimator est(2, 4);
    CHECK_THROWS_AS(est.update(batch_of({{basis(4, 0), 2}})), std::invalid_argument);
    CHECK_THROWS_AS(est.update(batch_of({{basis(4, 0), -1}})), std::invalid_argument);
    CHECK_THROWS_AS(est.update(batch_of({{1.001 * basis(4, 0), 0}})), std::invalid_argument);
    // a bad batch is rejected atomically
    CHECK_THROWS_AS(est.update(batch_of({{basis(4, 0), 0}, {2.0 * basis(4, 1), 1}})),
                    std::invalid_argument);
    CHECK(est.accumulating().count(0) == 0);
}

TEST_CASE("sub-batch splits and permutations do not change the result") {
    const int p = 6;
    auto rng = make_stream(3, 1);
    std::vector<LabeledFeature> all;
    for (int i = 0; i < 64; ++i) all.push_back({sample_uniform_sphere(p, rng).vec(), i % 3});

    EpochEstimator one(3, p), split(3, p), shuffled(3, p);
    one.update(all);
    split.update(std::span<const LabeledFeature>(all.data(), 17));
    split.update(std::span<const LabeledFeature>(all.data() + 17, all.size() - 17));
    auto perm = all;
    std::shuffle(perm.begin(), perm.end(), rng);
    shuffled.update(perm);

    for (int j = 0; j < 3; ++j) {
        CHECK(one.accumulating().count(j) == split.accumulating().count(j));
        CHECK((one.accumulating().mean(j) - split.accumulating().mean(j)).norm() <= 1e-12);
        CHECK((one.accumulating().mean(j) - shuffled.accumulating().mean(j)).norm() <= 1e-12);
        CHECK(one.accumulating().mean(j).norm() <= 1.0 + 1e-9);
    }
}

TEST_CASE("commit_epoch swaps buffers and resets the accumulator") {
    EpochEstimator est(2, 2);
    est.update(batch_of({{basis(2, 0), 0}, {basis(2, 1), 0}}));
    est.commit_epoch();
    CHECK(est.committed().count(0) == 2);
    CHECK(est.accumulating().count(0) == 0);

    // committed is untouched by further accumulation
    est.update(batch_of({{basis(2, 1), 0}}));
    CHECK(est.committed().mean(0)[0] == doctest::Approx(0.5));
    CHECK(est.accumulating().count(0) == 1);

    // consecutive commits with no updates leave only uniform fallbacks
    est.commit_epoch();
    est.commit_epoch();
    Eigen::VectorXd priors(2);
    priors << 0.5, 0.5;
    const ClassMixture mix = est.estimate_params(priors);
    CHECK(mix.component(0).params.kappa == 0.0);
    CHECK(mix.component(1).params.kappa == 0.0);
}

TEST_CASE("kappa_from_resultant pinned arithmetic") {
    CHECK(kappa_from_resultant(128, 0.0) == 0.0);
    CHECK(kappa_from_resultant(128, 0.9) == doctest::Approx(602.47894736842105).epsilon(1e-14));
    CHECK_THROWS_AS(kappa_from_resultant(128, 1.0), std::invalid_argument);

    // monotone in R on [0, r_max]
    double prev = -1.0;
    for (double r = 0.0; r < 0.999999; r += 0.01) {
        const double k = kappa_from_resultant(16, r);
        CHECK(k > prev);
        prev = k;
    }
}

TEST_CASE("estimate_params handles the clamp and degenerate paths") {
    const int p = 8;
    EpochEstimator est(3, p);
    auto rng = make_stream(5, 1);
    Eigen::VectorXd u = sample_uniform_sphere(p, rng).vec();

    // class 0: identical features -> R clamped to r_max
    std::vector<LabeledFeature> b;
    for (int i = 0; i < 10; ++i) b.push_back({u, 0});
    // class 1: two antipodal features -> zero mean -> uniform fallback
    b.push_back({u, 1});
    b.push_back({-u, 1});
    est.update(b);
    est.commit_epoch();

    Eigen::VectorXd priors(3);
    priors << 0.4, 0.4, 0.2;
    const ClassMixture mix = est.estimate_params(priors);

    const double r_max = est.r_max();
    CHECK((mix.component(0).params.mu.vec() - u).norm() <= 1e-12);
    CHECK(mix.component(0).params.kappa ==
          doctest::Approx(r_max * (p - r_max * r_max) / (1.0 - r_max * r_max)).epsilon(1e-12));
    CHECK(mix.component(1).params.kappa == 0.0);  // R = 0
    CHECK(mix.component(2).params.kappa == 0.0);  // never seen
}

TEST_CASE("estimate_params recovers a known resultant length") {
    const int p = 128;
    // two unit vectors at angle theta have mean norm cos(theta/2); pick 0.9
    const double theta = 2.0 * std::acos(0.9);
    Eigen::VectorXd a = basis(p, 0);
    Eigen::VectorXd b = std::cos(theta) * basis(p, 0) + std::sin(theta) * basis(p, 1);
    EpochEstimator est(1, p);
    est.update(batch_of({{a, 0}, {b, 0}}));
    est.commit_epoch();
    Eigen::VectorXd priors(1);
    priors << 1.0;
    const ClassMixture mix = est.estimate_params(priors);
    CHECK(mix.component(0).params.kappa == doctest::Approx(602.47894736842105).epsilon(1e-9));
}

TEST_CASE("sampler round-trip at p=16, kappa=100") {
    const int p = 16;
    const double kappa_true = 100.0;
    auto rng = make_stream(7, 1);
    const UnitVector mu_true = sample_uniform_sphere(p, rng);
    const VmfParams truth{mu_true, kappa_true};

    EpochEstimator est(1, p);
    std::vector<LabeledFeature> batch;
    batch.reserve(100000);
    for (int i = 0; i < 100000; ++i) batch.push_back({sample_one(truth, rng).vec(), 0});
    est.update(batch);
    est.commit_epoch();
    Eigen::VectorXd priors(1);
    priors << 1.0;
    const ClassMixture mix = est.estimate_params(priors);

    const double cosang = std::clamp(mix.component(0).params.mu.dot(mu_true), -1.0, 1.0);
    CHECK(std::acos(cosang) * 180.0 / M_PI <= 1.0);
    const double inv_err = std::abs(1.0 / mix.component(0).params.kappa - 1.0 / kappa_true);
    CHECK(inv_err <= 0.1 / kappa_true);
}

TEST_CASE("closed-form concentration approximation stays near the exact MLE") {
    // The exact MLE solves A_p(kappa) = R; bisection is the oracle here.
    auto exact_kappa = [](int p, double r) {
        double lo = 1e-8, hi = 1e9;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mean_resultant(p, mid) < r ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    for (int p : {4, 16, 64}) {
        for (double r : {0.1, 0.5, 0.9, 0.99}) {
            const double approx = kappa_from_resultant(p, r);
            const double exact = exact_kappa(p, r);
            CHECK(std::abs(approx - exact) / exact <= 0.05);
        }
    }
}

TEST_CASE("estimator JSON round-trip") {
    const int p = 4;
    EpochEstimator est(2, p);
    est.update(batch_of({{basis(p, 0), 0}, {basis(p, 1), 0}, {basis(p, 2), 1}}));
    est.commit_epoch();
    est.update(batch_of({{basis(p, 3), 1}}));

    const EpochEstimator back = EpochEstimator::from_json(est.to_json());
    CHECK(back.dim() == p);
    CHECK(back.r_max() == est.r_max());
    for (int j = 0; j < 2; ++j) {
        CHECK(back.committed().count(j) == est.committed().count(j));
        CHECK(back.accumulating().count(j) == est.accumulating().count(j));
        CHECK((back.committed().mean(j) - est.committed().mean(j)).norm() == 0.0);
        CHECK((back.accumulating().mean(j) - est.accumulating().mean(j)).norm() == 0.0);
    }
}
