// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance is pinned here or inside the verification suites it calls.

#include "proco/datagen.hpp"
#include "proco/estimation.hpp"
#include "proco/harness.hpp"
#include "proco/loss.hpp"
#include "proco/rng.hpp"
#include "proco/special_fn.hpp"
#include "proco/verify.hpp"
#include "proco/vmf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace proco;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool passed, const std::string& details) {
    std::printf("[%s] criterion %2d (%s): %s\n", passed ? "PASS" : "FAIL", number, name.c_str(),
                details.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

void criterion_from_suite(int number, const std::string& suite, const SuiteOptions& options,
                          const std::string& summary_key, double max_runtime_sec = 0.0) {
    const SuiteResult r = run_suite(suite, options);
    const double runtime = r.details.at("suite_runtime_sec").get<double>();
    bool passed = r.passed;
    std::string details;
    if (r.details.contains(summary_key)) {
        details = summary_key + "=" + r.details.at(summary_key).dump();
    } else {
        details = "details in verify report";
    }
    if (max_runtime_sec > 0.0) {
        passed = passed && runtime < max_runtime_sec;
        details += fmt(", runtime=%.1fs (budget %.0fs)", runtime, max_runtime_sec);
    }
    report(number, suite, passed, details);
}

void criterion_roundtrip() {
    bool all_ok = true;
    std::string lines;
    const int n = 100000;
    for (double kappa : {5.0, 50.0, 500.0}) {
        for (int p : {8, 64, 128}) {
            auto rng = make_stream(1, 400, static_cast<std::uint64_t>(kappa * 1000 + p));
            const UnitVector mu = sample_uniform_sphere(p, rng);
            const VmfParams truth{mu, kappa};
            EpochEstimator est(1, p);
            std::vector<LabeledFeature> batch;
            batch.reserve(n);
            for (int i = 0; i < n; ++i) batch.push_back({sample_one(truth, rng).vec(), 0});
            est.update(batch);
            est.commit_epoch();
            Eigen::VectorXd priors(1);
            priors << 1.0;
            const ClassMixture mix = est.estimate_params(priors);

            const double angle =
                std::acos(std::clamp(mix.component(0).params.mu.dot(mu), -1.0, 1.0)) * 180.0 /
                M_PI;
            const double inv_rel =
                std::abs(1.0 / mix.component(0).params.kappa - 1.0 / kappa) * kappa;
            const bool ok = angle <= 1.0 && inv_rel <= 0.1;
            all_ok = all_ok && ok;
            // statistical floor for the direction estimate at this cell
            const double floor_deg =
                std::sqrt((p - 1) / (n * kappa * mean_resultant(p, kappa))) * 180.0 / M_PI;
            lines += fmt("\n    kappa*=%-4.0f p=%-4d angle=%6.3f deg (tol 1, est. floor %5.2f) "
                         "|1/k-1/k*|/(1/k*)=%6.4f (tol 0.1) %s",
                         kappa, p, angle, floor_deg, inv_rel, ok ? "ok" : "exceeded");
        }
    }
    report(6, "estimation round-trip", all_ok, "n=100000 per cell" + lines);
}

void criterion_desk_scale() {
    LongTailSpec spec;
    spec.num_classes = 20;
    spec.n_max = 300;
    spec.gamma = 100.0;
    spec.p_raw = 24;
    spec.kappa_gen = 15.0;
    spec.min_angle_deg = 18.0;
    spec.test_per_class = 50;

    TrainConfig cfg;
    cfg.proco.tau = 0.07;
    cfg.proco.p = 16;
    cfg.hidden = 32;
    cfg.optim.epochs = 30;
    cfg.optim.batch_size = 64;
    cfg.optim.lr = 0.1;

    double mean_few[2] = {0.0, 0.0};
    double max_seed_runtime = 0.0;
    std::string lines;
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    for (std::uint64_t seed : seeds) {
        const auto seed_t0 = std::chrono::steady_clock::now();
        spec.seed = seed;
        const Dataset ds = generate(spec);
        double few[2];
        for (int a : {0, 1}) {
            cfg.proco.alpha = static_cast<double>(a);
            cfg.seed = seed;
            const TrainReport r = train(ds, cfg);
            few[a] = r.few_acc;
            mean_few[a] += r.few_acc / static_cast<double>(seeds.size());
        }
        max_seed_runtime = std::max(max_seed_runtime, seconds_since(seed_t0));
        lines += fmt("\n    seed %llu: few(alpha=0)=%.3f few(alpha=1)=%.3f",
                     static_cast<unsigned long long>(seed), few[0], few[1]);
    }
    const bool passed = mean_few[1] > mean_few[0] && max_seed_runtime < 600.0;
    report(9, "desk-scale long-tail experiment", passed,
           fmt("K=20 gamma=100, 5 seeds: mean few-shot alpha=1 %.4f vs alpha=0 %.4f, "
               "max per-seed runtime %.1fs (budget 600s)", mean_few[1], mean_few[0],
               max_seed_runtime) + lines);
}

void criterion_semisup() {
    // (a) uniform mixture + uniform prior emits no pseudo-labels at 0.95
    const int p = 16, k = 10;
    auto rng = make_stream(1, 500);
    std::vector<ClassComponent> classes;
    for (int j = 0; j < k; ++j)
        classes.push_back({1.0 / k, VmfParams{sample_uniform_sphere(p, rng), 0.0}});
    const ClassMixture uniform_mix(p, std::move(classes));
    PseudoLabelConfig plc;  // threshold 0.95
    int emitted = 0;
    for (int i = 0; i < 1000; ++i)
        emitted += pseudo_label(sample_uniform_sphere(p, rng), uniform_mix, 0.1, plc).has_value();

    // (b) well-separated synthetic split: precision of accepted labels
    LongTailSpec spec;
    spec.num_classes = 8;
    spec.n_max = 200;
    spec.gamma = 10.0;
    spec.p_raw = 16;
    spec.kappa_gen = 120.0;
    spec.min_angle_deg = 40.0;
    spec.test_per_class = 30;
    spec.seed = 2;
    const Dataset ds = generate(spec);
    const SemiSplit split = split_labels(ds, 0.2, 2);

    TrainConfig cfg;
    cfg.proco.tau = 0.1;
    cfg.proco.alpha = 1.0;
    cfg.proco.p = 16;
    cfg.hidden = 24;
    cfg.optim.epochs = 12;
    cfg.optim.batch_size = 32;
    cfg.optim.lr = 0.08;
    cfg.seed = 2;
    const TrainReport r = train_semisup(ds, split, cfg);

    const bool passed = emitted == 0 && r.pseudo_accepted_total > 0 && r.pseudo_precision >= 0.95;
    report(10, "semi-supervised sanity", passed,
           fmt("uniform mixture emitted %d/1000 pseudo-labels (want 0); confident config accepted "
               "%d with precision %.4f (tol >= 0.95)",
               emitted, r.pseudo_accepted_total, r.pseudo_precision));
}

}  // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    SuiteOptions base;
    base.seed = 1;
    base.samples = 100000;

    criterion_from_suite(1, "bessel", base, "max_rel_vs_series");
    criterion_from_suite(2, "mgf", base, "samples");
    criterion_from_suite(3, "prop1", base, "final_gap_out", 60.0);
    criterion_from_suite(4, "gradfd", base, "max_rel_loss_grad");
    criterion_from_suite(5, "lemma1", base, "max_rel_gap");
    criterion_roundtrip();
    criterion_from_suite(7, "prop2", base, "violations");
    {
        SuiteOptions opts = base;
        opts.samples = 200000;
        criterion_from_suite(8, "prop3", opts, "slope");
    }
    criterion_desk_scale();
    criterion_semisup();
    criterion_from_suite(11, "lemma3", base, "samples");

    std::printf("================\n%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
