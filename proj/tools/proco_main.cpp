#include "proco/datagen.hpp"
#include "proco/harness.hpp"
#include "proco/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

// Exit codes: 0 success, 1 suite failure / divergence, 2 usage error.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("PROCO_OUT_DIR")) return env;
    return "proco_out";
}

int run_gen(const proco::LongTailSpec& spec, const std::string& out) {
    const proco::Dataset ds = proco::generate(spec);
    proco::write_dataset(ds, out);
    std::cout << "wrote " << out << " (train=" << ds.train_x.rows() << ", test=" << ds.test_x.rows()
              << ", redraws=" << ds.mean_redraws << ")\n";
    return kExitOk;
}

struct TrainArgs {
    std::string data;
    std::string report_path;
    std::string csv_path;
    proco::TrainConfig cfg;
    bool semisup = false;
    double label_fraction = 0.1;
};

int run_train(const TrainArgs& args) {
    if (!std::filesystem::exists(std::filesystem::path(args.data) / "dataset.json")) {
        std::cerr << "train: dataset not found at " << args.data << "\n";
        return kExitUsage;
    }
    const proco::Dataset ds = proco::read_dataset(args.data);
    proco::TrainReport report;
    try {
        if (args.semisup) {
            const proco::SemiSplit split =
                proco::split_labels(ds, args.label_fraction, args.cfg.seed);
            report = proco::train_semisup(ds, split, args.cfg);
        } else {
            report = proco::train(ds, args.cfg);
        }
    } catch (const std::runtime_error& e) {
        std::cerr << "train: " << e.what() << "\n";
        return kExitFailure;
    }
    proco::write_report_json(report, args.report_path);
    if (!args.csv_path.empty()) proco::append_epoch_csv(report, args.csv_path);
    std::cout << "overall_acc=" << report.overall_acc << " many=" << report.many_acc
              << " medium=" << report.medium_acc << " few=" << report.few_acc << "\n";
    std::cout << "report: " << args.report_path << "\n";
    return kExitOk;
}

int run_verify(const std::string& suite, const proco::SuiteOptions& options,
               const std::string& out_path) {
    std::vector<proco::SuiteResult> results;
    if (suite == "all") {
        results = proco::run_all(options);
    } else {
        results.push_back(proco::run_suite(suite, options));
    }

    nlohmann::json report;
    report["options"] = {{"suite", suite}, {"seed", options.seed}, {"samples", options.samples}};
    nlohmann::json suites = nlohmann::json::array();
    bool all_passed = true;
    for (const auto& r : results) {
        suites.push_back({{"name", r.name}, {"passed", r.passed}, {"details", r.details}});
        all_passed = all_passed && r.passed;
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "\n";
    }
    report["suites"] = suites;
    report["passed"] = all_passed;

    if (!out_path.empty()) {
        std::filesystem::path p(out_path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p);
        out << report.dump(2) << '\n';
        std::cout << "report: " << out_path << "\n";
    }
    return all_passed ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"von Mises-Fisher contrastive learning toolkit"};
    app.require_subcommand(1);

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "generate a synthetic long-tailed dataset");
    proco::LongTailSpec spec;
    std::string gen_out = (default_out_dir() / "dataset").string();
    std::string mode = "vmf";
    gen->add_option("--classes", spec.num_classes, "number of classes")->check(CLI::PositiveNumber);
    gen->add_option("--n-max", spec.n_max, "samples in the largest class")->check(CLI::PositiveNumber);
    gen->add_option("--gamma", spec.gamma, "imbalance factor (max/min count)")
        ->check(CLI::Range(1.0, 1e9));
    gen->add_option("--p-raw", spec.p_raw, "raw input dimension")->check(CLI::Range(2, 1 << 20));
    gen->add_option("--kappa-gen", spec.kappa_gen, "generator concentration");
    gen->add_option("--sigma", spec.sigma, "gaussian-mode spread");
    gen->add_option("--mode", mode, "generator family: vmf | gaussnorm")
        ->check(CLI::IsMember({"vmf", "gaussnorm"}));
    gen->add_option("--min-angle", spec.min_angle_deg, "pairwise mean separation floor (degrees)");
    gen->add_option("--test-per-class", spec.test_per_class, "balanced test samples per class")
        ->check(CLI::PositiveNumber);
    gen->add_option("--seed", spec.seed, "rng seed");
    gen->add_option("--out", gen_out, "output directory");

    // --- train ---
    auto* train = app.add_subcommand("train", "train the toy two-branch model");
    TrainArgs targs;
    targs.report_path = (default_out_dir() / "train_report.json").string();
    train->add_option("--data", targs.data, "dataset directory (from gen)")->required();
    train->add_option("--alpha", targs.cfg.proco.alpha, "contrastive branch weight")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--tau", targs.cfg.proco.tau, "temperature")->check(CLI::PositiveNumber);
    train->add_option("--p", targs.cfg.proco.p, "representation dimension (even)");
    train->add_option("--hidden", targs.cfg.hidden, "encoder hidden width");
    train->add_option("--epochs", targs.cfg.optim.epochs, "training epochs")
        ->check(CLI::PositiveNumber);
    train->add_option("--batch", targs.cfg.optim.batch_size, "batch size")->check(CLI::PositiveNumber);
    train->add_option("--lr", targs.cfg.optim.lr, "learning rate")->check(CLI::PositiveNumber);
    train->add_option("--momentum", targs.cfg.optim.momentum, "SGD momentum");
    train->add_option("--decay-factor", targs.cfg.optim.decay_factor, "lr multiplier after decay");
    train->add_option("--decay-at", targs.cfg.optim.decay_at, "fraction of epochs before decay");
    train->add_option("--seed", targs.cfg.seed, "rng seed");
    train->add_option("--report", targs.report_path, "output report JSON path");
    train->add_option("--epochs-csv", targs.csv_path, "per-epoch metrics CSV (appended)");
    train->add_flag("--semisup", targs.semisup, "semi-supervised protocol");
    train->add_option("--label-fraction", targs.label_fraction, "labeled fraction for --semisup")
        ->check(CLI::Range(1e-6, 1.0));
    train->add_option("--threshold", targs.cfg.pseudo.threshold, "pseudo-label confidence threshold");
    train->add_option("--weak-noise", targs.cfg.pseudo.weak_noise, "weak view perturbation scale");
    train->add_option("--strong-noise", targs.cfg.pseudo.strong_noise,
                      "strong view perturbation scale");
    train->add_option("--many-threshold", targs.cfg.split.many_threshold,
                      "count above which a class is many-shot");
    train->add_option("--few-threshold", targs.cfg.split.few_threshold,
                      "count below which a class is few-shot");

    // --- verify ---
    auto* verify = app.add_subcommand("verify", "run the numerical verification suites");
    std::string suite = "all";
    proco::SuiteOptions options;
    std::string verify_out;
    auto names = proco::suite_names();
    names.push_back("all");
    verify->add_option("--suite", suite, "suite name or 'all'")->check(CLI::IsMember(names));
    verify->add_option("--seed", options.seed, "rng seed");
    verify->add_option("--samples", options.samples, "Monte Carlo sample count")
        ->check(CLI::PositiveNumber);
    verify->add_option("--out", verify_out, "report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message/help
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            spec.mode = mode == "vmf" ? proco::LongTailSpec::Mode::kVmf
                                      : proco::LongTailSpec::Mode::kGaussianNormalize;
            return run_gen(spec, gen_out);
        }
        if (train->parsed()) {
            if (targs.cfg.proco.p == 0) targs.cfg.proco.p = 16;
            return run_train(targs);
        }
        if (verify->parsed()) return run_verify(suite, options, verify_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
