#include "proco/datagen.hpp"

#include "proco/rng.hpp"
#include "proco/vmf.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace proco {

namespace {
constexpr std::uint64_t kMeansStream = 100;
constexpr std::uint64_t kTrainStream = 101;
constexpr std::uint64_t kTestStream = 102;

void check_spec(const LongTailSpec& spec) {
    if (spec.num_classes < 1) throw std::invalid_argument("LongTailSpec: need at least one class");
    if (spec.n_max < 1) throw std::invalid_argument("LongTailSpec: n_max must be >= 1");
    if (!(spec.gamma >= 1.0)) throw std::invalid_argument("LongTailSpec: gamma must be >= 1");
    if (spec.p_raw < 2) throw std::invalid_argument("LongTailSpec: p_raw must be >= 2");
    if (spec.test_per_class < 1) throw std::invalid_argument("LongTailSpec: test_per_class must be >= 1");
}

Eigen::MatrixXd draw_separated_means(const LongTailSpec& spec, int* redraws) {
    auto rng = make_stream(spec.seed, kMeansStream);
    const double min_cos = std::cos(spec.min_angle_deg * M_PI / 180.0);
    const int k = spec.num_classes;
    Eigen::MatrixXd mu(k, spec.p_raw);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (int j = 0; j < k; ++j) mu.row(j) = sample_uniform_sphere(spec.p_raw, rng).vec();
        bool ok = true;
        for (int a = 0; a < k && ok; ++a)
            for (int b = a + 1; b < k && ok; ++b)
                if (mu.row(a).dot(mu.row(b)) > min_cos) ok = false;
        if (ok) {
            *redraws = attempt;
            return mu;
        }
    }
    throw std::runtime_error("datagen: could not satisfy the mean-separation floor; lower it");
}

Eigen::VectorXd draw_sample(const LongTailSpec& spec, const Eigen::VectorXd& mu,
                            std::mt19937_64& rng) {
    if (spec.mode == LongTailSpec::Mode::kVmf) {
        return sample_one(VmfParams{UnitVector::require_unit(mu, 1e-6), spec.kappa_gen}, rng).vec();
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd x = mu;
    for (int i = 0; i < x.size(); ++i) x[i] += spec.sigma * gauss(rng);
    const double n = x.norm();
    if (n < 1e-12) return mu;
    return x / n;
}
}  // namespace

Group classify_count(const GroupSplit& split, std::int64_t count) {
    if (split.few_threshold > split.many_threshold)
        throw std::invalid_argument("GroupSplit: thresholds out of order");
    if (count > split.many_threshold) return Group::kMany;
    if (count < split.few_threshold) return Group::kFew;
    return Group::kMedium;
}

std::vector<int> class_counts(const LongTailSpec& spec) {
    check_spec(spec);
    const int k = spec.num_classes;
    std::vector<int> counts(k);
    const double lambda = k > 1 ? std::pow(spec.gamma, -1.0 / (k - 1)) : 1.0;
    for (int j = 0; j < k; ++j) {
        const double n = spec.n_max * std::pow(lambda, j);
        counts[j] = std::max(1, static_cast<int>(std::lround(n)));
    }
    return counts;
}

Dataset generate(const LongTailSpec& spec) {
    check_spec(spec);
    Dataset ds;
    ds.spec = spec;
    ds.counts = class_counts(spec);
    ds.true_mu = draw_separated_means(spec, &ds.mean_redraws);

    int total = 0;
    for (int n : ds.counts) total += n;
    ds.train_x.resize(total, spec.p_raw);
    ds.train_y.resize(total);
    int row = 0;
    for (int j = 0; j < spec.num_classes; ++j) {
        auto rng = make_stream(spec.seed, kTrainStream, static_cast<std::uint64_t>(j));
        for (int i = 0; i < ds.counts[j]; ++i) {
            ds.train_x.row(row) = draw_sample(spec, ds.true_mu.row(j), rng);
            ds.train_y[row] = j;
            ++row;
        }
    }

    ds.test_x.resize(static_cast<Eigen::Index>(spec.num_classes) * spec.test_per_class, spec.p_raw);
    ds.test_y.resize(ds.test_x.rows());
    row = 0;
    for (int j = 0; j < spec.num_classes; ++j) {
        auto rng = make_stream(spec.seed, kTestStream, static_cast<std::uint64_t>(j));
        for (int i = 0; i < spec.test_per_class; ++i) {
            ds.test_x.row(row) = draw_sample(spec, ds.true_mu.row(j), rng);
            ds.test_y[row] = j;
            ++row;
        }
    }
    return ds;
}

namespace {
void write_csv(const Eigen::MatrixXd& x, const std::vector<int>& y,
               const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("datagen: cannot write " + path.string());
    out.precision(17);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        out << y[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << x(r, c);
        out << '\n';
    }
}

void read_csv(const std::filesystem::path& path, int p, Eigen::MatrixXd* x, std::vector<int>* y) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("datagen: cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        labels.push_back(std::stoi(cell));
        std::vector<double> coords;
        while (std::getline(ss, cell, ',')) coords.push_back(std::stod(cell));
        if (static_cast<int>(coords.size()) != p)
            throw std::runtime_error("datagen: row dimension mismatch in " + path.string());
        rows.push_back(std::move(coords));
    }
    x->resize(static_cast<Eigen::Index>(rows.size()), p);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < p; ++c) (*x)(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    *y = std::move(labels);
}
}  // namespace

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_csv(ds.train_x, ds.train_y, dir / "train.csv");
    write_csv(ds.test_x, ds.test_y, dir / "test.csv");

    nlohmann::json j;
    j["spec"] = {{"num_classes", ds.spec.num_classes},
                 {"n_max", ds.spec.n_max},
                 {"gamma", ds.spec.gamma},
                 {"p_raw", ds.spec.p_raw},
                 {"kappa_gen", ds.spec.kappa_gen},
                 {"sigma", ds.spec.sigma},
                 {"mode", ds.spec.mode == LongTailSpec::Mode::kVmf ? "vmf" : "gaussnorm"},
                 {"min_angle_deg", ds.spec.min_angle_deg},
                 {"test_per_class", ds.spec.test_per_class},
                 {"seed", ds.spec.seed}};
    j["counts"] = ds.counts;
    j["mean_redraws"] = ds.mean_redraws;
    nlohmann::json mus = nlohmann::json::array();
    for (Eigen::Index r = 0; r < ds.true_mu.rows(); ++r) {
        std::vector<double> m(static_cast<std::size_t>(ds.true_mu.cols()));
        for (Eigen::Index c = 0; c < ds.true_mu.cols(); ++c)
            m[static_cast<std::size_t>(c)] = ds.true_mu(r, c);
        mus.push_back(m);
    }
    j["true_mu"] = mus;

    std::ofstream out(dir / "dataset.json");
    if (!out) throw std::runtime_error("datagen: cannot write dataset.json");
    out << j.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / "dataset.json");
    if (!in) throw std::runtime_error("datagen: cannot read " + (dir / "dataset.json").string());
    nlohmann::json j;
    in >> j;

    Dataset ds;
    const auto& s = j.at("spec");
    ds.spec.num_classes = s.at("num_classes").get<int>();
    ds.spec.n_max = s.at("n_max").get<int>();
    ds.spec.gamma = s.at("gamma").get<double>();
    ds.spec.p_raw = s.at("p_raw").get<int>();
    ds.spec.kappa_gen = s.at("kappa_gen").get<double>();
    ds.spec.sigma = s.at("sigma").get<double>();
    ds.spec.mode = s.at("mode").get<std::string>() == "vmf" ? LongTailSpec::Mode::kVmf
                                                            : LongTailSpec::Mode::kGaussianNormalize;
    ds.spec.min_angle_deg = s.at("min_angle_deg").get<double>();
    ds.spec.test_per_class = s.at("test_per_class").get<int>();
    ds.spec.seed = s.at("seed").get<std::uint64_t>();
    ds.counts = j.at("counts").get<std::vector<int>>();
    ds.mean_redraws = j.at("mean_redraws").get<int>();

    const auto mus = j.at("true_mu").get<std::vector<std::vector<double>>>();
    ds.true_mu.resize(static_cast<Eigen::Index>(mus.size()), ds.spec.p_raw);
    for (std::size_t r = 0; r < mus.size(); ++r)
        for (int c = 0; c < ds.spec.p_raw; ++c)
            ds.true_mu(static_cast<Eigen::Index>(r), c) = mus[r][static_cast<std::size_t>(c)];

    read_csv(dir / "train.csv", ds.spec.p_raw, &ds.train_x, &ds.train_y);
    read_csv(dir / "test.csv", ds.spec.p_raw, &ds.test_x, &ds.test_y);
    return ds;
}

}  // namespace proco
