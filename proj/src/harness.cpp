#include "proco/harness.hpp"

#include "proco/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace proco {

namespace {
void check_even(int p, const char* what) {
    if (p < 2 || p % 2 != 0)
        throw std::invalid_argument(std::string(what) + " must be even and >= 2");
}
}  // namespace

ToyModel::ToyModel(const Config& cfg, std::mt19937_64& rng) : cfg_(cfg) {
    check_even(cfg.p, "ToyModel: representation dimension");
    auto init_matrix = [&](Eigen::MatrixXd& m, int rows, int cols) {
        const double bound = cfg.init_scale / std::sqrt(static_cast<double>(cols));
        std::uniform_real_distribution<double> unif(-bound, bound);
        m.resize(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = unif(rng);
    };
    init_matrix(w1, cfg.hidden, cfg.p_raw);
    init_matrix(w2, cfg.p, cfg.hidden);
    init_matrix(wc, cfg.num_classes, cfg.p);
    b1 = Eigen::VectorXd::Zero(cfg.hidden);
    b2 = Eigen::VectorXd::Zero(cfg.p);
    bc = Eigen::VectorXd::Zero(cfg.num_classes);
}

ToyModel::Activations ToyModel::forward(const Eigen::VectorXd& x) const {
    Activations acts;
    acts.x = x;
    acts.pre1 = w1 * x + b1;
    acts.a = acts.pre1.array().tanh();
    acts.u = w2 * acts.a + b2;
    acts.u_norm = acts.u.norm();
    if (!(acts.u_norm > 1e-12 && acts.u_norm < 1e150))
        throw std::runtime_error("ToyModel: representation diverged or collapsed (|u| = " +
                                 std::to_string(acts.u_norm) + ")");
    acts.z = acts.u / acts.u_norm;
    acts.logits = wc * acts.u + bc;
    return acts;
}

void ToyModel::Gradients::setZero() {
    w1.setZero();
    w2.setZero();
    wc.setZero();
    b1.setZero();
    b2.setZero();
    bc.setZero();
}

void ToyModel::Gradients::axpy(double s, const Gradients& other) {
    w1 += s * other.w1;
    w2 += s * other.w2;
    wc += s * other.wc;
    b1 += s * other.b1;
    b2 += s * other.b2;
    bc += s * other.bc;
}

ToyModel::Gradients ToyModel::zero_gradients() const {
    Gradients g;
    g.w1 = Eigen::MatrixXd::Zero(w1.rows(), w1.cols());
    g.w2 = Eigen::MatrixXd::Zero(w2.rows(), w2.cols());
    g.wc = Eigen::MatrixXd::Zero(wc.rows(), wc.cols());
    g.b1 = Eigen::VectorXd::Zero(b1.size());
    g.b2 = Eigen::VectorXd::Zero(b2.size());
    g.bc = Eigen::VectorXd::Zero(bc.size());
    return g;
}

void ToyModel::backward(const Activations& acts, const Eigen::VectorXd& grad_logits,
                        const Eigen::VectorXd& grad_z, Gradients* grads) const {
    // Through the normalization z = u/||u||: du = (g - (z'g) z)/||u||.
    Eigen::VectorXd du = (grad_z - acts.z.dot(grad_z) * acts.z) / acts.u_norm;
    du.noalias() += wc.transpose() * grad_logits;

    grads->wc.noalias() += grad_logits * acts.u.transpose();
    grads->bc += grad_logits;
    grads->w2.noalias() += du * acts.a.transpose();
    grads->b2 += du;

    Eigen::VectorXd dpre1 =
        (w2.transpose() * du).cwiseProduct((1.0 - acts.a.array().square()).matrix());
    grads->w1.noalias() += dpre1 * acts.x.transpose();
    grads->b1 += dpre1;
}

void ToyModel::sgd_step(const Gradients& grads, Gradients* velocity, double lr, double momentum) {
    auto step = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& g, Eigen::MatrixXd& v) {
        v = momentum * v + g;
        param -= lr * v;
    };
    auto step_v = [&](Eigen::VectorXd& param, const Eigen::VectorXd& g, Eigen::VectorXd& v) {
        v = momentum * v + g;
        param -= lr * v;
    };
    step(w1, grads.w1, velocity->w1);
    step(w2, grads.w2, velocity->w2);
    step(wc, grads.wc, velocity->wc);
    step_v(b1, grads.b1, velocity->b1);
    step_v(b2, grads.b2, velocity->b2);
    step_v(bc, grads.bc, velocity->bc);
}

Eigen::VectorXd ToyModel::flatten() const {
    Eigen::VectorXd theta(w1.size() + b1.size() + w2.size() + b2.size() + wc.size() + bc.size());
    Eigen::Index off = 0;
    auto put = [&](const auto& m) {
        theta.segment(off, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        off += m.size();
    };
    put(w1);
    put(b1);
    put(w2);
    put(b2);
    put(wc);
    put(bc);
    return theta;
}

void ToyModel::unflatten(const Eigen::VectorXd& theta) {
    Eigen::Index off = 0;
    auto take = [&](auto& m) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = theta.segment(off, m.size());
        off += m.size();
    };
    take(w1);
    take(b1);
    take(w2);
    take(b2);
    take(wc);
    take(bc);
    if (off != theta.size()) throw std::invalid_argument("ToyModel::unflatten: size mismatch");
}

EvalResult evaluate(const ToyModel& model, const Eigen::MatrixXd& x, const std::vector<int>& y,
                    const std::vector<int>& class_counts, const GroupSplit& split) {
    EvalResult r;
    int correct_by_group[3] = {0, 0, 0};
    int total_by_group[3] = {0, 0, 0};
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto acts = model.forward(x.row(i).transpose());
        Eigen::Index pred = 0;
        acts.logits.maxCoeff(&pred);
        const int label = y[static_cast<std::size_t>(i)];
        const int g = static_cast<int>(classify_count(split, class_counts.at(label)));
        total_by_group[g] += 1;
        if (static_cast<int>(pred) == label) correct_by_group[g] += 1;
    }
    r.many_total = total_by_group[static_cast<int>(Group::kMany)];
    r.medium_total = total_by_group[static_cast<int>(Group::kMedium)];
    r.few_total = total_by_group[static_cast<int>(Group::kFew)];
    r.many = r.many_total ? static_cast<double>(correct_by_group[0]) / r.many_total : 0.0;
    r.medium = r.medium_total ? static_cast<double>(correct_by_group[1]) / r.medium_total : 0.0;
    r.few = r.few_total ? static_cast<double>(correct_by_group[2]) / r.few_total : 0.0;
    r.total = static_cast<int>(x.rows());
    r.correct = correct_by_group[0] + correct_by_group[1] + correct_by_group[2];
    r.overall = r.total ? static_cast<double>(r.correct) / r.total : 0.0;
    return r;
}

std::optional<PseudoLabel> pseudo_label(const UnitVector& z_weak, const ClassMixture& mix,
                                        double tau, const PseudoLabelConfig& cfg) {
    const Eigen::VectorXd logits = proco_class_logits(mix, z_weak.vec(), tau);
    const double lse = log_sum_exp(logits);
    Eigen::Index best = 0;
    const double best_logit = logits.maxCoeff(&best);
    const double confidence = std::exp(best_logit - lse);
    if (confidence >= cfg.threshold)
        return PseudoLabel{static_cast<int>(best), confidence};
    return std::nullopt;
}

namespace {

Eigen::VectorXd priors_from_labels(const std::vector<int>& labels, int num_classes) {
    Eigen::VectorXd priors = Eigen::VectorXd::Zero(num_classes);
    for (int y : labels) priors[y] += 1.0;
    for (int j = 0; j < num_classes; ++j)
        if (priors[j] == 0.0)
            throw std::invalid_argument("train: class " + std::to_string(j) + " has no labeled samples");
    priors /= static_cast<double>(labels.size());
    return priors;
}

// Noise on the sphere of the input's own radius: x -> ||x|| * unit(x + s g).
Eigen::VectorXd perturb_view(const Eigen::VectorXd& x, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gauss(rng);
    Eigen::VectorXd v = x + scale * g;
    const double n = v.norm();
    if (n < 1e-12) return x;
    return x.norm() * v / n;
}

TrainReport train_impl(const Eigen::MatrixXd& labeled_x, const std::vector<int>& labeled_y,
                       const Eigen::MatrixXd* unlabeled_x, const std::vector<int>* unlabeled_true_y,
                       const Dataset& dataset, const TrainConfig& cfg) {
    const int k = dataset.spec.num_classes;
    const int p = cfg.proco.p;
    check_even(p, "train: representation dimension");
    if (labeled_x.rows() == 0) throw std::invalid_argument("train: empty dataset");
    if (cfg.optim.epochs < 1 || cfg.optim.batch_size < 1)
        throw std::invalid_argument("train: bad optimizer settings");

    const Eigen::VectorXd priors = priors_from_labels(labeled_y, k);

    ToyModel::Config mcfg;
    mcfg.p_raw = static_cast<int>(labeled_x.cols());
    mcfg.hidden = cfg.hidden;
    mcfg.p = p;
    mcfg.num_classes = k;
    mcfg.init_scale = cfg.model_init_scale;
    auto init_rng = make_stream(cfg.seed, stream_id::kModelInit);
    ToyModel model(mcfg, init_rng);

    EpochEstimator estimator(k, p);
    ClassMixture mixture = estimator.estimate_params(priors);

    ToyModel::Gradients velocity = model.zero_gradients();
    ToyModel::Gradients grads = model.zero_gradients();

    auto views_rng = make_stream(cfg.seed, stream_id::kViews);

    const int n = static_cast<int>(labeled_x.rows());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const int n_unlabeled = unlabeled_x ? static_cast<int>(unlabeled_x->rows()) : 0;
    std::vector<int> uorder(n_unlabeled);
    std::iota(uorder.begin(), uorder.end(), 0);

    TrainReport report;
    report.seed = cfg.seed;
    report.config = cfg;
    int pseudo_accepted_by_group[3] = {0, 0, 0};  // bucketed by the predicted class group
    int pseudo_correct_by_group[3] = {0, 0, 0};

    const int decay_epoch = static_cast<int>(cfg.optim.decay_at * cfg.optim.epochs);
    for (int epoch = 0; epoch < cfg.optim.epochs; ++epoch) {
        const double lr =
            cfg.optim.lr * (epoch >= decay_epoch ? cfg.optim.decay_factor : 1.0);
        {
            auto shuffle_rng = make_stream(cfg.seed, stream_id::kShuffle, epoch);
            std::shuffle(order.begin(), order.end(), shuffle_rng);
        }
        if (n_unlabeled > 0) {
            auto ushuffle_rng = make_stream(cfg.seed, stream_id::kUnlabeledShuffle, epoch);
            std::shuffle(uorder.begin(), uorder.end(), ushuffle_rng);
        }

        EpochStats stats;
        stats.epoch = epoch;
        int labeled_seen = 0;

        const int num_batches = (n + cfg.optim.batch_size - 1) / cfg.optim.batch_size;
        for (int b = 0; b < num_batches; ++b) {
            const int lo = b * cfg.optim.batch_size;
            const int hi = std::min(n, lo + cfg.optim.batch_size);
            const int batch_n = hi - lo;
            grads.setZero();

            std::vector<ToyModel::Activations> acts(batch_n);
            std::vector<LabeledFeature> feats;
            feats.reserve(batch_n);
            for (int i = 0; i < batch_n; ++i) {
                const int idx = order[static_cast<std::size_t>(lo + i)];
                acts[i] = model.forward(labeled_x.row(idx).transpose());
                feats.push_back({acts[i].z, labeled_y[static_cast<std::size_t>(idx)]});
            }
            estimator.update(feats);

            double batch_loss = 0.0;
            const double inv_batch = 1.0 / batch_n;
            for (int i = 0; i < batch_n; ++i) {
                const int y = feats[static_cast<std::size_t>(i)].label;
                const CombinedLoss cl =
                    combined_loss(acts[i].logits, UnitVector::require_unit(acts[i].z, 1e-6), y,
                                  mixture, priors, cfg.proco);
                batch_loss += cl.value;
                stats.mean_la += cl.la_value;
                stats.mean_proco += cl.proco_value;
                model.backward(acts[i], inv_batch * cl.grad_logits, inv_batch * cl.grad_z, &grads);
            }
            stats.mean_loss += batch_loss;
            labeled_seen += batch_n;

            if (n_unlabeled > 0) {
                const int chunks = (n_unlabeled + cfg.optim.batch_size - 1) / cfg.optim.batch_size;
                const int ub = b % chunks;
                const int ulo = ub * cfg.optim.batch_size;
                const int uhi = std::min(n_unlabeled, ulo + cfg.optim.batch_size);
                const double inv_chunk = 1.0 / (uhi - ulo);
                std::vector<LabeledFeature> pseudo_feats;
                for (int i = ulo; i < uhi; ++i) {
                    const int idx = uorder[static_cast<std::size_t>(i)];
                    const Eigen::VectorXd raw = unlabeled_x->row(idx).transpose();
                    const Eigen::VectorXd weak = perturb_view(raw, cfg.pseudo.weak_noise, views_rng);
                    const Eigen::VectorXd strong =
                        perturb_view(raw, cfg.pseudo.strong_noise, views_rng);
                    const auto weak_acts = model.forward(weak);
                    const auto pl = pseudo_label(UnitVector::require_unit(weak_acts.z, 1e-6),
                                                 mixture, cfg.proco.tau, cfg.pseudo);
                    if (!pl) continue;
                    stats.pseudo_accepted += 1;
                    const int pg =
                        static_cast<int>(classify_count(cfg.split, dataset.counts.at(pl->label)));
                    pseudo_accepted_by_group[pg] += 1;
                    if (pl->label == (*unlabeled_true_y)[static_cast<std::size_t>(idx)]) {
                        stats.pseudo_correct += 1;
                        pseudo_correct_by_group[pg] += 1;
                    }

                    const auto strong_acts = model.forward(strong);
                    pseudo_feats.push_back({strong_acts.z, pl->label});
                    const CombinedLoss cl = combined_loss(
                        strong_acts.logits, UnitVector::require_unit(strong_acts.z, 1e-6),
                        pl->label, mixture, priors, cfg.proco);
                    batch_loss += cl.value;
                    model.backward(strong_acts, inv_chunk * cl.grad_logits, inv_chunk * cl.grad_z,
                                   &grads);
                }
                if (!pseudo_feats.empty()) estimator.update(pseudo_feats);
            }

            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(b));
            model.sgd_step(grads, &velocity, lr, cfg.optim.momentum);
        }

        estimator.commit_epoch();
        mixture = estimator.estimate_params(priors);

        stats.mean_loss /= labeled_seen;
        stats.mean_la /= labeled_seen;
        stats.mean_proco /= labeled_seen;
        report.epochs.push_back(stats);
        report.pseudo_accepted_total += stats.pseudo_accepted;
        report.pseudo_correct_total += stats.pseudo_correct;
    }

    const EvalResult ev = evaluate(model, dataset.test_x, dataset.test_y, dataset.counts, cfg.split);
    report.overall_acc = ev.overall;
    report.many_acc = ev.many;
    report.medium_acc = ev.medium;
    report.few_acc = ev.few;
    report.many_total = ev.many_total;
    report.medium_total = ev.medium_total;
    report.few_total = ev.few_total;
    if (report.pseudo_accepted_total > 0)
        report.pseudo_precision =
            static_cast<double>(report.pseudo_correct_total) / report.pseudo_accepted_total;
    auto group_precision = [&](Group g) {
        const int i = static_cast<int>(g);
        return pseudo_accepted_by_group[i] > 0
                   ? static_cast<double>(pseudo_correct_by_group[i]) / pseudo_accepted_by_group[i]
                   : 0.0;
    };
    report.pseudo_precision_many = group_precision(Group::kMany);
    report.pseudo_precision_medium = group_precision(Group::kMedium);
    report.pseudo_precision_few = group_precision(Group::kFew);
    return report;
}

}  // namespace

TrainReport train(const Dataset& dataset, const TrainConfig& cfg) {
    return train_impl(dataset.train_x, dataset.train_y, nullptr, nullptr, dataset, cfg);
}

SemiSplit split_labels(const Dataset& dataset, double label_fraction, std::uint64_t seed) {
    if (!(label_fraction > 0.0 && label_fraction <= 1.0))
        throw std::invalid_argument("split_labels: fraction must lie in (0, 1]");
    const int k = dataset.spec.num_classes;
    std::vector<std::vector<int>> by_class(k);
    for (std::size_t i = 0; i < dataset.train_y.size(); ++i)
        by_class[static_cast<std::size_t>(dataset.train_y[i])].push_back(static_cast<int>(i));

    std::vector<int> labeled_idx, unlabeled_idx;
    for (int j = 0; j < k; ++j) {
        auto rng = make_stream(seed, 200, static_cast<std::uint64_t>(j));
        auto& idx = by_class[static_cast<std::size_t>(j)];
        std::shuffle(idx.begin(), idx.end(), rng);
        const int keep = std::max(1, static_cast<int>(std::lround(label_fraction * idx.size())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (static_cast<int>(i) < keep ? labeled_idx : unlabeled_idx).push_back(idx[i]);
    }
    std::sort(labeled_idx.begin(), labeled_idx.end());
    std::sort(unlabeled_idx.begin(), unlabeled_idx.end());

    SemiSplit split;
    split.labeled_x.resize(static_cast<Eigen::Index>(labeled_idx.size()), dataset.train_x.cols());
    split.unlabeled_x.resize(static_cast<Eigen::Index>(unlabeled_idx.size()), dataset.train_x.cols());
    for (std::size_t i = 0; i < labeled_idx.size(); ++i) {
        split.labeled_x.row(static_cast<Eigen::Index>(i)) = dataset.train_x.row(labeled_idx[i]);
        split.labeled_y.push_back(dataset.train_y[static_cast<std::size_t>(labeled_idx[i])]);
    }
    for (std::size_t i = 0; i < unlabeled_idx.size(); ++i) {
        split.unlabeled_x.row(static_cast<Eigen::Index>(i)) = dataset.train_x.row(unlabeled_idx[i]);
        split.unlabeled_true_y.push_back(dataset.train_y[static_cast<std::size_t>(unlabeled_idx[i])]);
    }
    return split;
}

TrainReport train_semisup(const Dataset& dataset, const SemiSplit& split, const TrainConfig& cfg) {
    if (split.labeled_y.empty() || split.unlabeled_true_y.empty())
        throw std::invalid_argument("train_semisup: both sets must be nonempty");
    return train_impl(split.labeled_x, split.labeled_y, &split.unlabeled_x,
                      &split.unlabeled_true_y, dataset, cfg);
}

nlohmann::json TrainReport::config_echo() const {
    return {{"tau", config.proco.tau},
            {"alpha", config.proco.alpha},
            {"p", config.proco.p},
            {"hidden", config.hidden},
            {"model_init_scale", config.model_init_scale},
            {"lr", config.optim.lr},
            {"momentum", config.optim.momentum},
            {"epochs", config.optim.epochs},
            {"batch_size", config.optim.batch_size},
            {"decay_factor", config.optim.decay_factor},
            {"decay_at", config.optim.decay_at},
            {"pseudo_threshold", config.pseudo.threshold},
            {"weak_noise", config.pseudo.weak_noise},
            {"strong_noise", config.pseudo.strong_noise},
            {"many_threshold", config.split.many_threshold},
            {"few_threshold", config.split.few_threshold},
            {"seed", seed}};
}

nlohmann::json report_to_json(const TrainReport& report) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : report.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"loss", e.mean_loss},
                          {"la", e.mean_la},
                          {"proco", e.mean_proco},
                          {"pseudo_accepted", e.pseudo_accepted},
                          {"pseudo_correct", e.pseudo_correct}});
    return {{"config", report.config_echo()},
            {"seed", report.seed},
            {"epochs", epochs},
            {"overall_acc", report.overall_acc},
            {"many_acc", report.many_acc},
            {"medium_acc", report.medium_acc},
            {"few_acc", report.few_acc},
            {"many_total", report.many_total},
            {"medium_total", report.medium_total},
            {"few_total", report.few_total},
            {"pseudo_accepted", report.pseudo_accepted_total},
            {"pseudo_correct", report.pseudo_correct_total},
            {"pseudo_precision", report.pseudo_precision},
            {"pseudo_precision_many", report.pseudo_precision_many},
            {"pseudo_precision_medium", report.pseudo_precision_medium},
            {"pseudo_precision_few", report.pseudo_precision_few}};
}

void write_report_json(const TrainReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << report_to_json(report).dump(2) << '\n';
}

void append_epoch_csv(const TrainReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (fresh) out << "seed,epoch,loss,la,proco,pseudo_accepted,pseudo_correct\n";
    out.precision(17);
    for (const auto& e : report.epochs)
        out << report.seed << ',' << e.epoch << ',' << e.mean_loss << ',' << e.mean_la << ','
            << e.mean_proco << ',' << e.pseudo_accepted << ',' << e.pseudo_correct << '\n';
}

}  // namespace proco
