#include "proco/vmf.hpp"

#include "proco/special_fn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace proco {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728;

void check_even_dim(int p) {
    if (p < 2 || p % 2 != 0)
        throw std::invalid_argument("dimension must be even and >= 2, got " + std::to_string(p));
}
}  // namespace

UnitVector UnitVector::normalize(Eigen::VectorXd v) {
    const double n = v.norm();
    if (!(n > 1e-300)) throw std::invalid_argument("UnitVector: cannot normalize ~zero vector");
    v /= n;
    return UnitVector(std::move(v));
}

UnitVector UnitVector::require_unit(Eigen::VectorXd v, double tol) {
    const double n = v.norm();
    if (std::abs(n - 1.0) > tol)
        throw std::invalid_argument("UnitVector: norm deviates from 1 by " + std::to_string(n - 1.0));
    return UnitVector(std::move(v));
}

ClassMixture::ClassMixture(int dim, std::vector<ClassComponent> classes)
    : dim_(dim), classes_(std::move(classes)) {
    check_even_dim(dim_);
    if (classes_.empty()) throw std::invalid_argument("ClassMixture: needs at least one class");
    double prior_sum = 0.0;
    for (const auto& c : classes_) {
        if (!(c.prior > 0.0 && c.prior <= 1.0))
            throw std::invalid_argument("ClassMixture: priors must lie in (0, 1]");
        if (c.params.mu.dim() != dim_)
            throw std::invalid_argument("ClassMixture: component dimension mismatch");
        if (!(c.params.kappa >= 0.0))
            throw std::invalid_argument("ClassMixture: kappa must be >= 0");
        prior_sum += c.prior;
    }
    if (std::abs(prior_sum - 1.0) > 1e-9)
        throw std::invalid_argument("ClassMixture: priors sum to " + std::to_string(prior_sum));
    log_norm_const_.reserve(classes_.size());
    resultant_.reserve(classes_.size());
    for (const auto& c : classes_) {
        log_norm_const_.push_back(log_vmf_constant(dim_, c.params.kappa));
        resultant_.push_back(mean_resultant(dim_, c.params.kappa));
    }
}

double log_vmf_constant(int p, double kappa) {
    check_even_dim(p);
    if (!(kappa >= 0.0)) throw std::domain_error("log_vmf_constant: kappa must be >= 0");
    const double half_p = 0.5 * p;
    if (kappa == 0.0) {
        // log surface area of S^{p-1}: ln 2 + (p/2) ln pi - lgamma(p/2)
        return std::log(2.0) + half_p * std::log(M_PI) - std::lgamma(half_p);
    }
    return half_p * kLog2Pi + log_bessel_i(p / 2 - 1, kappa) - (half_p - 1.0) * std::log(kappa);
}

std::pair<double, double> log_vmf_constant_and_resultant(int p, double kappa) {
    check_even_dim(p);
    if (!(kappa >= 0.0)) throw std::domain_error("log_vmf_constant: kappa must be >= 0");
    if (kappa == 0.0) return {log_vmf_constant(p, 0.0), 0.0};
    const double half_p = 0.5 * p;
    const auto [lo, hi] = log_bessel_i_pair(p / 2 - 1, kappa);
    return {half_p * kLog2Pi + lo - (half_p - 1.0) * std::log(kappa), std::exp(hi - lo)};
}

double log_density(const VmfParams& params, const UnitVector& z) {
    if (params.mu.dim() != z.dim())
        throw std::invalid_argument("log_density: dimension mismatch");
    return params.kappa * params.mu.dot(z) - log_vmf_constant(params.mu.dim(), params.kappa);
}

Eigen::VectorXd expectation(const VmfParams& params) {
    return mean_resultant(params.mu.dim(), params.kappa) * params.mu.vec();
}

double log_mgf_ratio(const VmfParams& params, const Eigen::VectorXd& t) {
    const int p = params.mu.dim();
    if (t.size() != p) throw std::invalid_argument("log_mgf_ratio: dimension mismatch");
    const double kappa = params.kappa;
    const double kappa_tilde = (kappa * params.mu.vec() + t).norm();
    if (kappa_tilde == kappa) return 0.0;
    return log_vmf_constant(p, kappa_tilde) - log_vmf_constant(p, kappa);
}

UnitVector sample_uniform_sphere(int p, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd g(p);
    while (true) {
        for (int i = 0; i < p; ++i) g[i] = gauss(rng);
        if (g.norm() > 1e-12) break;
    }
    return UnitVector::normalize(std::move(g));
}

UnitVector sample_one(const VmfParams& params, std::mt19937_64& rng) {
    const int p = params.mu.dim();
    const double kappa = params.kappa;
    if (kappa == 0.0) return sample_uniform_sphere(p, rng);

    // Ulrich-Wood envelope for the marginal of w = mu' z.
    const double pm1 = static_cast<double>(p - 1);
    const double b = pm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + pm1 * pm1));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + pm1 * std::log(1.0 - x0 * x0);

    std::gamma_distribution<double> gamma_half(0.5 * pm1, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double w = 0.0;
    while (true) {
        const double g1 = gamma_half(rng);
        const double g2 = gamma_half(rng);
        const double beta = g1 / (g1 + g2);
        w = (1.0 - (1.0 + b) * beta) / (1.0 - (1.0 - b) * beta);
        const double u = unif(rng);
        if (kappa * w + pm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }

    // Uniform direction in the tangent hyperplane at mu.
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(p);
    while (true) {
        for (int i = 0; i < p; ++i) v[i] = gauss(rng);
        v -= params.mu.vec().dot(v) * params.mu.vec();
        const double n = v.norm();
        if (n > 1e-12) {
            v /= n;
            break;
        }
    }
    Eigen::VectorXd z = w * params.mu.vec() + std::sqrt(std::max(0.0, 1.0 - w * w)) * v;
    return UnitVector::normalize(std::move(z));
}

std::vector<UnitVector> sample(const VmfParams& params, std::mt19937_64& rng, int n) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    std::vector<UnitVector> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(sample_one(params, rng));
    return out;
}

}  // namespace proco
