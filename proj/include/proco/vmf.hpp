#pragma once

#include <Eigen/Core>

#include <random>
#include <vector>

namespace proco {

// Point on the unit hypersphere S^{p-1}. Construction goes through the
// factories so the norm invariant is always checked or enforced.
class UnitVector {
public:
    static constexpr double kNormTol = 1e-9;

    // Rescales v to unit length; throws std::invalid_argument on a ~zero vector.
    static UnitVector normalize(Eigen::VectorXd v);
    // Accepts v only if already unit within tol.
    static UnitVector require_unit(Eigen::VectorXd v, double tol = kNormTol);

    const Eigen::VectorXd& vec() const { return v_; }
    int dim() const { return static_cast<int>(v_.size()); }
    double dot(const UnitVector& other) const { return v_.dot(other.v_); }

private:
    explicit UnitVector(Eigen::VectorXd v) : v_(std::move(v)) {}
    Eigen::VectorXd v_;
};

// von Mises-Fisher parameters for one class: mean direction and concentration.
struct VmfParams {
    UnitVector mu;
    double kappa = 0.0;  // >= 0; 0 means uniform on the sphere
};

struct ClassComponent {
    double prior = 0.0;  // in (0, 1]
    VmfParams params;
};

// Mixture of vMF components on S^{p-1}; priors must sum to 1 and all
// components share the (even) dimension. Per-class normalizer logs and mean
// resultants are cached at construction since the mixture is immutable and
// every loss evaluation needs them.
class ClassMixture {
public:
    ClassMixture(int dim, std::vector<ClassComponent> classes);

    int dim() const { return dim_; }
    int num_classes() const { return static_cast<int>(classes_.size()); }
    const std::vector<ClassComponent>& classes() const { return classes_; }
    const ClassComponent& component(int j) const { return classes_.at(j); }

    double log_norm_const(int j) const { return log_norm_const_.at(j); }  // ln C_p(kappa_j)
    double resultant(int j) const { return resultant_.at(j); }            // A_p(kappa_j)

private:
    int dim_;
    std::vector<ClassComponent> classes_;
    std::vector<double> log_norm_const_;
    std::vector<double> resultant_;
};

// ln C_p(kappa) = (p/2) ln(2 pi) + ln I_{p/2-1}(kappa) - (p/2-1) ln kappa.
// The kappa -> 0 limit is the log surface area of S^{p-1}, returned exactly
// at kappa == 0.
double log_vmf_constant(int p, double kappa);

// (ln C_p(kappa), A_p(kappa)) from one shared Bessel ladder; the loss needs
// both at every tilted concentration.
std::pair<double, double> log_vmf_constant_and_resultant(int p, double kappa);

// Log density of vMF(mu, kappa) at unit vector z.
double log_density(const VmfParams& params, const UnitVector& z);

// E[z] = A_p(kappa) mu.
Eigen::VectorXd expectation(const VmfParams& params);

// ln E[exp(t' z)] = ln C_p(kappa~) - ln C_p(kappa), kappa~ = ||kappa mu + t||.
double log_mgf_ratio(const VmfParams& params, const Eigen::VectorXd& t);

// Uniform draw on S^{p-1} (normalized standard normal vector).
UnitVector sample_uniform_sphere(int p, std::mt19937_64& rng);

// i.i.d. vMF draws by tangent-normal decomposition with Ulrich-Wood rejection
// for the radial component w = mu' z. kappa == 0 falls back to the uniform
// sphere. Only used by verification oracles and synthetic data generation.
std::vector<UnitVector> sample(const VmfParams& params, std::mt19937_64& rng, int n);
UnitVector sample_one(const VmfParams& params, std::mt19937_64& rng);

}  // namespace proco
