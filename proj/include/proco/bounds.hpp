#pragma once

#include "proco/vmf.hpp"

#include <Eigen/Core>

#include <random>
#include <vector>

namespace proco {

// Binary-class inputs for the generalization bound. Class index 0 is y = -1,
// index 1 is y = +1 throughout this module.
struct BinaryBoundInputs {
    VmfParams params_neg;  // estimated (mu, kappa) for y = -1
    VmfParams params_pos;  // estimated (mu, kappa) for y = +1
    double prior_neg = 0.5;
    double prior_pos = 0.5;
    std::vector<UnitVector> samples_neg;
    std::vector<UnitVector> samples_pos;
    double delta = 0.1;  // confidence level, in (0, 1)
    double tau = 0.1;
};

// Linear discriminant induced by a binary mixture in the large-concentration
// regime: w = (mu_+ - mu_-)/tau, b = (1/kappa_+ - 1/kappa_-)/(2 tau^2)
// + ln(pi_+/pi_-).
struct BinaryDiscriminant {
    Eigen::VectorXd w;
    double b = 0.0;
};
BinaryDiscriminant binary_discriminant(const VmfParams& params_pos, const VmfParams& params_neg,
                                       double prior_pos, double prior_neg, double tau);

struct ClassBoundTerms {
    double empirical = 0.0;  // mean loss over the class sample set
    double variance = 0.0;   // sqrt(2 w' Sigma_y w ln(2/delta) / N_y)
    double range = 0.0;      // ln(2/delta)/(3 N_y) * ln(1 + e^{||w|| - b y})
    double total = 0.0;
};

struct GeneralizationBoundResult {
    ClassBoundTerms neg;
    ClassBoundTerms pos;
    double total = 0.0;  // prior-weighted sum over classes
    BinaryDiscriminant discriminant;
};

GeneralizationBoundResult generalization_bound(const BinaryBoundInputs& inputs);

struct ExcessRiskResult {
    std::vector<double> epsilons;      // perturbation sizes that entered the fit
    std::vector<double> gaps;          // Monte Carlo risk gaps at those sizes
    std::vector<double> excluded;      // positive epsilons dropped for non-positive gap
    std::vector<double> all_epsilons;  // every requested size, including zero
    std::vector<double> all_gaps;
    double slope = 0.0;  // fitted d ln(gap) / d ln(eps)
    double intercept = 0.0;
    int eval_samples = 0;
};

// Perturbs mu along a fixed random tangent direction by eps and 1/kappa
// additively by eps, then measures E[L(perturbed)] - E[L(true)] on a common
// Monte Carlo draw from the true mixture and fits ln(gap) against ln(eps).
ExcessRiskResult excess_risk_scaling(const VmfParams& true_pos, const VmfParams& true_neg,
                                     double prior_pos, double prior_neg, double tau,
                                     const std::vector<double>& epsilons, int eval_samples,
                                     std::mt19937_64& rng);

}  // namespace proco
