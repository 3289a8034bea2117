#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "proco/rng.hpp"
#include "proco/special_fn.hpp"
#include "proco/vmf.hpp"

#include <algorithm>
#include <cmath>

using namespace proco;

namespace {
Eigen::VectorXd basis(int p, int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e[i] = 1.0;
    return e;
}
}  // namespace

TEST_CASE("UnitVector construction") {
    CHECK_THROWS_AS(UnitVector::normalize(Eigen::VectorXd::Zero(4)), std::invalid_argument);
    CHECK_THROWS_AS(UnitVector::require_unit(2.0 * basis(4, 0)), std::invalid_argument);
    const UnitVector u = UnitVector::normalize(3.0 * basis(4, 1));
    CHECK(u.vec()[1] == 1.0);
    CHECK(u.dim() == 4);
}

TEST_CASE("log_density") {
    // kappa = 0 on the circle: uniform density 1/(2 pi)
    const VmfParams uniform{UnitVector::require_unit(basis(2, 0)), 0.0};
    CHECK(log_density(uniform, UnitVector::require_unit(basis(2, 1))) ==
          doctest::Approx(-1.8378770664093455).epsilon(1e-14));

    // z = mu, p = 4, kappa = 3: 3 - ln C_4(3), series oracle for I_1(3)
    const VmfParams p4{UnitVector::require_unit(basis(4, 0)), 3.0};
    CHECK(log_density(p4, UnitVector::require_unit(basis(4, 0))) ==
          doctest::Approx(-0.95171027887428085).epsilon(1e-12));

    CHECK_THROWS_AS(log_density(p4, UnitVector::require_unit(basis(6, 0))), std::invalid_argument);
}

TEST_CASE("density integrates to one over the sphere (Monte Carlo)") {
    const int p = 4;
    const VmfParams params{UnitVector::require_unit(basis(p, 0)), 3.0};
    const double log_uniform = -log_vmf_constant(p, 0.0);
    auto rng = make_stream(7, 1);
    const int n = 200000;
    std::vector<double> ratios(n);
    for (int i = 0; i < n; ++i) {
        const UnitVector z = sample_uniform_sphere(p, rng);
        ratios[static_cast<std::size_t>(i)] = std::exp(log_density(params, z) - log_uniform);
    }
    const auto ms = oracles::mean_stderr(ratios);
    CHECK(std::abs(ms.mean - 1.0) <= 3.0 * ms.stderr_of_mean);
}

TEST_CASE("expectation") {
    const VmfParams uniform{UnitVector::require_unit(basis(4, 0)), 0.0};
    CHECK(expectation(uniform).norm() == 0.0);

    const VmfParams params{UnitVector::require_unit(basis(4, 0)), 2.0};
    const Eigen::VectorXd m = expectation(params);
    CHECK(m[0] == doctest::Approx(0.43312742672231176).epsilon(1e-10));
    CHECK(m.tail(3).norm() == 0.0);
}

TEST_CASE("sampler mean matches the analytic expectation") {
    const int p = 8;
    auto rng = make_stream(11, 1);
    const UnitVector mu = sample_uniform_sphere(p, rng);
    const VmfParams params{mu, 50.0};
    const int n = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    std::vector<double> radial(n);
    for (int i = 0; i < n; ++i) {
        const UnitVector z = sample_one(params, rng);
        CHECK(std::abs(z.vec().norm() - 1.0) <= 1e-9);
        mean += z.vec();
        radial[static_cast<std::size_t>(i)] = mu.dot(z);
    }
    mean /= n;
    const auto ms = oracles::mean_stderr(radial);
    CHECK(std::abs(ms.mean - mean_resultant(p, 50.0)) <= 4.0 * ms.stderr_of_mean);
    // componentwise agreress with A_p(kappa) mu within 4 standard errors
    const double comp_sd = std::sqrt(mean_resultant(p, 50.0) / 50.0 / n);
    for (int i = 0; i < p; ++i)
        CHECK(std::abs(mean[i] - expectation(params)[i]) <= 4.0 * comp_sd + 4.0 * ms.stderr_of_mean);
}

TEST_CASE("uniform sampler has vanishing mean") {
    const int p = 6;
    auto rng = make_stream(13, 1);
    const VmfParams params{UnitVector::require_unit(basis(p, 0)), 0.0};
    const int n = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) mean += sample_one(params, rng).vec();
    mean /= n;
    // each component has sd 1/sqrt(p n)
    CHECK(mean.norm() <= 4.0 * std::sqrt(static_cast<double>(p) / p / n) * std::sqrt(p));
}

TEST_CASE("sampler is rotation equivariant through the radial stream") {
    const int p = 5;
    const int n = 2000;
    const UnitVector mu1 = UnitVector::require_unit(basis(p, 0));
    Eigen::VectorXd rotated(p);
    rotated << 0.6, 0.8, 0.0, 0.0, 0.0;
    const UnitVector mu2 = UnitVector::require_unit(rotated);

    auto rng1 = make_stream(17, 1);
    auto rng2 = make_stream(17, 1);
    for (int i = 0; i < n; ++i) {
        const double w1 = mu1.dot(sample_one(VmfParams{mu1, 25.0}, rng1));
        const double w2 = mu2.dot(sample_one(VmfParams{mu2, 25.0}, rng2));
        // identical radial draw; the final renormalization leaves ULP noise
        CHECK(w1 == doctest::Approx(w2).epsilon(1e-12));
    }
}

TEST_CASE("log_mgf_ratio") {
    const int p = 8;
    auto rng = make_stream(19, 1);
    const UnitVector mu = sample_uniform_sphere(p, rng);
    const VmfParams params{mu, 5.0};

    CHECK(log_mgf_ratio(params, Eigen::VectorXd::Zero(p)) == 0.0);
    // t = -2 kappa mu keeps ||kappa mu + t|| = kappa
    CHECK(std::abs(log_mgf_ratio(params, -2.0 * params.kappa * mu.vec())) <= 1e-9);
    CHECK_THROWS_AS(log_mgf_ratio(params, Eigen::VectorXd::Zero(p + 2)), std::invalid_argument);

    // kappa~ = 0: analytic limit against the uniform normalizer
    const VmfParams unit_kappa{UnitVector::require_unit(basis(p, 0)), 1.0};
    const Eigen::VectorXd t = -basis(p, 0);
    CHECK(log_mgf_ratio(unit_kappa, t) ==
          doctest::Approx(log_vmf_constant(p, 0.0) - log_vmf_constant(p, 1.0)).epsilon(1e-12));
}

TEST_CASE("MGF identity against sampler Monte Carlo") {
    const int p = 8;
    auto rng = make_stream(23, 1);
    const VmfParams params{UnitVector::require_unit(basis(p, 0)), 5.0};
    const Eigen::VectorXd t = 3.0 * basis(p, 1);
    const double closed = std::exp(log_mgf_ratio(params, t));
    const int n = 100000;
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i)
        vals[static_cast<std::size_t>(i)] = std::exp(t.dot(sample_one(params, rng).vec()));
    const auto ms = oracles::mean_stderr(vals);
    CHECK(std::abs(ms.mean - closed) <= 3.0 * ms.stderr_of_mean);
}

TEST_CASE("ClassMixture validation and cached statistics") {
    const int p = 4;
    auto make = [&](double prior0, double prior1, int dim1) {
        std::vector<ClassComponent> cs;
        cs.push_back({prior0, VmfParams{UnitVector::require_unit(basis(p, 0)), 2.0}});
        cs.push_back({prior1, VmfParams{UnitVector::require_unit(basis(dim1, 1)), 7.0}});
        return ClassMixture(p, std::move(cs));
    };
    CHECK_THROWS_AS(make(0.5, 0.6, p), std::invalid_argument);
    CHECK_THROWS_AS(make(0.5, 0.5, p + 2), std::invalid_argument);

    const ClassMixture mix = make(0.25, 0.75, p);
    CHECK(mix.log_norm_const(0) == doctest::Approx(log_vmf_constant(p, 2.0)).epsilon(1e-14));
    CHECK(mix.resultant(1) == doctest::Approx(mean_resultant(p, 7.0)).epsilon(1e-14));
}

TEST_CASE("log_vmf_constant matches its small-kappa limit") {
    for (int p : {2, 4, 8, 64}) {
        const double at_zero = log_vmf_constant(p, 0.0);
        CHECK(log_vmf_constant(p, 1e-8) == doctest::Approx(at_zero).epsilon(1e-9));
    }
}
