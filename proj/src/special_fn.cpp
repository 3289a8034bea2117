#include "proco/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace proco {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_domain(int nu, double kappa) {
    if (nu < 0) throw std::domain_error("log_bessel_i: order must be >= 0, got " + std::to_string(nu));
    if (!(kappa >= 0.0)) throw std::domain_error("log_bessel_i: argument must be >= 0");
}
}  // namespace

namespace detail {

double series_switch(int nu) { return std::max(10.0, 0.5 * nu); }

// The large-argument expansion needs kappa well past both the order and the
// order squared: its terms scale like (4 nu^2)/(8 k kappa) and diverge from
// the first term on once kappa ~ nu^2/2.
double asymptotic_switch(int nu) {
    double n = nu;
    return std::max({1000.0, 100.0 * n, 5.0 * n * n});
}

// Ascending power series, all terms positive so there is no cancellation.
// Usable at any kappa; cost grows like O(kappa) past the turning point, so the
// dispatcher only routes small arguments here.
double log_bessel_i_series(int nu, double kappa) {
    if (kappa == 0.0) return nu == 0 ? 0.0 : kNegInf;
    const double q = 0.25 * kappa * kappa;
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (int k = 1; k < 1000000; ++k) {
        term *= q / (static_cast<double>(k) * (static_cast<double>(nu) + k));
        sum += term;
        if (sum > 1e280) {
            log_scale += std::log(sum);
            term /= sum;
            sum = 1.0;
        }
        if (term < 1e-17 * sum && q < static_cast<double>(k + 1) * (static_cast<double>(nu) + k + 1))
            break;
    }
    return nu * std::log(0.5 * kappa) - std::lgamma(nu + 1.0) + log_scale + std::log(sum);
}

// e^kappa / sqrt(2 pi kappa) * [1 - (mu-1)/(8k) + (mu-1)(mu-9)/(2!(8k)^2) - ...],
// mu = 4 nu^2. Truncated at the first negligible or non-decreasing term.
double log_bessel_i_asymptotic(int nu, double kappa) {
    const double mu4 = 4.0 * static_cast<double>(nu) * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev_mag = 1.0;
    for (int k = 1; k <= 300; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu4 - odd * odd) / (8.0 * k * kappa);
        const double mag = std::abs(term);
        if (mag >= prev_mag) break;
        sum += term;
        prev_mag = mag;
        if (mag < 1e-17 * std::abs(sum)) break;
    }
    return kappa - 0.5 * std::log(kTwoPi * kappa) + std::log(sum);
}

double log_bessel_i0(double kappa) {
    if (kappa <= 30.0) return log_bessel_i_series(0, kappa);
    return log_bessel_i_asymptotic(0, kappa);
}

// Start order for the backward recurrence. The trial values at (M, M+1)
// contaminate the target like [(kappa/2)^{M-nu} nu!/M!]^2, so M is pushed up
// until that factor is below ~1e-20.
int miller_start_order(int nu, double kappa) {
    int m = std::max(nu + 2, static_cast<int>(std::ceil(1.4 * kappa)) + 10);
    const double lg_nu = std::lgamma(nu + 1.0);
    const double log_half_kappa = std::log(0.5 * kappa);
    auto log_decay = [&](int order) {
        return (order - nu) * log_half_kappa - (std::lgamma(order + 1.0) - lg_nu);
    };
    while (log_decay(m) > -23.0) m += std::max(8, m / 8);
    return m;
}

// Backward recurrence I_{j-1} = (2j/kappa) I_j + I_{j+1} from trial values
// (1, 0) at (M, M+1), normalized against the independently computed I_0.
// Intermediates are rescaled whenever they pass the configured threshold,
// with the log of the scale accumulated separately.
double log_bessel_i_miller(int nu, double kappa, const MillerConfig& cfg) {
    const int start = std::max(cfg.start_order > 0 ? cfg.start_order : miller_start_order(nu, kappa),
                               nu + 1);
    const double threshold = cfg.rescale_threshold > 0 ? cfg.rescale_threshold : 1e250;
    double upper = 0.0;  // trial value at order m+1
    double cur = 1.0;    // trial value at order m
    double log_scale = 0.0;
    double target = 0.0;
    double target_scale = 0.0;
    for (int m = start; m >= 1; --m) {
        const double lower = (2.0 * m / kappa) * cur + upper;
        upper = cur;
        cur = lower;
        if (cur > threshold) {
            upper /= cur;
            log_scale += std::log(cur);
            cur = 1.0;
        }
        if (m - 1 == nu) {
            target = cur;
            target_scale = log_scale;
        }
    }
    // cur now holds the trial I_0 at scale log_scale.
    return log_bessel_i0(kappa) + (std::log(target) + target_scale) - (std::log(cur) + log_scale);
}

}  // namespace detail

double log_bessel_i(int nu, double kappa, const MillerConfig& cfg) {
    check_domain(nu, kappa);
    if (kappa == 0.0) return nu == 0 ? 0.0 : kNegInf;
    if (nu == 0) return detail::log_bessel_i0(kappa);
    if (kappa <= detail::series_switch(nu)) return detail::log_bessel_i_series(nu, kappa);
    if (kappa > detail::asymptotic_switch(nu)) return detail::log_bessel_i_asymptotic(nu, kappa);
    return detail::log_bessel_i_miller(nu, kappa, cfg);
}

double log_bessel_i(int nu, double kappa) { return log_bessel_i(nu, kappa, MillerConfig{}); }

std::pair<double, double> log_bessel_i_pair(int nu, double kappa) {
    check_domain(nu, kappa);
    if (kappa == 0.0) return {nu == 0 ? 0.0 : kNegInf, kNegInf};
    // Both orders must sit in the Miller regime for the shared ladder; the
    // series/asymptotic regimes are cheap enough to evaluate twice.
    const bool miller_lo = kappa > detail::series_switch(nu) && kappa <= detail::asymptotic_switch(nu);
    const bool miller_hi =
        kappa > detail::series_switch(nu + 1) && kappa <= detail::asymptotic_switch(nu + 1);
    if (!(miller_lo && miller_hi) || nu == 0)
        return {log_bessel_i(nu, kappa), log_bessel_i(nu + 1, kappa)};

    const MillerConfig cfg{};
    const int start = std::max(detail::miller_start_order(nu + 1, kappa), nu + 2);
    double upper = 0.0;
    double cur = 1.0;
    double log_scale = 0.0;
    double t_lo = 0.0, t_lo_scale = 0.0;
    double t_hi = 0.0, t_hi_scale = 0.0;
    for (int m = start; m >= 1; --m) {
        const double lower = (2.0 * m / kappa) * cur + upper;
        upper = cur;
        cur = lower;
        if (cur > cfg.rescale_threshold) {
            upper /= cur;
            log_scale += std::log(cur);
            cur = 1.0;
        }
        if (m - 1 == nu + 1) {
            t_hi = cur;
            t_hi_scale = log_scale;
        }
        if (m - 1 == nu) {
            t_lo = cur;
            t_lo_scale = log_scale;
        }
    }
    const double log_i0 = detail::log_bessel_i0(kappa);
    const double anchor = std::log(cur) + log_scale;
    return {log_i0 + (std::log(t_lo) + t_lo_scale) - anchor,
            log_i0 + (std::log(t_hi) + t_hi_scale) - anchor};
}

double log_bessel_ratio(int nu, double kappa_num, double kappa_den) {
    check_domain(nu, kappa_num);
    check_domain(nu, kappa_den);
    if (kappa_den <= 0.0) throw std::domain_error("log_bessel_ratio: denominator argument must be > 0");
    return log_bessel_i(nu, kappa_num) - log_bessel_i(nu, kappa_den);
}

double mean_resultant(int p, double kappa) {
    if (p < 2 || p % 2 != 0) throw std::domain_error("mean_resultant: p must be even and >= 2");
    check_domain(0, kappa);
    if (kappa == 0.0) return 0.0;
    const auto [lo, hi] = log_bessel_i_pair(p / 2 - 1, kappa);
    return std::exp(hi - lo);
}

}  // namespace proco
