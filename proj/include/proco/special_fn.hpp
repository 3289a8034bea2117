#pragma once

#include <utility>

namespace proco {

// Controls the backward (Miller) recurrence used for mid-range arguments.
// start_order == 0 selects the start order automatically from an accuracy
// bound; an explicit value is raised to at least nu + 1.
struct MillerConfig {
    int start_order = 0;
    double rescale_threshold = 1e250;
};

// ln I_nu(kappa) for integer order nu >= 0 and kappa >= 0.
// Returns -inf for kappa == 0, nu > 0 (I_nu(0) = 0); throws std::domain_error
// for kappa < 0 or nu < 0.
double log_bessel_i(int nu, double kappa);
double log_bessel_i(int nu, double kappa, const MillerConfig& cfg);

// (ln I_nu(kappa), ln I_{nu+1}(kappa)) in one evaluation; the consecutive-order
// pair is what the density normalizer and the mean-resultant ratio both need.
std::pair<double, double> log_bessel_i_pair(int nu, double kappa);

// ln I_nu(kappa_num) - ln I_nu(kappa_den), stable for arguments in the
// thousands where the linear-space ratio overflows.
double log_bessel_ratio(int nu, double kappa_num, double kappa_den);

// A_p(kappa) = I_{p/2}(kappa) / I_{p/2-1}(kappa) for even p >= 2.
// Lies in [0, 1); A_p(0) = 0 and A_p -> 1 as kappa -> inf.
double mean_resultant(int p, double kappa);

namespace detail {
// Individual evaluation regimes, exposed so the cross-regime continuity tests
// can force each path at the same argument.
double log_bessel_i_series(int nu, double kappa);
double log_bessel_i_miller(int nu, double kappa, const MillerConfig& cfg);
double log_bessel_i_asymptotic(int nu, double kappa);
double log_bessel_i0(double kappa);
int miller_start_order(int nu, double kappa);
// Regime boundaries (kappa thresholds) for a given order.
double series_switch(int nu);
double asymptotic_switch(int nu);
}  // namespace detail

}  // namespace proco
