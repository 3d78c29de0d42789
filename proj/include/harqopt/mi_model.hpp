#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace harqopt {

/// Downlink operating point with the first two moments of the per-symbol
/// mutual information C = log2(1 + g * snr), g ~ Exp(1).
struct DownlinkSpec {
    double snr_db = 0.0;
    double snr_linear = 1.0;
    double mean_mi = 0.0;  ///< ergodic capacity, bits per symbol
    double var_mi = 0.0;   ///< bits^2 per symbol^2
};

/// mean_mi = log2(e) e^{1/snr} E1(1/snr); var_mi by quadrature of
/// E[(C - mean_mi)^2] against the exponential gain density.
DownlinkSpec make_downlink_spec(double snr_db);

/// Normalized mutual information of one round, rho * log2(1 + g * snr).
double mi_of_gain(double gain, double rho, const DownlinkSpec& spec);

enum class FailureModel {
    gaussian,     ///< accumulated MI approximated as normal (fast; optimizer default)
    convolution,  ///< exact per-round laws convolved on a grid (validation oracle)
};

inline constexpr std::size_t kDefaultConvolutionBins = 4096;

/// P(decoding fails) from prefix sums of rho and rho^2 under the Gaussian law.
double p_fail_gaussian(double sum_rho, double sum_rho_sq, const DownlinkSpec& spec);

/// P_{k,f} for every prefix k = 1..size under the Gaussian approximation.
std::vector<double> p_fail_gaussian(std::span<const double> rhos, const DownlinkSpec& spec);

/// P_{k,f} for every prefix by discretising each round's exact law
/// F(x) = 1 - exp(-(2^{x/rho} - 1)/snr) on a common grid and convolving.
///
/// The grid spans [0, 1 + 10 sigma sqrt(k)] (sigma the largest per-round
/// MI standard deviation) in roughly `bins` steps, with the step chosen so
/// the decoding threshold 1 falls on a bin edge. Mass above the span is
/// lumped into the top bin; only mass below 1 is ever read.
std::vector<double> p_fail_convolution(std::span<const double> rhos, const DownlinkSpec& spec,
                                       std::size_t bins = kDefaultConvolutionBins);

std::vector<double> p_fail(std::span<const double> rhos, const DownlinkSpec& spec, FailureModel model,
                           std::size_t bins = kDefaultConvolutionBins);

}  // namespace harqopt
