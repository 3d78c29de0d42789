#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "harqopt/random.hpp"

namespace harqopt {

/// Uplink (feedback) operating point and the per-round asymmetric detection
/// indices alpha_1..alpha_{M-1}. Any finite alpha is valid here.
struct FeedbackSpec {
    double snr_db = 0.0;
    double snr_linear = 1.0;
    std::vector<double> alphas;

    static FeedbackSpec from_db(double snr_db, std::vector<double> alphas);
};

/// Conditional misdetection probabilities per feedback round.
/// p_nack[i]: NACK sent, ACK detected. p_ack[i]: ACK sent, NACK detected.
struct FeedbackErrorRates {
    std::vector<double> p_nack;
    std::vector<double> p_ack;

    static FeedbackErrorRates perfect(std::size_t rounds);
    std::size_t rounds() const noexcept { return p_nack.size(); }
};

/// NACK->ACK probability: erfc((1 + alpha) sqrt(6 snr)) / 2.
double nack_error_rate(double alpha, double snr_linear);

/// ACK->NACK probability: erfc((1 - alpha) sqrt(6 snr)) / 2.
double ack_error_rate(double alpha, double snr_linear);

FeedbackErrorRates error_rates_for(const FeedbackSpec& spec);

/// The effective rates when the transmitter needs two consecutive ACK
/// detections to stop: NACK->ACK becomes p_n^2, ACK->NACK 1 - (1 - p_a)^2.
FeedbackErrorRates duplicated_ack_rates(const FeedbackErrorRates& single);

inline constexpr std::size_t kSequenceLength = 12;
using FeedbackSequence = std::array<std::complex<double>, kSequenceLength>;

struct FeedbackSequences {
    FeedbackSequence ack;
    FeedbackSequence nack;
};

/// Unit-modulus ACK/NACK sequences that agree on the even positions and are
/// antipodal on the odd ones. Only this 6-of-12 geometry sets the error rates.
FeedbackSequences build_sequences();

/// Normalized matched-filter statistic for y = sqrt(snr) s + noise:
/// t = Re<y, s_ack - s_nack> / (12 sqrt(snr)). Noiseless ACK gives +1,
/// noiseless NACK -1; the noise term has variance 1 / (12 snr).
double detection_statistic(bool sent_ack, double snr_linear, std::span<const std::complex<double>> noise);

/// Sends one feedback bit through unit-variance complex AWGN and returns
/// whether ACK was detected (t >= alpha).
bool simulate_detection(bool sent_ack, double alpha, double snr_linear, RandomStream& rng);

struct DetectionCounts {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;

    double rate() const noexcept { return trials == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials); }
};

/// Symbol-level Monte Carlo of the detector error for one sent bit.
/// Trials are split into fixed blocks with their own streams; blocks run
/// under OpenMP and are summed in block order.
DetectionCounts estimate_detection_errors(bool sent_ack, double alpha, double snr_linear,
                                          std::uint64_t trials, std::uint64_t seed);

/// Single-threaded reference for estimate_detection_errors; identical counts.
DetectionCounts estimate_detection_errors_serial(bool sent_ack, double alpha, double snr_linear,
                                                 std::uint64_t trials, std::uint64_t seed);

}  // namespace harqopt
