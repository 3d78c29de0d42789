#include "harqopt/feedback_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harqopt/errors.hpp"
#include "harqopt/numerics.hpp"

namespace harqopt {

namespace {

constexpr std::uint64_t kDetectionBlock = 1u << 16;

void require_positive_snr(double snr_linear, const char* what) {
    if (!(snr_linear > 0.0)) throw DomainError(std::string(what) + ": snr must be positive");
}

std::uint64_t detection_block(bool sent_ack, double alpha, double snr_linear, std::uint64_t count,
                              std::uint64_t seed, std::uint64_t block) {
    RandomStream rng(seed, block);
    std::uint64_t errors = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (simulate_detection(sent_ack, alpha, snr_linear, rng) != sent_ack) ++errors;
    }
    return errors;
}

std::uint64_t block_count(std::uint64_t trials) { return (trials + kDetectionBlock - 1) / kDetectionBlock; }

std::uint64_t block_size(std::uint64_t trials, std::uint64_t block) {
    return std::min(kDetectionBlock, trials - block * kDetectionBlock);
}

}  // namespace

FeedbackSpec FeedbackSpec::from_db(double snr_db, std::vector<double> alphas) {
    if (!std::isfinite(snr_db)) throw DomainError("FeedbackSpec: snr_db must be finite");
    for (double a : alphas) {
        if (!std::isfinite(a)) throw DomainError("FeedbackSpec: alphas must be finite");
    }
    return {snr_db, std::pow(10.0, snr_db / 10.0), std::move(alphas)};
}

FeedbackErrorRates FeedbackErrorRates::perfect(std::size_t rounds) {
    return {std::vector<double>(rounds, 0.0), std::vector<double>(rounds, 0.0)};
}

double nack_error_rate(double alpha, double snr_linear) {
    require_positive_snr(snr_linear, "nack_error_rate");
    return 0.5 * numerics::erfc((1.0 + alpha) * std::sqrt(6.0 * snr_linear));
}

double ack_error_rate(double alpha, double snr_linear) {
    require_positive_snr(snr_linear, "ack_error_rate");
    return 0.5 * numerics::erfc((1.0 - alpha) * std::sqrt(6.0 * snr_linear));
}

FeedbackErrorRates error_rates_for(const FeedbackSpec& spec) {
    FeedbackErrorRates rates;
    rates.p_nack.reserve(spec.alphas.size());
    rates.p_ack.reserve(spec.alphas.size());
    for (double alpha : spec.alphas) {
        rates.p_nack.push_back(nack_error_rate(alpha, spec.snr_linear));
        rates.p_ack.push_back(ack_error_rate(alpha, spec.snr_linear));
    }
    return rates;
}

FeedbackErrorRates duplicated_ack_rates(const FeedbackErrorRates& single) {
    FeedbackErrorRates rates;
    for (std::size_t i = 0; i < single.rounds(); ++i) {
        rates.p_nack.push_back(single.p_nack[i] * single.p_nack[i]);
        const double ack_ok = 1.0 - single.p_ack[i];
        rates.p_ack.push_back(1.0 - ack_ok * ack_ok);
    }
    return rates;
}

FeedbackSequences build_sequences() {
    FeedbackSequences seq;
    for (std::size_t j = 0; j < kSequenceLength; ++j) {
        seq.ack[j] = {1.0, 0.0};
        seq.nack[j] = j % 2 == 0 ? std::complex<double>{1.0, 0.0} : std::complex<double>{-1.0, 0.0};
    }
    return seq;
}

double detection_statistic(bool sent_ack, double snr_linear, std::span<const std::complex<double>> noise) {
    require_positive_snr(snr_linear, "detection_statistic");
    if (noise.size() != kSequenceLength) throw DomainError("detection_statistic: noise must have 12 samples");
    static const FeedbackSequences seq = build_sequences();
    const FeedbackSequence& sent = sent_ack ? seq.ack : seq.nack;
    const double amplitude = std::sqrt(snr_linear);
    double correlation = 0.0;
    for (std::size_t j = 0; j < kSequenceLength; ++j) {
        const std::complex<double> received = amplitude * sent[j] + noise[j];
        const std::complex<double> difference = seq.ack[j] - seq.nack[j];
        correlation += std::real(received * std::conj(difference));
    }
    return correlation / (12.0 * amplitude);
}

bool simulate_detection(bool sent_ack, double alpha, double snr_linear, RandomStream& rng) {
    std::array<std::complex<double>, kSequenceLength> noise;
    for (auto& z : noise) z = rng.complex_normal();
    return detection_statistic(sent_ack, snr_linear, noise) >= alpha;
}

DetectionCounts estimate_detection_errors(bool sent_ack, double alpha, double snr_linear,
                                          std::uint64_t trials, std::uint64_t seed) {
    require_positive_snr(snr_linear, "estimate_detection_errors");
    const auto blocks = static_cast<std::int64_t>(block_count(trials));
    std::vector<std::uint64_t> errors(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < blocks; ++b) {
        const auto block = static_cast<std::uint64_t>(b);
        errors[block] = detection_block(sent_ack, alpha, snr_linear, block_size(trials, block), seed, block);
    }
    DetectionCounts counts{trials, 0};
    for (auto e : errors) counts.errors += e;
    return counts;
}

DetectionCounts estimate_detection_errors_serial(bool sent_ack, double alpha, double snr_linear,
                                                 std::uint64_t trials, std::uint64_t seed) {
    require_positive_snr(snr_linear, "estimate_detection_errors");
    DetectionCounts counts{trials, 0};
    for (std::uint64_t b = 0; b < block_count(trials); ++b) {
        counts.errors += detection_block(sent_ack, alpha, snr_linear, block_size(trials, b), seed, b);
    }
    return counts;
}

}  // namespace harqopt
