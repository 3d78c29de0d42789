#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "harqopt/feedback_model.hpp"
#include "harqopt/harq_analysis.hpp"
#include "harqopt/mi_model.hpp"
#include "harqopt/random.hpp"

namespace harqopt {

enum class FeedbackMode {
    analytic_flip,  ///< Bernoulli flips with the closed-form error rates
    symbol_level,   ///< full detector over a simulated feedback channel
};

struct FeedbackEvent {
    bool sent_ack = false;
    bool detected_ack = false;
};

struct EpisodeOutcome {
    int rounds_used = 0;
    bool delivered = false;
    bool outage = false;
    double symbols_spent = 0.0;
    std::vector<FeedbackEvent> feedback_events;  ///< one per feedback actually sent (rounds 1..min(used, M-1))
    int decoded_round = 0;                       ///< 0 if never decoded
};

/// Decides what the transmitter detects for feedback round `round` (1-based)
/// given the bit the receiver sent.
using Detector = std::function<bool(int round, bool sent_ack)>;

/// One episode with the channel gains fixed in advance (one per round, all
/// M of them). The receiver acknowledges once the accumulated MI reaches 1;
/// the transmitter stops on a detected ACK or after round M, which carries
/// no feedback.
EpisodeOutcome play_episode(const HarqPolicy& policy, const DownlinkSpec& dl, std::span<const double> gains,
                            const Detector& detector);

/// Draws M unit-exponential gains, then the feedback randomness, from `rng`.
EpisodeOutcome run_episode(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                           RandomStream& rng, FeedbackMode mode);

struct SimulationEstimate {
    std::uint64_t n_episodes = 0;
    std::uint64_t seed = 0;
    double throughput = 0.0;  ///< N_b * delivered / total symbols
    double throughput_se = 0.0;
    double p_out = 0.0;
    double p_out_se = 0.0;
    std::vector<double> p_occur;  ///< fraction of episodes reaching round i
    std::vector<double> p_occur_se;
    std::vector<double> p_fail;  ///< decoder failure after k rounds, every round forced
    std::vector<double> p_fail_se;
    double mean_symbols = 0.0;
};

inline constexpr std::uint64_t kMinEpisodes = 10'000;

/// Monte Carlo estimate over `n` episodes. Episodes run in fixed blocks with
/// streams keyed by (seed, block); blocks run under OpenMP and are reduced
/// in block order, so the result does not depend on the thread count.
SimulationEstimate estimate_performance(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                                        std::uint64_t n, std::uint64_t seed, FeedbackMode mode);

/// Bernoulli feedback flips with explicit per-round rates (perfect feedback: all zero).
SimulationEstimate estimate_performance(const HarqPolicy& policy, const DownlinkSpec& dl,
                                        const FeedbackErrorRates& rates, std::uint64_t n, std::uint64_t seed);

/// Single-threaded reference for estimate_performance; bit-identical.
SimulationEstimate estimate_performance_serial(const HarqPolicy& policy, const DownlinkSpec& dl,
                                               const FeedbackSpec& fb, std::uint64_t n, std::uint64_t seed,
                                               FeedbackMode mode);

/// Duplicated-ACK protocol: every feedback round is observed twice and the
/// transmitter stops only if both observations read ACK. Requires alpha = 0.
SimulationEstimate estimate_duplicated_ack(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                                           std::uint64_t n, std::uint64_t seed,
                                           FeedbackMode mode = FeedbackMode::analytic_flip);

}  // namespace harqopt
