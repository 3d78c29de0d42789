#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "harqopt/feedback_model.hpp"
#include "harqopt/mi_model.hpp"

namespace harqopt {

/// Per-round normalized rates (symbols per information bit), detection
/// thresholds for the first M-1 feedback rounds, and code geometry.
struct HarqPolicy {
    std::vector<double> rhos;
    std::vector<double> alphas;
    int m_max = 4;
    int n_b = 1024;
    int n_m = 4096;
    double rho_min = 0.0;
    double rho_max = 0.0;

    /// Throws DomainError naming the violated constraint.
    void validate() const;
    std::size_t rounds() const noexcept { return rhos.size(); }
};

struct PerformanceBreakdown {
    std::vector<double> p_fail;       ///< P_{k,f}, k = 1..M
    std::vector<double> p_occur;      ///< P_i, probability round i is sent
    std::vector<double> p_out_stage;  ///< P_{out,k}; 0 where round k is unreachable
    double p_out_unreliable = 0.0;
    double p_out_reliable = 0.0;      ///< P_{M,f}
    double expected_symbols = 0.0;
    double throughput = 0.0;          ///< information bits per downlink channel use
};

/// Reliable-feedback throughput (1 - P_{M,f}) / sum_i rho_i P_{i-1,f}.
double reliable_throughput(std::span<const double> rhos, std::span<const double> p_fail);
double reliable_throughput(const HarqPolicy& policy, const DownlinkSpec& dl,
                           FailureModel model = FailureModel::gaussian);

/// Outage with unreliable feedback:
///   1 - (1 - P_{N,1}P_{1,f} - sum_{i=2}^{M-1} P_{N,i}P_{i,f} prod_{j<i}(1 - P_{N,j})) (1 - P_{M,f}).
/// The M-th feedback never triggers anything, so it carries no term.
double unreliable_outage(std::span<const double> p_fail, const FeedbackErrorRates& rates);

/// P_1..P_M: round i occurs either because every earlier round failed and
/// every NACK got through, or because decoding succeeded at some round m < i
/// and each of the ACKs m..i-1 was misread. P_{0,f} = 1 and P_{N,0} = 0.
std::vector<double> transmission_probabilities(std::span<const double> p_fail, const FeedbackErrorRates& rates);

/// sum_i rho_i N_b P_i.
double expected_symbols(const HarqPolicy& policy, std::span<const double> p_occur);

/// Per-stage outage used by the stage-wise dynamic-programming recursion.
/// Throws DegenerateStateError when a stage k >= 2 has P_k = 0.
/// The middle-stage values are ratios of cumulative to conditional
/// quantities and are not confined to [0, 1].
std::vector<double> stage_outage(std::span<const double> p_fail, const FeedbackErrorRates& rates,
                                 std::span<const double> p_occur);

/// Full evaluation from precomputed failure probabilities.
PerformanceBreakdown evaluate_policy(const HarqPolicy& policy, std::span<const double> p_fail,
                                     const FeedbackErrorRates& rates);

PerformanceBreakdown evaluate_policy(const HarqPolicy& policy, const DownlinkSpec& dl,
                                     const FeedbackErrorRates& rates, FailureModel model = FailureModel::gaussian,
                                     std::size_t bins = kDefaultConvolutionBins);

/// Throughput N_b / E[N_s] (1 - P_out) with the feedback link described by
/// `fb`, whose thresholds must equal `policy.alphas`.
PerformanceBreakdown unreliable_throughput(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                                           FailureModel model = FailureModel::gaussian);

/// Baseline with symmetric detection where delivery is declared only after
/// two consecutive ACK detections. Requires every threshold to be 0.
/// Only downlink symbols are charged.
PerformanceBreakdown duplicated_ack_performance(const HarqPolicy& policy, const DownlinkSpec& dl,
                                                const FeedbackSpec& fb, FailureModel model = FailureModel::gaussian);

}  // namespace harqopt
