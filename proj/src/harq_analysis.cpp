#include "harqopt/harq_analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "harqopt/errors.hpp"

namespace harqopt {

namespace {

constexpr double kProbabilitySlack = 1e-12;

// Out-of-range probabilities point at a transcription bug; never clamp them.
double checked_probability(double p, const char* what) {
    if (!(p >= -kProbabilitySlack && p <= 1.0 + kProbabilitySlack)) {
        throw std::logic_error(std::string(what) + " left [0, 1]: " + std::to_string(p));
    }
    return p;
}

void require_rates_cover(std::span<const double> p_fail, const FeedbackErrorRates& rates) {
    if (p_fail.empty()) throw DomainError("failure probabilities must be non-empty");
    if (rates.p_nack.size() != rates.p_ack.size() || rates.rounds() + 1 < p_fail.size()) {
        throw DomainError("feedback error rates must cover rounds 1..M-1");
    }
}

// P_{N,k} with the convention P_{N,0} = 0 (nothing precedes round 1).
double nack_flip(const FeedbackErrorRates& rates, std::size_t k) { return k == 0 ? 0.0 : rates.p_nack[k - 1]; }

// P_{k,f} with P_{0,f} = 1.
double fail(std::span<const double> p_fail, std::size_t k) { return k == 0 ? 1.0 : p_fail[k - 1]; }

// P_{N,1}P_{1,f} + sum_{i=2}^{last} P_{N,i}P_{i,f} prod_{j<i}(1 - P_{N,j})
double premature_stop_mass(std::span<const double> p_fail, const FeedbackErrorRates& rates, std::size_t last) {
    double total = 0.0;
    double nacks_survive = 1.0;
    for (std::size_t i = 1; i <= last; ++i) {
        total += nack_flip(rates, i) * fail(p_fail, i) * nacks_survive;
        nacks_survive *= 1.0 - nack_flip(rates, i);
    }
    return total;
}

double stage_entry(std::span<const double> p_fail, const FeedbackErrorRates& rates,
                   std::span<const double> p_occur, std::size_t k) {
    const std::size_t m = p_fail.size();
    if (k == m) return p_fail[m - 1] / p_occur[m - 1];
    if (k == 1) return nack_flip(rates, 1) * p_fail[0];
    return premature_stop_mass(p_fail, rates, k) / p_occur[k - 1];
}

}  // namespace

void HarqPolicy::validate() const {
    const auto m = static_cast<std::size_t>(m_max);
    if (m_max < 1) throw DomainError("policy: m_max must be >= 1");
    if (rhos.size() != m) throw DomainError("policy: rhos must have m_max entries");
    if (alphas.size() + 1 != m) throw DomainError("policy: alphas must have m_max - 1 entries");
    if (n_b < 1 || n_m < 1) throw DomainError("policy: n_b and n_m must be positive");
    if (!(rho_min > 0.0) || !(rho_min <= rho_max)) throw DomainError("policy: need 0 < rho_min <= rho_max");
    double total = 0.0;
    for (double r : rhos) {
        if (!(r >= rho_min * (1 - 1e-12) && r <= rho_max * (1 + 1e-12))) {
            throw DomainError("policy: rate " + std::to_string(r) + " outside [rho_min, rho_max]");
        }
        total += r;
    }
    const double budget = static_cast<double>(n_m) / n_b;
    if (total > budget * (1 + 1e-12)) {
        throw DomainError("policy: sum of rates " + std::to_string(total) + " exceeds N_m/N_b = " +
                          std::to_string(budget));
    }
    for (double a : alphas) {
        if (!std::isfinite(a)) throw DomainError("policy: alphas must be finite");
    }
}

double reliable_throughput(std::span<const double> rhos, std::span<const double> p_fail) {
    if (rhos.size() != p_fail.size() || rhos.empty()) {
        throw DomainError("reliable_throughput: rates and failure probabilities must match");
    }
    double cost = 0.0;
    for (std::size_t i = 1; i <= rhos.size(); ++i) cost += rhos[i - 1] * fail(p_fail, i - 1);
    return (1.0 - p_fail.back()) / cost;
}

double reliable_throughput(const HarqPolicy& policy, const DownlinkSpec& dl, FailureModel model) {
    policy.validate();
    return reliable_throughput(policy.rhos, p_fail(policy.rhos, dl, model));
}

double unreliable_outage(std::span<const double> p_fail, const FeedbackErrorRates& rates) {
    require_rates_cover(p_fail, rates);
    const std::size_t m = p_fail.size();
    const double premature = m >= 2 ? premature_stop_mass(p_fail, rates, m - 1) : 0.0;
    return checked_probability(1.0 - (1.0 - premature) * (1.0 - p_fail[m - 1]), "P_out^un");
}

std::vector<double> transmission_probabilities(std::span<const double> p_fail, const FeedbackErrorRates& rates) {
    require_rates_cover(p_fail, rates);
    const std::size_t m = p_fail.size();
    std::vector<double> p_occur(m);
    p_occur[0] = 1.0;
    for (std::size_t i = 2; i <= m; ++i) {
        double nacks_survive = 1.0;
        for (std::size_t j = 1; j <= i - 1; ++j) nacks_survive *= 1.0 - nack_flip(rates, j);
        double value = fail(p_fail, i - 1) * nacks_survive;
        for (std::size_t j = 1; j <= i - 1; ++j) {
            const std::size_t decoded_at = i - j;
            double before = 1.0;
            for (std::size_t k = 0; k + 1 <= decoded_at; ++k) before *= 1.0 - nack_flip(rates, k);
            double acks_lost = 1.0;
            for (std::size_t k = decoded_at; k <= i - 1; ++k) acks_lost *= rates.p_ack[k - 1];
            value += (fail(p_fail, decoded_at - 1) - fail(p_fail, decoded_at)) * before * acks_lost;
        }
        p_occur[i - 1] = checked_probability(value, "P_i");
    }
    return p_occur;
}

double expected_symbols(const HarqPolicy& policy, std::span<const double> p_occur) {
    if (p_occur.size() != policy.rhos.size()) throw DomainError("expected_symbols: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p_occur.size(); ++i) total += policy.rhos[i] * policy.n_b * p_occur[i];
    return total;
}

std::vector<double> stage_outage(std::span<const double> p_fail, const FeedbackErrorRates& rates,
                                 std::span<const double> p_occur) {
    require_rates_cover(p_fail, rates);
    const std::size_t m = p_fail.size();
    if (p_occur.size() != m) throw DomainError("stage_outage: length mismatch");
    std::vector<double> out(m);
    for (std::size_t k = 1; k <= m; ++k) {
        if (k >= 2 && p_occur[k - 1] == 0.0) {
            throw DegenerateStateError("stage_outage: round " + std::to_string(k) + " is unreachable");
        }
        out[k - 1] = stage_entry(p_fail, rates, p_occur, k);
    }
    return out;
}

PerformanceBreakdown evaluate_policy(const HarqPolicy& policy, std::span<const double> p_fail,
                                     const FeedbackErrorRates& rates) {
    if (p_fail.size() != policy.rhos.size()) throw DomainError("evaluate_policy: length mismatch");
    PerformanceBreakdown out;
    out.p_fail.assign(p_fail.begin(), p_fail.end());
    for (double p : out.p_fail) checked_probability(p, "P_{k,f}");
    out.p_occur = transmission_probabilities(p_fail, rates);
    out.p_out_unreliable = unreliable_outage(p_fail, rates);
    out.p_out_reliable = p_fail.back();
    out.expected_symbols = expected_symbols(policy, out.p_occur);
    out.throughput = policy.n_b / out.expected_symbols * (1.0 - out.p_out_unreliable);

    // Unreachable stages (P_k = 0) keep 0 here instead of raising.
    out.p_out_stage.assign(p_fail.size(), 0.0);
    for (std::size_t k = 1; k <= p_fail.size(); ++k) {
        if (k >= 2 && out.p_occur[k - 1] == 0.0) continue;
        out.p_out_stage[k - 1] = stage_entry(p_fail, rates, out.p_occur, k);
    }
    return out;
}

PerformanceBreakdown evaluate_policy(const HarqPolicy& policy, const DownlinkSpec& dl,
                                     const FeedbackErrorRates& rates, FailureModel model, std::size_t bins) {
    policy.validate();
    return evaluate_policy(policy, p_fail(policy.rhos, dl, model, bins), rates);
}

PerformanceBreakdown unreliable_throughput(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                                           FailureModel model) {
    if (fb.alphas != policy.alphas) throw DomainError("unreliable_throughput: feedback thresholds differ from policy");
    return evaluate_policy(policy, dl, error_rates_for(fb), model);
}

PerformanceBreakdown duplicated_ack_performance(const HarqPolicy& policy, const DownlinkSpec& dl,
                                                const FeedbackSpec& fb, FailureModel model) {
    for (double a : fb.alphas) {
        if (a != 0.0) throw DomainError("duplicated_ack_performance: detection must be symmetric (alpha = 0)");
    }
    if (fb.alphas.size() + 1 != policy.rhos.size()) {
        throw DomainError("duplicated_ack_performance: need M-1 feedback rounds");
    }
    return evaluate_policy(policy, dl, duplicated_ack_rates(error_rates_for(fb)), model);
}

}  // namespace harqopt
