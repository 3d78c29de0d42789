#include "harqopt/mc_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "harqopt/errors.hpp"

namespace harqopt {

namespace {

constexpr std::uint64_t kEpisodeBlock = 4096;
constexpr double kDecodeThreshold = 1.0;

struct Channel {
    FeedbackMode mode = FeedbackMode::analytic_flip;
    FeedbackErrorRates rates;
    std::vector<double> alphas;
    double snr_linear = 1.0;
    int observations = 1;  // 2 for duplicated ACK
};

bool observe(const Channel& channel, int round, bool sent_ack, RandomStream& rng) {
    const auto i = static_cast<std::size_t>(round - 1);
    if (channel.mode == FeedbackMode::symbol_level) {
        return simulate_detection(sent_ack, channel.alphas[i], channel.snr_linear, rng);
    }
    if (sent_ack) return !rng.bernoulli(channel.rates.p_ack[i]);
    return rng.bernoulli(channel.rates.p_nack[i]);
}

EpisodeOutcome draw_episode(const HarqPolicy& policy, const DownlinkSpec& dl, const Channel& channel,
                            RandomStream& rng, std::vector<double>& gains) {
    for (auto& g : gains) g = rng.exponential();
    return play_episode(policy, dl, gains, [&](int round, bool sent_ack) {
        bool ack = true;
        // every observation is drawn, so the stream advances identically either way
        for (int o = 0; o < channel.observations; ++o) ack = observe(channel, round, sent_ack, rng) && ack;
        return ack;
    });
}

struct Tally {
    std::uint64_t n = 0;
    std::uint64_t delivered = 0;
    std::uint64_t outages = 0;
    double symbols = 0.0;
    double symbols_sq = 0.0;
    double delivered_symbols = 0.0;  // sum of d * s
    std::vector<std::uint64_t> occur;
    std::vector<std::uint64_t> fail;

    explicit Tally(std::size_t m) : occur(m, 0), fail(m, 0) {}

    void add(const Tally& other) {
        n += other.n;
        delivered += other.delivered;
        outages += other.outages;
        symbols += other.symbols;
        symbols_sq += other.symbols_sq;
        delivered_symbols += other.delivered_symbols;
        for (std::size_t i = 0; i < occur.size(); ++i) {
            occur[i] += other.occur[i];
            fail[i] += other.fail[i];
        }
    }
};

Tally run_block(const HarqPolicy& policy, const DownlinkSpec& dl, const Channel& channel, std::uint64_t count,
                std::uint64_t seed, std::uint64_t block) {
    const std::size_t m = policy.rounds();
    RandomStream rng(seed, block);
    Tally t(m);
    std::vector<double> gains(m);
    for (std::uint64_t e = 0; e < count; ++e) {
        const EpisodeOutcome out = draw_episode(policy, dl, channel, rng, gains);
        ++t.n;
        const double s = out.symbols_spent;
        t.symbols += s;
        t.symbols_sq += s * s;
        if (out.delivered) {
            ++t.delivered;
            t.delivered_symbols += s;
        }
        if (out.outage) ++t.outages;
        for (int i = 0; i < out.rounds_used; ++i) ++t.occur[static_cast<std::size_t>(i)];
        double mi = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            mi += mi_of_gain(gains[k], policy.rhos[k], dl);
            if (mi < kDecodeThreshold) ++t.fail[k];
        }
    }
    return t;
}

double binomial_se(double p, std::uint64_t n) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n)); }

SimulationEstimate summarise(const HarqPolicy& policy, const Tally& t, std::uint64_t seed) {
    const auto n = static_cast<double>(t.n);
    SimulationEstimate est;
    est.n_episodes = t.n;
    est.seed = seed;
    est.mean_symbols = t.symbols / n;
    est.p_out = static_cast<double>(t.outages) / n;
    est.p_out_se = binomial_se(est.p_out, t.n);

    double expected = 0.0;
    for (std::size_t i = 0; i < t.occur.size(); ++i) {
        const double occur = static_cast<double>(t.occur[i]) / n;
        const double fail = static_cast<double>(t.fail[i]) / n;
        est.p_occur.push_back(occur);
        est.p_occur_se.push_back(binomial_se(occur, t.n));
        est.p_fail.push_back(fail);
        est.p_fail_se.push_back(binomial_se(fail, t.n));
        expected += policy.rhos[i] * policy.n_b * static_cast<double>(t.occur[i]);
    }
    if (std::abs(expected - t.symbols) > 1e-9 * std::max(1.0, t.symbols)) {
        throw std::logic_error("symbol accounting mismatch: " + std::to_string(expected) + " vs " +
                               std::to_string(t.symbols));
    }

    // Ratio estimator N_b D / S with a delta-method standard error.
    const double nb = policy.n_b;
    const double ratio = nb * static_cast<double>(t.delivered) / t.symbols;
    const double d_mean = static_cast<double>(t.delivered) / n;
    const double z_sq = nb * nb * d_mean - 2.0 * ratio * nb * (t.delivered_symbols / n) + ratio * ratio * (t.symbols_sq / n);
    est.throughput = ratio;
    est.throughput_se = std::sqrt(std::max(0.0, z_sq) / n) / est.mean_symbols;
    return est;
}

std::uint64_t block_count(std::uint64_t n) { return (n + kEpisodeBlock - 1) / kEpisodeBlock; }

std::uint64_t block_size(std::uint64_t n, std::uint64_t block) {
    return std::min(kEpisodeBlock, n - block * kEpisodeBlock);
}

void require_episodes(std::uint64_t n) {
    if (n < kMinEpisodes) {
        throw DomainError("Monte Carlo needs at least " + std::to_string(kMinEpisodes) + " episodes, got " +
                          std::to_string(n));
    }
}

SimulationEstimate estimate_parallel(const HarqPolicy& policy, const DownlinkSpec& dl, const Channel& channel,
                                     std::uint64_t n, std::uint64_t seed) {
    policy.validate();
    require_episodes(n);
    const auto blocks = static_cast<std::int64_t>(block_count(n));
    std::vector<Tally> tallies(static_cast<std::size_t>(blocks), Tally(policy.rounds()));
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < blocks; ++b) {
        const auto block = static_cast<std::uint64_t>(b);
        tallies[block] = run_block(policy, dl, channel, block_size(n, block), seed, block);
    }
    Tally total(policy.rounds());
    for (const auto& t : tallies) total.add(t);
    return summarise(policy, total, seed);
}

Channel make_channel(const HarqPolicy& policy, const FeedbackSpec& fb, FeedbackMode mode) {
    if (fb.alphas.size() + 1 != policy.rounds()) {
        throw DomainError("feedback thresholds must cover rounds 1..M-1");
    }
    Channel c;
    c.mode = mode;
    c.alphas = fb.alphas;
    c.snr_linear = fb.snr_linear;
    c.rates = error_rates_for(fb);
    return c;
}

}  // namespace

EpisodeOutcome play_episode(const HarqPolicy& policy, const DownlinkSpec& dl, std::span<const double> gains,
                            const Detector& detector) {
    const int m = static_cast<int>(policy.rounds());
    if (gains.size() != policy.rounds()) throw DomainError("play_episode: need one gain per round");
    EpisodeOutcome out;
    double mi = 0.0;
    for (int k = 1; k <= m; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        out.rounds_used = k;
        out.symbols_spent += policy.rhos[i] * policy.n_b;
        mi += mi_of_gain(gains[i], policy.rhos[i], dl);
        if (out.decoded_round == 0 && mi >= kDecodeThreshold) out.decoded_round = k;
        if (k == m) break;
        const bool sent_ack = out.decoded_round != 0;
        const bool detected_ack = detector(k, sent_ack);
        out.feedback_events.push_back({sent_ack, detected_ack});
        if (detected_ack) break;
    }
    out.outage = out.decoded_round == 0;
    out.delivered = !out.outage;
    return out;
}

EpisodeOutcome run_episode(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                           RandomStream& rng, FeedbackMode mode) {
    policy.validate();
    std::vector<double> gains(policy.rounds());
    return draw_episode(policy, dl, make_channel(policy, fb, mode), rng, gains);
}

SimulationEstimate estimate_performance(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                                        std::uint64_t n, std::uint64_t seed, FeedbackMode mode) {
    return estimate_parallel(policy, dl, make_channel(policy, fb, mode), n, seed);
}

SimulationEstimate estimate_performance(const HarqPolicy& policy, const DownlinkSpec& dl,
                                        const FeedbackErrorRates& rates, std::uint64_t n, std::uint64_t seed) {
    if (rates.rounds() + 1 < policy.rounds() || rates.p_ack.size() != rates.p_nack.size()) {
        throw DomainError("feedback error rates must cover rounds 1..M-1");
    }
    Channel c;
    c.rates = rates;
    return estimate_parallel(policy, dl, c, n, seed);
}

SimulationEstimate estimate_performance_serial(const HarqPolicy& policy, const DownlinkSpec& dl,
                                               const FeedbackSpec& fb, std::uint64_t n, std::uint64_t seed,
                                               FeedbackMode mode) {
    policy.validate();
    require_episodes(n);
    const Channel channel = make_channel(policy, fb, mode);
    Tally total(policy.rounds());
    for (std::uint64_t b = 0; b < block_count(n); ++b) total.add(run_block(policy, dl, channel, block_size(n, b), seed, b));
    return summarise(policy, total, seed);
}

SimulationEstimate estimate_duplicated_ack(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackSpec& fb,
                                           std::uint64_t n, std::uint64_t seed, FeedbackMode mode) {
    for (double a : fb.alphas) {
        if (a != 0.0) throw DomainError("estimate_duplicated_ack: detection must be symmetric (alpha = 0)");
    }
    Channel channel = make_channel(policy, fb, mode);
    channel.observations = 2;
    return estimate_parallel(policy, dl, channel, n, seed);
}

}  // namespace harqopt
