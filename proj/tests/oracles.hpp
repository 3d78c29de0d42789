// Independent reference computations for the tests. Nothing here calls the
// library's numerics; they are slow and simple on purpose.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 == 1) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

inline double log2_1p(double g, double snr) { return std::log1p(g * snr) / std::log(2.0); }

// E[log2(1 + g snr)] over g ~ Exp(1), truncated where e^-g is negligible.
inline double mean_mi(double snr) {
    return simpson([&](double g) { return log2_1p(g, snr) * std::exp(-g); }, 0.0, 60.0, 400000);
}

inline double var_mi(double snr) {
    const double m = mean_mi(snr);
    return simpson([&](double g) { const double d = log2_1p(g, snr) - m; return d * d * std::exp(-g); }, 0.0, 60.0,
                   400000);
}

// P(rho log2(1 + g snr) < budget) for a single unit-exponential gain.
inline double single_round_below(double budget, double rho, double snr) {
    if (budget <= 0.0) return 0.0;
    return 1.0 - std::exp(-(std::exp2(budget / rho) - 1.0) / snr);
}

// P(sum_k rho_k log2(1 + g_k snr) < 1) for up to three rounds by nested
// Simpson integration over the gains, split where each partial sum hits 1.
inline double p_fail_exact(const std::vector<double>& rhos, double snr, int n = 4000) {
    const std::function<double(std::size_t, double)> below = [&](std::size_t k, double budget) -> double {
        if (budget <= 0.0) return 0.0;
        if (k + 1 == rhos.size()) return single_round_below(budget, rhos[k], snr);
        const double g_max = (std::exp2(budget / rhos[k]) - 1.0) / snr;
        return simpson([&](double g) { return std::exp(-g) * below(k + 1, budget - rhos[k] * log2_1p(g, snr)); },
                       0.0, g_max, n);
    };
    return below(0, 1.0);
}

struct ProtocolResult {
    std::vector<double> p_occur;
    double p_out = 0.0;
    double expected_symbols = 0.0;
    double throughput = 0.0;
};

// Exact protocol law by enumerating the decoding round and every pattern of
// detected feedback bits. p_fail[k] = P(not decoded after k + 1 rounds).
inline ProtocolResult enumerate_protocol(const std::vector<double>& rhos, int n_b, const std::vector<double>& p_fail,
                                         const std::vector<double>& p_nack, const std::vector<double>& p_ack) {
    const std::size_t m = rhos.size();
    const std::size_t feedbacks = m - 1;
    ProtocolResult r;
    r.p_occur.assign(m, 0.0);
    for (std::size_t d = 1; d <= m + 1; ++d) {  // d = m + 1: never decoded
        const double before = d == 1 ? 1.0 : p_fail[d - 2];
        const double p_d = d == m + 1 ? p_fail[m - 1] : before - p_fail[d - 1];
        for (std::size_t pattern = 0; pattern < (std::size_t{1} << feedbacks); ++pattern) {
            double p = p_d;
            std::size_t used = m;
            bool stopped = false;
            for (std::size_t k = 1; k <= feedbacks; ++k) {
                const bool detected_ack = (pattern >> (k - 1)) & 1u;
                const bool sent_ack = d <= k;
                const double p_ack_detected = sent_ack ? 1.0 - p_ack[k - 1] : p_nack[k - 1];
                p *= detected_ack ? p_ack_detected : 1.0 - p_ack_detected;
                if (detected_ack && !stopped) {
                    used = k;
                    stopped = true;
                }
            }
            for (std::size_t i = 0; i < used; ++i) {
                r.p_occur[i] += p;
                r.expected_symbols += p * rhos[i] * n_b;
            }
            if (d > used) r.p_out += p;
        }
    }
    r.throughput = n_b * (1.0 - r.p_out) / r.expected_symbols;
    return r;
}

}  // namespace oracle
