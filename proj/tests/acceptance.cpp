// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exits non-zero on a failed criterion only with --strict.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "harqopt/errors.hpp"
#include "harqopt/feedback_model.hpp"
#include "harqopt/harq_analysis.hpp"
#include "harqopt/mc_simulator.hpp"
#include "harqopt/mi_model.hpp"
#include "harqopt/optimizer.hpp"
#include "harqopt/random.hpp"
#include "oracles.hpp"

using namespace harqopt;

namespace {

constexpr double kSnrD = 3.0;
constexpr int kRounds = 4;
constexpr int kUnits = 64;

// every breakdown seen in the run; the bound checks walk this list
std::vector<PerformanceBreakdown> g_seen;

const PerformanceBreakdown& seen(const PerformanceBreakdown& b) {
    g_seen.push_back(b);
    return b;
}

HarqPolicy reference_template() {
    HarqPolicy p;
    p.m_max = kRounds;
    p.n_b = 1024;
    p.n_m = 4096;
    p.rho_min = 4.0 / kUnits;
    p.rho_max = 4.0;
    p.rhos.assign(kRounds, 0.5);
    p.alphas.assign(kRounds - 1, 0.5);
    return p;
}

std::vector<double> snr_u_grid() {
    std::vector<double> g;
    for (int db = -15; db <= -3; ++db) g.push_back(db);
    return g;
}

void detail(const char* fmt, auto... args) {
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

struct Outcome {
    bool pass = false;
    std::string summary;
};

Outcome feedback_closure() {
    constexpr std::uint64_t n = 1'000'000;
    const auto z_of = [](bool ack, double alpha, double snr, std::uint64_t seed) {
        const double p = ack ? ack_error_rate(alpha, snr) : nack_error_rate(alpha, snr);
        const auto est = estimate_detection_errors(ack, alpha, snr, n, seed);
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
        return std::pair{est.rate(), se > 0.0 ? (est.rate() - p) / se : 0.0};
    };
    double worst = 0.0;
    double worst_alpha = 0.0;
    double worst_snr = 0.0;
    bool worst_ack = false;
    std::uint64_t seed = 100;
    for (double alpha : {0.0, 0.2, 0.5, 1.0}) {
        for (double db : {-15.0, -10.0, -5.0}) {
            const double snr = std::pow(10.0, db / 10.0);
            for (bool ack : {false, true}) {
                const double p = ack ? ack_error_rate(alpha, snr) : nack_error_rate(alpha, snr);
                const auto [rate, z] = z_of(ack, alpha, snr, seed++);
                if (std::abs(z) > worst) {
                    worst = std::abs(z);
                    worst_alpha = alpha;
                    worst_snr = snr;
                    worst_ack = ack;
                }
                detail("alpha=%.1f snr_u=%+.0f dB %s: closed %.6g, simulated %.6g, z %+.2f", alpha, db,
                       ack ? "P_A" : "P_N", p, rate, z);
            }
        }
    }
    // diagnostic only: fresh seeds on the worst cell tell a fluctuation from a bias
    double pooled = 0.0;
    for (std::uint64_t extra = 0; extra < 10; ++extra) pooled += z_of(worst_ack, worst_alpha, worst_snr, 900 + extra).second;
    detail("worst cell rerun on 10 fresh seeds: pooled z %+.2f", pooled / std::sqrt(10.0));
    char buf[96];
    std::snprintf(buf, sizeof buf, "largest |z| %.2f over 24 rates (limit 3)", worst);
    return {worst <= 3.0, buf};
}

Outcome analysis_closure() {
    const DownlinkSpec dl = make_downlink_spec(kSnrD);
    const RateGrid grid = RateGrid::make(1024, 4096, kUnits, 1, kUnits);
    RandomStream rng(20241, 0);
    double worst = 0.0;
    int accepted = 0;
    int draws = 0;
    while (accepted < 10) {
        ++draws;
        HarqPolicy policy = reference_template();
        std::vector<int> units(kRounds);
        for (int& u : units) u = 1 + static_cast<int>(rng.uniform() * 16);  // at most 64 in total
        policy.rhos = grid.rhos(units);
        for (double& a : policy.alphas) a = 0.5 + 2.0 * rng.uniform();
        const double snr_u_db = -15.0 + 10.0 * rng.uniform();
        const auto fb = FeedbackSpec::from_db(snr_u_db, policy.alphas);
        const auto rates = error_rates_for(fb);
        const auto pf = p_fail_convolution(policy.rhos, dl);
        const auto b = evaluate_policy(policy, pf, rates);
        if (b.p_out_unreliable > 0.01) continue;
        seen(b);
        seen(evaluate_policy(policy, p_fail_gaussian(policy.rhos, dl), rates));
        ++accepted;

        const auto mc = estimate_performance(policy, dl, fb, 1'000'000, 5000 + static_cast<std::uint64_t>(accepted),
                                             FeedbackMode::analytic_flip);
        const auto exact = oracle::enumerate_protocol(policy.rhos, policy.n_b, pf, rates.p_nack, rates.p_ack);
        const double z_out = (mc.p_out - b.p_out_unreliable) / mc.p_out_se;
        const double z_eta = (mc.throughput - b.throughput) / mc.throughput_se;
        double z_occ = 0.0;
        for (std::size_t i = 1; i < kRounds; ++i) {
            const double z = (mc.p_occur[i] - b.p_occur[i]) / mc.p_occur_se[i];
            if (std::abs(z) > std::abs(z_occ)) z_occ = z;
        }
        worst = std::max({worst, std::abs(z_out), std::abs(z_eta), std::abs(z_occ)});
        detail("policy %d (snr_u %+.2f dB, units %d/%d/%d/%d): z(P_out) %+.2f, z(eta) %+.2f, worst z(P_i) %+.2f; "
               "exact-law P_out %.6g vs closed form %.6g, z %+.2f",
               accepted, snr_u_db, units[0], units[1], units[2], units[3], z_out, z_eta, z_occ, exact.p_out,
               b.p_out_unreliable, (mc.p_out - exact.p_out) / mc.p_out_se);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "largest |z| %.2f over 10 policies (limit 3, %d draws)", worst, draws);
    return {worst <= 3.0, buf};
}

Outcome gaussian_quality() {
    RandomStream rng(31337, 0);
    const RateGrid grid = RateGrid::make(1024, 4096, kUnits, 1, kUnits);
    double worst = 0.0;
    std::string where;
    for (double snr_d : {0.0, 1.5, 3.0, 4.5, 6.0}) {
        const DownlinkSpec dl = make_downlink_spec(snr_d);
        double worst_here = 0.0;
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<int> units(kRounds);
            for (int& u : units) u = 1 + static_cast<int>(rng.uniform() * 16);
            const auto rhos = grid.rhos(units);
            const auto g = p_fail_gaussian(rhos, dl);
            const auto c = p_fail_convolution(rhos, dl);
            for (std::size_t k = 1; k < kRounds; ++k) {
                const double gap = std::abs(g[k] - c[k]);
                worst_here = std::max(worst_here, gap);
                if (gap > worst) {
                    worst = gap;
                    char buf[96];
                    std::snprintf(buf, sizeof buf, "snr_d %.1f dB, k=%zu, units %d/%d/%d/%d", snr_d, k + 1, units[0],
                                  units[1], units[2], units[3]);
                    where = buf;
                }
            }
        }
        detail("snr_d %.1f dB: largest gap %.4f over 40 rate vectors", snr_d, worst_here);
    }
    char buf[192];
    std::snprintf(buf, sizeof buf, "largest |gaussian - convolution| %.4f at %s (limit 0.05)", worst, where.c_str());
    return {worst <= 0.05, buf};
}

Outcome dp_correctness() {
    RandomStream rng(4242, 0);
    int mismatches = 0;
    for (int instance = 0; instance < 50; ++instance) {
        const int m = 2 + static_cast<int>(rng.uniform() * 2);
        const int total = 4 + static_cast<int>(rng.uniform() * 13);  // 4..16
        const RateGrid g = RateGrid::make(1024, 4096, total, 1, total);
        const DownlinkSpec dl = make_downlink_spec(-2.0 + 10.0 * rng.uniform());
        std::vector<double> alphas;
        for (int i = 0; i + 1 < m; ++i) alphas.push_back(1.5 * rng.uniform());
        const auto rates = error_rates_for(FeedbackSpec::from_db(-15.0 + 12.0 * rng.uniform(), alphas));
        const double lambda = std::pow(10.0, -1.0 + 5.0 * rng.uniform());
        const auto dp = dp_rate_allocation(lambda, rates, dl, g, m);
        const auto bf = brute_force_rate_allocation(lambda, rates, dl, g, m);
        const bool same = dp.units == bf.units && std::abs(dp.value - bf.value) <= 1e-12 * std::abs(bf.value);
        if (!same) {
            ++mismatches;
            detail("instance %d: DP value %.17g, exhaustive %.17g", instance, dp.value, bf.value);
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d of 50 instances differ", mismatches);
    return {mismatches == 0, buf};
}

Outcome lambda_monotone() {
    const DownlinkSpec dl = make_downlink_spec(kSnrD);
    const RateGrid g = RateGrid::make(1024, 4096, kUnits, 1, kUnits);
    const FailureTable table(dl, g);
    const auto rates = error_rates_for(FeedbackSpec::from_db(-10.0, {0.5, 0.5, 0.5}));
    double previous = 2.0;
    int violations = 0;
    for (int i = 0; i < 20; ++i) {
        const double lambda = std::pow(10.0, -2.0 + 7.0 * i / 19.0);
        const auto a = dp_rate_allocation(lambda, rates, table, g, kRounds);
        detail("lambda %.4g: outage %.6g, expected cost %.6g", lambda, a.outage, a.expected_cost);
        if (a.outage > previous) ++violations;
        previous = a.outage;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d increases over a 20-point ladder", violations);
    return {violations == 0, buf};
}

Outcome min_outage_trend() {
    const DownlinkSpec dl = make_downlink_spec(kSnrD);
    const RateGrid g = RateGrid::make(1024, 4096, kUnits, 1, kUnits);
    const FailureTable table(dl, g);
    int violations = 0;
    for (double db : snr_u_grid()) {
        double previous = 2.0;
        std::string row;
        for (double a : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
            const auto rates = error_rates_for(FeedbackSpec::from_db(db, {a, a, a}));
            const double out = minimum_outage_allocation(rates, table, g, kRounds).outage;
            if (out > previous) ++violations;
            previous = out;
            char cell[24];
            std::snprintf(cell, sizeof cell, " %.4g", out);
            row += cell;
        }
        detail("snr_u %+.0f dB, alpha 0..1:%s", db, row.c_str());
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d increases in alpha over 13 uplink SNRs", violations);
    return {violations == 0, buf};
}

Outcome asymmetric_vs_duplicated() {
    const DownlinkSpec dl = make_downlink_spec(kSnrD);
    const OptimizerConfig config;
    int worse = 0;
    int strictly_better = 0;
    for (double db : snr_u_grid()) {
        double asym = 0.0;
        double dup = 0.0;
        bool asym_ok = false;
        bool dup_ok = false;
        try {
            const auto s = alternating_optimize(dl, db, reference_template(), config);
            asym = s.breakdown.throughput;
            asym_ok = true;
            seen(s.breakdown);
        } catch (const InfeasibleError&) {
        }
        try {
            const auto s = optimize_duplicated_ack(dl, db, reference_template(), config);
            dup = s.breakdown.throughput;
            dup_ok = true;
            seen(s.breakdown);
        } catch (const InfeasibleError&) {
        }
        // an infeasible scheme delivers nothing under the outage limit
        if (asym < dup - 1e-9) ++worse;
        if (asym > dup + 1e-9) ++strictly_better;
        detail("snr_u %+.0f dB: asymmetric %s%.6f, duplicated-ACK %s%.6f", db, asym_ok ? "" : "infeasible ", asym,
               dup_ok ? "" : "infeasible ", dup);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "asymmetric below baseline at %d of 13 points, strictly above at %d", worse,
                  strictly_better);
    return {worse == 0 && strictly_better > 0, buf};
}

Outcome fixed_vs_variable() {
    const DownlinkSpec dl = make_downlink_spec(kSnrD);
    int violations = 0;
    for (double db : {-5.0, -10.0, -15.0}) {
        const auto cmp = compare_fixed_and_variable(dl, db, reference_template(), OptimizerConfig{}, 50);
        seen(cmp.variable.breakdown);
        if (!cmp.fixed_feasible) {
            detail("snr_u %+.0f dB: no common threshold is feasible; variable %.6f", db,
                   cmp.variable.breakdown.throughput);
            continue;
        }
        seen(cmp.best_fixed.breakdown);
        const double fixed = cmp.best_fixed.breakdown.throughput;
        const double variable = cmp.variable.breakdown.throughput;
        if (variable < fixed - 1e-6) ++violations;
        detail("snr_u %+.0f dB: best fixed alpha %.3f gives %.6f, variable gives %.6f (gain %+.3g)", db,
               cmp.best_fixed_alpha, fixed, variable, variable - fixed);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "variable below best fixed at %d of 3 points", violations);
    return {violations == 0, buf};
}

Outcome alternating_convergence() {
    const DownlinkSpec dl = make_downlink_spec(kSnrD);
    OptimizerConfig config;
    config.warm_start = true;
    RandomStream rng(909, 0);
    int bad = 0;
    int longest = 0;
    for (int start = 0; start < 20; ++start) {
        HarqPolicy p = reference_template();
        const RateGrid grid = RateGrid::for_policy(p, kUnits);
        std::vector<int> units(kRounds);
        for (int& u : units) u = 1 + static_cast<int>(rng.uniform() * 16);
        p.rhos = grid.rhos(units);
        for (double& a : p.alphas) a = 2.0 * rng.uniform();
        try {
            const auto s = alternating_optimize(dl, -10.0, p, config);
            seen(s.breakdown);
            bool ok = s.converged && s.feasible && s.iterations <= 50;
            for (std::size_t i = 1; i < s.objective_trace.size(); ++i) {
                ok = ok && s.objective_trace[i] >= s.objective_trace[i - 1] - 1e-9;
            }
            ok = ok && s.breakdown.p_out_unreliable <= 0.01;
            ok = ok && std::accumulate(s.policy.rhos.begin(), s.policy.rhos.end(), 0.0) <= 4.0 + 1e-12;
            longest = std::max(longest, s.iterations);
            if (!ok) {
                ++bad;
                detail("start %d: converged %d, iterations %d, outage %.6g", start, s.converged, s.iterations,
                       s.breakdown.p_out_unreliable);
            }
        } catch (const Error& e) {
            ++bad;
            detail("start %d: %s", start, e.what());
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d of 20 starts failed; most iterations %d", bad, longest);
    return {bad == 0, buf};
}

Outcome bound_invariants() {
    const double capacity = make_downlink_spec(kSnrD).mean_mi;  // every policy above runs at this SNR_d
    int violations = 0;
    for (const auto& b : g_seen) {
        if (b.p_out_unreliable < b.p_out_reliable) ++violations;
        if (b.throughput > capacity) ++violations;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d violations over %zu evaluated policies", violations, g_seen.size());
    return {violations == 0 && !g_seen.empty(), buf};
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"feedback-model closure", feedback_closure},
        {"analytic vs simulation closure", analysis_closure},
        {"gaussian approximation quality", gaussian_quality},
        {"DP equals exhaustive search", dp_correctness},
        {"outage non-increasing in lambda", lambda_monotone},
        {"minimum outage non-increasing in alpha", min_outage_trend},
        {"asymmetric detection vs duplicated ACK", asymmetric_vs_duplicated},
        {"variable vs best fixed threshold", fixed_vs_variable},
        {"alternating optimisation convergence", alternating_convergence},
        {"outage and throughput bounds", bound_invariants},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, name, o.summary.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return strict && failed > 0 ? 1 : 0;
}
