#include "harqopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "harqopt/errors.hpp"

namespace harqopt {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kFiniteDifferenceStep = 1e-4;
constexpr int kMaxStepHalvings = 30;
constexpr int kMaxBracketDoublings = 20;

void require(bool ok, const std::string& message) {
    if (!ok) throw DomainError(message);
}

// Strictly better under the shared tie-break: value, then fewer units, then lexicographic.
bool preferred(double value, std::span<const int> units, const Allocation& incumbent) {
    const double scale = std::max({1.0, std::abs(value), std::abs(incumbent.value)});
    if (value < incumbent.value - kTieTolerance * scale) return true;
    if (value > incumbent.value + kTieTolerance * scale) return false;
    const int total = std::accumulate(units.begin(), units.end(), 0);
    const int incumbent_total = std::accumulate(incumbent.units.begin(), incumbent.units.end(), 0);
    if (total != incumbent_total) return total < incumbent_total;
    return std::lexicographical_compare(units.begin(), units.end(), incumbent.units.begin(), incumbent.units.end());
}

void keep_better(std::optional<Allocation>& best, Allocation candidate) {
    if (!best || preferred(candidate.value, candidate.units, *best)) best = std::move(candidate);
}

// State after k rounds of the recursion. Everything the remaining rounds
// need from the history is carried here.
struct DpState {
    int sum_units = 0;
    int sum_sq_units = 0;
    double p_fail = 1.0;          // P_{k,f}
    double nacks_survive = 1.0;   // prod_{j<=k} (1 - P_{N,j})
    double after_success = 0.0;   // P(round k+1 sent although decoding already succeeded)
    double premature = 0.0;       // premature-stop mass through feedback k
    double cost = 0.0;            // sum_{i<=k} rho_i P_i
    double next_occurs = 1.0;     // P_{k+1}
};

class DpSearch {
public:
    DpSearch(const FeedbackErrorRates& rates, const FailureTable& table, const RateGrid& grid, int m_max,
             double cost_weight, double outage_weight)
        : rates_(rates), table_(table), grid_(grid), m_(m_max), cost_weight_(cost_weight),
          outage_weight_(outage_weight), path_(static_cast<std::size_t>(m_max)) {}

    int upper_units(const DpState& state, int round) const {
        return std::min(grid_.max_units, grid_.units_total - state.sum_units - (m_ - round) * grid_.min_units);
    }

    // Minimum over all completions of `state`, whose next round is `round` (1-based).
    void descend(const DpState& state, int round) {
        const int upper = upper_units(state, round);
        for (int u = grid_.min_units; u <= upper; ++u) choose(state, round, u);
    }

    void choose(const DpState& state, int round, int u) {
        const double rho = grid_.rho(u);
        DpState next;
        next.sum_units = state.sum_units + u;
        next.sum_sq_units = state.sum_sq_units + u * u;
        next.cost = state.cost + rho * state.next_occurs;
        const double p_fail = table_.at(next.sum_units, next.sum_sq_units);
        path_[static_cast<std::size_t>(round - 1)] = u;

        if (round == m_) {
            const double outage = 1.0 - (1.0 - state.premature) * (1.0 - p_fail);
            const double value = cost_weight_ * next.cost + outage_weight_ * outage;
            if (!best_ || preferred(value, path_, *best_)) {
                best_ = Allocation{path_, grid_.rhos(path_), value, next.cost, outage};
            }
            return;
        }
        const auto i = static_cast<std::size_t>(round - 1);
        const double p_nack = rates_.p_nack[i];
        const double p_ack = rates_.p_ack[i];
        next.premature = state.premature + p_nack * p_fail * state.nacks_survive;
        next.after_success = (state.after_success + state.nacks_survive * (state.p_fail - p_fail)) * p_ack;
        next.nacks_survive = state.nacks_survive * (1.0 - p_nack);
        next.p_fail = p_fail;
        next.next_occurs = p_fail * next.nacks_survive + next.after_success;
        descend(next, round + 1);
    }

    std::optional<Allocation>& best() { return best_; }

private:
    const FeedbackErrorRates& rates_;
    const FailureTable& table_;
    const RateGrid& grid_;
    int m_;
    double cost_weight_;
    double outage_weight_;
    std::vector<int> path_;
    std::optional<Allocation> best_;
};

void require_dp_inputs(const FeedbackErrorRates& rates, const RateGrid& grid, int m_max) {
    require(m_max >= 1, "rate allocation: m_max must be >= 1");
    require(rates.rounds() + 1 >= static_cast<std::size_t>(m_max) && rates.p_ack.size() == rates.p_nack.size(),
            "rate allocation: feedback error rates must cover M-1 rounds");
    if (grid.min_units * m_max > grid.units_total || grid.min_units > grid.max_units) {
        throw InfeasibleError("rate allocation: no unit vector satisfies the per-round and total bounds",
                              std::numeric_limits<double>::quiet_NaN());
    }
}

Allocation dp_parallel(const FeedbackErrorRates& rates, const FailureTable& table, const RateGrid& grid, int m_max,
                       double cost_weight, double outage_weight) {
    require_dp_inputs(rates, grid, m_max);
    const DpState root;
    const int first = grid.min_units;
    const int last = DpSearch(rates, table, grid, m_max, 0, 0).upper_units(root, 1);
    std::vector<std::optional<Allocation>> subtree(static_cast<std::size_t>(last - first + 1));
#pragma omp parallel for schedule(dynamic)
    for (int u = first; u <= last; ++u) {
        DpSearch search(rates, table, grid, m_max, cost_weight, outage_weight);
        search.choose(root, 1, u);
        subtree[static_cast<std::size_t>(u - first)] = std::move(search.best());
    }
    std::optional<Allocation> best;
    for (auto& s : subtree) {
        if (s) keep_better(best, std::move(*s));
    }
    return std::move(*best);
}

}  // namespace

void OptimizerConfig::validate(int m_max) const {
    require(epsilon > 0.0 && epsilon <= 1.0, "optimizer.epsilon must be in (0, 1]");
    require(units_total >= m_max, "optimizer.units_total must be >= m_max");
    require(lambda_lo >= 0.0 && lambda_lo < lambda_hi, "optimizer.lambda_lo must be >= 0 and < lambda_hi");
    require(lambda_tol > 0.0, "optimizer.lambda_tol must be positive");
    require(pgd_step > 0.0 && pgd_tol > 0.0 && pgd_max_iters >= 1, "optimizer.pgd_* must be positive");
    require(alpha_lo <= alpha_hi, "optimizer.alpha_lo must be <= alpha_hi");
    require(alt_max_iters >= 1 && alt_tol >= 0.0, "optimizer.alt_max_iters must be >= 1 and alt_tol >= 0");
    require(init_scan_points >= 0, "optimizer.init_scan_points must be >= 0");
}

RateGrid RateGrid::make(int n_b, int n_m, int units_total, int min_units, int max_units) {
    require(n_b >= 1 && n_m >= 1, "rate grid: n_b and n_m must be positive");
    require(units_total >= 1, "rate grid: units_total must be positive");
    require(min_units >= 1 && min_units <= max_units && max_units <= units_total,
            "rate grid: need 1 <= min_units <= max_units <= units_total");
    return {static_cast<double>(n_m) / (static_cast<double>(units_total) * n_b), units_total, min_units, max_units};
}

RateGrid RateGrid::for_policy(const HarqPolicy& policy, int units_total) {
    const double unit = static_cast<double>(policy.n_m) / (static_cast<double>(units_total) * policy.n_b);
    const int lo = std::max(1, static_cast<int>(std::ceil(policy.rho_min / unit - 1e-9)));
    const int hi = std::min(units_total, static_cast<int>(std::floor(policy.rho_max / unit + 1e-9)));
    return make(policy.n_b, policy.n_m, units_total, lo, hi);
}

std::vector<double> RateGrid::rhos(std::span<const int> units) const {
    std::vector<double> out;
    out.reserve(units.size());
    for (int u : units) out.push_back(rho(u));
    return out;
}

FailureTable::FailureTable(const DownlinkSpec& dl, const RateGrid& grid) {
    // Positive integers summing to s have squares summing to somewhere in [s, s^2].
    offsets_.assign(static_cast<std::size_t>(grid.units_total) + 1, 0);
    std::size_t size = 0;
    for (int s = 1; s <= grid.units_total; ++s) {
        offsets_[static_cast<std::size_t>(s)] = size;
        size += static_cast<std::size_t>(s) * static_cast<std::size_t>(s - 1) + 1;
    }
    values_.resize(size);
    for (int s = 1; s <= grid.units_total; ++s) {
        for (int sq = s; sq <= s * s; ++sq) {
            values_[offsets_[static_cast<std::size_t>(s)] + static_cast<std::size_t>(sq - s)] =
                p_fail_gaussian(grid.rho(s), grid.unit_rho * grid.unit_rho * sq, dl);
        }
    }
}

Allocation evaluate_allocation(std::span<const int> units, double lambda, const FeedbackErrorRates& rates,
                               const DownlinkSpec& dl, const RateGrid& grid, double cost_weight) {
    Allocation out;
    out.units.assign(units.begin(), units.end());
    out.rhos = grid.rhos(units);
    const auto failures = p_fail_gaussian(out.rhos, dl);
    const auto occur = transmission_probabilities(failures, rates);
    for (std::size_t i = 0; i < out.rhos.size(); ++i) out.expected_cost += out.rhos[i] * occur[i];
    out.outage = unreliable_outage(failures, rates);
    out.value = cost_weight * out.expected_cost + lambda * out.outage;
    return out;
}

Allocation dp_rate_allocation(double lambda, const FeedbackErrorRates& rates, const FailureTable& table,
                              const RateGrid& grid, int m_max) {
    require(lambda >= 0.0, "dp_rate_allocation: lambda must be >= 0");
    return dp_parallel(rates, table, grid, m_max, 1.0, lambda);
}

Allocation dp_rate_allocation(double lambda, const FeedbackErrorRates& rates, const DownlinkSpec& dl,
                              const RateGrid& grid, int m_max) {
    return dp_rate_allocation(lambda, rates, FailureTable(dl, grid), grid, m_max);
}

Allocation dp_rate_allocation_serial(double lambda, const FeedbackErrorRates& rates, const FailureTable& table,
                                     const RateGrid& grid, int m_max) {
    require(lambda >= 0.0, "dp_rate_allocation: lambda must be >= 0");
    require_dp_inputs(rates, grid, m_max);
    DpSearch search(rates, table, grid, m_max, 1.0, lambda);
    search.descend(DpState{}, 1);
    return std::move(*search.best());
}

Allocation minimum_outage_allocation(const FeedbackErrorRates& rates, const FailureTable& table,
                                     const RateGrid& grid, int m_max) {
    return dp_parallel(rates, table, grid, m_max, 0.0, 1.0);
}

std::uint64_t count_allocations(const RateGrid& grid, int m_max) {
    constexpr auto saturated = std::numeric_limits<std::uint64_t>::max();
    const auto total = static_cast<std::size_t>(grid.units_total);
    std::vector<std::uint64_t> ways(total + 1, 0);
    ways[0] = 1;
    for (int r = 0; r < m_max; ++r) {
        std::vector<std::uint64_t> next(total + 1, 0);
        for (std::size_t s = 0; s <= total; ++s) {
            if (ways[s] == 0) continue;
            for (int u = grid.min_units; u <= grid.max_units && s + static_cast<std::size_t>(u) <= total; ++u) {
                auto& slot = next[s + static_cast<std::size_t>(u)];
                slot = saturated - slot < ways[s] ? saturated : slot + ways[s];
            }
        }
        ways = std::move(next);
    }
    std::uint64_t count = 0;
    for (auto w : ways) count = saturated - count < w ? saturated : count + w;
    return count;
}

Allocation brute_force_rate_allocation(double lambda, const FeedbackErrorRates& rates, const DownlinkSpec& dl,
                                       const RateGrid& grid, int m_max) {
    require_dp_inputs(rates, grid, m_max);
    const auto candidates = count_allocations(grid, m_max);
    if (candidates > kBruteForceLimit) {
        throw SizeError("brute_force_rate_allocation: " + std::to_string(candidates) + " candidates exceed the limit");
    }
    const auto m = static_cast<std::size_t>(m_max);
    std::vector<int> units(m, grid.min_units);
    std::optional<Allocation> best;
    // Odometer over unit vectors in lexicographic order, skipping over-budget ones.
    while (true) {
        if (std::accumulate(units.begin(), units.end(), 0) <= grid.units_total) {
            keep_better(best, evaluate_allocation(units, lambda, rates, dl, grid));
        }
        std::size_t pos = m;
        while (pos > 0) {
            --pos;
            if (units[pos] < grid.max_units) {
                ++units[pos];
                std::fill(units.begin() + static_cast<std::ptrdiff_t>(pos) + 1, units.end(), grid.min_units);
                break;
            }
            if (pos == 0) return std::move(*best);
        }
    }
}

LambdaSolution solve_lambda(const FeedbackErrorRates& rates, const FailureTable& table, const RateGrid& grid,
                            int m_max, const OptimizerConfig& config) {
    require(config.lambda_lo >= 0.0 && config.lambda_lo < config.lambda_hi, "solve_lambda: invalid lambda bracket");
    const double eps = config.epsilon;
    LambdaSolution out;
    const auto probe = [&](double lambda) {
        Allocation a = dp_rate_allocation(lambda, rates, table, grid, m_max);
        out.probes.push_back({lambda, a.outage});
        return a;
    };

    double lo = config.lambda_lo;
    Allocation at_lo = probe(lo);
    if (at_lo.outage <= eps) {
        out.allocation = std::move(at_lo);
        out.lambda_star = lo;
        return out;
    }
    double hi = config.lambda_hi;
    Allocation at_hi = probe(hi);
    for (int d = 0; d < kMaxBracketDoublings && at_hi.outage > eps; ++d) {
        lo = hi;
        hi *= 2.0;
        at_hi = probe(hi);
    }
    if (at_hi.outage > eps) {
        const double floor = minimum_outage_allocation(rates, table, grid, m_max).outage;
        throw InfeasibleError("solve_lambda: outage limit " + std::to_string(eps) +
                                  " is below the minimum achievable outage " + std::to_string(floor),
                              floor);
    }
    while (hi - lo > config.lambda_tol * std::max(1.0, hi) && at_hi.outage < eps * (1.0 - 1e-3)) {
        const double mid = 0.5 * (lo + hi);
        Allocation at_mid = probe(mid);
        if (at_mid.outage <= eps) {
            hi = mid;
            at_hi = std::move(at_mid);
        } else {
            lo = mid;
        }
    }
    out.allocation = std::move(at_hi);
    out.lambda_star = hi;
    return out;
}

LambdaSolution solve_lambda(std::span<const double> alphas, const DownlinkSpec& dl, double fb_snr_linear,
                            const RateGrid& grid, int m_max, const OptimizerConfig& config) {
    FeedbackSpec fb{10.0 * std::log10(fb_snr_linear), fb_snr_linear, {alphas.begin(), alphas.end()}};
    return solve_lambda(error_rates_for(fb), FailureTable(dl, grid), grid, m_max, config);
}

namespace {

// Throughput and outage of fixed rates as a function of the thresholds.
class ThresholdObjective {
public:
    ThresholdObjective(const HarqPolicy& policy, const DownlinkSpec& dl, double fb_snr_linear)
        : policy_(policy), failures_(p_fail_gaussian(policy.rhos, dl)),
          fb_{10.0 * std::log10(fb_snr_linear), fb_snr_linear, {}} {}

    PerformanceBreakdown evaluate(std::span<const double> alphas) const {
        FeedbackSpec fb = fb_;
        fb.alphas.assign(alphas.begin(), alphas.end());
        return evaluate_policy(policy_, failures_, error_rates_for(fb));
    }

private:
    const HarqPolicy& policy_;
    std::vector<double> failures_;
    FeedbackSpec fb_;
};

std::vector<double> clamp_to_box(std::span<const double> alphas, const OptimizerConfig& config) {
    std::vector<double> out;
    out.reserve(alphas.size());
    for (double a : alphas) out.push_back(std::clamp(a, config.alpha_lo, config.alpha_hi));
    return out;
}

std::vector<double> shifted(std::span<const double> alphas, double t, const OptimizerConfig& config) {
    std::vector<double> out;
    out.reserve(alphas.size());
    for (double a : alphas) out.push_back(std::min(a + t, config.alpha_hi));
    return out;
}

// Smallest uniform upward shift that meets the outage limit.
std::vector<double> project(std::span<const double> alphas, const ThresholdObjective& objective,
                            const OptimizerConfig& config) {
    auto boxed = clamp_to_box(alphas, config);
    const auto feasible = [&](std::span<const double> a) {
        return objective.evaluate(a).p_out_unreliable <= config.epsilon;
    };
    if (feasible(boxed)) return boxed;
    const double reach = config.alpha_hi - *std::min_element(boxed.begin(), boxed.end());
    if (!feasible(shifted(boxed, reach, config))) {
        throw InfeasibleError("optimize_thresholds_pgd: no thresholds in the search box meet the outage limit",
                              objective.evaluate(shifted(boxed, reach, config)).p_out_unreliable);
    }
    double lo = 0.0;
    double hi = reach;
    while (hi - lo > 1e-12 * std::max(1.0, reach)) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(shifted(boxed, mid, config))) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return shifted(boxed, hi, config);
}

}  // namespace

ThresholdSolution optimize_thresholds_pgd(const HarqPolicy& policy, const DownlinkSpec& dl, double fb_snr_linear,
                                          const OptimizerConfig& config, std::span<const double> start) {
    require(fb_snr_linear > 0.0, "optimize_thresholds_pgd: feedback snr must be positive");
    const std::size_t n = policy.rhos.size() - 1;
    ThresholdSolution out;
    if (n == 0) {
        const ThresholdObjective objective(policy, dl, fb_snr_linear);
        const auto b = objective.evaluate({});
        if (b.p_out_unreliable > config.epsilon) {
            throw InfeasibleError("optimize_thresholds_pgd: single-round policy violates the outage limit",
                                  b.p_out_unreliable);
        }
        out.throughput = b.throughput;
        out.outage = b.p_out_unreliable;
        out.converged = true;
        return out;
    }
    require(start.empty() || start.size() == n, "optimize_thresholds_pgd: start must have M-1 entries");

    const ThresholdObjective objective(policy, dl, fb_snr_linear);
    std::vector<double> alphas =
        project(start.empty() ? std::vector<double>(n, config.alpha_lo) : std::vector<double>(start.begin(), start.end()),
                objective, config);
    double current = objective.evaluate(alphas).throughput;
    double step = config.pgd_step;

    for (out.iterations = 0; out.iterations < config.pgd_max_iters; ++out.iterations) {
        std::vector<double> gradient(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto up = alphas;
            auto down = alphas;
            up[i] = std::min(alphas[i] + kFiniteDifferenceStep, config.alpha_hi);
            down[i] = std::max(alphas[i] - kFiniteDifferenceStep, config.alpha_lo);
            if (up[i] == down[i]) continue;
            gradient[i] =
                (objective.evaluate(up).throughput - objective.evaluate(down).throughput) / (up[i] - down[i]);
        }
        if (std::all_of(gradient.begin(), gradient.end(), [](double g) { return g == 0.0; })) {
            out.converged = true;
            break;
        }

        std::optional<std::vector<double>> accepted;
        double accepted_value = current;
        for (int h = 0; h <= kMaxStepHalvings; ++h, step *= 0.5) {
            std::vector<double> trial(n);
            for (std::size_t i = 0; i < n; ++i) trial[i] = alphas[i] + step * gradient[i];
            trial = project(trial, objective, config);
            const double value = objective.evaluate(trial).throughput;
            if (value > current) {
                accepted = std::move(trial);
                accepted_value = value;
                break;
            }
        }
        if (!accepted) {
            out.converged = true;
            break;
        }
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) move = std::max(move, std::abs((*accepted)[i] - alphas[i]));
        alphas = std::move(*accepted);
        current = accepted_value;
        step = std::min(2.0 * step, config.pgd_step);
        if (move < config.pgd_tol) {
            out.converged = true;
            ++out.iterations;
            break;
        }
    }
    const auto final_breakdown = objective.evaluate(alphas);
    out.alphas = std::move(alphas);
    out.throughput = final_breakdown.throughput;
    out.outage = final_breakdown.p_out_unreliable;
    return out;
}

namespace {

HarqPolicy with_rates(const HarqPolicy& base, std::vector<double> rhos, std::vector<double> alphas) {
    HarqPolicy p = base;
    p.rhos = std::move(rhos);
    p.alphas = std::move(alphas);
    return p;
}

FeedbackErrorRates rates_for(std::span<const double> alphas, double fb_snr_db) {
    return error_rates_for(FeedbackSpec::from_db(fb_snr_db, {alphas.begin(), alphas.end()}));
}

// Raises every threshold by the smallest common shift that lets some grid
// rate vector meet the outage limit.
std::vector<double> lift_thresholds(std::vector<double> alphas, double fb_snr_db, const FailureTable& table,
                                    const RateGrid& grid, int m_max, const OptimizerConfig& config) {
    const auto floor_at = [&](double t) {
        std::vector<double> a = alphas;
        for (auto& x : a) x = std::min(x + t, config.alpha_hi);
        return minimum_outage_allocation(rates_for(a, fb_snr_db), table, grid, m_max).outage;
    };
    if (alphas.empty() || floor_at(0.0) <= config.epsilon) return alphas;
    const double reach = config.alpha_hi - *std::min_element(alphas.begin(), alphas.end());
    if (const double best = floor_at(reach); best > config.epsilon) {
        throw InfeasibleError("outage limit " + std::to_string(config.epsilon) +
                                  " is below the minimum achievable outage " + std::to_string(best) +
                                  " even at the largest thresholds",
                              best);
    }
    double lo = 0.0;
    double hi = reach;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (floor_at(mid) <= config.epsilon ? hi : lo) = mid;
    }
    for (auto& x : alphas) x = std::min(x + hi, config.alpha_hi);
    return alphas;
}

struct StartPoint {
    std::vector<double> rhos;
    std::vector<double> alphas;
};

// Coarse scan of common thresholds with rates optimised for each; the
// alternating iteration started at the threshold floor tends to stall.
std::optional<StartPoint> best_common_threshold(double fb_snr_db, const FailureTable& table,
                                                const RateGrid& grid, int m_max, const OptimizerConfig& config) {
    const int points = config.init_scan_points;
    if (points < 2 || m_max < 2) return std::nullopt;
    std::optional<StartPoint> best;
    double best_throughput = -1.0;
    for (int i = 0; i < points; ++i) {
        const double alpha = config.alpha_lo + (config.alpha_hi - config.alpha_lo) * i / (points - 1);
        const std::vector<double> alphas(static_cast<std::size_t>(m_max - 1), alpha);
        const auto rates = rates_for(alphas, fb_snr_db);
        try {
            const LambdaSolution sol = solve_lambda(rates, table, grid, m_max, config);
            const double eta = (1.0 - sol.allocation.outage) / sol.allocation.expected_cost;
            if (eta > best_throughput) {
                best_throughput = eta;
                best = StartPoint{sol.allocation.rhos, alphas};
            }
        } catch (const InfeasibleError&) {
        }
    }
    return best;
}

Solution finish(const HarqPolicy& policy, const DownlinkSpec& dl, const FeedbackErrorRates& rates,
                const OptimizerConfig& config, double lambda_star) {
    Solution s;
    s.policy = policy;
    s.lambda_star = lambda_star;
    s.breakdown = evaluate_policy(policy, dl, rates);
    s.feasible = s.breakdown.p_out_unreliable <= config.epsilon * (1.0 + 1e-6);
    return s;
}

}  // namespace

namespace {

Solution alternate_from(HarqPolicy policy, const DownlinkSpec& dl, double fb_snr_db, const FailureTable& table,
                        const RateGrid& grid, const OptimizerConfig& config) {
    const int m = policy.m_max;
    const double fb_snr_linear = std::pow(10.0, fb_snr_db / 10.0);
    const auto throughput_of = [&](const HarqPolicy& p) {
        return evaluate_policy(p, dl, rates_for(p.alphas, fb_snr_db));
    };
    double previous = -std::numeric_limits<double>::infinity();
    if (const auto b = throughput_of(policy); b.p_out_unreliable <= config.epsilon) previous = b.throughput;

    Solution out;
    double lambda_star = 0.0;
    for (int iteration = 1; iteration <= config.alt_max_iters; ++iteration) {
        try {
            policy.alphas = lift_thresholds(policy.alphas, fb_snr_db, table, grid, m, config);
            const auto rates = rates_for(policy.alphas, fb_snr_db);
            const LambdaSolution step3 = solve_lambda(rates, table, grid, m, config);
            HarqPolicy candidate = with_rates(policy, step3.allocation.rhos, policy.alphas);
            const auto current = throughput_of(policy);
            const bool current_feasible = current.p_out_unreliable <= config.epsilon;
            if (!current_feasible || throughput_of(candidate).throughput >= current.throughput) {
                policy = std::move(candidate);
                lambda_star = step3.lambda_star;
            }
            const ThresholdSolution step4 = optimize_thresholds_pgd(policy, dl, fb_snr_linear, config, policy.alphas);
            policy.alphas = step4.alphas;
        } catch (const InfeasibleError& e) {
            throw InfeasibleError("alternating_optimize iteration " + std::to_string(iteration) + ": " + e.what(),
                                  e.min_outage());
        }
        const double objective = throughput_of(policy).throughput;
        out.objective_trace.push_back(objective);
        out.iterations = iteration;
        if (objective - previous < config.alt_tol) {
            out.converged = true;
            break;
        }
        previous = objective;
    }

    Solution done = finish(policy, dl, rates_for(policy.alphas, fb_snr_db), config, lambda_star);
    done.iterations = out.iterations;
    done.converged = out.converged;
    done.objective_trace = std::move(out.objective_trace);
    return done;
}

}  // namespace

Solution alternating_optimize(const DownlinkSpec& dl, double fb_snr_db, const HarqPolicy& policy_template,
                              const OptimizerConfig& config) {
    const int m = policy_template.m_max;
    config.validate(m);
    const RateGrid grid = RateGrid::for_policy(policy_template, config.units_total);
    const FailureTable table(dl, grid);

    if (config.warm_start) {
        HarqPolicy policy = policy_template;
        policy.validate();
        return alternate_from(std::move(policy), dl, fb_snr_db, table, grid, config);
    }

    const int u = std::clamp(config.units_total / (2 * m), grid.min_units, grid.max_units);
    HarqPolicy uniform = with_rates(policy_template, std::vector<double>(static_cast<std::size_t>(m), grid.rho(u)),
                                    std::vector<double>(static_cast<std::size_t>(m - 1), config.init_alpha));
    uniform.validate();
    std::optional<Solution> best;
    std::optional<InfeasibleError> first_error;
    const auto attempt = [&](const HarqPolicy& start) {
        try {
            Solution s = alternate_from(start, dl, fb_snr_db, table, grid, config);
            if (!best || (s.feasible && (!best->feasible || s.breakdown.throughput > best->breakdown.throughput))) {
                best = std::move(s);
            }
        } catch (const InfeasibleError& e) {
            if (!first_error) first_error = e;
        }
    };
    attempt(uniform);
    if (const auto scan = best_common_threshold(fb_snr_db, table, grid, m, config)) {
        attempt(with_rates(policy_template, scan->rhos, scan->alphas));
    }
    if (!best) throw *first_error;
    return std::move(*best);
}

Solution optimize_rates_fixed_alphas(const DownlinkSpec& dl, double fb_snr_db, const HarqPolicy& policy_template,
                                     std::span<const double> alphas, const OptimizerConfig& config) {
    const int m = policy_template.m_max;
    config.validate(m);
    require(alphas.size() + 1 == static_cast<std::size_t>(m), "optimize_rates_fixed_alphas: need M-1 thresholds");
    const RateGrid grid = RateGrid::for_policy(policy_template, config.units_total);
    const auto rates = rates_for(alphas, fb_snr_db);
    const LambdaSolution sol = solve_lambda(rates, FailureTable(dl, grid), grid, m, config);
    Solution out = finish(with_rates(policy_template, sol.allocation.rhos, {alphas.begin(), alphas.end()}), dl, rates,
                          config, sol.lambda_star);
    out.iterations = 1;
    out.converged = true;
    out.objective_trace = {out.breakdown.throughput};
    return out;
}

Solution optimize_duplicated_ack(const DownlinkSpec& dl, double fb_snr_db, const HarqPolicy& policy_template,
                                 const OptimizerConfig& config) {
    const int m = policy_template.m_max;
    config.validate(m);
    const RateGrid grid = RateGrid::for_policy(policy_template, config.units_total);
    const std::vector<double> symmetric(static_cast<std::size_t>(m - 1), 0.0);
    const auto rates = duplicated_ack_rates(rates_for(symmetric, fb_snr_db));
    const LambdaSolution sol = solve_lambda(rates, FailureTable(dl, grid), grid, m, config);
    Solution out = finish(with_rates(policy_template, sol.allocation.rhos, symmetric), dl, rates, config,
                          sol.lambda_star);
    out.iterations = 1;
    out.converged = true;
    out.objective_trace = {out.breakdown.throughput};
    return out;
}

ThresholdComparison compare_fixed_and_variable(const DownlinkSpec& dl, double fb_snr_db,
                                               const HarqPolicy& policy_template, const OptimizerConfig& config,
                                               int points) {
    require(points >= 2, "compare_fixed_and_variable: need at least 2 scan points");
    const auto rounds = static_cast<std::size_t>(policy_template.m_max - 1);
    ThresholdComparison out;
    for (int i = 0; i < points; ++i) {
        const double alpha = config.alpha_lo + (config.alpha_hi - config.alpha_lo) * i / (points - 1);
        const std::vector<double> alphas(rounds, alpha);
        try {
            Solution s = optimize_rates_fixed_alphas(dl, fb_snr_db, policy_template, alphas, config);
            if (!out.fixed_feasible || s.breakdown.throughput > out.best_fixed.breakdown.throughput) {
                out.best_fixed = std::move(s);
                out.best_fixed_alpha = alpha;
                out.fixed_feasible = true;
            }
        } catch (const InfeasibleError&) {
        }
    }
    if (out.fixed_feasible) {
        OptimizerConfig warm = config;
        warm.warm_start = true;
        out.variable = alternating_optimize(dl, fb_snr_db, out.best_fixed.policy, warm);
    } else {
        out.variable = alternating_optimize(dl, fb_snr_db, policy_template, config);
    }
    return out;
}

}  // namespace harqopt
