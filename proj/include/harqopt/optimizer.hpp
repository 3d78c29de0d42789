#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "harqopt/feedback_model.hpp"
#include "harqopt/harq_analysis.hpp"
#include "harqopt/mi_model.hpp"

namespace harqopt {

struct OptimizerConfig {
    double epsilon = 0.01;  ///< outage limit
    int units_total = 64;   ///< mother code split into this many transmission units
    double lambda_lo = 0.0;
    double lambda_hi = 1e6;
    double lambda_tol = 1e-6;  ///< bracket width, relative to max(1, lambda_hi)
    double pgd_step = 1.0;
    double pgd_tol = 1e-6;
    int pgd_max_iters = 200;
    double alpha_lo = 0.0;
    double alpha_hi = 3.0;
    int alt_max_iters = 50;
    double alt_tol = 1e-9;
    double init_alpha = 0.5;
    bool warm_start = false;  ///< start from the template's rhos/alphas instead of the uniform default
    int init_scan_points = 16;  ///< second cold start: best of this many common thresholds; < 2 skips it

    /// Throws DomainError naming the offending field.
    void validate(int m_max) const;
};

/// Discretisation of the per-round rate into mother-code units.
struct RateGrid {
    double unit_rho = 0.0;  ///< N_m / (units_total N_b)
    int units_total = 0;
    int min_units = 1;
    int max_units = 0;

    static RateGrid make(int n_b, int n_m, int units_total, int min_units, int max_units);
    /// Grid implied by the template's rho_min / rho_max.
    static RateGrid for_policy(const HarqPolicy& policy, int units_total);

    double rho(int units) const noexcept { return unit_rho * units; }
    std::vector<double> rhos(std::span<const int> units) const;
};

/// A point on the rate grid with its Lagrangian parts.
struct Allocation {
    std::vector<int> units;
    std::vector<double> rhos;
    double value = 0.0;          ///< cost_weight * expected_cost + outage_weight * outage
    double expected_cost = 0.0;  ///< sum_i rho_i P_i
    double outage = 0.0;         ///< P_out^un
};

/// Gaussian P_f keyed by (sum of units, sum of squared units). Every prefix
/// of every grid vector maps into this table, so it is built once per
/// downlink/grid and shared by all multiplier and threshold updates.
class FailureTable {
public:
    FailureTable(const DownlinkSpec& dl, const RateGrid& grid);

    /// Requires 1 <= sum_units <= units_total and sum_units <= sum_sq_units <= sum_units^2.
    double at(int sum_units, int sum_sq_units) const noexcept {
        return values_[offsets_[static_cast<std::size_t>(sum_units)] + static_cast<std::size_t>(sum_sq_units - sum_units)];
    }

private:
    std::vector<std::size_t> offsets_;  // start of each sum_units row
    std::vector<double> values_;
};

/// sum_i rho_i P_i + lambda P_out^un evaluated from scratch (Gaussian P_f).
Allocation evaluate_allocation(std::span<const int> units, double lambda, const FeedbackErrorRates& rates,
                               const DownlinkSpec& dl, const RateGrid& grid, double cost_weight = 1.0);

/// Exact minimiser of sum_i rho_i P_i + lambda P_out^un over the grid by
/// the backward recursion V(prefix) = min_u [rho_u P_next + V(prefix, u)].
/// Ties (within 1e-12 relative) prefer fewer total units, then the
/// lexicographically smaller unit vector. First-round subtrees run under OpenMP.
Allocation dp_rate_allocation(double lambda, const FeedbackErrorRates& rates, const DownlinkSpec& dl,
                              const RateGrid& grid, int m_max);
Allocation dp_rate_allocation(double lambda, const FeedbackErrorRates& rates, const FailureTable& table,
                              const RateGrid& grid, int m_max);

/// Single-threaded reference for dp_rate_allocation; identical result.
Allocation dp_rate_allocation_serial(double lambda, const FeedbackErrorRates& rates, const FailureTable& table,
                                     const RateGrid& grid, int m_max);

/// Grid vector with the smallest P_out^un (cost ignored except as a tie-break on units).
Allocation minimum_outage_allocation(const FeedbackErrorRates& rates, const FailureTable& table,
                                     const RateGrid& grid, int m_max);

/// Number of unit vectors on the grid; saturates at UINT64_MAX.
std::uint64_t count_allocations(const RateGrid& grid, int m_max);

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

/// Exhaustive enumeration, evaluating every candidate from scratch with
/// the analysis formulas. Throws SizeError above kBruteForceLimit candidates.
Allocation brute_force_rate_allocation(double lambda, const FeedbackErrorRates& rates, const DownlinkSpec& dl,
                                       const RateGrid& grid, int m_max);

struct LambdaProbe {
    double lambda;
    double outage;
};

struct LambdaSolution {
    Allocation allocation;
    double lambda_star = 0.0;
    std::vector<LambdaProbe> probes;  ///< in evaluation order
};

/// Bisection on the multiplier until the DP minimiser's outage sits in
/// [eps (1 - 1e-3), eps] or the bracket is narrower than lambda_tol. The
/// upper bracket doubles up to 20 times while still infeasible. The
/// returned allocation is always feasible; otherwise InfeasibleError with
/// the grid's minimum achievable outage.
LambdaSolution solve_lambda(const FeedbackErrorRates& rates, const FailureTable& table, const RateGrid& grid,
                            int m_max, const OptimizerConfig& config);
LambdaSolution solve_lambda(std::span<const double> alphas, const DownlinkSpec& dl, double fb_snr_linear,
                            const RateGrid& grid, int m_max, const OptimizerConfig& config);

struct ThresholdSolution {
    std::vector<double> alphas;
    double throughput = 0.0;
    double outage = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Projected gradient ascent of the throughput over alpha in
/// [alpha_lo, alpha_hi]^{M-1} subject to P_out^un <= eps, rates fixed.
///
/// Gradient: central differences with step 1e-4 (one-sided at the box).
/// Projection: an infeasible iterate is shifted uniformly towards larger
/// alpha, by bisection, to the constraint boundary (outage only falls as
/// alpha grows). Step halving (up to 30 times) on non-improvement; stops
/// when the accepted move is below pgd_tol or no step improves. Starts at
/// `start` (projected) or at alpha_lo when `start` is empty.
ThresholdSolution optimize_thresholds_pgd(const HarqPolicy& policy, const DownlinkSpec& dl, double fb_snr_linear,
                                          const OptimizerConfig& config, std::span<const double> start = {});

struct Solution {
    HarqPolicy policy;
    double lambda_star = 0.0;
    PerformanceBreakdown breakdown;
    int iterations = 0;
    bool converged = false;
    bool feasible = false;
    std::vector<double> objective_trace;  ///< throughput after each iteration
};

/// Alternates the multiplier-search rate allocation and the threshold
/// ascent until the throughput gain per iteration drops below alt_tol.
/// A new rate vector is taken only if it does not lower the throughput, so
/// the trace never decreases. InfeasibleError messages name the iteration.
/// Without warm_start it runs twice, from equal rates at init_alpha and from
/// the best of init_scan_points common thresholds, and keeps the better.
Solution alternating_optimize(const DownlinkSpec& dl, double fb_snr_db, const HarqPolicy& policy_template,
                              const OptimizerConfig& config);

/// Rates optimised for fixed thresholds (no threshold search); the fixed-alpha baseline.
Solution optimize_rates_fixed_alphas(const DownlinkSpec& dl, double fb_snr_db, const HarqPolicy& policy_template,
                                     std::span<const double> alphas, const OptimizerConfig& config);

/// Rates optimised for the duplicated-ACK scheme (alpha = 0, two ACKs to stop).
Solution optimize_duplicated_ack(const DownlinkSpec& dl, double fb_snr_db, const HarqPolicy& policy_template,
                                 const OptimizerConfig& config);

struct ThresholdComparison {
    bool fixed_feasible = false;
    double best_fixed_alpha = 0.0;  ///< common threshold of the best fixed-alpha solution
    Solution best_fixed;            ///< meaningful only if fixed_feasible
    Solution variable;
};

/// Scans `points` common thresholds evenly over [alpha_lo, alpha_hi] with
/// rates optimised for each, then runs the alternating optimisation warm
/// started from the best of them (cold start if none is feasible).
ThresholdComparison compare_fixed_and_variable(const DownlinkSpec& dl, double fb_snr_db,
                                               const HarqPolicy& policy_template, const OptimizerConfig& config,
                                               int points = 50);

}  // namespace harqopt
