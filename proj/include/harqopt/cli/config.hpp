#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "harqopt/errors.hpp"
#include "harqopt/feedback_model.hpp"
#include "harqopt/harq_analysis.hpp"
#include "harqopt/mc_simulator.hpp"
#include "harqopt/mi_model.hpp"
#include "harqopt/optimizer.hpp"

namespace harqopt::cli {

enum class Command { analyze, optimize, simulate, validate, sweep };
enum class SweepAxis { snr_u_db, snr_d_db, alpha };

enum class SweepReport {
    performance,        ///< analysis and simulation columns per point
    min_outage,         ///< smallest achievable outage for each common threshold
    duplicated_ack,     ///< optimised asymmetric detection vs the duplicated-ACK baseline
    fixed_vs_variable,  ///< best common threshold vs per-round thresholds
};

/// Bad configuration file or value; the message names the line or key.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

struct RunConfig {
    Command command = Command::analyze;

    double snr_d_db = 3.0;
    double snr_u_db = -10.0;
    int m_max = 4;
    int n_b = 1024;
    int n_m = 4096;
    int units_total = 64;
    double epsilon = 0.01;
    int rho_min_units = 1;
    int rho_max_units = 64;
    std::vector<double> alphas;  ///< M-1 entries
    std::vector<int> rhos_units;  ///< M entries

    FailureModel failure_model = FailureModel::gaussian;
    std::size_t bins = kDefaultConvolutionBins;

    std::uint64_t n_episodes = 100'000;
    std::uint64_t seed = 1;
    FeedbackMode feedback_mode = FeedbackMode::analytic_flip;

    SweepAxis sweep_axis = SweepAxis::snr_u_db;
    std::vector<double> sweep_values;
    SweepReport sweep_report = SweepReport::performance;
    std::vector<double> sweep_alphas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int fixed_alpha_points = 50;

    OptimizerConfig optimizer;

    std::string output_path;  ///< empty: stdout
    int workers = 0;          ///< 0: all cores

    DownlinkSpec downlink() const;
    FeedbackSpec feedback() const;
    HarqPolicy policy() const;
    OptimizerConfig optimizer_config() const;
};

/// Every key accepted in a configuration file, in documentation order.
const std::vector<std::string>& accepted_keys();

/// Parses `key = value` lines ('#' starts a comment, lists are comma
/// separated), applies defaults and validates. Throws ConfigError.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");

RunConfig load_config(const std::string& path);

/// Checks every field against its bound; the message names the key.
void validate(const RunConfig& config);

}  // namespace harqopt::cli
