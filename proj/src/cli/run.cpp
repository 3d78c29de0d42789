#include "harqopt/cli/run.hpp"

#include <omp.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

namespace harqopt::cli {

namespace {

using Cells = std::vector<std::string>;

void append(Cells& to, const Cells& from) { to.insert(to.end(), from.begin(), from.end()); }

Cells format_all(std::span<const double> values) {
    Cells out;
    for (double v : values) out.push_back(format_value(v));
    return out;
}

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::snr_u_db: return "snr_u_db";
        case SweepAxis::snr_d_db: return "snr_d_db";
        case SweepAxis::alpha: return "alpha";
    }
    return "";
}

const char* mode_name(FeedbackMode mode) {
    return mode == FeedbackMode::analytic_flip ? "analytic_flip" : "symbol_level";
}

double sum_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

// Policy and breakdown columns shared by analyze, optimize and sweep.
Cells breakdown_header(std::size_t m) {
    Cells h{"snr_d_db", "snr_u_db"};
    append(h, numbered("rho", m));
    append(h, numbered("alpha", m - 1));
    append(h, numbered("p_fail", m));
    append(h, numbered("p_occur", m));
    append(h, numbered("p_out_stage", m));
    append(h, {"p_out_unreliable", "p_out_reliable", "expected_symbols", "throughput", "mean_mi"});
    return h;
}

Cells breakdown_cells(const RunConfig& c, const HarqPolicy& policy, const PerformanceBreakdown& b,
                      const DownlinkSpec& dl) {
    Cells row{format_value(c.snr_d_db), format_value(c.snr_u_db)};
    append(row, format_all(policy.rhos));
    append(row, format_all(policy.alphas));
    append(row, format_all(b.p_fail));
    append(row, format_all(b.p_occur));
    append(row, format_all(b.p_out_stage));
    append(row, {format_value(b.p_out_unreliable), format_value(b.p_out_reliable), format_value(b.expected_symbols),
                 format_value(b.throughput), format_value(dl.mean_mi)});
    return row;
}

Cells simulation_header(std::size_t m) {
    Cells h{"n_episodes", "seed", "feedback_mode", "mc_throughput", "mc_throughput_se", "mc_p_out", "mc_p_out_se"};
    append(h, numbered("mc_p_occur", m));
    append(h, numbered("mc_p_occur_se", m));
    append(h, numbered("mc_p_fail", m));
    append(h, numbered("mc_p_fail_se", m));
    h.push_back("mc_mean_symbols");
    return h;
}

Cells simulation_cells(const RunConfig& c, const SimulationEstimate& e) {
    Cells row{format_value(e.n_episodes), format_value(e.seed), mode_name(c.feedback_mode), format_value(e.throughput),
              format_value(e.throughput_se), format_value(e.p_out), format_value(e.p_out_se)};
    append(row, format_all(e.p_occur));
    append(row, format_all(e.p_occur_se));
    append(row, format_all(e.p_fail));
    append(row, format_all(e.p_fail_se));
    row.push_back(format_value(e.mean_symbols));
    return row;
}

PerformanceBreakdown analyse(const RunConfig& c, const HarqPolicy& policy, const DownlinkSpec& dl) {
    return unreliable_throughput(policy, dl, c.feedback(), c.failure_model);
}

SimulationEstimate simulate(const RunConfig& c, const HarqPolicy& policy, const DownlinkSpec& dl) {
    return estimate_performance(policy, dl, c.feedback(), c.n_episodes, c.seed, c.feedback_mode);
}

RunConfig at_sweep_value(RunConfig c, double value) {
    switch (c.sweep_axis) {
        case SweepAxis::snr_u_db: c.snr_u_db = value; break;
        case SweepAxis::snr_d_db: c.snr_d_db = value; break;
        case SweepAxis::alpha: std::fill(c.alphas.begin(), c.alphas.end(), value); break;
    }
    return c;
}

Cells sweep_header(const RunConfig& c) {
    const auto m = static_cast<std::size_t>(c.m_max);
    Cells h{axis_name(c.sweep_axis)};
    switch (c.sweep_report) {
        case SweepReport::performance:
            append(h, breakdown_header(m));
            append(h, simulation_header(m));
            break;
        case SweepReport::min_outage:
            for (double a : c.sweep_alphas) h.push_back("min_outage_alpha_" + format_value(a));
            break;
        case SweepReport::duplicated_ack:
            append(h, {"asym_feasible", "asym_throughput", "asym_outage", "dup_feasible", "dup_throughput", "dup_outage",
                       "throughput_gain"});
            append(h, numbered("asym_alpha", m - 1));
            append(h, numbered("asym_rho", m));
            append(h, numbered("dup_rho", m));
            break;
        case SweepReport::fixed_vs_variable:
            append(h, {"fixed_feasible", "best_fixed_alpha", "fixed_throughput", "fixed_outage", "variable_throughput",
                       "variable_outage", "throughput_gain"});
            append(h, numbered("variable_alpha", m - 1));
            append(h, numbered("variable_rho", m));
            break;
    }
    return h;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Cells sweep_cells(const RunConfig& base, double value) {
    const RunConfig c = at_sweep_value(base, value);
    const auto m = static_cast<std::size_t>(c.m_max);
    const DownlinkSpec dl = c.downlink();
    const HarqPolicy policy = c.policy();
    Cells row{format_value(value)};
    switch (c.sweep_report) {
        case SweepReport::performance: {
            append(row, breakdown_cells(c, policy, analyse(c, policy, dl), dl));
            append(row, simulation_cells(c, simulate(c, policy, dl)));
            break;
        }
        case SweepReport::min_outage: {
            const RateGrid grid = RateGrid::for_policy(policy, c.units_total);
            const FailureTable table(dl, grid);
            for (double a : c.sweep_alphas) {
                const auto rates = error_rates_for(FeedbackSpec::from_db(c.snr_u_db, std::vector<double>(m - 1, a)));
                row.push_back(format_value(minimum_outage_allocation(rates, table, grid, c.m_max).outage));
            }
            break;
        }
        case SweepReport::duplicated_ack: {
            const OptimizerConfig oc = c.optimizer_config();
            std::optional<Solution> asym;
            std::optional<Solution> baseline;
            try {
                asym = compare_fixed_and_variable(dl, c.snr_u_db, policy, oc, c.fixed_alpha_points).variable;
            } catch (const InfeasibleError& e) {
                spdlog::info("asymmetric detection infeasible at {} = {}: {}", axis_name(c.sweep_axis), value, e.what());
            }
            try {
                baseline = optimize_duplicated_ack(dl, c.snr_u_db, policy, oc);
            } catch (const InfeasibleError& e) {
                spdlog::info("duplicated ACK infeasible at {} = {}: {}", axis_name(c.sweep_axis), value, e.what());
            }
            const auto eta = [](const std::optional<Solution>& s) { return s ? s->breakdown.throughput : kNaN; };
            const auto out = [](const std::optional<Solution>& s) { return s ? s->breakdown.p_out_unreliable : kNaN; };
            append(row, {format_value(asym.has_value()), format_value(eta(asym)), format_value(out(asym)),
                         format_value(baseline.has_value()), format_value(eta(baseline)), format_value(out(baseline)),
                         format_value(eta(asym) - eta(baseline))});
            append(row, asym ? format_all(asym->policy.alphas) : format_all(std::vector<double>(m - 1, kNaN)));
            append(row, asym ? format_all(asym->policy.rhos) : format_all(std::vector<double>(m, kNaN)));
            append(row, baseline ? format_all(baseline->policy.rhos) : format_all(std::vector<double>(m, kNaN)));
            break;
        }
        case SweepReport::fixed_vs_variable: {
            const ThresholdComparison cmp =
                compare_fixed_and_variable(dl, c.snr_u_db, policy, c.optimizer_config(), c.fixed_alpha_points);
            const double fixed_eta = cmp.fixed_feasible ? cmp.best_fixed.breakdown.throughput : kNaN;
            const double fixed_out = cmp.fixed_feasible ? cmp.best_fixed.breakdown.p_out_unreliable : kNaN;
            append(row, {format_value(cmp.fixed_feasible), format_value(cmp.fixed_feasible ? cmp.best_fixed_alpha : kNaN),
                         format_value(fixed_eta), format_value(fixed_out), format_value(cmp.variable.breakdown.throughput),
                         format_value(cmp.variable.breakdown.p_out_unreliable),
                         format_value(cmp.variable.breakdown.throughput - fixed_eta)});
            append(row, format_all(cmp.variable.policy.alphas));
            append(row, format_all(cmp.variable.policy.rhos));
            break;
        }
    }
    return row;
}

void add_validation_row(ValidationTable& v, const std::string& quantity, double analytic, double gaussian, double mc,
                        double se) {
    double z = 0.0;
    if (se > 0.0) {
        z = (mc - analytic) / se;
    } else if (std::abs(mc - analytic) > 1e-12) {
        z = std::numeric_limits<double>::infinity();
    }
    v.max_abs_z = std::max(v.max_abs_z, std::abs(z));
    v.table.add_row({quantity, format_value(analytic), format_value(gaussian), format_value(mc), format_value(se),
                     format_value(z)});
}

void write_to(const std::string& path, const CsvTable& table) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open output file " + path);
    table.write(file);
}

std::string trace_path(const std::string& output_path) {
    std::filesystem::path p(output_path);
    return (p.parent_path() / (p.stem().string() + "_trace.csv")).string();
}

void configure_logging() {
    auto logger = spdlog::stderr_logger_mt("harqopt");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("HARQOPT_LOG")) {
        const auto parsed = spdlog::level::from_str(level);
        // from_str maps unknown names to off; only accept "off" when asked for.
        if (parsed != spdlog::level::off || std::string_view(level) == "off") {
            spdlog::set_level(parsed);
        } else {
            spdlog::warn("HARQOPT_LOG='{}' is not a log level; using warn", level);
        }
    }
}

}  // namespace

CsvTable analyze_table(const RunConfig& config) {
    const DownlinkSpec dl = config.downlink();
    const HarqPolicy policy = config.policy();
    CsvTable table(breakdown_header(policy.rounds()));
    table.add_row(breakdown_cells(config, policy, analyse(config, policy, dl), dl));
    return table;
}

OptimizeTables optimize_tables(const RunConfig& config) {
    const DownlinkSpec dl = config.downlink();
    const HarqPolicy policy = config.policy();
    const Solution s = alternating_optimize(dl, config.snr_u_db, policy, config.optimizer_config());
    const std::size_t m = policy.rounds();

    Cells header{"feasible", "converged", "iterations", "lambda_star", "sum_rho"};
    append(header, breakdown_header(m));
    OptimizeTables out{CsvTable(header), CsvTable({"iteration", "throughput"})};
    Cells row{format_value(s.feasible), format_value(s.converged), format_value(s.iterations),
              format_value(s.lambda_star), format_value(sum_of(s.policy.rhos))};
    append(row, breakdown_cells(config, s.policy, s.breakdown, dl));
    out.solution.add_row(row);
    for (std::size_t i = 0; i < s.objective_trace.size(); ++i) {
        out.trace.add_row({format_value(static_cast<int>(i + 1)), format_value(s.objective_trace[i])});
    }
    spdlog::info("optimize: throughput {} after {} iterations", s.breakdown.throughput, s.iterations);
    return out;
}

CsvTable simulate_table(const RunConfig& config) {
    const DownlinkSpec dl = config.downlink();
    const HarqPolicy policy = config.policy();
    CsvTable table(simulation_header(policy.rounds()));
    table.add_row(simulation_cells(config, simulate(config, policy, dl)));
    return table;
}

ValidationTable validate_table(const RunConfig& config) {
    const DownlinkSpec dl = config.downlink();
    const HarqPolicy policy = config.policy();
    const FeedbackSpec fb = config.feedback();
    const auto rates = error_rates_for(fb);
    const auto exact = evaluate_policy(policy, p_fail_convolution(policy.rhos, dl, config.bins), rates);
    const auto approx = evaluate_policy(policy, p_fail_gaussian(policy.rhos, dl), rates);
    const SimulationEstimate mc = simulate(config, policy, dl);

    ValidationTable v{CsvTable({"quantity", "analytic", "gaussian", "monte_carlo", "stderr", "z"}), 0.0};
    for (std::size_t k = 0; k < policy.rounds(); ++k) {
        add_validation_row(v, "p_fail_" + std::to_string(k + 1), exact.p_fail[k], approx.p_fail[k], mc.p_fail[k],
                           mc.p_fail_se[k]);
    }
    for (std::size_t i = 0; i < policy.rounds(); ++i) {
        add_validation_row(v, "p_occur_" + std::to_string(i + 1), exact.p_occur[i], approx.p_occur[i], mc.p_occur[i],
                           mc.p_occur_se[i]);
    }
    add_validation_row(v, "p_out_unreliable", exact.p_out_unreliable, approx.p_out_unreliable, mc.p_out, mc.p_out_se);
    add_validation_row(v, "throughput", exact.throughput, approx.throughput, mc.throughput, mc.throughput_se);
    return v;
}

CsvTable sweep_table(const RunConfig& config) {
    if (config.sweep_values.empty()) throw ConfigError("sweep.values must list at least one value");
    if (config.sweep_report != SweepReport::performance && config.sweep_axis == SweepAxis::alpha) {
        throw ConfigError("sweep.axis = alpha only supports sweep.report = performance");
    }
    CsvTable table(sweep_header(config));
    const auto n = static_cast<std::int64_t>(config.sweep_values.size());
    std::vector<Cells> rows(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    const int workers = config.workers > 0 ? config.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            rows[k] = sweep_cells(config, config.sweep_values[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (errors[k]) std::rethrow_exception(errors[k]);
        table.add_row(std::move(rows[k]));
    }
    return table;
}

int run(const RunConfig& config, std::ostream& out) {
    const auto emit = [&](const CsvTable& table) {
        if (config.output_path.empty()) {
            table.write(out);
        } else {
            write_to(config.output_path, table);
        }
    };
    switch (config.command) {
        case Command::analyze: emit(analyze_table(config)); return kExitOk;
        case Command::optimize: {
            const OptimizeTables t = optimize_tables(config);
            emit(t.solution);
            if (!config.output_path.empty()) write_to(trace_path(config.output_path), t.trace);
            return kExitOk;
        }
        case Command::simulate: emit(simulate_table(config)); return kExitOk;
        case Command::validate: {
            const ValidationTable v = validate_table(config);
            emit(v.table);
            if (v.max_abs_z > kValidationZLimit) {
                spdlog::error("validate: largest |z| = {} exceeds {}", v.max_abs_z, kValidationZLimit);
                return kExitValidationTripped;
            }
            return kExitOk;
        }
        case Command::sweep: emit(sweep_table(config)); return kExitOk;
    }
    return kExitFailure;
}

int main_entry(int argc, char** argv) {
    configure_logging();
    CLI::App app{"IR-HARQ analysis and optimisation with asymmetric ACK/NACK detection", "harqopt"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    int workers = 0;
    const std::vector<std::pair<std::string, Command>> commands = {
        {"analyze", Command::analyze},   {"optimize", Command::optimize}, {"simulate", Command::simulate},
        {"validate", Command::validate}, {"sweep", Command::sweep},
    };
    for (const auto& [name, command] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
        sub->add_option("--out", out_path, "CSV output path (default: stdout)");
        sub->add_option("--workers", workers, "sweep worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        RunConfig config = load_config(config_path);
        for (const auto& [name, command] : commands) {
            if (app.got_subcommand(name)) config.command = command;
        }
        if (seed) config.seed = *seed;
        config.output_path = out_path;
        config.workers = workers;
        return run(config, std::cout);
    } catch (const InfeasibleError& e) {
        spdlog::error("infeasible: {}", e.what());
        std::cerr << "harqopt: infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const Error& e) {
        std::cerr << "harqopt: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "harqopt: internal error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace harqopt::cli
