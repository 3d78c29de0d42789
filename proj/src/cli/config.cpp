#include "harqopt/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace harqopt::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> items;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        items.push_back(trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

template <typename T>
T parse_number(std::string_view text, const std::string& key) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw ConfigError(key + ": cannot read '" + std::string(text) + "' as a number");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ConfigError(key + ": value must be finite");
    }
    return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, const std::string& key) {
    std::vector<T> out;
    for (auto item : split_list(text)) out.push_back(parse_number<T>(item, key));
    return out;
}

template <typename E>
E parse_enum(std::string_view text, const std::string& key, const std::vector<std::pair<std::string_view, E>>& names) {
    for (const auto& [name, value] : names) {
        if (text == name) return value;
    }
    std::string allowed;
    for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    throw ConfigError(key + ": '" + std::string(text) + "' is not one of " + allowed);
}

bool parse_bool(std::string_view text, const std::string& key) {
    return parse_enum<bool>(text, key, {{"true", true}, {"false", false}, {"1", true}, {"0", false}});
}

struct Explicit {
    bool n_m = false;
    bool rho_max_units = false;
};

using Setter = std::function<void(RunConfig&, Explicit&, std::string_view, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"snr_d_db", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.snr_d_db = parse_number<double>(v, k); }},
        {"snr_u_db", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.snr_u_db = parse_number<double>(v, k); }},
        {"m_max", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.m_max = parse_number<int>(v, k); }},
        {"n_b", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.n_b = parse_number<int>(v, k); }},
        {"n_m", [](RunConfig& c, Explicit& e, std::string_view v, const std::string& k) { c.n_m = parse_number<int>(v, k); e.n_m = true; }},
        {"units_total", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.units_total = parse_number<int>(v, k); }},
        {"epsilon", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.epsilon = parse_number<double>(v, k); }},
        {"rho_min_units", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.rho_min_units = parse_number<int>(v, k); }},
        {"rho_max_units", [](RunConfig& c, Explicit& e, std::string_view v, const std::string& k) { c.rho_max_units = parse_number<int>(v, k); e.rho_max_units = true; }},
        {"alphas", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.alphas = parse_list<double>(v, k); }},
        {"rhos_units", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.rhos_units = parse_list<int>(v, k); }},
        {"model.failure", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) {
             c.failure_model = parse_enum<FailureModel>(v, k, {{"gaussian", FailureModel::gaussian}, {"convolution", FailureModel::convolution}});
         }},
        {"model.bins", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.bins = parse_number<std::size_t>(v, k); }},
        {"mc.n_episodes", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.n_episodes = parse_number<std::uint64_t>(v, k); }},
        {"mc.seed", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.seed = parse_number<std::uint64_t>(v, k); }},
        {"mc.feedback_mode", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) {
             c.feedback_mode = parse_enum<FeedbackMode>(v, k, {{"analytic_flip", FeedbackMode::analytic_flip}, {"symbol_level", FeedbackMode::symbol_level}});
         }},
        {"sweep.axis", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) {
             c.sweep_axis = parse_enum<SweepAxis>(v, k, {{"snr_u_db", SweepAxis::snr_u_db}, {"snr_d_db", SweepAxis::snr_d_db}, {"alpha", SweepAxis::alpha}});
         }},
        {"sweep.values", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.sweep_values = parse_list<double>(v, k); }},
        {"sweep.report", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) {
             c.sweep_report = parse_enum<SweepReport>(v, k, {{"performance", SweepReport::performance}, {"min_outage", SweepReport::min_outage},
                                                            {"duplicated_ack", SweepReport::duplicated_ack}, {"fixed_vs_variable", SweepReport::fixed_vs_variable}});
         }},
        {"sweep.alphas", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.sweep_alphas = parse_list<double>(v, k); }},
        {"sweep.fixed_alpha_points", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.fixed_alpha_points = parse_number<int>(v, k); }},
        {"optimizer.lambda_lo", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.lambda_lo = parse_number<double>(v, k); }},
        {"optimizer.lambda_hi", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.lambda_hi = parse_number<double>(v, k); }},
        {"optimizer.lambda_tol", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.lambda_tol = parse_number<double>(v, k); }},
        {"optimizer.pgd_step", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.pgd_step = parse_number<double>(v, k); }},
        {"optimizer.pgd_tol", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.pgd_tol = parse_number<double>(v, k); }},
        {"optimizer.pgd_max_iters", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.pgd_max_iters = parse_number<int>(v, k); }},
        {"optimizer.alpha_lo", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.alpha_lo = parse_number<double>(v, k); }},
        {"optimizer.alpha_hi", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.alpha_hi = parse_number<double>(v, k); }},
        {"optimizer.alt_max_iters", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.alt_max_iters = parse_number<int>(v, k); }},
        {"optimizer.alt_tol", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.alt_tol = parse_number<double>(v, k); }},
        {"optimizer.init_alpha", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.init_alpha = parse_number<double>(v, k); }},
        {"optimizer.init_scan_points", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.init_scan_points = parse_number<int>(v, k); }},
        {"optimizer.warm_start", [](RunConfig& c, Explicit&, std::string_view v, const std::string& k) { c.optimizer.warm_start = parse_bool(v, k); }},
    };
    return table;
}

void check(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

const std::vector<std::string>& accepted_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, setter] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

RunConfig parse_config(std::string_view text, std::string_view source) {
    RunConfig config;
    Explicit given;
    std::map<std::string, int> seen;
    std::istringstream lines{std::string(text)};
    std::string raw;
    for (int line_no = 1; std::getline(lines, raw); ++line_no) {
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        const auto& table = setters();
        const auto it = std::find_if(table.begin(), table.end(), [&](const auto& entry) { return entry.first == key; });
        if (it == table.end()) {
            std::string list;
            for (const auto& k : accepted_keys()) list += (list.empty() ? "" : ", ") + k;
            throw ConfigError(where + "unknown key '" + key + "'; accepted keys: " + list);
        }
        if (const auto [prev, inserted] = seen.emplace(key, line_no); !inserted) {
            throw ConfigError(where + "'" + key + "' already set on line " + std::to_string(prev->second));
        }
        try {
            it->second(config, given, value, key);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }

    if (!given.n_m) config.n_m = 4 * config.n_b;
    if (!given.rho_max_units) config.rho_max_units = config.units_total;
    if (config.m_max >= 1) {
        const auto m = static_cast<std::size_t>(config.m_max);
        if (config.alphas.empty()) config.alphas.assign(m - 1, config.optimizer.init_alpha);
        if (config.rhos_units.empty()) {
            config.rhos_units.assign(m, std::clamp(config.units_total / (2 * config.m_max), std::max(config.rho_min_units, 1),
                                                   std::max(config.rho_max_units, 1)));
        }
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open configuration file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

void validate(const RunConfig& c) {
    check(c.m_max >= 1, "m_max must be >= 1");
    check(c.n_b >= 1, "n_b must be >= 1");
    check(c.n_m >= c.n_b, "n_m must be >= n_b");
    check(c.units_total >= c.m_max && c.units_total <= 256, "units_total must be in [m_max, 256]");
    check(c.epsilon > 0.0 && c.epsilon < 1.0, "epsilon must be in (0, 1)");
    check(c.rho_min_units >= 1 && c.rho_min_units <= c.rho_max_units, "rho_min_units must be in [1, rho_max_units]");
    check(c.rho_max_units <= c.units_total, "rho_max_units must be <= units_total");
    check(c.rho_min_units * c.m_max <= c.units_total, "rho_min_units * m_max must be <= units_total");
    const auto m = static_cast<std::size_t>(c.m_max);
    check(c.alphas.size() + 1 == m, "alphas must have m_max - 1 entries");
    check(c.rhos_units.size() == m, "rhos_units must have m_max entries");
    int total = 0;
    for (int u : c.rhos_units) {
        check(u >= c.rho_min_units && u <= c.rho_max_units, "rhos_units entries must be in [rho_min_units, rho_max_units]");
        total += u;
    }
    check(total <= c.units_total, "rhos_units must sum to <= units_total");
    check(c.bins >= 256, "model.bins must be >= 256");
    check(c.n_episodes >= kMinEpisodes, "mc.n_episodes must be >= " + std::to_string(kMinEpisodes));
    check(c.fixed_alpha_points >= 2, "sweep.fixed_alpha_points must be >= 2");
    check(c.workers >= 0, "workers must be >= 0");
    try {
        c.optimizer_config().validate(c.m_max);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

DownlinkSpec RunConfig::downlink() const { return make_downlink_spec(snr_d_db); }

FeedbackSpec RunConfig::feedback() const { return FeedbackSpec::from_db(snr_u_db, alphas); }

HarqPolicy RunConfig::policy() const {
    const RateGrid grid = RateGrid::make(n_b, n_m, units_total, rho_min_units, rho_max_units);
    HarqPolicy p;
    p.m_max = m_max;
    p.n_b = n_b;
    p.n_m = n_m;
    p.rho_min = grid.rho(rho_min_units);
    p.rho_max = grid.rho(rho_max_units);
    p.rhos = grid.rhos(rhos_units);
    p.alphas = alphas;
    return p;
}

OptimizerConfig RunConfig::optimizer_config() const {
    OptimizerConfig o = optimizer;
    o.epsilon = epsilon;
    o.units_total = units_total;
    return o;
}

}  // namespace harqopt::cli
