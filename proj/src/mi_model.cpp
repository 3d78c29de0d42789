#include "harqopt/mi_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "harqopt/errors.hpp"
#include "harqopt/numerics.hpp"

namespace harqopt {

namespace {

constexpr double kVarianceTolerance = 1e-12;

void require_rates(std::span<const double> rhos) {
    if (rhos.empty()) throw DomainError("rate vector must be non-empty");
    for (double r : rhos) {
        if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("rates must be positive and finite");
    }
}

// CDF of rho * log2(1 + g snr) with g ~ Exp(1).
double round_mi_cdf(double x, double rho, double snr) {
    if (x <= 0.0) return 0.0;
    const double gain_threshold = std::expm1(x * std::numbers::ln2 / rho) / snr;
    return -std::expm1(-gain_threshold);
}

}  // namespace

DownlinkSpec make_downlink_spec(double snr_db) {
    if (!std::isfinite(snr_db)) throw DomainError("make_downlink_spec: snr_db must be finite");
    DownlinkSpec spec;
    spec.snr_db = snr_db;
    spec.snr_linear = std::pow(10.0, snr_db / 10.0);
    spec.mean_mi = std::numbers::log2e * numerics::scaled_exp_integral_e1(1.0 / spec.snr_linear);

    const double snr = spec.snr_linear;
    const double mean = spec.mean_mi;
    spec.var_mi = numerics::expect_rayleigh(
        [snr, mean](double g) {
            const double centred = std::log1p(g * snr) * std::numbers::log2e - mean;
            return centred * centred;
        },
        kVarianceTolerance);
    return spec;
}

double mi_of_gain(double gain, double rho, const DownlinkSpec& spec) {
    if (!(gain >= 0.0)) throw DomainError("mi_of_gain: gain must be non-negative");
    if (!(rho > 0.0)) throw DomainError("mi_of_gain: rho must be positive");
    return rho * std::log1p(gain * spec.snr_linear) * std::numbers::log2e;
}

double p_fail_gaussian(double sum_rho, double sum_rho_sq, const DownlinkSpec& spec) {
    const double sigma = std::sqrt(sum_rho_sq * spec.var_mi);
    return numerics::q_function((sum_rho * spec.mean_mi - 1.0) / sigma);
}

std::vector<double> p_fail_gaussian(std::span<const double> rhos, const DownlinkSpec& spec) {
    require_rates(rhos);
    std::vector<double> out;
    out.reserve(rhos.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double r : rhos) {
        sum += r;
        sum_sq += r * r;
        out.push_back(p_fail_gaussian(sum, sum_sq, spec));
    }
    return out;
}

std::vector<double> p_fail_convolution(std::span<const double> rhos, const DownlinkSpec& spec,
                                       std::size_t bins) {
    require_rates(rhos);
    if (bins < 256) throw GridError("p_fail_convolution: at least 256 bins are required");

    const double sigma = std::sqrt(spec.var_mi) * *std::max_element(rhos.begin(), rhos.end());
    const double span = 1.0 + 10.0 * sigma * std::sqrt(static_cast<double>(rhos.size()));
    const auto bins_below_one = static_cast<std::size_t>(std::ceil(static_cast<double>(bins) / span));
    const double step = 1.0 / static_cast<double>(bins_below_one);
    const auto per_round_bins = static_cast<std::size_t>(std::ceil(span / step));

    std::vector<double> out;
    out.reserve(rhos.size());
    std::vector<numerics::PdfGrid> accumulated;
    for (double rho : rhos) {
        // Mass of [j h, (j+1) h) sits at the bin centre; the last bin takes the tail.
        std::vector<double> masses(per_round_bins);
        double previous = 0.0;
        for (std::size_t j = 0; j + 1 < per_round_bins; ++j) {
            const double next = round_mi_cdf(step * static_cast<double>(j + 1), rho, spec.snr_linear);
            masses[j] = next - previous;
            previous = next;
        }
        masses.back() = 1.0 - previous;
        numerics::PdfGrid round(0.5 * step, step, std::move(masses));

        if (accumulated.empty()) {
            accumulated.push_back(std::move(round));
        } else {
            accumulated.push_back(numerics::convolve(accumulated.back(), round).capped(span));
        }
        out.push_back(std::clamp(accumulated.back().mass_below(1.0), 0.0, 1.0));
    }
    return out;
}

std::vector<double> p_fail(std::span<const double> rhos, const DownlinkSpec& spec, FailureModel model,
                           std::size_t bins) {
    if (model == FailureModel::gaussian) return p_fail_gaussian(rhos, spec);
    return p_fail_convolution(rhos, spec, bins);
}

}  // namespace harqopt
