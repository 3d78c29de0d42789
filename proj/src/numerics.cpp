#include "harqopt/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "harqopt/errors.hpp"

namespace harqopt::numerics {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(what) + ": argument must be finite");
    }
}

// Series: E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
double e1_series(double x) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -x / k;
        const double contribution = term / k;
        sum += contribution;
        if (std::abs(contribution) < 1e-17 * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
}

// Continued fraction for e^x E1(x), modified Lentz.
double scaled_e1_continued_fraction(double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) return h;
    }
    return h;
}

// 7/15-point Gauss-Kronrod abscissae and weights on [-1, 1].
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod(const std::function<double(double)>& h, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = h(centre);
    double kronrod_sum = kKronrodWeights[7] * fc;
    double gauss_sum = kGaussWeights[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double pair = h(centre - dx) + h(centre + dx);
        kronrod_sum += kKronrodWeights[j] * pair;
        if (j % 2 == 1) gauss_sum += kGaussWeights[j / 2] * pair;
    }
    const double value = kronrod_sum * half;
    const double error = std::abs((kronrod_sum - gauss_sum) * half);
    return {a, b, value, error};
}

}  // namespace

double erfc(double x) {
    require_finite(x, "erfc");
    return std::erfc(x);
}

double q_function(double x) {
    require_finite(x, "q_function");
    return 0.5 * erfc(x / std::numbers::sqrt2);
}

double exp_integral_e1(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("exp_integral_e1: argument must be positive and finite");
    }
    if (x <= 1.0) return e1_series(x);
    return std::exp(-x) * scaled_e1_continued_fraction(x);
}

double scaled_exp_integral_e1(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("scaled_exp_integral_e1: argument must be positive and finite");
    }
    if (x <= 1.0) return std::exp(x) * e1_series(x);
    return scaled_e1_continued_fraction(x);
}

QuadratureResult integrate_rayleigh(const std::function<double(double)>& f, double tolerance,
                                    int max_intervals) {
    if (!(tolerance > 0.0)) throw DomainError("integrate_rayleigh: tolerance must be positive");
    if (max_intervals < 1) throw DomainError("integrate_rayleigh: interval budget must be >= 1");

    // g = t / (1 - t), dg = dt / (1 - t)^2; the integrand vanishes as t -> 1.
    const auto mapped = [&f](double t) {
        const double one_minus = 1.0 - t;
        const double g = t / one_minus;
        if (!std::isfinite(g) || g > 745.0) return 0.0;
        return f(g) * std::exp(-g) / (one_minus * one_minus);
    };

    std::priority_queue<Segment> heap;
    heap.push(kronrod(mapped, 0.0, 1.0));
    double total = heap.top().value;
    double total_error = heap.top().error;
    int intervals = 1;

    const auto done = [&] {
        return total_error <= tolerance * std::abs(total) || total_error == 0.0;
    };
    while (!done()) {
        if (intervals >= max_intervals) {
            throw ConvergenceError("integrate_rayleigh: tolerance not reached within " +
                                       std::to_string(max_intervals) + " intervals",
                                   total, total_error);
        }
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = kronrod(mapped, worst.a, mid);
        const Segment right = kronrod(mapped, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
        // Re-sum periodically so the running totals do not drift.
        if (intervals % 32 == 0) {
            auto copy = heap;
            total = 0.0;
            total_error = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                total_error += copy.top().error;
                copy.pop();
            }
        }
    }
    return {total, total_error, intervals};
}

double expect_rayleigh(const std::function<double(double)>& f, double tolerance, int max_intervals) {
    return integrate_rayleigh(f, tolerance, max_intervals).value;
}

PdfGrid::PdfGrid(double lower, double step, std::vector<double> masses)
    : lower_(lower), step_(step), masses_(std::move(masses)) {
    if (!(step_ > 0.0) || !std::isfinite(step_)) throw GridError("PdfGrid: step must be positive");
    if (!std::isfinite(lower_)) throw GridError("PdfGrid: lower bound must be finite");
    if (masses_.empty()) throw GridError("PdfGrid: at least one bin is required");
    for (double m : masses_) {
        if (!(m >= 0.0)) throw GridError("PdfGrid: masses must be non-negative");
    }
    const double total = total_mass();
    if (std::abs(total - 1.0) > 1e-6) {
        throw GridError("PdfGrid: total mass " + std::to_string(total) + " is not 1");
    }
}

PdfGrid PdfGrid::delta(double at, double step) { return PdfGrid(at, step, {1.0}); }

double PdfGrid::total_mass() const noexcept {
    double total = 0.0;
    for (double m : masses_) total += m;
    return total;
}

double PdfGrid::mass_below(double threshold) const noexcept {
    double below = 0.0;
    for (std::size_t j = 0; j < masses_.size(); ++j) {
        const double left_edge = position(j) - 0.5 * step_;
        const double fraction = std::clamp((threshold - left_edge) / step_, 0.0, 1.0);
        if (fraction == 0.0) break;
        below += fraction * masses_[j];
    }
    return below;
}

PdfGrid PdfGrid::capped(double cap) const {
    if (cap < lower_) throw GridError("PdfGrid::capped: cap below support");
    const auto keep = std::min(masses_.size(), static_cast<std::size_t>(std::floor((cap - lower_) / step_)) + 1);
    if (keep == masses_.size()) return *this;
    std::vector<double> out(masses_.begin(), masses_.begin() + static_cast<std::ptrdiff_t>(keep));
    for (std::size_t j = keep; j < masses_.size(); ++j) out.back() += masses_[j];
    return PdfGrid(lower_, step_, std::move(out));
}

namespace {

void check_steps(const PdfGrid& a, const PdfGrid& b) {
    if (std::abs(a.step() - b.step()) > 1e-12 * std::max(a.step(), b.step())) {
        throw GridError("convolve: grids have different steps");
    }
}

double convolve_at(std::span<const double> x, std::span<const double> y, std::size_t k) {
    const std::size_t i_lo = k >= y.size() ? k - y.size() + 1 : 0;
    const std::size_t i_hi = std::min(k, x.size() - 1);
    double acc = 0.0;
    for (std::size_t i = i_lo; i <= i_hi; ++i) acc += x[i] * y[k - i];
    return acc;
}

}  // namespace

PdfGrid convolve(const PdfGrid& a, const PdfGrid& b) {
    check_steps(a, b);
    const auto x = a.masses();
    const auto y = b.masses();
    const std::size_t n = x.size() + y.size() - 1;
    std::vector<double> out(n);
    const auto signed_n = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < signed_n; ++k) {
        out[static_cast<std::size_t>(k)] = convolve_at(x, y, static_cast<std::size_t>(k));
    }
    return PdfGrid(a.lower() + b.lower(), a.step(), std::move(out));
}

PdfGrid convolve_serial(const PdfGrid& a, const PdfGrid& b) {
    check_steps(a, b);
    const auto x = a.masses();
    const auto y = b.masses();
    std::vector<double> out(x.size() + y.size() - 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = convolve_at(x, y, k);
    return PdfGrid(a.lower() + b.lower(), a.step(), std::move(out));
}

}  // namespace harqopt::numerics
