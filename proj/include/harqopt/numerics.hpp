#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace harqopt::numerics {

/// Complementary error function. Throws DomainError on non-finite input.
double erfc(double x);

/// Standard normal tail, Q(x) = erfc(x / sqrt(2)) / 2.
double q_function(double x);

/// Exponential integral E1(x) = int_x^inf e^-t / t dt for x > 0.
///
/// Power series below x = 1, modified-Lentz continued fraction above.
/// Relative error is below 1e-10 on (0, inf).
double exp_integral_e1(double x);

/// e^x * E1(x), evaluated without forming e^x so it stays finite for large x.
double scaled_exp_integral_e1(double x);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

inline constexpr int kDefaultQuadratureIntervals = 200;

/// Computes int_0^inf f(g) e^-g dg, the expectation of f over a unit
/// exponential (the power gain of a unit-mean Rayleigh channel).
///
/// The half line is mapped onto [0, 1) with g = t / (1 - t) and integrated
/// by globally adaptive 7/15-point Gauss-Kronrod: the interval with the
/// largest error estimate is bisected until the summed estimate drops below
/// `tolerance * |value|`, or `max_intervals` intervals exist. The budget is
/// the only growth limit; hitting it throws ConvergenceError carrying the
/// estimate reached.
QuadratureResult integrate_rayleigh(const std::function<double(double)>& f, double tolerance,
                                    int max_intervals = kDefaultQuadratureIntervals);

/// Value-only form of integrate_rayleigh.
double expect_rayleigh(const std::function<double(double)>& f, double tolerance,
                       int max_intervals = kDefaultQuadratureIntervals);

/// Point masses at `lower + j * step`, j = 0 .. size-1. Total mass is 1
/// within 1e-6; masses are non-negative.
///
/// Mass-per-point (rather than density) makes the discrete convolution the
/// exact law of the sum of the two discretized variables.
class PdfGrid {
public:
    PdfGrid(double lower, double step, std::vector<double> masses);

    /// Unit mass at `at`.
    static PdfGrid delta(double at, double step);

    double lower() const noexcept { return lower_; }
    double step() const noexcept { return step_; }
    std::size_t size() const noexcept { return masses_.size(); }
    std::span<const double> masses() const noexcept { return masses_; }
    double position(std::size_t j) const noexcept { return lower_ + step_ * static_cast<double>(j); }
    double total_mass() const noexcept;

    /// Mass strictly below `threshold`, with each point smeared uniformly over
    /// one bin width centred on it (so a point exactly on the threshold
    /// contributes half its mass).
    double mass_below(double threshold) const noexcept;

    /// Copy with every point above `cap` merged into the last point at or below it.
    PdfGrid capped(double cap) const;

private:
    double lower_;
    double step_;
    std::vector<double> masses_;
};

/// Discrete convolution (law of the sum). Inner loop parallelised with OpenMP.
/// Throws GridError if the steps differ by more than 1e-12 relative.
PdfGrid convolve(const PdfGrid& a, const PdfGrid& b);

/// Single-threaded reference for convolve; bit-identical output.
PdfGrid convolve_serial(const PdfGrid& a, const PdfGrid& b);

}  // namespace harqopt::numerics
