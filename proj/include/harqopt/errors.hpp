#pragma once

#include <stdexcept>
#include <string>

namespace harqopt {

/// Base of every error the library raises on bad input or unreachable targets.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class GridError : public Error {
public:
    using Error::Error;
};

/// Quadrature ran out of budget; `estimate()` is the best value reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double estimate, double error_estimate)
        : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

/// The outage target cannot be met. `min_outage()` is the best achievable
/// value when the solver could compute it, NaN otherwise.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, double min_outage)
        : Error(what), min_outage_(min_outage) {}

    double min_outage() const noexcept { return min_outage_; }

private:
    double min_outage_;
};

/// A round that occurs with probability zero was asked for a conditional quantity.
class DegenerateStateError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

}  // namespace harqopt
