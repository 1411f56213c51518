#ifndef QFLOW_ERRORS_HPP
#define QFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the admissible range (index, order, dimension).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A curvature or radius that must lie in the positive cone does not.
class PositivityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// The body lost strict convexity; `node` is the offending grid index.
class ConvexityLoss : public Error {
public:
    ConvexityLoss(const std::string& what, int node, double margin)
        : Error(what), node_(node), margin_(margin) {}
    int node() const noexcept { return node_; }
    double margin() const noexcept { return margin_; }

private:
    int node_;
    double margin_;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Iterative solver gave up; best-so-far values are carried along.
class NumericError : public Error {
public:
    NumericError(const std::string& what, double best_value = 0.0)
        : Error(what), best_value_(best_value) {}
    double best_value() const noexcept { return best_value_; }

private:
    double best_value_;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace qflow

#endif
