#pragma once

#include <stdexcept>
#include <string>

namespace cmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NotOnBoundary : public Error {
public:
    using Error::Error;
};

class DegenerateSublevel : public Error {
public:
    using Error::Error;
};

class RootFindFailure : public Error {
public:
    using Error::Error;
};

/// |Du| reached the light cone guard in the Minkowski model.
class SpacelikeViolation : public Error {
public:
    SpacelikeViolation(const std::string& what, int node = -1, double grad_norm = 0.0)
        : Error(what), node_(node), grad_norm_(grad_norm) {}
    int node() const { return node_; }
    double grad_norm() const { return grad_norm_; }

private:
    int node_;
    double grad_norm_;
};

class ConvexityLoss : public Error {
public:
    using Error::Error;
};

class StepRejection : public Error {
public:
    using Error::Error;
};

/// Newton budget exhausted. Carries the best residual seen.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double best_residual, double t = 1.0)
        : Error(what), best_residual_(best_residual), t_(t) {}
    double best_residual() const { return best_residual_; }
    double t() const { return t_; }

private:
    double best_residual_;
    double t_;
};

class InversionFailure : public Error {
public:
    InversionFailure(const std::string& what, double gap) : Error(what), gap_(gap) {}
    double gap() const { return gap_; }

private:
    double gap_;
};

class SingularHessian : public Error {
public:
    using Error::Error;
};

class SeedFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace cmc
