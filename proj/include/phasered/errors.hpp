#ifndef PHASERED_ERRORS_HPP
#define PHASERED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace phasered {

/// Bad input configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// State outside the domain of the model, e.g. 1 + delta*g(phi) <= 0 or |A| = 0.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Base for failures of numerical algorithms (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularOperatorError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StiffnessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class OrbitNotClosedError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ContinuationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SectionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace phasered

#endif
