#pragma once

#include <stdexcept>
#include <string>

namespace ivt {

/// A precondition on an argument was violated.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical evaluation failed (overflow, non-finite result).
class EvaluationError : public std::runtime_error {
public:
    explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ivt
