#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cpd {

using StateIndex = std::size_t;
using PlayerIndex = std::size_t;
using ActionIndex = std::size_t;
using JointIndex = std::size_t;

/// Default truncation horizon for continuation profiles.
inline constexpr std::size_t kDefaultHorizon = 64;
/// Default tie band for lexicographic comparisons.
inline constexpr double kDefaultTolerance = 1e-9;
/// Default cap on enumerated pure profiles / policies.
inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

enum class Ordering { Less, Equal, Greater, Indeterminate };

std::string_view to_string(Ordering o);

inline Ordering reverse(Ordering o) {
    switch (o) {
    case Ordering::Less: return Ordering::Greater;
    case Ordering::Greater: return Ordering::Less;
    default: return o;
    }
}

// Errors. Everything the engine throws derives from cpd::Error.

class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
    using Error::Error;
};

/// Input data violates a model invariant (game form, instance, parameters).
class ValidationError : public Error {
 public:
    using Error::Error;
};

/// An operation precondition was not met by otherwise valid inputs.
class PreconditionError : public Error {
 public:
    using Error::Error;
};

class CapExceededError : public Error {
 public:
    CapExceededError(std::size_t size, std::size_t cap);
    std::size_t size() const { return size_; }
    std::size_t cap() const { return cap_; }

 private:
    std::size_t size_;
    std::size_t cap_;
};

class SolveError : public Error {
 public:
    using Error::Error;
};

/// Real number extended with a symbolic negative infinity.
class ExtendedReal {
 public:
    static ExtendedReal finite(double v) { return ExtendedReal(false, v); }
    static ExtendedReal negative_infinity() { return ExtendedReal(true, 0.0); }

    bool is_negative_infinity() const { return neg_inf_; }
    bool is_finite() const { return !neg_inf_; }
    /// Throws PreconditionError on -inf.
    double value() const;

    std::string to_string() const;

    friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
    ExtendedReal(bool neg_inf, double v) : neg_inf_(neg_inf), value_(v) {}
    bool neg_inf_;
    double value_;
};

/// -inf sits below every finite value; two -inf compare Equal; finite values tie within tol.
Ordering compare(const ExtendedReal& a, const ExtendedReal& b, double tol);

/// Three-way comparison of reals with a tie band.
Ordering compare(double a, double b, double tol);

}  // namespace cpd
