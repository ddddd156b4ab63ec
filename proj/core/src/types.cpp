#include "cpd/types.hpp"

#include <cmath>
#include <sstream>

namespace cpd {

std::string_view to_string(Ordering o) {
    switch (o) {
    case Ordering::Less: return "less";
    case Ordering::Equal: return "equal";
    case Ordering::Greater: return "greater";
    case Ordering::Indeterminate: return "indeterminate";
    }
    return "?";
}

CapExceededError::CapExceededError(std::size_t size, std::size_t cap)
    : Error("enumeration size " + std::to_string(size) + " exceeds cap " + std::to_string(cap)),
      size_(size), cap_(cap) {}

double ExtendedReal::value() const {
    if (neg_inf_) throw PreconditionError("value() called on -inf");
    return value_;
}

std::string ExtendedReal::to_string() const {
    if (neg_inf_) return "-inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
}

Ordering compare(double a, double b, double tol) {
    if (a > b + tol) return Ordering::Greater;
    if (b > a + tol) return Ordering::Less;
    return Ordering::Equal;
}

Ordering compare(const ExtendedReal& a, const ExtendedReal& b, double tol) {
    if (a.is_negative_infinity() && b.is_negative_infinity()) return Ordering::Equal;
    if (a.is_negative_infinity()) return Ordering::Less;
    if (b.is_negative_infinity()) return Ordering::Greater;
    return compare(a.value(), b.value(), tol);
}

}  // namespace cpd
