#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stragglers {

// Base for every library error. Subtypes carry the failure class in the
// type itself so callers can catch a specific contract violation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- data / IDX ----
class BadMagic : public Error { public: using Error::Error; };
class CountMismatch : public Error { public: using Error::Error; };
class TruncatedFile : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class DegenerateVariance : public Error { public: using Error::Error; };
class SubsetTooLarge : public Error { public: using Error::Error; };
class InfeasiblePlan : public Error { public: using Error::Error; };

// ---- network ----
class NonFiniteGradient : public Error { public: using Error::Error; };

// ---- geometry ----
class EmptySet : public Error { public: using Error::Error; };

class MissingClass : public Error {
public:
    MissingClass(int cls, const std::string& what) : Error(what), class_index(cls) {}
    int class_index;
};

// ---- inversion ----
class MissingSnapshot : public Error {
public:
    MissingSnapshot(int cls, const std::string& what) : Error(what), class_index(cls) {}
    int class_index;
};

class InversionNotFound : public Error {
public:
    InversionNotFound(std::vector<int> classes, int attempts, const std::string& what)
        : Error(what), missing_classes(std::move(classes)), attempts(attempts) {}
    std::vector<int> missing_classes;
    int attempts;
};

// ---- identifiers ----
class ThresholdTooLarge : public Error { public: using Error::Error; };
class SizeMismatch : public Error { public: using Error::Error; };

}  // namespace stragglers
