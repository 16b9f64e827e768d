#pragma once

#include <stdexcept>
#include <string>

namespace setdetect {

/// Base class for all library errors. Subclasses carry the failure kind in
/// the type so callers can map them to exit codes or per-flight diagnostics.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input / schema errors.
struct MissingColumn : Error {
    explicit MissingColumn(const std::string& column)
        : Error("missing column: " + column), column(column) {}
    std::string column;
};
struct NonMonotonicTime : Error {
    explicit NonMonotonicTime(const std::string& what) : Error(what) {}
};
struct GapTooLarge : Error {
    GapTooLarge(const std::string& flight_id, int gap_s)
        : Error("flight " + flight_id + ": gap of " + std::to_string(gap_s) + " s exceeds repair limit"),
          flight_id(flight_id), gap_s(gap_s) {}
    std::string flight_id;
    int gap_s;
};
struct NoTaxiPhase : Error {
    explicit NoTaxiPhase(const std::string& what) : Error(what) {}
};
struct SeriesTooShort : Error {
    explicit SeriesTooShort(const std::string& what) : Error(what) {}
};
struct NoFuelData : Error {
    explicit NoFuelData(const std::string& what) : Error(what) {}
};

// Engine errors.
struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& what) : Error(what) {}
};
struct DegenerateBatch : Error {
    explicit DegenerateBatch(const std::string& what) : Error(what) {}
};
struct NonFiniteLoss : Error {
    explicit NonFiniteLoss(const std::string& what) : Error(what) {}
};
struct InvalidArch : Error {
    explicit InvalidArch(const std::string& what) : Error(what) {}
};

// Dataset / training errors.
struct ClassTooSmall : Error {
    explicit ClassTooSmall(const std::string& what) : Error(what) {}
};
struct DegenerateLabels : Error {
    explicit DegenerateLabels(const std::string& what) : Error(what) {}
};
struct NoPositives : Error {
    explicit NoPositives(const std::string& what) : Error(what) {}
};
struct TooFewPositives : Error {
    explicit TooFewPositives(const std::string& what) : Error(what) {}
};
struct MissingArtifact : Error {
    explicit MissingArtifact(const std::string& what) : Error(what) {}
};

// Assessment errors.
struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& what) : Error(what) {}
};
struct NegativeFlow : Error {
    explicit NegativeFlow(const std::string& what) : Error(what) {}
};
struct StartOutOfRange : Error {
    explicit StartOutOfRange(const std::string& what) : Error(what) {}
};
struct ZeroTruth : Error {
    explicit ZeroTruth(const std::string& what) : Error(what) {}
};

// Configuration / I/O errors.
struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& what) : Error(what) {}
};
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace setdetect
