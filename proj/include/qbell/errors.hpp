#pragma once

#include <stdexcept>
#include <string>

namespace qbell {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define QBELL_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                               \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

QBELL_DEFINE_ERROR(DimensionCapExceeded);
QBELL_DEFINE_ERROR(InvalidGeometry);
QBELL_DEFINE_ERROR(InvalidRegion);
QBELL_DEFINE_ERROR(RangeViolation);
QBELL_DEFINE_ERROR(ConvergenceFailure);
QBELL_DEFINE_ERROR(SiteCountMismatch);
QBELL_DEFINE_ERROR(OverlappingSupports);
QBELL_DEFINE_ERROR(NormViolation);
QBELL_DEFINE_ERROR(InsufficientSamples);
QBELL_DEFINE_ERROR(AllSamplesFloored);
QBELL_DEFINE_ERROR(NonProductStart);
QBELL_DEFINE_ERROR(ShapeMismatch);
QBELL_DEFINE_ERROR(TooManyStrategies);
QBELL_DEFINE_ERROR(InvalidState);
QBELL_DEFINE_ERROR(ZeroMargin);
QBELL_DEFINE_ERROR(ZeroDecay);
QBELL_DEFINE_ERROR(FormulaMismatch);
QBELL_DEFINE_ERROR(ConfigError);

#undef QBELL_DEFINE_ERROR

}  // namespace qbell
