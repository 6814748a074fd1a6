#pragma once

#include <stdexcept>
#include <string>

namespace bipcp {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define BIPCP_ERROR(name)                                           \
    struct name : Error {                                           \
        explicit name(const std::string& msg) : Error(msg) {}       \
    }

// parameter validation
BIPCP_ERROR(GammaOutOfRange);
BIPCP_ERROR(SubcriticalPair);
BIPCP_ERROR(NonpositiveA);
BIPCP_ERROR(LambdaOutOfRange);
BIPCP_ERROR(BadB);
BIPCP_ERROR(EmptyGrid);

// graph sampling / queries
BIPCP_ERROR(BadRootSpec);
BIPCP_ERROR(WindowTooSmall);
BIPCP_ERROR(SameTypePair);
BIPCP_ERROR(UnknownId);
BIPCP_ERROR(InsufficientData);
BIPCP_ERROR(BadBand);

// simulation
BIPCP_ERROR(EmptyInitialSet);
BIPCP_ERROR(BadLeafCount);
BIPCP_ERROR(InvalidTrace);

// combinatorics
BIPCP_ERROR(LengthTooLarge);
BIPCP_ERROR(BadRange);
BIPCP_ERROR(InvalidPath);
BIPCP_ERROR(BadThreshold);
BIPCP_ERROR(BadDistinguishedLeaf);
BIPCP_ERROR(PreconditionViolated);
BIPCP_ERROR(StuckTree);
BIPCP_ERROR(InvalidColouringForPath);

// harness
BIPCP_ERROR(TooFewPoints);
BIPCP_ERROR(ZeroTheta);
BIPCP_ERROR(UnsupportedFormat);

#undef BIPCP_ERROR

}  // namespace bipcp
