#pragma once

#include <stdexcept>
#include <string>

namespace infogeo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

#define INFOGEO_DEFINE_ERROR(Name)            \
    class Name : public Error                 \
    {                                         \
    public:                                   \
        using Error::Error;                   \
    }

/// A point violates the declared domain of a field or model.
INFOGEO_DEFINE_ERROR(DomainError);
/// NaN or infinity showed up while propagating derivatives.
INFOGEO_DEFINE_ERROR(NonFiniteError);
INFOGEO_DEFINE_ERROR(NotPositiveDefinite);
INFOGEO_DEFINE_ERROR(UnsupportedDimension);
/// A coordinate 2-plane is (numerically) degenerate for the metric.
INFOGEO_DEFINE_ERROR(DegeneratePlane);
/// The Berger table was asked about a manifold it does not cover.
INFOGEO_DEFINE_ERROR(HypothesesNotMet);
/// A curvature operator failed the g-antisymmetry check.
INFOGEO_DEFINE_ERROR(NotAntisymmetric);
/// Singular values sit too close to the rank threshold to trust the rank.
INFOGEO_DEFINE_ERROR(RankUnstable);
INFOGEO_DEFINE_ERROR(StepTooCoarse);
/// The principal matrix logarithm does not exist for a transport matrix.
INFOGEO_DEFINE_ERROR(LogUndefined);
INFOGEO_DEFINE_ERROR(InvalidArgument);
/// Malformed run configuration. The message carries line or field diagnostics.
INFOGEO_DEFINE_ERROR(ConfigError);
INFOGEO_DEFINE_ERROR(UnknownModel);
INFOGEO_DEFINE_ERROR(Unsupported);

#undef INFOGEO_DEFINE_ERROR

} // namespace infogeo
