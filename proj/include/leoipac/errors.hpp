#pragma once

#include <stdexcept>
#include <string>

namespace leoipac {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LEOIPAC_DEFINE_ERROR(Name)              \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(#Name ": " + what) {}           \
  }

LEOIPAC_DEFINE_ERROR(ConfigError);
LEOIPAC_DEFINE_ERROR(DimensionMismatch);
LEOIPAC_DEFINE_ERROR(BelowHorizon);
LEOIPAC_DEFINE_ERROR(DegenerateGeometry);
LEOIPAC_DEFINE_ERROR(SingularNuisanceBlock);
LEOIPAC_DEFINE_ERROR(NonPsdCovariance);
LEOIPAC_DEFINE_ERROR(SingularInnovation);
LEOIPAC_DEFINE_ERROR(FilterDiverged);
LEOIPAC_DEFINE_ERROR(NoPilots);
LEOIPAC_DEFINE_ERROR(UnderdeterminedSystem);

#undef LEOIPAC_DEFINE_ERROR

}  // namespace leoipac
