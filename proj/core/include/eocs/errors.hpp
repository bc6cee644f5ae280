#pragma once

#include <stdexcept>
#include <string>

namespace eocs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define EOCS_DEFINE_ERROR(Name)            \
    class Name : public Error {            \
      public:                              \
        using Error::Error;                \
    }

EOCS_DEFINE_ERROR(ParseError);
EOCS_DEFINE_ERROR(ValidationError);
EOCS_DEFINE_ERROR(UnknownGenerator);
EOCS_DEFINE_ERROR(SingularMatrix);
EOCS_DEFINE_ERROR(DidNotConverge);
EOCS_DEFINE_ERROR(NotConverged);
EOCS_DEFINE_ERROR(ProtectedLineOut);
EOCS_DEFINE_ERROR(Disconnected);
EOCS_DEFINE_ERROR(NoFeasibleCandidate);
EOCS_DEFINE_ERROR(ShapeMismatch);
EOCS_DEFINE_ERROR(IoError);
EOCS_DEFINE_ERROR(VersionMismatch);
EOCS_DEFINE_ERROR(ExhaustedSampling);

#undef EOCS_DEFINE_ERROR

}  // namespace eocs
