#pragma once

#include <stdexcept>

namespace cavrec {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CAVREC_DEFINE_ERROR(Name)  \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

// Geometry / camera model
CAVREC_DEFINE_ERROR(NonPositiveDepth);
CAVREC_DEFINE_ERROR(InvalidPose);

// Descriptor matching
CAVREC_DEFINE_ERROR(ChannelMismatch);
CAVREC_DEFINE_ERROR(OutOfBounds);

// Depth model
CAVREC_DEFINE_ERROR(NoVisiblePoints);
CAVREC_DEFINE_ERROR(NonPositiveScale);

// Fusion / extraction
CAVREC_DEFINE_ERROR(EmptyVolume);
CAVREC_DEFINE_ERROR(NoValidDepths);

// Mesh evaluation
CAVREC_DEFINE_ERROR(EmptyMesh);
CAVREC_DEFINE_ERROR(TooFewPoints);
CAVREC_DEFINE_ERROR(NoIntersection);
CAVREC_DEFINE_ERROR(OpenContour);
CAVREC_DEFINE_ERROR(AllSectionsFailed);

// Synthetic data harness
CAVREC_DEFINE_ERROR(InvalidSpec);
CAVREC_DEFINE_ERROR(DegenerateMesh);
CAVREC_DEFINE_ERROR(NoVisibleSurface);

// File I/O: missing files, bad magic, truncated payloads.
CAVREC_DEFINE_ERROR(IoError);

#undef CAVREC_DEFINE_ERROR

}  // namespace cavrec
