#pragma once

#include "descfact/grcf.h"

namespace descfact {

/// Stable right coprime factorization with inner denominator. Bad poles are
/// reflected across the imaginary axis or the unit circle; infinite poles of
/// discrete-time systems go to the origin.
FactorizationResult grcfid(const DescriptorSystem& sys, const Tolerances& tol,
                           const FactorOptions& options = {});

}  // namespace descfact
