#pragma once

#include "hyperlab/ball_geometry.hpp"
#include "hyperlab/constants.hpp"
#include "hyperlab/error.hpp"
#include "hyperlab/extremal_solver.hpp"
#include "hyperlab/gjms_kernels.hpp"
#include "hyperlab/profile.hpp"
#include "hyperlab/quadrature.hpp"
#include "hyperlab/rearrangement.hpp"
#include "hyperlab/special.hpp"
#include "hyperlab/spectral.hpp"

namespace hyperlab {
inline constexpr const char* kVersion = "0.1.0";
}
