#pragma once

#include "manhattan/config_io.hpp"
#include "manhattan/configuration.hpp"
#include "manhattan/enhancement.hpp"
#include "manhattan/events.hpp"
#include "manhattan/geometry.hpp"
#include "manhattan/montecarlo.hpp"
#include "manhattan/philox.hpp"
#include "manhattan/render.hpp"
#include "manhattan/tracer.hpp"

namespace manhattan {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kTrajectoryFormatVersion = 1;
inline constexpr int kWitnessFormatVersion = 1;

}  // namespace manhattan
