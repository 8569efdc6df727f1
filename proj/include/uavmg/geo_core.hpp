#pragma once

#include "uavmg/geo/footprint.hpp"
#include "uavmg/geo/geodetic.hpp"
#include "uavmg/geo/polygon.hpp"
#include "uavmg/geo/pose.hpp"
#include "uavmg/geo/rotation.hpp"
