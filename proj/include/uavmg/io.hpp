#pragma once

#include "uavmg/io/csv.hpp"
#include "uavmg/io/flight_log.hpp"
#include "uavmg/io/graph_export.hpp"
#include "uavmg/io/pairs.hpp"
#include "uavmg/io/points.hpp"
#include "uavmg/io/stats.hpp"
