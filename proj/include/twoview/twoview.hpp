#pragma once

#include "twoview/geometry.hpp"
#include "twoview/triangulation.hpp"
#include "twoview/midpoint.hpp"
#include "twoview/baselines.hpp"
#include "twoview/methods.hpp"
#include "twoview/metrics.hpp"
#include "twoview/philox.hpp"
#include "twoview/synthgen.hpp"
#include "twoview/bench.hpp"
