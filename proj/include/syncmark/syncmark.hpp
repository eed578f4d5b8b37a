#pragma once

#include "analytics.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "model.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "sim.hpp"
#include "ticks.hpp"
