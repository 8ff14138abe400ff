#pragma once

#include "units.hpp"
#include "errors.hpp"
#include "kinematics.hpp"
#include "compliance.hpp"
#include "actuation.hpp"
#include "control.hpp"
#include "terrain.hpp"
#include "scenario.hpp"
#include "dynamics.hpp"
#include "analysis/filter.hpp"
#include "analysis/metrics.hpp"
#include "harness/config_io.hpp"
#include "harness/csv.hpp"
#include "harness/sweep.hpp"
#include "harness/calibrate.hpp"
#include "harness/plot.hpp"
#include "harness/analyze.hpp"
