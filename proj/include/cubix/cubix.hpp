#pragma once

// Umbrella header for the whole library.

#include "cubix/builtin.hpp"
#include "cubix/control.hpp"
#include "cubix/core.hpp"
#include "cubix/csv.hpp"
#include "cubix/dynamics.hpp"
#include "cubix/engine.hpp"
#include "cubix/kinematics.hpp"
#include "cubix/model.hpp"
#include "cubix/planner.hpp"
#include "cubix/plot.hpp"
#include "cubix/scenario_io.hpp"
#include "cubix/statics.hpp"
#include "cubix/tension.hpp"
