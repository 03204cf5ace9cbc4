#pragma once

// Umbrella header for the stochastic travelling-wave toolkit.

#include "stowave/config.hpp"
#include "stowave/ensemble.hpp"
#include "stowave/grid.hpp"
#include "stowave/linsolve.hpp"
#include "stowave/metrics.hpp"
#include "stowave/model.hpp"
#include "stowave/noise.hpp"
#include "stowave/operators.hpp"
#include "stowave/report.hpp"
#include "stowave/rng.hpp"
#include "stowave/runner.hpp"
#include "stowave/stepper.hpp"
#include "stowave/trajectory.hpp"
