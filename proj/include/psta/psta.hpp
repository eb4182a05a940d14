#pragma once

#include "psta/baselines.hpp"
#include "psta/cascade.hpp"
#include "psta/csv.hpp"
#include "psta/errors.hpp"
#include "psta/metrics.hpp"
#include "psta/psta_kernel.hpp"
#include "psta/quad_dynamics.hpp"
#include "psta/reference.hpp"
#include "psta/scalar.hpp"
#include "psta/scenario_io.hpp"
#include "psta/simulation.hpp"
#include "psta/so3.hpp"
