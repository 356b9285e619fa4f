#pragma once

#include "mlevy/errors.hpp"
#include "mlevy/rng.hpp"
#include "mlevy/quadrature.hpp"
#include "mlevy/levy_measure.hpp"
#include "mlevy/scheme_params.hpp"
#include "mlevy/path_engine.hpp"
#include "mlevy/euler.hpp"
#include "mlevy/stable.hpp"
#include "mlevy/limit_sim.hpp"
#include "mlevy/stats.hpp"
#include "mlevy/parallel.hpp"
#include "mlevy/csv.hpp"
#include "mlevy/config.hpp"
#include "mlevy/experiments.hpp"
