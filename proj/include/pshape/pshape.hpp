#pragma once

// Umbrella header for the solver and optimisation modules (no JSON
// dependency; include cli.hpp separately for the command front end).

#include "capmeasure.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "infcase.hpp"
#include "io.hpp"
#include "measure_field.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "state.hpp"
