#pragma once

#include "fpp/analysis.hpp"
#include "fpp/config.hpp"
#include "fpp/error.hpp"
#include "fpp/hierarchy.hpp"
#include "fpp/model.hpp"
#include "fpp/oracles.hpp"
#include "fpp/reference/fd_solver.hpp"
#include "fpp/reference/monte_carlo.hpp"
#include "fpp/transform.hpp"
