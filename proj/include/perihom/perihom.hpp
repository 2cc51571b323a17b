#pragma once

#include "perihom/grid.hpp"
#include "perihom/geometry.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/kinetics.hpp"
#include "perihom/linear.hpp"
#include "perihom/transport.hpp"
#include "perihom/cell_solver.hpp"
#include "perihom/state.hpp"
#include "perihom/coupled.hpp"
#include "perihom/micro_solver.hpp"
#include "perihom/macro_solver.hpp"
#include "perihom/config.hpp"
#include "perihom/io.hpp"
#include "perihom/harness.hpp"
