#pragma once

#include "gabp/acceleration.hpp"
#include "gabp/classical.hpp"
#include "gabp/diagnostics.hpp"
#include "gabp/direct.hpp"
#include "gabp/gabp_solver.hpp"
#include "gabp/graph.hpp"
#include "gabp/matrix_market.hpp"
#include "gabp/problems.hpp"
#include "gabp/pseudoinverse.hpp"
#include "gabp/report.hpp"
#include "gabp/sym_system.hpp"
