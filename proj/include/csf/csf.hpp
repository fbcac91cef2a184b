#pragma once

#include "csf/analysis.hpp"
#include "csf/error.hpp"
#include "csf/estimates.hpp"
#include "csf/experiments.hpp"
#include "csf/format.hpp"
#include "csf/grid.hpp"
#include "csf/initial_data.hpp"
#include "csf/io.hpp"
#include "csf/solver.hpp"
#include "csf/wedge.hpp"
