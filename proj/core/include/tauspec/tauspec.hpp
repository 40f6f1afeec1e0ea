#pragma once

#include "tauspec/basis.hpp"
#include "tauspec/error.hpp"
#include "tauspec/opalg.hpp"
#include "tauspec/problem.hpp"
#include "tauspec/solution_io.hpp"
#include "tauspec/solver.hpp"
