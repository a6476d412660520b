#ifndef LBL_LBL_HPP
#define LBL_LBL_HPP

#include "barrier_solver.hpp"
#include "config.hpp"
#include "fluctuation.hpp"
#include "levy_model.hpp"
#include "scale_functions.hpp"
#include "simulator.hpp"
#include "value_function.hpp"
#include "verification.hpp"

#endif
