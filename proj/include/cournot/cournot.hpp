#pragma once

#include "model.hpp"
#include "solver.hpp"
#include "two_firm.hpp"
#include "statics.hpp"
#include "dynamics.hpp"
#include "utility.hpp"
