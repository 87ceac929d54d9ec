#pragma once

#include "bregman/errors.hpp"
#include "bregman/linear_operator.hpp"
#include "bregman/kernels.hpp"
#include "bregman/prox.hpp"
#include "bregman/problem.hpp"
#include "bregman/solvers.hpp"
#include "bregman/merit.hpp"
#include "bregman/driver.hpp"
#include "bregman/experiment.hpp"
