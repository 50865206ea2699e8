#pragma once

#include "hlu/core.hpp"
#include "hlu/dense.hpp"
#include "hlu/error.hpp"
#include "hlu/factor.hpp"
#include "hlu/htree.hpp"
#include "hlu/krylov.hpp"
#include "hlu/partition.hpp"
#include "hlu/problems.hpp"
#include "hlu/solve.hpp"
