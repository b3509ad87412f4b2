#pragma once

#include "errors.hpp"
#include "grid.hpp"
#include "sparse.hpp"
#include "operators3d.hpp"
#include "tez2d.hpp"
#include "dynamics.hpp"
#include "constraints.hpp"
#include "lagrange.hpp"
#include "harness.hpp"
