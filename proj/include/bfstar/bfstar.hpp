#pragma once

// Umbrella header: the full solver library for static, spherically
// symmetric mixed boson-fermion star configurations in scalar-tensor
// gravity with a massive dilaton.

#include "banded.hpp"
#include "canm.hpp"
#include "collocation.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "model.hpp"
#include "spline.hpp"
