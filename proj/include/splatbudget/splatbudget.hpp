#pragma once

#include "splatbudget/alloc.hpp"
#include "splatbudget/budget.hpp"
#include "splatbudget/errors.hpp"
#include "splatbudget/fit2d.hpp"
#include "splatbudget/geom.hpp"
#include "splatbudget/grid.hpp"
#include "splatbudget/heuristics.hpp"
#include "splatbudget/image_io.hpp"
#include "splatbudget/serialization.hpp"
#include "splatbudget/version.hpp"
