#pragma once

#include "handover/geometry/dbscan.hpp"
#include "handover/geometry/mask_ops.hpp"
#include "handover/geometry/normals.hpp"
#include "handover/geometry/png_io.hpp"
#include "handover/geometry/spatial_grid.hpp"
#include "handover/geometry/summary.hpp"
#include "handover/geometry/types.hpp"
#include "handover/geometry/unproject.hpp"
