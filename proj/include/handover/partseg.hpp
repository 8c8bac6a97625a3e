#pragma once

#include "handover/partseg/backend.hpp"
#include "handover/partseg/segment.hpp"
#include "handover/partseg/stages.hpp"
#include "handover/partseg/types.hpp"
