#pragma once

#include "handover/grasp/completion.hpp"
#include "handover/grasp/fps.hpp"
#include "handover/grasp/generate.hpp"
#include "handover/grasp/orientation.hpp"
#include "handover/grasp/select.hpp"
#include "handover/grasp/types.hpp"
