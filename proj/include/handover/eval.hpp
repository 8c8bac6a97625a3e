#pragma once

#include "handover/eval/benchmark.hpp"
#include "handover/eval/metrics.hpp"
#include "handover/eval/report.hpp"
