#pragma once

// The remote client lives in handover/reasoner/remote.hpp and is not pulled
// in here, so code that only needs the rule-based reasoner skips the HTTP
// dependency.

#include "handover/reasoner/format.hpp"
#include "handover/reasoner/knowledge.hpp"
#include "handover/reasoner/ops.hpp"
#include "handover/reasoner/query.hpp"
#include "handover/reasoner/rule_based.hpp"
#include "handover/reasoner/schema.hpp"
