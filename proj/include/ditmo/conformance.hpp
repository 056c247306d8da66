// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace ditmo {

struct ConformanceOptions {
    std::string url;                       // http://host[:port]
    std::chrono::seconds timeout{120};
    int max_dimension = 2048;              // the service's configured limit; probed with max + 1
    bool check_health = true;
};

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Runs the wire-protocol contract checks against a live model service:
/// health, segment and inpaint schema, dimension preservation, label range,
/// unmasked-pixel preservation, seeded repeatability, and the 400/413 error
/// paths. Never throws for a failing service; each check reports its outcome.
std::vector<ConformanceCheck> run_conformance(const ConformanceOptions& options);

}  // namespace ditmo
