// Copyright 2026 The qrecon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace qrecon {

/// One named invariant and how far the data sits from it. Informational
/// checks are recorded but never fail a report.
struct Check {
    std::string name;
    double deviation = 0.0;
    double threshold = 0.0;
    bool passed = true;
    bool informational = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<Check> checks;

    [[nodiscard]] bool passed() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const Check& c) { return c.informational || c.passed; });
    }

    /// Records "deviation <= threshold".
    Check& bound(std::string name, double deviation, double threshold, std::string detail = {}) {
        checks.push_back({std::move(name), deviation, threshold, deviation <= threshold, false,
                          std::move(detail)});
        return checks.back();
    }

    Check& verdict(std::string name, bool ok, std::string detail = {}) {
        checks.push_back({std::move(name), ok ? 0.0 : 1.0, 0.0, ok, false, std::move(detail)});
        return checks.back();
    }

    Check& note(std::string name, double value, std::string detail = {}) {
        checks.push_back({std::move(name), value, 0.0, true, true, std::move(detail)});
        return checks.back();
    }

    [[nodiscard]] const Check* find(const std::string& name) const {
        for (const auto& c : checks) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }

    void merge(const ValidationReport& other, const std::string& prefix = {}) {
        for (auto c : other.checks) {
            c.name = prefix + c.name;
            checks.push_back(std::move(c));
        }
    }

    [[nodiscard]] std::vector<const Check*> failures() const {
        std::vector<const Check*> out;
        for (const auto& c : checks) {
            if (!c.informational && !c.passed) out.push_back(&c);
        }
        return out;
    }
};

}  // namespace qrecon
