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
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrecon/scenario.hpp"

namespace {

using qrecon::scenario::json;

int run_command(const std::string& path, const std::string& out_path, std::optional<std::uint64_t> seed,
                const std::vector<std::string>& overrides) {
    qrecon::scenario::RunOptions options;
    options.seed = seed;
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        double value = 0.0;
        bool ok = eq != std::string::npos && eq > 0;
        if (ok) {
            try {
                std::size_t used = 0;
                value = std::stod(item.substr(eq + 1), &used);
                ok = used == item.size() - eq - 1;
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) {
            std::cerr << "qrecon: --tol-override expects key=value, got '" << item << "'\n";
            return qrecon::scenario::kUsageError;
        }
        options.tolerance_overrides.emplace_back(item.substr(0, eq), value);
    }

    const qrecon::scenario::RunOutcome outcome = qrecon::scenario::run_file(path, options);
    const std::string text = outcome.report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "qrecon: cannot write '" << out_path << "'\n";
            return qrecon::scenario::kUsageError;
        }
        out << text;
    }

    for (const auto& e : outcome.report["errors"]) {
        std::cerr << "qrecon: " << e["kind"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
    }
    for (const auto& v : outcome.report["verdicts"]) {
        if (!v["passed"].get<bool>()) std::cerr << "qrecon: verdict failed: " << v["name"].get<std::string>() << "\n";
    }
    return outcome.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qrecon: verification scenarios for measurement-theoretic quantum formalism"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run a scenario file and emit a JSON report");
    run->add_option("file", scenario_path, "Scenario file")->required();
    run->add_option("--out", out_path, "Write the report here instead of stdout");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--tol-override", overrides, "Override a named tolerance, key=val (repeatable)");

    auto* schema = app.add_subcommand("schema", "Print the scenario schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qrecon::scenario::kUsageError;
    }

    if (schema->parsed()) {
        std::cout << qrecon::scenario::emit_schema().dump(2) << "\n";
        return 0;
    }
    return run_command(scenario_path, out_path, seed, overrides);
}
