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

#include <array>
#include <optional>
#include <string_view>
#include <utility>

namespace qrecon {

/// Numerical thresholds shared by every validator. One record, passed by
/// const reference, so a scenario can tighten or loosen a single knob.
struct Tolerances {
    double hermitian = 1e-12;          // |M - M^dag|_max
    double unitary = 1e-10;            // |U^dag U - I|_max
    double projector = 1e-10;          // |P^2 - P|_max
    double projector_eigen = 1e-8;     // eigenvalues within this of {0,1}
    double density_trace = 1e-12;      // |Tr rho - 1|
    double density_psd = 1e-10;        // min eigenvalue >= -this
    double lattice = 1e-8;             // meet cutoff, implies, orthogonal, lattice equality
    double commute = 1e-10;            // family commutators
    double atoms = 1e-10;              // complete-question orthogonality and closure
    double stochastic = 1e-10;         // transition-matrix row/column sums
    double probability_clamp = 1e-12;  // tolerated negativity/excess of Tr(rho P)
    double frame_range = 1e-10;        // frame values inside [0,1]
    double frame_sum = 1e-8;           // frame values sum to one per resolution
    double context_match = 1e-8;       // projector identity across resolutions
    double context_value = 1e-6;       // value agreement across resolutions
    double povm_psd = 1e-10;           // effect min eigenvalue >= -this
    double povm_closure = 1e-10;       // |sum E_b - I|_max
    double sector_cluster = 1e-6;      // eigenvalue clustering for central projectors
    double branch_cut = 1e-8;          // eigenphase distance from +-pi
    double fit_rank = 1e-10;           // relative singular-value cutoff in the Gleason fit

    using Field = double Tolerances::*;

    static constexpr std::array<std::pair<std::string_view, Field>, 20> fields() {
        return {{
            {"hermitian", &Tolerances::hermitian},
            {"unitary", &Tolerances::unitary},
            {"projector", &Tolerances::projector},
            {"projector_eigen", &Tolerances::projector_eigen},
            {"density_trace", &Tolerances::density_trace},
            {"density_psd", &Tolerances::density_psd},
            {"lattice", &Tolerances::lattice},
            {"commute", &Tolerances::commute},
            {"atoms", &Tolerances::atoms},
            {"stochastic", &Tolerances::stochastic},
            {"probability_clamp", &Tolerances::probability_clamp},
            {"frame_range", &Tolerances::frame_range},
            {"frame_sum", &Tolerances::frame_sum},
            {"context_match", &Tolerances::context_match},
            {"context_value", &Tolerances::context_value},
            {"povm_psd", &Tolerances::povm_psd},
            {"povm_closure", &Tolerances::povm_closure},
            {"sector_cluster", &Tolerances::sector_cluster},
            {"branch_cut", &Tolerances::branch_cut},
            {"fit_rank", &Tolerances::fit_rank},
        }};
    }

    /// Returns false when \p key names no tolerance.
    bool set(std::string_view key, double value) {
        for (const auto& [name, field] : fields()) {
            if (name == key) {
                this->*field = value;
                return true;
            }
        }
        return false;
    }

    [[nodiscard]] std::optional<double> get(std::string_view key) const {
        for (const auto& [name, field] : fields()) {
            if (name == key) return this->*field;
        }
        return std::nullopt;
    }
};

}  // namespace qrecon
