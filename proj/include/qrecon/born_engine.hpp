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
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "qrecon/matrix_core.hpp"
#include "qrecon/question_lattice.hpp"
#include "qrecon/random.hpp"

namespace qrecon {

/// Tr(rho P) after checking it lies in [0,1] up to tol.probability_clamp.
inline double born_probability(const DensityMatrix& rho, const Matrix& projector, const Tolerances& tol = {}) {
    require_same_dim(rho.matrix(), projector, "born_probability");
    const double p = (rho.matrix() * projector).trace().real();
    if (p < -tol.probability_clamp || p > 1.0 + tol.probability_clamp) {
        std::ostringstream os;
        os << "Tr(rho P) = " << p << " lies outside [0,1]";
        throw Error(ErrorKind::InvariantViolation, os.str());
    }
    return std::clamp(p, 0.0, 1.0);
}

inline double born_probability(const DensityMatrix& rho, const Question& q, const Tolerances& tol = {}) {
    return born_probability(rho, q.matrix(), tol);
}

/// p(i, j): probability of atom i of family b given the answers of atom j of family c.
struct TransitionMatrix {
    RealMatrix p;
    std::vector<Index> ranks_b;
    std::vector<Index> ranks_c;
};

/// Lueders conditioning: p^ij = Tr(B_i C_j) / Tr(C_j).
inline TransitionMatrix transition_matrix(const CompleteQuestionSet& b, const CompleteQuestionSet& c) {
    if (b.dim() != c.dim()) throw Error(ErrorKind::DimensionMismatch, "transition_matrix: families on different spaces");
    TransitionMatrix t;
    t.p.resize(static_cast<Index>(b.size()), static_cast<Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double norm = c[j].matrix().trace().real();
        for (std::size_t i = 0; i < b.size(); ++i) {
            t.p(static_cast<Index>(i), static_cast<Index>(j)) = (b[i].matrix() * c[j].matrix()).trace().real() / norm;
        }
    }
    t.ranks_b = b.ranks();
    t.ranks_c = c.ranks();
    return t;
}

inline ValidationReport verify_bistochastic(const TransitionMatrix& t, const Tolerances& tol = {}) {
    ValidationReport report;
    const RealMatrix& p = t.p;

    double range_dev = 0.0;
    Index ri = 0, rj = 0;
    for (Index i = 0; i < p.rows(); ++i) {
        for (Index j = 0; j < p.cols(); ++j) {
            const double dev = std::max({0.0, -p(i, j), p(i, j) - 1.0});
            if (dev > range_dev) { range_dev = dev; ri = i; rj = j; }
        }
    }
    std::ostringstream where;
    if (range_dev > 0) where << "entry (" << ri << "," << rj << ")";
    report.bound("entries_in_unit_interval", range_dev, tol.stochastic, where.str());

    auto worst_sum = [&](bool columns) {
        double worst = 0.0;
        Index at = 0;
        const Index count = columns ? p.cols() : p.rows();
        for (Index k = 0; k < count; ++k) {
            const double s = columns ? p.col(k).sum() : p.row(k).sum();
            if (std::abs(s - 1.0) > worst) { worst = std::abs(s - 1.0); at = k; }
        }
        return std::pair{worst, at};
    };

    const auto [col_dev, col_at] = worst_sum(true);
    report.bound("column_sums", col_dev, tol.stochastic,
                 col_dev > tol.stochastic ? "column " + std::to_string(col_at) : "");
    const auto [row_dev, row_at] = worst_sum(false);
    Check& rows = report.bound("row_sums", row_dev, tol.stochastic,
                               row_dev > tol.stochastic ? "row " + std::to_string(row_at) : "");

    auto higher_rank = [](const std::vector<Index>& ranks) {
        for (Index r : ranks)
            if (r > 1) return true;
        return false;
    };
    if (!rows.passed && (higher_rank(t.ranks_b) || higher_rank(t.ranks_c))) {
        rows.detail += rows.detail.empty() ? "" : "; ";
        rows.detail += "cause: atoms of rank > 1 (row sums equal 1 only for rank-1 atoms)";
    }
    return report;
}

/// Outcome counts per atom index for n independent preparations.
struct SampleRecord {
    std::vector<std::uint64_t> counts;
    std::uint64_t n_trials = 0;
    std::uint64_t seed = 0;
};

/// Born probabilities of every atom, tiny negatives clamped.
inline std::vector<double> atom_probabilities(const DensityMatrix& rho, const CompleteQuestionSet& atoms,
                                              const Tolerances& tol = {}) {
    if (rho.dim() != atoms.dim()) throw Error(ErrorKind::DimensionMismatch, "state and atoms on different spaces");
    std::vector<double> probs;
    probs.reserve(atoms.size());
    for (const auto& a : atoms.atoms()) probs.push_back(born_probability(rho, a.matrix(), tol));
    return probs;
}

/// Inverse-CDF sampling of n outcomes from \p probs using \p rng.
inline std::vector<std::uint64_t> sample_counts(const std::vector<double>& probs, std::uint64_t n, Rng& rng) {
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
    std::vector<std::uint64_t> counts(probs.size(), 0);
    for (std::uint64_t trial = 0; trial < n; ++trial) {
        const double u = uniform01(rng) * acc;
        std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (k >= probs.size()) k = probs.size() - 1;
        ++counts[k];
    }
    return counts;
}

/// n i.i.d. measurements of the complete question on fresh copies of rho.
inline SampleRecord sample_answers(const DensityMatrix& rho, const CompleteQuestionSet& atoms, std::uint64_t n,
                                   std::uint64_t seed, const Tolerances& tol = {}) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample_answers needs n >= 1");
    const std::vector<double> probs = atom_probabilities(rho, atoms, tol);
    Rng rng = make_stream(seed, 0);
    return {sample_counts(probs, n, rng), n, seed};
}

/// Frequency estimate of transition_matrix(b, c). Column j prepares the pure
/// state C_j and draws from its own stream (seed, j).
inline TransitionMatrix empirical_transition(const CompleteQuestionSet& b, const CompleteQuestionSet& c,
                                             std::uint64_t n_per_column, std::uint64_t seed,
                                             const Tolerances& tol = {}) {
    if (b.dim() != c.dim()) throw Error(ErrorKind::DimensionMismatch, "empirical_transition: families on different spaces");
    if (n_per_column == 0) throw Error(ErrorKind::InvalidArgument, "empirical_transition needs n_per_column >= 1");
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j].rank() != 1) {
            throw Error(ErrorKind::NonPureConditioning,
                        "atom " + std::to_string(j) + " of the conditioning family has rank " +
                            std::to_string(c[j].rank()));
        }
    }
    TransitionMatrix t;
    t.p.resize(static_cast<Index>(b.size()), static_cast<Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j) {
        const DensityMatrix state(c[j].matrix(), tol);
        const std::vector<double> probs = atom_probabilities(state, b, tol);
        Rng rng = make_stream(seed, j);
        const std::vector<std::uint64_t> counts = sample_counts(probs, n_per_column, rng);
        for (std::size_t i = 0; i < b.size(); ++i) {
            t.p(static_cast<Index>(i), static_cast<Index>(j)) =
                static_cast<double>(counts[i]) / static_cast<double>(n_per_column);
        }
    }
    t.ranks_b = b.ranks();
    t.ranks_c = c.ranks();
    return t;
}

}  // namespace qrecon
