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

#include <cstdint>
#include <random>

#include "qrecon/matrix_core.hpp"

namespace qrecon {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); streams do not depend on the order
/// in which they are drawn.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Matrix ginibre(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) g(i, j) = Complex(normal(rng), normal(rng));
    return g;
}

inline HermitianMatrix random_hermitian(Index d, Rng& rng) {
    const Matrix g = ginibre(d, d, rng);
    Matrix h = 0.5 * (g + g.adjoint());
    // make it exactly Hermitian
    h = 0.5 * (h + h.adjoint()).eval();
    return HermitianMatrix(std::move(h));
}

/// Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases removed.
inline UnitaryMatrix haar_unitary(Index d, Rng& rng) {
    const Matrix g = ginibre(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < d; ++k) {
        const Complex rkk = r(k, k);
        const double mag = std::abs(rkk);
        if (mag > 0) q.col(k) *= rkk / mag;
    }
    return UnitaryMatrix(std::move(q));
}

inline Vector random_state_vector(Index d, Rng& rng) {
    Vector v = ginibre(d, 1, rng).col(0);
    return v / v.norm();
}

/// Reduced state of a Haar-random pure state on C^d (x) C^env_dim; full rank
/// almost surely when env_dim >= d.
inline DensityMatrix random_density(Index d, Rng& rng, Index env_dim = 0) {
    if (env_dim <= 0) env_dim = d;
    const Vector psi = random_state_vector(d * env_dim, rng);
    Matrix rho = partial_trace(psi * psi.adjoint(), d, env_dim, Subsystem::P);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho));
}

}  // namespace qrecon
