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
#include <cmath>

#include <gtest/gtest.h>

#include "qrecon/povm_engine.hpp"
#include "qrecon/random.hpp"
#include "test_util.hpp"

namespace qrecon {
namespace {

using testing::MatrixNear;

std::vector<ProjectorMatrix> computational_projectors(Index d) {
    std::vector<ProjectorMatrix> out;
    for (Index k = 0; k < d; ++k) out.emplace_back(outer(ket(d, k)));
    return out;
}

// SWAP on C^2 (x) C^2 written from its action |s p> -> |p s>.
Matrix swap_gate() {
    Matrix s = Matrix::Zero(4, 4);
    for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b) s(b * 2 + a, a * 2 + b) = 1.0;
    return s;
}

AncillaModel random_model(Index ds, Index dp, Rng& rng) {
    return AncillaModel(ds, dp, haar_unitary(ds * dp, rng), random_density(dp, rng), computational_projectors(dp));
}

TEST(DerivePovm, NoInteractionGivesScaledIdentity) {
    Rng rng = make_stream(1);
    const DensityMatrix rho_p = random_density(3, rng);
    const AncillaModel m(2, 3, UnitaryMatrix(identity(6)), rho_p, computational_projectors(3));
    const EffectList e = derive_povm(m);
    ASSERT_EQ(e.size(), 3u);
    for (Index b = 0; b < 3; ++b) {
        EXPECT_TRUE(MatrixNear(e.effects[static_cast<std::size_t>(b)], rho_p.matrix()(b, b).real() * identity(2), 1e-14));
    }
}

TEST(DerivePovm, SwapMeasuresTheSystem) {
    const AncillaModel m(2, 2, UnitaryMatrix(swap_gate()), DensityMatrix(outer(ket(2, 0))), computational_projectors(2));
    const EffectList e = derive_povm(m);
    for (Index b = 0; b < 2; ++b) {
        // explicit oracle: (E_b)_{ij} = sum_k [(I x rho_P) S^dag (I x Pi_b) S]_{(i,k),(j,k)}
        const Matrix joint = tensor_product(identity(2), outer(ket(2, 0))) * swap_gate().adjoint() *
                             tensor_product(identity(2), outer(ket(2, b))) * swap_gate();
        Matrix expected = Matrix::Zero(2, 2);
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 2; ++j)
                for (Index k = 0; k < 2; ++k) expected(i, j) += joint(i * 2 + k, j * 2 + k);
        EXPECT_TRUE(MatrixNear(expected, outer(ket(2, b)), 0.0));
        EXPECT_TRUE(MatrixNear(e.effects[static_cast<std::size_t>(b)], expected, 1e-15));
    }
}

TEST(DerivePovm, ReducedMatchesJointProbability) {
    Rng rng = make_stream(2);
    const AncillaModel m = random_model(2, 2, rng);
    const EffectList e = derive_povm(m);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
        const DensityMatrix rho = random_density(2, rng);
        for (std::size_t b = 0; b < e.size(); ++b)
            worst = std::max(worst, std::abs(effect_probability(rho, e.effects[b]) - joint_probability(rho, m, b)));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(DerivePovm, ReversedAdjointOrderingBreaksTheContract) {
    Rng rng = make_stream(3);
    const AncillaModel m = random_model(2, 2, rng);
    EXPECT_GT(reversed_ordering_gap(m, derive_povm(m)), 1e-3);
    // SWAP is real symmetric, so both orderings coincide there.
    const AncillaModel swap(2, 2, UnitaryMatrix(swap_gate()), DensityMatrix(outer(ket(2, 0))), computational_projectors(2));
    EXPECT_LE(reversed_ordering_gap(swap, derive_povm(swap)), 1e-15);
}

TEST(DerivePovm, RandomModelsArePovms) {
    Rng rng = make_stream(4);
    for (int trial = 0; trial < 40; ++trial) {
        const Index ds = 1 + static_cast<Index>(rng() % 4), dp = 1 + static_cast<Index>(rng() % 4);
        const EffectList e = derive_povm(random_model(ds, dp, rng));
        const ValidationReport r = verify_povm(e);
        EXPECT_TRUE(r.passed());
        EXPECT_LE(r.find("closure")->deviation, 1e-10);
    }
}

TEST(DerivePovm, CommutingCouplingExtractsNothing) {
    Rng rng = make_stream(5);
    // H = H_S x D_P with D_P diagonal in the measured ancilla basis commutes with I x Pi_b.
    const Matrix hs = random_hermitian(3, rng).matrix();
    const Matrix dp = testing::diag({0.3, -1.1});
    const UnitaryMatrix u = mat_exp_hermitian(tensor_product(hs, dp), 0.8);
    const DensityMatrix rho_p = random_density(2, rng);
    const EffectList e = derive_povm(AncillaModel(3, 2, u, rho_p, computational_projectors(2)));
    for (Index b = 0; b < 2; ++b) {
        EXPECT_TRUE(MatrixNear(e.effects[static_cast<std::size_t>(b)], rho_p.matrix()(b, b).real() * identity(3), 1e-12));
    }
}

TEST(AncillaModel, RejectsInconsistentInputs) {
    Rng rng = make_stream(6);
    EXPECT_THROW(AncillaModel(2, 2, haar_unitary(3, rng), random_density(2, rng), computational_projectors(2)), Error);
    EXPECT_THROW(AncillaModel(2, 2, haar_unitary(4, rng), random_density(3, rng), computational_projectors(2)), Error);
    std::vector<ProjectorMatrix> partial;
    partial.emplace_back(outer(ket(2, 0)));
    EXPECT_THROW(AncillaModel(2, 2, haar_unitary(4, rng), random_density(2, rng), partial), Error);
}

TEST(JointProbability, NoInteractionFactorizes) {
    Rng rng = make_stream(7);
    const DensityMatrix rho_p = random_density(2, rng);
    const AncillaModel m(3, 2, UnitaryMatrix(identity(6)), rho_p, computational_projectors(2));
    const DensityMatrix rho_s = random_density(3, rng);
    for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(joint_probability(rho_s, m, b), rho_p.matrix()(b, b).real(), 1e-14);
}

TEST(JointProbability, SwapReadsTheSystem) {
    const AncillaModel m(2, 2, UnitaryMatrix(swap_gate()), DensityMatrix(outer(ket(2, 0))), computational_projectors(2));
    EXPECT_NEAR(joint_probability(DensityMatrix(outer(ket(2, 1))), m, 1), 1.0, 1e-15);
    EXPECT_NEAR(joint_probability(DensityMatrix(outer(ket(2, 1))), m, 0), 0.0, 1e-15);
}

TEST(JointProbability, OutcomesAreComplete) {
    Rng rng = make_stream(8);
    for (int trial = 0; trial < 50; ++trial) {
        const Index ds = 1 + static_cast<Index>(rng() % 3), dp = 2 + static_cast<Index>(rng() % 3);
        const AncillaModel m = random_model(ds, dp, rng);
        const DensityMatrix rho = random_density(ds, rng);
        double total = 0.0;
        for (std::size_t b = 0; b < m.projectors().size(); ++b) total += joint_probability(rho, m, b);
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(JointProbability, Errors) {
    Rng rng = make_stream(9);
    const AncillaModel m = random_model(2, 2, rng);
    try {
        joint_probability(random_density(3, rng), m, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    try {
        joint_probability(random_density(2, rng), m, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
    }
}

TEST(VerifyPovm, ProjectiveMeasurement) {
    EffectList e;
    for (Index k = 0; k < 3; ++k) e.effects.push_back(outer(ket(3, k)));
    const ValidationReport r = verify_povm(e);
    EXPECT_TRUE(r.passed());
    for (const auto& c : r.checks)
        if (c.informational) EXPECT_EQ(c.detail, "orthogonal") << c.name;
}

TEST(VerifyPovm, HalfIdentityPairIsNonOrthogonal) {
    const ValidationReport r = verify_povm({{identity(2) / 2.0, identity(2) / 2.0}});
    EXPECT_TRUE(r.passed());
    const Check* overlap = r.find("overlap_0_1");
    ASSERT_NE(overlap, nullptr);
    EXPECT_TRUE(overlap->informational);
    EXPECT_EQ(overlap->detail, "non-orthogonal");
    EXPECT_NEAR(overlap->deviation, 0.25, 1e-15);
}

TEST(VerifyPovm, ClosureFailureLocated) {
    const ValidationReport r = verify_povm({{0.45 * identity(2), 0.45 * identity(2)}});
    EXPECT_FALSE(r.passed());
    EXPECT_FALSE(r.find("closure")->passed);
    EXPECT_NEAR(r.find("closure")->deviation, 0.1, 1e-15);
}

TEST(VerifyPovm, NegativeEffectLocated) {
    const ValidationReport r = verify_povm({{testing::diag({1.2, 0.5}), testing::diag({-0.2, 0.5})}});
    EXPECT_FALSE(r.passed());
    EXPECT_FALSE(r.find("effect_1_psd")->passed);
    EXPECT_TRUE(r.find("effect_0_psd")->passed);
}

TEST(Naimark, ProjectiveInputReproducesStatistics) {
    Rng rng = make_stream(10);
    const Matrix u = haar_unitary(3, rng).matrix();
    EffectList e;
    for (Index k = 0; k < 3; ++k) e.effects.push_back(outer(u.col(k)));
    const NaimarkDilation dil = naimark_dilate(e);
    EXPECT_EQ(dil.ancilla_dim, 3);
    for (int s = 0; s < 10; ++s) {
        const DensityMatrix rho = random_density(3, rng);
        for (std::size_t b = 0; b < 3; ++b)
            EXPECT_NEAR(dil.probability(rho, b), effect_probability(rho, e.effects[b]), 1e-12);
    }
}

TEST(Naimark, HalfIdentityPair) {
    Rng rng = make_stream(11);
    const NaimarkDilation dil = naimark_dilate({{identity(2) / 2.0, identity(2) / 2.0}});
    EXPECT_EQ(dil.ancilla_dim, 2);
    EXPECT_EQ(dil.isometry.rows(), 4);
    for (int s = 0; s < 10; ++s) {
        const DensityMatrix rho = random_density(2, rng);
        EXPECT_NEAR(dil.probability(rho, 0), 0.5, 1e-14);
        EXPECT_NEAR(dil.probability(rho, 1), 0.5, 1e-14);
    }
}

TEST(Naimark, RejectsInvalidPovm) {
    try {
        naimark_dilate({{0.45 * identity(2), 0.45 * identity(2)}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidPOVM);
    }
}

TEST(Naimark, UnitaryCompletionRoundTrip) {
    Rng rng = make_stream(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Index ds = 2 + static_cast<Index>(rng() % 2), dp = 2 + static_cast<Index>(rng() % 3);
        const EffectList e = derive_povm(random_model(ds, dp, rng));
        const NaimarkDilation dil = naimark_dilate(e);
        const UnitaryMatrix u = unitary_completion(dil);
        std::vector<ProjectorMatrix> ancilla = computational_projectors(dil.ancilla_dim);
        const AncillaModel model(ds, dil.ancilla_dim, u, DensityMatrix(outer(ket(dil.ancilla_dim, 0))), ancilla);
        const EffectList back = derive_povm(model);
        for (std::size_t b = 0; b < e.size(); ++b) EXPECT_TRUE(MatrixNear(back.effects[b], e.effects[b], 1e-9));
    }
}

TEST(SqrtPsd, ClampsTinyNegativesAndRejectsLargeOnes) {
    EXPECT_TRUE(MatrixNear(sqrt_psd(testing::diag({4.0, -1e-12})), testing::diag({2.0, 0.0}), 1e-15));
    EXPECT_THROW(sqrt_psd(testing::diag({4.0, -1e-3})), Error);
}

}  // namespace
}  // namespace qrecon
