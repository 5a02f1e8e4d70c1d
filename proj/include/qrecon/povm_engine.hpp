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

#include <sstream>
#include <string>
#include <vector>

#include "qrecon/matrix_core.hpp"

namespace qrecon {

/// System S coupled to an ancilla P by U, after which P is measured with a
/// projective resolution of the identity.
class AncillaModel {
public:
    AncillaModel(Index ds, Index dp, UnitaryMatrix u, DensityMatrix rho_p, std::vector<ProjectorMatrix> projectors_p,
                 const Tolerances& tol = {})
        : ds_(ds), dp_(dp), u_(std::move(u)), rho_p_(std::move(rho_p)), projectors_(std::move(projectors_p)) {
        if (ds_ < 1 || dp_ < 1) throw Error(ErrorKind::InvalidArgument, "dS and dP must be positive");
        if (u_.dim() != ds_ * dp_) {
            throw Error(ErrorKind::DimensionMismatch, "U must act on dS*dP = " + std::to_string(ds_ * dp_) +
                                                          " dimensions, got " + std::to_string(u_.dim()));
        }
        if (rho_p_.dim() != dp_) throw Error(ErrorKind::DimensionMismatch, "rho_P must have dimension dP");
        if (projectors_.empty()) throw Error(ErrorKind::InvalidArgument, "no ancilla projectors");
        Matrix sum = Matrix::Zero(dp_, dp_);
        for (std::size_t a = 0; a < projectors_.size(); ++a) {
            if (projectors_[a].dim() != dp_) throw Error(ErrorKind::DimensionMismatch, "ancilla projector dimension");
            sum += projectors_[a].matrix();
            for (std::size_t b = a + 1; b < projectors_.size(); ++b) {
                if (max_abs(projectors_[a].matrix() * projectors_[b].matrix()) > tol.atoms) {
                    throw Error(ErrorKind::InvariantViolation, "ancilla projectors are not mutually orthogonal");
                }
            }
        }
        if (max_abs(sum - identity(dp_)) > tol.atoms) {
            throw Error(ErrorKind::InvariantViolation, "ancilla projectors do not resolve the identity");
        }
    }

    [[nodiscard]] Index ds() const { return ds_; }
    [[nodiscard]] Index dp() const { return dp_; }
    [[nodiscard]] const UnitaryMatrix& u() const { return u_; }
    [[nodiscard]] const DensityMatrix& rho_p() const { return rho_p_; }
    [[nodiscard]] const std::vector<ProjectorMatrix>& projectors() const { return projectors_; }

private:
    Index ds_;
    Index dp_;
    UnitaryMatrix u_;
    DensityMatrix rho_p_;
    std::vector<ProjectorMatrix> projectors_;
};

/// Effects of a measurement on S. Not validated on construction; see verify_povm.
struct EffectList {
    std::vector<Matrix> effects;

    [[nodiscard]] std::size_t size() const { return effects.size(); }
    [[nodiscard]] Index dim() const { return effects.empty() ? 0 : effects.front().rows(); }
};

/// PSD margin and closure per effect list; pairwise overlaps |E_a E_b|_max are
/// recorded as informational entries because POVM elements need not be orthogonal.
inline ValidationReport verify_povm(const EffectList& e, const Tolerances& tol = {}) {
    ValidationReport report;
    if (e.effects.empty()) {
        report.verdict("nonempty", false, "no effects");
        return report;
    }
    const Index d = e.dim();
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t b = 0; b < e.size(); ++b) {
        const Matrix& eb = e.effects[b];
        const std::string tag = "effect_" + std::to_string(b);
        if (eb.rows() != d || eb.cols() != d || !is_finite(eb)) {
            report.verdict(tag + "_shape", false, "expected finite " + std::to_string(d) + "x" + std::to_string(d));
            return report;
        }
        report.bound(tag + "_hermitian", max_abs(eb - eb.adjoint()), tol.hermitian);
        const double min_eig = hermitian_eigen(eb).values.minCoeff();
        report.bound(tag + "_psd", std::max(0.0, -min_eig), tol.povm_psd, "min eigenvalue " + std::to_string(min_eig));
        sum += eb;
    }
    report.bound("closure", max_abs(sum - identity(d)), tol.povm_closure);
    for (std::size_t a = 0; a < e.size(); ++a) {
        for (std::size_t b = a + 1; b < e.size(); ++b) {
            const double overlap = max_abs(e.effects[a] * e.effects[b]);
            const bool orth = overlap <= tol.lattice;
            report.note("overlap_" + std::to_string(a) + "_" + std::to_string(b), overlap,
                        orth ? "orthogonal" : "non-orthogonal");
        }
    }
    return report;
}

/// E_b = Tr_P((I x rho_P) U^dag (I x Pi_b) U), the unique operators with
/// Tr(rho_S E_b) = Tr(U (rho_S x rho_P) U^dag (I x Pi_b)) for every rho_S.
inline EffectList derive_povm(const AncillaModel& m, const Tolerances& tol = {}) {
    const Index ds = m.ds(), dp = m.dp();
    const Matrix& u = m.u().matrix();
    const Matrix id_s = identity(ds);
    const Matrix with_state = tensor_product(id_s, m.rho_p().matrix());
    EffectList out;
    for (const auto& pi : m.projectors()) {
        const Matrix heisenberg = u.adjoint() * tensor_product(id_s, pi.matrix()) * u;
        Matrix eb = partial_trace(with_state * heisenberg, ds, dp, Subsystem::P);
        eb = 0.5 * (eb + eb.adjoint()).eval();
        out.effects.push_back(std::move(eb));
    }
    const ValidationReport report = verify_povm(out, tol);
    if (!report.passed()) {
        throw Error(ErrorKind::InvariantViolation, "derived effects are not a POVM: " + describe_failures(report));
    }
    return out;
}

/// Largest entry gap between the derived effects and the reversed ordering
/// Tr_P((I x rho_P) U (I x Pi_b) U^dag). The two agree when U is real
/// symmetric or commutes with every I x Pi_b, and differ in general.
inline double reversed_ordering_gap(const AncillaModel& m, const EffectList& derived) {
    const Index ds = m.ds(), dp = m.dp();
    const Matrix& u = m.u().matrix();
    const Matrix with_state = tensor_product(identity(ds), m.rho_p().matrix());
    double gap = 0.0;
    for (std::size_t b = 0; b < m.projectors().size(); ++b) {
        const Matrix reversed = partial_trace(
            with_state * u * tensor_product(identity(ds), m.projectors()[b].matrix()) * u.adjoint(), ds, dp, Subsystem::P);
        gap = std::max(gap, max_abs(reversed - derived.effects.at(b)));
    }
    return gap;
}

/// Tr(U (rho_S x rho_P) U^dag (I x Pi_b)) computed on the joint space.
inline double joint_probability(const DensityMatrix& rho_s, const AncillaModel& m, std::size_t b) {
    if (rho_s.dim() != m.ds()) throw Error(ErrorKind::DimensionMismatch, "rho_S dimension differs from dS");
    if (b >= m.projectors().size()) {
        throw Error(ErrorKind::IndexOutOfRange, "outcome " + std::to_string(b) + " of " +
                                                    std::to_string(m.projectors().size()));
    }
    const Matrix& u = m.u().matrix();
    const Matrix evolved = u * tensor_product(rho_s.matrix(), m.rho_p().matrix()) * u.adjoint();
    return (evolved * tensor_product(identity(m.ds()), m.projectors()[b].matrix())).trace().real();
}

inline double effect_probability(const DensityMatrix& rho_s, const Matrix& effect) {
    require_same_dim(rho_s.matrix(), effect, "effect_probability");
    return (rho_s.matrix() * effect).trace().real();
}

/// Isometry V: C^dS -> C^dS (x) C^m with V^dag (I x |b><b|) V = E_b.
struct NaimarkDilation {
    Matrix isometry;
    Index system_dim = 0;
    Index ancilla_dim = 0;
    std::vector<ProjectorMatrix> projectors;

    /// Tr(rho V^dag Pi_b V)
    [[nodiscard]] double probability(const DensityMatrix& rho, std::size_t b) const {
        if (rho.dim() != system_dim) throw Error(ErrorKind::DimensionMismatch, "state dimension differs from dilation");
        if (b >= projectors.size()) throw Error(ErrorKind::IndexOutOfRange, "dilation outcome out of range");
        return (rho.matrix() * isometry.adjoint() * projectors[b].matrix() * isometry).trace().real();
    }
};

/// V = sum_b sqrt(E_b) x |b>, measured by I x |b><b|.
inline NaimarkDilation naimark_dilate(const EffectList& e, const Tolerances& tol = {}) {
    const ValidationReport report = verify_povm(e, tol);
    if (!report.passed()) throw Error(ErrorKind::InvalidPOVM, describe_failures(report));
    const Index ds = e.dim();
    const Index m = static_cast<Index>(e.size());
    NaimarkDilation out;
    out.system_dim = ds;
    out.ancilla_dim = m;
    out.isometry = Matrix::Zero(ds * m, ds);
    for (Index b = 0; b < m; ++b) {
        out.isometry += tensor_product(sqrt_psd(e.effects[static_cast<std::size_t>(b)], tol.povm_psd),
                                       ket(m, b));
    }
    const double iso_dev = max_abs(out.isometry.adjoint() * out.isometry - identity(ds));
    if (iso_dev > tol.povm_closure * 10) {
        throw Error(ErrorKind::InvariantViolation, "dilation is not an isometry (deviation " + std::to_string(iso_dev) + ")");
    }
    for (Index b = 0; b < m; ++b) {
        out.projectors.emplace_back(tensor_product(identity(ds), outer(ket(m, b))), tol);
    }
    return out;
}

/// Unitary on C^dS (x) C^m whose columns (j, 0) are the isometry's columns j;
/// the rest is an orthonormal extension by canonical vectors with
/// re-orthogonalised Gram-Schmidt.
inline UnitaryMatrix unitary_completion(const NaimarkDilation& dilation, const Tolerances& tol = {}) {
    const Index ds = dilation.system_dim;
    const Index m = dilation.ancilla_dim;
    const Index n = ds * m;
    std::vector<Vector> basis;
    basis.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < ds; ++j) basis.push_back(dilation.isometry.col(j));

    for (Index e = 0; e < n && static_cast<Index>(basis.size()) < n; ++e) {
        Vector v = ket(n, e);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& w : basis) v -= w * w.dot(v);
        }
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        basis.push_back(v / norm);
    }
    if (static_cast<Index>(basis.size()) != n) {
        throw Error(ErrorKind::InvariantViolation, "unitary completion could not span the dilated space");
    }

    Matrix u(n, n);
    for (Index j = 0; j < ds; ++j) u.col(j * m) = basis[static_cast<std::size_t>(j)];
    std::size_t next = static_cast<std::size_t>(ds);
    for (Index j = 0; j < ds; ++j)
        for (Index a = 1; a < m; ++a) u.col(j * m + a) = basis[next++];
    return UnitaryMatrix(std::move(u), tol);
}

}  // namespace qrecon
