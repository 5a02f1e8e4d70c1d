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

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qrecon/matrix_core.hpp"
#include "qrecon/question_lattice.hpp"

namespace qrecon {

/// Dimensionless energies, hbar = 1.
struct Hamiltonian {
    HermitianMatrix h;
    std::string label;

    [[nodiscard]] Index dim() const { return h.dim(); }
};

struct Propagator {
    UnitaryMatrix u;
    double t = 0.0;

    [[nodiscard]] Index dim() const { return u.dim(); }
};

inline Propagator propagator(const Hamiltonian& h, double t, const Tolerances& tol = {}) {
    return {mat_exp_hermitian(h.h, t, tol), t};
}

/// Q -> U Q U^dag
inline Question evolve_question(const Question& q, const Propagator& p, const Tolerances& tol = {}) {
    require_same_dim(q.matrix(), p.u.matrix(), "evolve_question");
    const Matrix& u = p.u.matrix();
    Matrix evolved = u * q.matrix() * u.adjoint();
    evolved = 0.5 * (evolved + evolved.adjoint()).eval();
    return {ProjectorMatrix(std::move(evolved), tol), q.label};
}

/// rho -> U rho U^dag
inline DensityMatrix evolve_joint(const DensityMatrix& rho, const Propagator& p, const Tolerances& tol = {}) {
    require_same_dim(rho.matrix(), p.u.matrix(), "evolve_joint");
    const Matrix& u = p.u.matrix();
    Matrix evolved = u * rho.matrix() * u.adjoint();
    evolved = 0.5 * (evolved + evolved.adjoint()).eval();
    return DensityMatrix(std::move(evolved), tol);
}

/// U(t1)U(t2) = U(t2)U(t1) = U(t1+t2) and U(-t) = U(t)^dag over all pairs.
inline ValidationReport check_abelian_group(const Hamiltonian& h, const std::vector<double>& times,
                                            double threshold = 1e-9, const Tolerances& tol = {}) {
    ValidationReport report;
    std::vector<Matrix> us;
    us.reserve(times.size());
    for (double t : times) us.push_back(mat_exp_hermitian(h.h, t, tol).matrix());

    double composition = 0.0, commutation = 0.0, inverse = 0.0;
    for (std::size_t a = 0; a < times.size(); ++a) {
        const Matrix u_neg = mat_exp_hermitian(h.h, -times[a], tol).matrix();
        inverse = std::max(inverse, max_abs(u_neg - us[a].adjoint()));
        for (std::size_t b = 0; b < times.size(); ++b) {
            const Matrix sum = mat_exp_hermitian(h.h, times[a] + times[b], tol).matrix();
            const Matrix ab = us[a] * us[b];
            composition = std::max(composition, max_abs(ab - sum));
            commutation = std::max(commutation, max_abs(ab - us[b] * us[a]));
        }
    }
    report.bound("composition", composition, threshold);
    report.bound("commutativity", commutation, threshold);
    report.bound("inverse_is_adjoint", inverse, threshold);
    return report;
}

/// Commutativity of propagators generated by two Hamiltonians over a time grid.
inline ValidationReport check_cross_commutativity(const Hamiltonian& h1, const Hamiltonian& h2,
                                                  const std::vector<double>& times, double threshold = 1e-9,
                                                  const Tolerances& tol = {}) {
    ValidationReport report;
    double worst = 0.0;
    for (double s : times) {
        const Matrix u1 = mat_exp_hermitian(h1.h, s, tol).matrix();
        for (double t : times) {
            const Matrix u2 = mat_exp_hermitian(h2.h, t, tol).matrix();
            worst = std::max(worst, max_abs(u1 * u2 - u2 * u1));
        }
    }
    report.bound("cross_commutativity", worst, threshold);
    return report;
}

/// Principal logarithm: H = -(1/t) V diag(theta) V^dag with eigenphases theta
/// in (-pi, pi). U is normal, so its complex Schur form is diagonal.
inline Hamiltonian hamiltonian_log(const Propagator& p, const Tolerances& tol = {}) {
    if (p.t == 0.0) throw Error(ErrorKind::ZeroTime, "cannot recover a Hamiltonian from t = 0");
    const Matrix& u = p.u.matrix();
    Eigen::ComplexSchur<Matrix> schur(u);
    if (schur.info() != Eigen::Success) throw Error(ErrorKind::InvariantViolation, "Schur decomposition failed");
    const Matrix& q = schur.matrixU();
    const Matrix& t = schur.matrixT();
    const Index d = u.rows();
    RealVector phases(d);
    for (Index k = 0; k < d; ++k) {
        const double theta = std::arg(t(k, k));
        if (std::numbers::pi - std::abs(theta) <= tol.branch_cut) {
            std::ostringstream os;
            os << "eigenphase " << theta << " lies on the branch cut; the logarithm is not unique";
            throw Error(ErrorKind::BranchCut, os.str());
        }
        phases(k) = theta;
    }
    Matrix h = -(1.0 / p.t) * q * phases.cast<Complex>().asDiagonal() * q.adjoint();
    h = 0.5 * (h + h.adjoint()).eval();
    return {HermitianMatrix(std::move(h), tol), "log"};
}

}  // namespace qrecon
