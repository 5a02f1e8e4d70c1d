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
#include <complex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qrecon/error.hpp"
#include "qrecon/tolerances.hpp"
#include "qrecon/validation.hpp"

namespace qrecon {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Matrix identity(Index d) { return Matrix::Identity(d, d); }

inline Matrix dagger(const Matrix& m) { return m.adjoint(); }

/// Largest entry modulus; the norm every tolerance in this library refers to.
inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool is_finite(const Matrix& m) { return m.allFinite(); }

inline Matrix pauli_x() { Matrix m(2, 2); m << 0, 1, 1, 0; return m; }
inline Matrix pauli_y() { Matrix m(2, 2); m << 0, Complex(0, -1), Complex(0, 1), 0; return m; }
inline Matrix pauli_z() { Matrix m(2, 2); m << 1, 0, 0, -1; return m; }

inline Vector ket(Index d, Index i) {
    Vector v = Vector::Zero(d);
    v(i) = 1.0;
    return v;
}

/// |v><v| / <v|v>
inline Matrix outer(const Vector& v) { return v * v.adjoint() / v.squaredNorm(); }

/// Orthogonal projector onto the span of orthonormal columns.
inline Matrix span_projector(const Matrix& orthonormal_columns, Index d) {
    if (orthonormal_columns.cols() == 0) return Matrix::Zero(d, d);
    return orthonormal_columns * orthonormal_columns.adjoint();
}

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        std::ostringstream os;
        os << what << " must be square with dim >= 1, got " << m.rows() << "x" << m.cols();
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    if (!is_finite(m)) throw Error(ErrorKind::InvariantViolation, std::string(what) + " has non-finite entries");
}

inline void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream os;
        os << what << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct Spectrum {
    RealVector values;
    Matrix vectors;
};

inline Spectrum hermitian_eigen(const Matrix& h) {
    const Matrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::InvariantViolation, "Hermitian eigendecomposition did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// V f(Lambda) V^dag for a Hermitian argument.
template <class F>
Matrix hermitian_function(const Matrix& h, F&& f) {
    const Spectrum s = hermitian_eigen(h);
    Vector mapped(s.values.size());
    for (Index k = 0; k < s.values.size(); ++k) mapped(k) = f(s.values(k));
    return s.vectors * mapped.asDiagonal() * s.vectors.adjoint();
}

/// Square root of a numerically PSD matrix; eigenvalues down to -clamp are treated as zero.
inline Matrix sqrt_psd(const Matrix& m, double clamp = 1e-10) {
    return hermitian_function(m, [clamp](double x) -> Complex {
        if (x < -clamp) {
            std::ostringstream os;
            os << "sqrt_psd: eigenvalue " << x << " below -" << clamp;
            throw Error(ErrorKind::InvariantViolation, os.str());
        }
        return std::sqrt(std::max(x, 0.0));
    });
}

enum class MatrixKind { Hermitian, Unitary, Projector, Density };

inline std::string_view to_string(MatrixKind k) {
    switch (k) {
        case MatrixKind::Hermitian: return "hermitian";
        case MatrixKind::Unitary: return "unitary";
        case MatrixKind::Projector: return "projector";
        case MatrixKind::Density: return "density";
    }
    return "unknown";
}

/// Checks every invariant of \p kind and reports the worst deviation of each.
/// Never throws; a malformed (non-square, non-finite) input fails the "shape" check.
inline ValidationReport validate(const Matrix& m, MatrixKind kind, const Tolerances& tol = {}) {
    ValidationReport report;
    const bool shaped = m.rows() == m.cols() && m.rows() >= 1;
    report.verdict("shape", shaped, shaped ? "" : "not square or empty");
    if (!shaped) return report;
    const bool finite = is_finite(m);
    report.verdict("finite", finite);
    if (!finite) return report;

    const Index d = m.rows();
    const Matrix I = identity(d);
    if (kind == MatrixKind::Unitary) {
        report.bound("unitarity", max_abs(m.adjoint() * m - I), tol.unitary);
        return report;
    }

    report.bound("hermiticity", max_abs(m - m.adjoint()), tol.hermitian);
    if (kind == MatrixKind::Hermitian) return report;

    const RealVector eig = hermitian_eigen(m).values;
    if (kind == MatrixKind::Projector) {
        report.bound("idempotence", max_abs(m * m - m), tol.projector);
        double worst = 0.0;
        for (Index k = 0; k < d; ++k) {
            const double x = eig(k);
            worst = std::max(worst, std::min(std::abs(x), std::abs(x - 1.0)));
        }
        report.bound("eigenvalues_in_0_1", worst, tol.projector_eigen);
        return report;
    }

    // density
    report.bound("unit_trace", std::abs(m.trace() - Complex(1.0)), tol.density_trace);
    const double min_eig = eig.minCoeff();
    report.bound("positivity", std::max(0.0, -min_eig), tol.density_psd);
    return report;
}

inline std::string describe_failures(const ValidationReport& report) {
    std::ostringstream os;
    bool first = true;
    for (const Check* c : report.failures()) {
        if (!first) os << "; ";
        first = false;
        os << c->name << " deviation " << c->deviation << " > " << c->threshold;
        if (!c->detail.empty()) os << " (" << c->detail << ")";
    }
    return os.str();
}

/// Orthonormal Hermitian basis of the d x d matrices (generalized Gell-Mann
/// matrices together with I / sqrt(d)), trace-orthonormal: Tr(G_a G_b) = delta_ab.
inline std::vector<Matrix> hermitian_basis(Index d) {
    std::vector<Matrix> basis;
    basis.reserve(static_cast<std::size_t>(d * d));
    basis.push_back(identity(d) / std::sqrt(static_cast<double>(d)));
    const double r2 = std::sqrt(2.0);
    for (Index j = 0; j < d; ++j) {
        for (Index k = j + 1; k < d; ++k) {
            Matrix s = Matrix::Zero(d, d);
            s(j, k) = s(k, j) = 1.0 / r2;
            basis.push_back(std::move(s));
            Matrix a = Matrix::Zero(d, d);
            a(j, k) = Complex(0, -1.0 / r2);
            a(k, j) = Complex(0, 1.0 / r2);
            basis.push_back(std::move(a));
        }
    }
    for (Index l = 1; l < d; ++l) {
        Matrix g = Matrix::Zero(d, d);
        const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
        for (Index m = 0; m < l; ++m) g(m, m) = norm;
        g(l, l) = -static_cast<double>(l) * norm;
        basis.push_back(std::move(g));
    }
    return basis;
}

/// A dense matrix whose invariants of \p Kind were verified at construction.
/// Immutable afterwards.
template <MatrixKind Kind>
class Checked {
public:
    static constexpr MatrixKind kind = Kind;

    explicit Checked(Matrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
        const ValidationReport report = validate(m_, Kind, tol);
        if (!report.passed()) {
            const ErrorKind err =
                Kind == MatrixKind::Hermitian ? ErrorKind::NotHermitian : ErrorKind::InvariantViolation;
            throw Error(err, std::string("not a valid ") + std::string(to_string(Kind)) + " matrix: " +
                                 describe_failures(report));
        }
    }

    /// Projectors and density matrices are Hermitian.
    template <MatrixKind Other>
        requires(Kind == MatrixKind::Hermitian &&
                 (Other == MatrixKind::Projector || Other == MatrixKind::Density))
    Checked(const Checked<Other>& other) : m_(other.matrix()) {}

    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
    [[nodiscard]] Index dim() const noexcept { return m_.rows(); }
    operator const Matrix&() const noexcept { return m_; }

    [[nodiscard]] Index rank() const
        requires(Kind == MatrixKind::Projector)
    {
        return static_cast<Index>(std::llround(m_.trace().real()));
    }

private:
    Matrix m_;
};

using HermitianMatrix = Checked<MatrixKind::Hermitian>;
using UnitaryMatrix = Checked<MatrixKind::Unitary>;
using ProjectorMatrix = Checked<MatrixKind::Projector>;
using DensityMatrix = Checked<MatrixKind::Density>;

/// Kronecker product with the first factor's index major:
/// out[(i*dB + k), (j*dB + l)] = A[i,j] * B[k,l].
inline Matrix tensor_product(const Matrix& a, const Matrix& b) {
    const Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    Matrix out(ar * br, ac * bc);
    for (Index i = 0; i < ar; ++i) {
        for (Index j = 0; j < ac; ++j) {
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
        }
    }
    return out;
}

enum class Subsystem { S, P };

/// Traces out one factor of a bipartite operator on C^dS (x) C^dP.
inline Matrix partial_trace(const Matrix& m, Index ds, Index dp, Subsystem over) {
    if (ds < 1 || dp < 1 || m.rows() != ds * dp || m.cols() != ds * dp) {
        std::ostringstream os;
        os << "partial_trace: dims (" << ds << "," << dp << ") do not factor a " << m.rows() << "x"
           << m.cols() << " matrix";
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    if (over == Subsystem::P) {
        Matrix out = Matrix::Zero(ds, ds);
        for (Index i = 0; i < ds; ++i)
            for (Index j = 0; j < ds; ++j)
                for (Index k = 0; k < dp; ++k) out(i, j) += m(i * dp + k, j * dp + k);
        return out;
    }
    Matrix out = Matrix::Zero(dp, dp);
    for (Index k = 0; k < dp; ++k)
        for (Index l = 0; l < dp; ++l)
            for (Index i = 0; i < ds; ++i) out(k, l) += m(i * dp + k, i * dp + l);
    return out;
}

/// exp(-i t H) through the spectral decomposition H = V diag(lambda) V^dag.
inline UnitaryMatrix mat_exp_hermitian(const HermitianMatrix& h, double t, const Tolerances& tol = {}) {
    const Complex minus_i_t(0.0, -t);
    return UnitaryMatrix(
        hermitian_function(h.matrix(), [minus_i_t](double lambda) { return std::exp(minus_i_t * lambda); }),
        tol);
}

inline UnitaryMatrix mat_exp_hermitian(const Matrix& h, double t, const Tolerances& tol = {}) {
    require_square(h, "mat_exp_hermitian");
    return mat_exp_hermitian(HermitianMatrix(h, tol), t, tol);
}

}  // namespace qrecon
