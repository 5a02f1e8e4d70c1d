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
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qrecon/matrix_core.hpp"
#include "qrecon/povm_engine.hpp"
#include "qrecon/random.hpp"

namespace qrecon {

/// Mutually orthogonal projectors summing to I.
class ResolutionOfIdentity {
public:
    explicit ResolutionOfIdentity(std::vector<ProjectorMatrix> projectors, const Tolerances& tol = {})
        : projectors_(std::move(projectors)) {
        if (projectors_.empty()) throw Error(ErrorKind::InvalidArgument, "empty resolution of the identity");
        const Index d = projectors_.front().dim();
        Matrix sum = Matrix::Zero(d, d);
        for (std::size_t a = 0; a < projectors_.size(); ++a) {
            if (projectors_[a].dim() != d) throw Error(ErrorKind::DimensionMismatch, "resolution mixes dimensions");
            sum += projectors_[a].matrix();
            for (std::size_t b = a + 1; b < projectors_.size(); ++b) {
                if (max_abs(projectors_[a].matrix() * projectors_[b].matrix()) > tol.atoms) {
                    throw Error(ErrorKind::InvariantViolation, "resolution projectors are not orthogonal");
                }
            }
        }
        if (max_abs(sum - identity(d)) > tol.atoms) {
            throw Error(ErrorKind::InvariantViolation, "resolution projectors do not sum to I");
        }
    }

    /// Rank-1 projectors onto the columns of a unitary.
    static ResolutionOfIdentity from_basis(const Matrix& columns, const Tolerances& tol = {}) {
        std::vector<ProjectorMatrix> ps;
        for (Index k = 0; k < columns.cols(); ++k) ps.emplace_back(outer(columns.col(k)), tol);
        return ResolutionOfIdentity(std::move(ps), tol);
    }

    [[nodiscard]] const std::vector<ProjectorMatrix>& projectors() const { return projectors_; }
    [[nodiscard]] std::size_t size() const { return projectors_.size(); }
    [[nodiscard]] Index dim() const { return projectors_.front().dim(); }

private:
    std::vector<ProjectorMatrix> projectors_;
};

/// Probability values assigned to one resolution. Deliberately unchecked so
/// that invalid assignments can be represented and diagnosed.
struct FrameSample {
    ResolutionOfIdentity resolution;
    std::vector<double> values;
};

/// Eigenvector frame of a seeded random Hermitian matrix.
inline ResolutionOfIdentity random_resolution(Index d, Rng& rng, const Tolerances& tol = {}) {
    return ResolutionOfIdentity::from_basis(hermitian_eigen(random_hermitian(d, rng)).vectors, tol);
}

/// Random rank-1 resolution whose first projector is |v><v|.
inline ResolutionOfIdentity random_resolution_containing(const Vector& v, Rng& rng, const Tolerances& tol = {}) {
    const Index d = v.size();
    const Vector unit = v / v.norm();
    Matrix columns = ginibre(d, d, rng);
    columns.col(0) = unit;
    Eigen::HouseholderQR<Matrix> qr(columns);
    Matrix q = qr.householderQ();
    // Q's first column is unit up to a phase; restore it exactly so the shared
    // projector matches across resolutions.
    q.col(0) = unit;
    for (Index k = 1; k < d; ++k) {
        for (int pass = 0; pass < 2; ++pass)
            for (Index j = 0; j < k; ++j) q.col(k) -= q.col(j) * q.col(j).dot(q.col(k));
        q.col(k).normalize();
    }
    return ResolutionOfIdentity::from_basis(q, tol);
}

inline std::vector<FrameSample> frame_samples_from_state(const DensityMatrix& rho,
                                                        const std::vector<ResolutionOfIdentity>& resolutions) {
    std::vector<FrameSample> out;
    out.reserve(resolutions.size());
    for (const auto& r : resolutions) {
        if (r.dim() != rho.dim()) throw Error(ErrorKind::DimensionMismatch, "resolution and state dimensions differ");
        std::vector<double> values;
        for (const auto& p : r.projectors()) values.push_back((rho.matrix() * p.matrix()).trace().real());
        out.push_back({r, std::move(values)});
    }
    return out;
}

/// Projectors that occur in several resolutions must receive one value.
inline ValidationReport noncontextuality_check(const std::vector<FrameSample>& samples, const Tolerances& tol = {}) {
    struct Entry {
        const Matrix* projector;
        double value;
        std::size_t sample;
        std::size_t index;
    };
    std::vector<Entry> entries;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto& ps = samples[s].resolution.projectors();
        for (std::size_t k = 0; k < ps.size() && k < samples[s].values.size(); ++k) {
            entries.push_back({&ps[k].matrix(), samples[s].values[k], s, k});
        }
    }
    double worst = 0.0;
    std::size_t shared = 0;
    std::size_t conflicts = 0;
    std::string first_conflict;
    for (std::size_t a = 0; a < entries.size(); ++a) {
        for (std::size_t b = a + 1; b < entries.size(); ++b) {
            const Entry& x = entries[a];
            const Entry& y = entries[b];
            if (x.sample == y.sample || x.projector->rows() != y.projector->rows()) continue;
            if (max_abs(*x.projector - *y.projector) > tol.context_match) continue;
            ++shared;
            const double gap = std::abs(x.value - y.value);
            worst = std::max(worst, gap);
            if (gap > tol.context_value) {
                if (conflicts++ == 0) {
                    std::ostringstream os;
                    os << "projector " << x.index << " of sample " << x.sample << " (" << x.value << ") vs projector "
                       << y.index << " of sample " << y.sample << " (" << y.value << ")";
                    first_conflict = os.str();
                }
            }
        }
    }
    ValidationReport report;
    report.note("shared_projector_pairs", static_cast<double>(shared));
    Check& c = report.bound("noncontextual", worst, tol.context_value, first_conflict);
    if (conflicts > 0) c.detail = std::to_string(conflicts) + " conflicts; first: " + first_conflict;
    return report;
}

/// Range and unit-sum constraints per resolution, merged with the
/// non-contextuality check.
inline ValidationReport check_frame_function(const std::vector<FrameSample>& samples, const Tolerances& tol = {}) {
    ValidationReport report;
    double range_dev = 0.0, sum_dev = 0.0;
    std::string range_at, sum_at;
    bool shape_ok = true;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const FrameSample& fs = samples[s];
        if (fs.values.size() != fs.resolution.size()) {
            shape_ok = false;
            continue;
        }
        double total = 0.0;
        for (std::size_t k = 0; k < fs.values.size(); ++k) {
            const double v = fs.values[k];
            const double dev = std::max({0.0, -v, v - 1.0});
            if (dev > range_dev) {
                range_dev = dev;
                range_at = "sample " + std::to_string(s) + " projector " + std::to_string(k);
            }
            total += v;
        }
        if (std::abs(total - 1.0) > sum_dev) {
            sum_dev = std::abs(total - 1.0);
            sum_at = "sample " + std::to_string(s);
        }
    }
    report.verdict("one_value_per_projector", shape_ok);
    report.bound("values_in_unit_interval", range_dev, tol.frame_range, range_dev > tol.frame_range ? range_at : "");
    report.bound("values_sum_to_one", sum_dev, tol.frame_sum, sum_dev > tol.frame_sum ? sum_at : "");
    report.merge(noncontextuality_check(samples, tol));
    return report;
}

struct FitResult {
    HermitianMatrix rho_hat;
    double residual = 0.0;         // RMS of Tr(rho_hat E) - f over all equations
    double psd_violation = 0.0;    // most negative eigenvalue, 0 if none
    double trace_deviation = 0.0;  // |Tr rho_hat - 1|
    Index design_rank = 0;
    std::size_t equations = 0;
    bool rank_deficient = false;
};

/// Least-squares Hermitian rho minimising sum (Tr(rho E) - f)^2 in the
/// orthonormal Hermitian coordinates; minimum-norm when the design is rank deficient.
inline FitResult fit_linear(const std::vector<std::pair<const Matrix*, double>>& equations, Index d,
                            const Tolerances& tol = {}) {
    if (equations.empty()) throw Error(ErrorKind::InvalidArgument, "no equations to fit");
    const std::vector<Matrix> basis = hermitian_basis(d);
    const Index n = static_cast<Index>(basis.size());
    const Index m = static_cast<Index>(equations.size());
    RealMatrix design(m, n);
    RealVector rhs(m);
    for (Index r = 0; r < m; ++r) {
        const Matrix& e = *equations[static_cast<std::size_t>(r)].first;
        if (e.rows() != d) throw Error(ErrorKind::DimensionMismatch, "fit equation on a different space");
        for (Index a = 0; a < n; ++a) design(r, a) = (basis[static_cast<std::size_t>(a)] * e).trace().real();
        rhs(r) = equations[static_cast<std::size_t>(r)].second;
    }
    Eigen::JacobiSVD<RealMatrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    const double cutoff = tol.fit_rank * (sv.size() > 0 ? sv(0) : 0.0);
    svd.setThreshold(tol.fit_rank);
    const RealVector x = svd.solve(rhs);
    Index rank = 0;
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) ++rank;

    Matrix rho = Matrix::Zero(d, d);
    for (Index a = 0; a < n; ++a) rho += x(a) * basis[static_cast<std::size_t>(a)];
    rho = 0.5 * (rho + rho.adjoint()).eval();

    const RealVector resid = design * x - rhs;
    FitResult out{HermitianMatrix(rho, tol)};
    out.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
    out.psd_violation = std::max(0.0, -hermitian_eigen(rho).values.minCoeff());
    out.trace_deviation = std::abs(rho.trace().real() - 1.0);
    out.design_rank = rank;
    out.equations = equations.size();
    out.rank_deficient = rank < n;
    return out;
}

inline FitResult fit_density(const std::vector<FrameSample>& samples, const Tolerances& tol = {}) {
    if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "fit_density needs samples");
    const Index d = samples.front().resolution.dim();
    std::vector<std::pair<const Matrix*, double>> eqs;
    for (const auto& s : samples) {
        if (s.values.size() != s.resolution.size()) {
            throw Error(ErrorKind::InvalidArgument, "frame sample has " + std::to_string(s.values.size()) +
                                                        " values for " + std::to_string(s.resolution.size()) +
                                                        " projectors");
        }
        for (std::size_t k = 0; k < s.values.size(); ++k) eqs.emplace_back(&s.resolution.projectors()[k].matrix(), s.values[k]);
    }
    return fit_linear(eqs, d, tol);
}

/// Outcome probabilities of one POVM.
struct PovmSample {
    EffectList effects;
    std::vector<double> values;
};

inline PovmSample as_povm_sample(const FrameSample& s) {
    PovmSample out;
    for (const auto& p : s.resolution.projectors()) out.effects.effects.push_back(p.matrix());
    out.values = s.values;
    return out;
}

inline std::vector<PovmSample> povm_samples_from_state(const DensityMatrix& rho, const std::vector<EffectList>& povms) {
    std::vector<PovmSample> out;
    for (const auto& e : povms) {
        PovmSample s{e, {}};
        for (const auto& eb : e.effects) s.values.push_back(effect_probability(rho, eb));
        out.push_back(std::move(s));
    }
    return out;
}

/// The same least-squares reconstruction with effects in place of projectors.
inline FitResult fit_density_povm(const std::vector<PovmSample>& samples, const Tolerances& tol = {}) {
    if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "fit_density_povm needs samples");
    const Index d = samples.front().effects.dim();
    std::vector<std::pair<const Matrix*, double>> eqs;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const PovmSample& ps = samples[s];
        const ValidationReport report = verify_povm(ps.effects, tol);
        if (!report.passed()) {
            throw Error(ErrorKind::InvalidPOVM, "sample " + std::to_string(s) + ": " + describe_failures(report));
        }
        if (ps.values.size() != ps.effects.size()) {
            throw Error(ErrorKind::InvalidArgument, "sample " + std::to_string(s) + " value count differs from effect count");
        }
        double total = 0.0;
        for (double v : ps.values) total += v;
        if (std::abs(total - 1.0) > tol.frame_sum) {
            throw Error(ErrorKind::InvalidArgument, "sample " + std::to_string(s) + " values sum to " + std::to_string(total));
        }
        for (std::size_t k = 0; k < ps.values.size(); ++k) eqs.emplace_back(&ps.effects.effects[k], ps.values[k]);
    }
    return fit_linear(eqs, d, tol);
}

/// Projector (I + n.sigma)/2 onto the Bloch direction n.
inline Matrix bloch_projector(const std::array<double, 3>& n) {
    return 0.5 * (identity(2) + n[0] * pauli_x() + n[1] * pauli_y() + n[2] * pauli_z());
}

inline std::vector<std::array<double, 3>> random_bloch_directions(std::size_t count, std::uint64_t seed) {
    Rng rng = make_stream(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::array<double, 3>> out;
    out.reserve(count);
    while (out.size() < count) {
        std::array<double, 3> v{normal(rng), normal(rng), normal(rng)};
        const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (r < 1e-12) continue;
        for (double& x : v) x /= r;
        out.push_back(v);
    }
    return out;
}

/// Resolutions {Pi(n), Pi(-n)} valued by f(n) and f(-n) = 1 - f(n).
inline std::vector<FrameSample> qubit_frame_samples(const std::vector<std::array<double, 3>>& directions,
                                                    const std::function<double(const std::array<double, 3>&)>& f,
                                                    const Tolerances& tol = {}) {
    std::vector<FrameSample> out;
    out.reserve(directions.size());
    for (const auto& n : directions) {
        const std::array<double, 3> opposite{-n[0], -n[1], -n[2]};
        std::vector<ProjectorMatrix> ps;
        ps.emplace_back(bloch_projector(n), tol);
        ps.emplace_back(bloch_projector(opposite), tol);
        const double value = f(n);
        out.push_back({ResolutionOfIdentity(std::move(ps), tol), {value, 1.0 - value}});
    }
    return out;
}

/// A frame function on the qubit, f(n) = (1 + n_z^3)/2, that no density matrix reproduces.
inline std::vector<FrameSample> qubit_counterexample(std::size_t n_directions, std::uint64_t seed,
                                                     const Tolerances& tol = {}) {
    if (n_directions < 10) throw Error(ErrorKind::InvalidArgument, "qubit_counterexample needs at least 10 directions");
    return qubit_frame_samples(
        random_bloch_directions(n_directions, seed),
        [](const std::array<double, 3>& n) { return 0.5 * (1.0 + n[2] * n[2] * n[2]); }, tol);
}

}  // namespace qrecon
