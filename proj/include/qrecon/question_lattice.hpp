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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qrecon/matrix_core.hpp"
#include "qrecon/random.hpp"

namespace qrecon {

/// A yes-no question: a closed subspace, represented by its orthogonal projector.
struct Question {
    ProjectorMatrix projector;
    std::string label;

    [[nodiscard]] Index dim() const { return projector.dim(); }
    [[nodiscard]] Index rank() const { return projector.rank(); }
    [[nodiscard]] const Matrix& matrix() const { return projector.matrix(); }

    /// The always-false question.
    static Question zero(Index d) { return {ProjectorMatrix(Matrix::Zero(d, d)), "0"}; }
    /// The always-true question.
    static Question identity(Index d) { return {ProjectorMatrix(qrecon::identity(d)), "I"}; }
    static Question ray(const Vector& v, std::string label = {}) {
        return {ProjectorMatrix(outer(v)), std::move(label)};
    }
};

inline void require_same_space(const Question& a, const Question& b, const char* what) {
    if (a.dim() != b.dim()) {
        std::ostringstream os;
        os << what << ": questions on spaces of dimension " << a.dim() << " and " << b.dim();
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
}

/// Projector onto the eigenvalue-zero eigenspace of a PSD matrix.
inline Matrix null_space_projector(const Matrix& psd, double cutoff) {
    const Spectrum s = hermitian_eigen(psd);
    Index count = 0;
    while (count < s.values.size() && s.values(count) <= cutoff) ++count;
    return span_projector(s.vectors.leftCols(count), psd.rows());
}

inline Question negation(const Question& q) {
    return {ProjectorMatrix(identity(q.dim()) - q.matrix()), "~(" + q.label + ")"};
}

/// Intersection of ranges: the kernel of (I - P1) + (I - P2).
inline Question meet(const Question& a, const Question& b, const Tolerances& tol = {}) {
    require_same_space(a, b, "meet");
    const Matrix I = identity(a.dim());
    const Matrix sum = (I - a.matrix()) + (I - b.matrix());
    return {ProjectorMatrix(null_space_projector(sum, tol.lattice)), "(" + a.label + " & " + b.label + ")"};
}

/// Closed span of both ranges, via De Morgan.
inline Question join(const Question& a, const Question& b, const Tolerances& tol = {}) {
    Question out = negation(meet(negation(a), negation(b), tol));
    out.label = "(" + a.label + " | " + b.label + ")";
    return out;
}

inline bool implies(const Question& a, const Question& b, const Tolerances& tol = {}) {
    require_same_space(a, b, "implies");
    return max_abs(b.matrix() * a.matrix() - a.matrix()) <= tol.lattice;
}

inline bool orthogonal(const Question& a, const Question& b, const Tolerances& tol = {}) {
    require_same_space(a, b, "orthogonal");
    return max_abs(a.matrix() * b.matrix()) <= tol.lattice;
}

inline bool same_question(const Question& a, const Question& b, const Tolerances& tol = {}) {
    return a.dim() == b.dim() && max_abs(a.matrix() - b.matrix()) <= tol.lattice;
}

/// N commuting binary questions on one Hilbert space.
class QuestionFamily {
public:
    QuestionFamily(std::vector<Question> questions, const Tolerances& tol = {})
        : questions_(std::move(questions)) {
        if (questions_.empty()) throw Error(ErrorKind::InvalidArgument, "question family is empty");
        dim_ = questions_.front().dim();
        for (const auto& q : questions_) {
            if (q.dim() != dim_) throw Error(ErrorKind::DimensionMismatch, "family mixes Hilbert dimensions");
        }
        for (std::size_t a = 0; a < questions_.size(); ++a) {
            for (std::size_t b = a + 1; b < questions_.size(); ++b) {
                const Matrix& p = questions_[a].matrix();
                const Matrix& q = questions_[b].matrix();
                const double c = max_abs(p * q - q * p);
                if (c > tol.commute) {
                    std::ostringstream os;
                    os << "questions " << a << " (" << questions_[a].label << ") and " << b << " ("
                       << questions_[b].label << ") do not commute: |[P,Q]|_max = " << c;
                    throw Error(ErrorKind::NonCommutingFamily, os.str());
                }
            }
        }
    }

    [[nodiscard]] const std::vector<Question>& questions() const { return questions_; }
    [[nodiscard]] std::size_t size() const { return questions_.size(); }
    [[nodiscard]] Index dim() const { return dim_; }

private:
    std::vector<Question> questions_;
    Index dim_ = 0;
};

/// One answer per family question, question 1 first.
struct AnswerString {
    std::vector<bool> bits;

    /// Zero-based atom index: question N is the least-significant bit.
    [[nodiscard]] std::size_t atom_index() const {
        std::size_t k = 0;
        for (bool b : bits) k = (k << 1) | (b ? 1u : 0u);
        return k;
    }

    static AnswerString from_atom_index(std::size_t k, std::size_t n) {
        AnswerString s;
        s.bits.resize(n);
        for (std::size_t a = 0; a < n; ++a) s.bits[n - 1 - a] = ((k >> a) & 1u) != 0;
        return s;
    }
};

/// Atoms of a family's Boolean algebra, pairwise orthogonal and summing to I.
/// Atom k (zero-based) answers the family as AnswerString::from_atom_index(k, N).
class CompleteQuestionSet {
public:
    explicit CompleteQuestionSet(std::vector<ProjectorMatrix> atoms, const Tolerances& tol = {})
        : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw Error(ErrorKind::InvalidArgument, "no atoms");
        const Index d = atoms_.front().dim();
        Matrix sum = Matrix::Zero(d, d);
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (atoms_[i].dim() != d) throw Error(ErrorKind::DimensionMismatch, "atoms on different spaces");
            sum += atoms_[i].matrix();
            for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
                const double overlap = max_abs(atoms_[i].matrix() * atoms_[j].matrix());
                if (overlap > tol.atoms) {
                    std::ostringstream os;
                    os << "atoms " << i << " and " << j << " are not orthogonal (" << overlap << ")";
                    throw Error(ErrorKind::InvariantViolation, os.str());
                }
            }
        }
        const double closure = max_abs(sum - identity(d));
        if (closure > tol.atoms) {
            std::ostringstream os;
            os << "atoms do not sum to I (deviation " << closure << ")";
            throw Error(ErrorKind::InvariantViolation, os.str());
        }
    }

    /// Rank-1 atoms from the columns of a unitary.
    static CompleteQuestionSet from_basis(const Matrix& basis_columns, const Tolerances& tol = {}) {
        std::vector<ProjectorMatrix> atoms;
        atoms.reserve(static_cast<std::size_t>(basis_columns.cols()));
        for (Index k = 0; k < basis_columns.cols(); ++k) atoms.emplace_back(outer(basis_columns.col(k)), tol);
        return CompleteQuestionSet(std::move(atoms), tol);
    }

    [[nodiscard]] const std::vector<ProjectorMatrix>& atoms() const { return atoms_; }
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] Index dim() const { return atoms_.front().dim(); }
    [[nodiscard]] const ProjectorMatrix& operator[](std::size_t i) const { return atoms_[i]; }

    [[nodiscard]] bool all_rank_one() const {
        for (const auto& a : atoms_)
            if (a.rank() != 1) return false;
        return true;
    }

    [[nodiscard]] std::vector<Index> ranks() const {
        std::vector<Index> out;
        for (const auto& a : atoms_) out.push_back(a.rank());
        return out;
    }

private:
    std::vector<ProjectorMatrix> atoms_;
};

/// Atom k is the product over questions a of Q_a (bit a of k set) or I - Q_a.
inline CompleteQuestionSet complete_questions(const QuestionFamily& family, const Tolerances& tol = {}) {
    const std::size_t n = family.size();
    if (n >= 20) throw Error(ErrorKind::SizeLimit, "family too large to enumerate atoms");
    const Index d = family.dim();
    const std::size_t count = std::size_t{1} << n;
    std::vector<ProjectorMatrix> atoms;
    atoms.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const AnswerString answers = AnswerString::from_atom_index(k, n);
        Matrix product = identity(d);
        for (std::size_t a = 0; a < n; ++a) {
            const Matrix& q = family.questions()[a].matrix();
            product = product * (answers.bits[a] ? q : (identity(d) - q));
        }
        if (product.trace().real() < 0.5) {
            std::ostringstream os;
            os << "answer string " << k << " has an empty joint eigenspace; " << n
               << " questions cannot be independent in dimension " << d;
            throw Error(ErrorKind::IncompleteFamily, os.str());
        }
        product = 0.5 * (product + product.adjoint()).eval();
        atoms.emplace_back(std::move(product), tol);
    }
    return CompleteQuestionSet(std::move(atoms), tol);
}

/// The family whose atoms are the rank-1 projectors onto the columns of
/// \p basis: question a asks for bit a (question 1 = most significant) of the
/// basis index. Requires dim = 2^N.
inline QuestionFamily family_from_basis(const Matrix& basis, const Tolerances& tol = {}) {
    const Index d = basis.cols();
    std::size_t n = 0;
    while ((Index{1} << n) < d) ++n;
    if ((Index{1} << n) != d || n == 0) {
        throw Error(ErrorKind::InvalidArgument, "basis dimension must be a power of two >= 2");
    }
    std::vector<Question> questions;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t shift = n - 1 - a;
        Matrix p = Matrix::Zero(d, d);
        for (Index k = 0; k < d; ++k) {
            if ((static_cast<std::size_t>(k) >> shift) & 1u) p += basis.col(k) * basis.col(k).adjoint();
        }
        p = 0.5 * (p + p.adjoint()).eval();
        questions.push_back({ProjectorMatrix(std::move(p), tol), "q" + std::to_string(a + 1)});
    }
    return QuestionFamily(std::move(questions), tol);
}

/// Projector onto a Haar-random subspace of the given rank.
inline Question random_question(Index d, Index rank, Rng& rng, std::string label = {}) {
    const Matrix u = haar_unitary(d, rng).matrix();
    Matrix p = span_projector(u.leftCols(rank), d);
    p = 0.5 * (p + p.adjoint()).eval();
    return {ProjectorMatrix(std::move(p)), std::move(label)};
}

/// Seeded family of N binary questions with rank-1 atoms in d = 2^N.
inline QuestionFamily random_rank_one_family(std::size_t n, Rng& rng, const Tolerances& tol = {}) {
    const Index d = Index{1} << n;
    return family_from_basis(haar_unitary(d, rng).matrix(), tol);
}

/// Every union of atoms: element with mask m is the sum of atoms whose bit is set in m.
inline std::vector<Question> boolean_algebra_from_atoms(const CompleteQuestionSet& atoms,
                                                        const Tolerances& tol = {}) {
    const std::size_t n_atoms = atoms.size();
    if (n_atoms > 8) {
        throw Error(ErrorKind::SizeLimit,
                    "Boolean algebra enumeration is capped at 8 atoms (got " + std::to_string(n_atoms) + ")");
    }
    const Index d = atoms.dim();
    std::vector<Question> out;
    const std::size_t count = std::size_t{1} << n_atoms;
    out.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
        Matrix p = Matrix::Zero(d, d);
        std::string label = "{";
        for (std::size_t i = 0; i < n_atoms; ++i) {
            if ((mask >> i) & 1u) {
                p += atoms[i].matrix();
                if (label.size() > 1) label += ",";
                label += std::to_string(i);
            }
        }
        label += "}";
        out.push_back({ProjectorMatrix(std::move(p), tol), std::move(label)});
    }
    return out;
}

struct LatticeReport {
    bool closed_under_negation = true;
    std::vector<std::size_t> missing_negations;
    std::size_t comparable_pairs = 0;
    std::vector<std::pair<std::size_t, std::size_t>> orthomodular_violations;
    double worst_orthomodular_deviation = 0.0;
    std::size_t triples_checked = 0;
    std::vector<std::array<std::size_t, 3>> distributivity_violations;

    [[nodiscard]] bool orthomodular() const { return closed_under_negation && orthomodular_violations.empty(); }
    [[nodiscard]] bool distributive() const { return distributivity_violations.empty(); }
};

struct LatticeCheckOptions {
    /// Upper bound on triples examined for distributivity; 0 means all of them.
    std::size_t max_triples = 0;
    std::uint64_t seed = 0;
};

inline std::optional<std::size_t> find_question(const std::vector<Question>& elements, const Matrix& p,
                                                const Tolerances& tol) {
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (elements[i].dim() == p.rows() && max_abs(elements[i].matrix() - p) <= tol.lattice) return i;
    }
    return std::nullopt;
}

/// Orthomodular law b = a | (b & ~a) on every comparable pair a <= b, plus
/// distributivity a & (b | c) = (a & b) | (a & c) on triples.
inline LatticeReport check_orthomodular(const std::vector<Question>& elements, const Tolerances& tol = {},
                                        const LatticeCheckOptions& options = {}) {
    LatticeReport report;
    const std::size_t n = elements.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix complement = identity(elements[i].dim()) - elements[i].matrix();
        if (!find_question(elements, complement, tol)) {
            report.closed_under_negation = false;
            report.missing_negations.push_back(i);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Question& a = elements[i];
            const Question& b = elements[j];
            if (a.dim() != b.dim() || !implies(a, b, tol)) continue;
            ++report.comparable_pairs;
            const Question rebuilt = join(a, meet(b, negation(a), tol), tol);
            const double dev = max_abs(rebuilt.matrix() - b.matrix());
            report.worst_orthomodular_deviation = std::max(report.worst_orthomodular_deviation, dev);
            if (dev > tol.lattice) report.orthomodular_violations.emplace_back(i, j);
        }
    }

    auto check_triple = [&](std::size_t i, std::size_t j, std::size_t k) {
        const Question& a = elements[i];
        const Question& b = elements[j];
        const Question& c = elements[k];
        if (a.dim() != b.dim() || a.dim() != c.dim()) return;
        ++report.triples_checked;
        const Matrix lhs = meet(a, join(b, c, tol), tol).matrix();
        const Matrix rhs = join(meet(a, b, tol), meet(a, c, tol), tol).matrix();
        if (max_abs(lhs - rhs) > tol.lattice) report.distributivity_violations.push_back({i, j, k});
    };

    const std::size_t total = n * n * n;
    if (options.max_triples == 0 || options.max_triples >= total) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) check_triple(i, j, k);
    } else {
        Rng rng = make_stream(options.seed, 0x6c61747469636521ULL);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t t = 0; t < options.max_triples; ++t) check_triple(pick(rng), pick(rng), pick(rng));
    }
    return report;
}

/// Orthonormal (Hilbert-Schmidt) basis of the Hermitian matrices X with
/// [X, A] = 0 for every A in \p generators.
inline std::vector<Matrix> hermitian_commutant(const std::vector<Matrix>& generators, Index d,
                                               double cutoff = 1e-9) {
    const std::vector<Matrix> basis = hermitian_basis(d);
    const Index n = static_cast<Index>(basis.size());
    const Index rows_per_gen = 2 * d * d;
    RealMatrix system = RealMatrix::Zero(rows_per_gen * static_cast<Index>(std::max<std::size_t>(1, generators.size())), n);
    for (std::size_t g = 0; g < generators.size(); ++g) {
        const Matrix& a = generators[g];
        for (Index col = 0; col < n; ++col) {
            const Matrix c = basis[static_cast<std::size_t>(col)] * a - a * basis[static_cast<std::size_t>(col)];
            const Index base = static_cast<Index>(g) * rows_per_gen;
            for (Index e = 0; e < d * d; ++e) {
                system(base + e, col) = c(e / d, e % d).real();
                system(base + d * d + e, col) = c(e / d, e % d).imag();
            }
        }
    }
    Eigen::JacobiSVD<RealMatrix> svd(system, Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    const RealMatrix& v = svd.matrixV();
    std::vector<Matrix> out;
    for (Index col = 0; col < n; ++col) {
        const double s = col < sv.size() ? sv(col) : 0.0;
        if (s > cutoff) continue;
        Matrix x = Matrix::Zero(d, d);
        for (Index a = 0; a < n; ++a) x += v(a, col) * basis[static_cast<std::size_t>(a)];
        out.push_back(std::move(x));
    }
    return out;
}

/// Central projectors of the unital *-algebra generated by the questions.
/// The center is the part of the commutant that also commutes with the
/// commutant; a seeded random Hermitian central element separates every block.
inline std::vector<ProjectorMatrix> superselection_sectors(const std::vector<Question>& questions,
                                                           const Tolerances& tol = {},
                                                           std::uint64_t seed = 0x5eC7025ULL) {
    if (questions.empty()) throw Error(ErrorKind::InvalidArgument, "superselection_sectors needs at least one question");
    const Index d = questions.front().dim();
    std::vector<Matrix> generators;
    for (const auto& q : questions) {
        if (q.dim() != d) throw Error(ErrorKind::DimensionMismatch, "questions on different spaces");
        generators.push_back(q.matrix());
    }
    const std::vector<Matrix> commutant = hermitian_commutant(generators, d);
    std::vector<Matrix> both = generators;
    both.insert(both.end(), commutant.begin(), commutant.end());
    const std::vector<Matrix> center = hermitian_commutant(both, d);

    Rng rng = make_stream(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z = Matrix::Zero(d, d);
    for (const auto& c : center) z += normal(rng) * c;

    const Spectrum s = hermitian_eigen(z);
    std::vector<ProjectorMatrix> sectors;
    Index start = 0;
    while (start < d) {
        Index end = start + 1;
        while (end < d && s.values(end) - s.values(end - 1) <= tol.sector_cluster) ++end;
        sectors.emplace_back(span_projector(s.vectors.middleCols(start, end - start), d), tol);
        start = end;
    }
    return sectors;
}

/// Pairwise relations among questions: the data a lattice isomorphism must preserve.
struct RelationTable {
    std::vector<std::vector<bool>> implies;
    std::vector<std::vector<bool>> orthogonal;
    std::vector<std::vector<Index>> meet_rank;
    std::vector<std::vector<Index>> join_rank;

    bool operator==(const RelationTable&) const = default;
};

inline RelationTable relation_table(const std::vector<Question>& qs, const Tolerances& tol = {}) {
    const std::size_t n = qs.size();
    RelationTable t;
    t.implies.assign(n, std::vector<bool>(n));
    t.orthogonal.assign(n, std::vector<bool>(n));
    t.meet_rank.assign(n, std::vector<Index>(n));
    t.join_rank.assign(n, std::vector<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            t.implies[i][j] = implies(qs[i], qs[j], tol);
            t.orthogonal[i][j] = orthogonal(qs[i], qs[j], tol);
            t.meet_rank[i][j] = meet(qs[i], qs[j], tol).rank();
            t.join_rank[i][j] = join(qs[i], qs[j], tol).rank();
        }
    }
    return t;
}

}  // namespace qrecon
