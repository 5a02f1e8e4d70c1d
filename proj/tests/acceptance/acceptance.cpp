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
// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if any
// criterion fails its numerical bound or its runtime limit.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "qrecon/born_engine.hpp"
#include "qrecon/dynamics.hpp"
#include "qrecon/gleason.hpp"
#include "qrecon/povm_engine.hpp"
#include "qrecon/scenario.hpp"

namespace fs = std::filesystem;
using namespace qrecon;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

std::string sci(double x) {
    std::ostringstream os;
    os.precision(2);
    os << std::scientific << x;
    return os.str();
}

// Runs one criterion, prints its line and returns whether it passed.
bool criterion(int id, const std::string& title, double limit_ms, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = ms < limit_ms;
    const bool pass = out.ok && in_time;
    std::ostringstream os;
    os.precision(1);
    os << std::fixed << (pass ? "[PASS] " : "[FAIL] ") << "AC" << id << " " << title << ": " << out.detail << "; " << ms
       << " ms (limit " << limit_ms << " ms)" << (in_time ? "" : " TIMEOUT");
    std::cout << os.str() << std::endl;
    return pass;
}

Hamiltonian random_hamiltonian(Index d, Rng& rng) { return {random_hermitian(d, rng), "h"}; }

std::vector<ProjectorMatrix> computational_projectors(Index d) {
    std::vector<ProjectorMatrix> out;
    for (Index k = 0; k < d; ++k) out.emplace_back(outer(ket(d, k)));
    return out;
}

// E_b = S^{-1/2} A_b S^{-1/2} with A_b = G_b^dag G_b and S = sum_b A_b.
EffectList random_povm(Index d, std::size_t outcomes, Rng& rng) {
    std::vector<Matrix> a;
    Matrix s = Matrix::Zero(d, d);
    for (std::size_t b = 0; b < outcomes; ++b) {
        const Matrix g = ginibre(d, d, rng);
        a.push_back(g.adjoint() * g);
        s += a.back();
    }
    const Matrix inv_root = hermitian_function(s, [](double x) { return 1.0 / std::sqrt(x); });
    EffectList e;
    for (const Matrix& m : a) e.effects.push_back(inv_root * m * inv_root);
    return e;
}

Outcome complete_question_closure() {
    const Tolerances tol;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng = make_stream(1000 + static_cast<std::uint64_t>(trial));
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
        const CompleteQuestionSet atoms = complete_questions(random_rank_one_family(n, rng));
        const Index d = atoms.dim();
        Matrix sum = Matrix::Zero(d, d);
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            sum += atoms[i].matrix();
            for (std::size_t j = i + 1; j < atoms.size(); ++j) worst = std::max(worst, max_abs(atoms[i].matrix() * atoms[j].matrix()));
        }
        worst = std::max(worst, max_abs(sum - identity(d)));
    }
    return {worst <= 1e-10, "50 families, worst orthogonality/closure deviation " + sci(worst) + " (bound 1e-10)"};
}

Outcome double_stochasticity() {
    const Tolerances tol;
    Rng rng = make_stream(2000);
    double worst = 0.0;
    const Index dims[] = {2, 4, 8};
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = dims[trial % 3];
        const CompleteQuestionSet b = CompleteQuestionSet::from_basis(haar_unitary(d, rng).matrix());
        const CompleteQuestionSet c = CompleteQuestionSet::from_basis(haar_unitary(d, rng).matrix());
        for (const Check& check : verify_bistochastic(transition_matrix(b, c), tol).checks) worst = std::max(worst, check.deviation);
    }
    std::vector<ProjectorMatrix> rank2;
    Matrix p01 = Matrix::Zero(3, 3), p2 = Matrix::Zero(3, 3);
    p01(0, 0) = p01(1, 1) = 1.0;
    p2(2, 2) = 1.0;
    rank2.emplace_back(p01);
    rank2.emplace_back(p2);
    const ValidationReport bad = verify_bistochastic(
        transition_matrix(CompleteQuestionSet(std::move(rank2)), CompleteQuestionSet::from_basis(identity(3))), tol);
    const Check* rows = bad.find("row_sums");
    const bool flagged = rows && !rows->passed && bad.find("column_sums")->passed;
    return {worst <= 1e-10 && flagged, "100 pairs, worst deviation " + sci(worst) + " (bound 1e-10); rank-2 counterexample " +
                                           (flagged ? "flagged on row sums" : "NOT flagged")};
}

Outcome empirical_convergence() {
    const Matrix h = (Matrix(2, 2) << 1.0, 1.0, 1.0, -1.0).finished() / std::sqrt(2.0);
    const CompleteQuestionSet b = CompleteQuestionSet::from_basis(identity(2));
    const CompleteQuestionSet c = CompleteQuestionSet::from_basis(h);
    double worst = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const TransitionMatrix t = empirical_transition(b, c, 100000, seed);
        worst = std::max(worst, (t.p.array() - 0.5).abs().maxCoeff());
    }
    return {worst <= 0.01, "seeds {1,2,3} at n=1e5, worst |p - 1/2| " + sci(worst) + " (bound 1e-2)"};
}

Outcome gleason_round_trip() {
    const Tolerances tol;
    double worst_error = 0.0, worst_residual = 0.0;
    bool complete = true;
    for (Index d = 3; d <= 6; ++d) {
        for (int s = 0; s < 10; ++s) {
            Rng rng = make_stream(4000 + static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s));
            const DensityMatrix rho = random_density(d, rng);
            std::vector<ResolutionOfIdentity> resolutions;
            for (Index k = 0; k < 3 * d; ++k) resolutions.push_back(random_resolution(d, rng, tol));
            const FitResult fit = fit_density(frame_samples_from_state(rho, resolutions), tol);
            complete = complete && !fit.rank_deficient;
            worst_error = std::max(worst_error, (fit.rho_hat.matrix() - rho.matrix()).norm());
            worst_residual = std::max(worst_residual, fit.residual);
        }
    }
    return {complete && worst_error <= 1e-8 && worst_residual <= 1e-10,
            "d=3..6 x 10 states, worst Frobenius error " + sci(worst_error) + " (bound 1e-8), worst residual " +
                sci(worst_residual) + " (bound 1e-10)" + (complete ? "" : ", RANK DEFICIENT design")};
}

Outcome dimension_two_necessity() {
    const Tolerances tol;
    const std::vector<FrameSample> bad = qubit_counterexample(100, 42, tol);
    const bool frame_ok = check_frame_function(bad, tol).passed();
    const double bad_residual = fit_density(bad, tol).residual;
    const std::vector<FrameSample> control = qubit_frame_samples(
        random_bloch_directions(100, 42), [](const std::array<double, 3>& v) { return 0.5 * (1.0 + 0.5 * v[2]); }, tol);
    const double control_residual = fit_density(control, tol).residual;
    return {frame_ok && bad_residual >= 0.01 && control_residual <= 1e-10,
            std::string("frame checks ") + (frame_ok ? "pass" : "FAIL") + ", n_z^3 residual " + sci(bad_residual) +
                " (floor 1e-2), linear control residual " + sci(control_residual) + " (bound 1e-10)"};
}

Outcome povm_contract() {
    const Tolerances tol;
    double worst_psd = 0.0, worst_closure = 0.0, worst_prob = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng = make_stream(6000, static_cast<std::uint64_t>(trial));
        const Index ds = 1 + static_cast<Index>(rng() % 4), dp = 1 + static_cast<Index>(rng() % 4);
        const AncillaModel m(ds, dp, haar_unitary(ds * dp, rng), random_density(dp, rng), computational_projectors(dp), tol);
        const EffectList e = derive_povm(m, tol);
        Matrix sum = Matrix::Zero(ds, ds);
        for (const Matrix& effect : e.effects) {
            sum += effect;
            worst_psd = std::max(worst_psd, -hermitian_eigen(effect).values.minCoeff());
        }
        worst_closure = std::max(worst_closure, max_abs(sum - identity(ds)));
        for (int s = 0; s < 100; ++s) {
            const DensityMatrix rho = random_density(ds, rng);
            for (std::size_t b = 0; b < e.size(); ++b)
                worst_prob = std::max(worst_prob, std::abs(effect_probability(rho, e.effects[b]) - joint_probability(rho, m, b)));
        }
    }
    return {worst_psd <= 1e-10 && worst_closure <= 1e-10 && worst_prob <= 1e-10,
            "100 models, worst negative eigenvalue " + sci(worst_psd) + ", closure " + sci(worst_closure) +
                ", reduced-vs-joint " + sci(worst_prob) + " (bounds 1e-10)"};
}

Outcome naimark_round_trip() {
    const Tolerances tol;
    double worst_stats = 0.0, worst_completion = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng = make_stream(7000, static_cast<std::uint64_t>(trial));
        const EffectList e = random_povm(2, 3, rng);
        const NaimarkDilation dil = naimark_dilate(e, tol);
        for (int s = 0; s < 20; ++s) {
            const DensityMatrix rho = random_density(2, rng);
            for (std::size_t b = 0; b < 3; ++b)
                worst_stats = std::max(worst_stats, std::abs(dil.probability(rho, b) - effect_probability(rho, e.effects[b])));
        }
        const UnitaryMatrix u = unitary_completion(dil, tol);
        const AncillaModel model(2, dil.ancilla_dim, u, DensityMatrix(outer(ket(dil.ancilla_dim, 0))),
                                 computational_projectors(dil.ancilla_dim), tol);
        const EffectList back = derive_povm(model, tol);
        for (std::size_t b = 0; b < 3; ++b) worst_completion = std::max(worst_completion, max_abs(back.effects[b] - e.effects[b]));
    }
    return {worst_stats <= 1e-10 && worst_completion <= 1e-9, "50 POVMs, worst statistics gap " + sci(worst_stats) +
                                                                  " (bound 1e-10), completion gap " + sci(worst_completion) +
                                                                  " (bound 1e-9)"};
}

Outcome dynamics_group_law() {
    const Tolerances tol;
    double worst_group = 0.0, worst_log = 0.0;
    std::size_t skipped = 0;
    bool tables_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng = make_stream(8000, static_cast<std::uint64_t>(trial));
        const Index d = 2 + static_cast<Index>(trial % 7);
        const Hamiltonian h = random_hamiltonian(d, rng);
        std::vector<double> times;
        for (int k = 0; k < 5; ++k) times.push_back(2.0 * uniform01(rng) - 1.0);
        for (const Check& c : check_abelian_group(h, times, 1e-9, tol).checks) worst_group = std::max(worst_group, c.deviation);
        for (double t : times) {
            const Propagator p = propagator(h, t, tol);
            try {
                worst_log = std::max(worst_log, max_abs(propagator(hamiltonian_log(p, tol), t, tol).u.matrix() - p.u.matrix()));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::BranchCut) throw;
                ++skipped;
            }
        }
        std::vector<Question> qs;
        const CompleteQuestionSet atoms = CompleteQuestionSet::from_basis(haar_unitary(d, rng).matrix());
        for (std::size_t k = 0; k < atoms.size(); ++k) qs.push_back({atoms[k], ""});
        qs.push_back(random_question(d, 1 + static_cast<Index>(d / 2), rng));
        qs.push_back(negation(qs.back()));
        qs.push_back(join(qs[0], qs[1], tol));
        const Propagator p = propagator(h, times.back(), tol);
        std::vector<Question> moved;
        for (const Question& q : qs) moved.push_back(evolve_question(q, p, tol));
        tables_ok = tables_ok && relation_table(qs, tol) == relation_table(moved, tol);
    }
    return {worst_group <= 1e-9 && worst_log <= 1e-8 && tables_ok,
            "20 Hamiltonians, worst group-law deviation " + sci(worst_group) + " (bound 1e-9), log round trip " +
                sci(worst_log) + " (bound 1e-8, " + std::to_string(skipped) + " branch-cut skips), relation tables " +
                (tables_ok ? "invariant" : "CHANGED")};
}

Outcome orthomodular_not_distributive() {
    const Tolerances tol;
    const double s = 1.0 / std::sqrt(2.0);
    const std::vector<Question> qs = {Question::zero(2),
                                      Question::identity(2),
                                      Question::ray(ket(2, 0), "0"),
                                      Question::ray(ket(2, 1), "1"),
                                      Question::ray((Vector(2) << s, s).finished(), "+"),
                                      Question::ray((Vector(2) << s, -s).finished(), "-")};
    const LatticeReport r = check_orthomodular(qs, tol);
    bool classic = false;
    for (const auto& t : r.distributivity_violations) {
        if (t[0] == 2 && ((t[1] == 4 && t[2] == 5) || (t[1] == 5 && t[2] == 4))) classic = true;
    }
    return {r.orthomodular() && r.closed_under_negation && classic,
            std::to_string(r.comparable_pairs) + " comparable pairs, orthomodular deviation " +
                sci(r.worst_orthomodular_deviation) + ", " + std::to_string(r.distributivity_violations.size()) +
                " distributivity violations" + (classic ? " including (|0>, |+>, |->)" : ", classic triple MISSING")};
}

std::string run_cli(const fs::path& fixture, const fs::path& out) {
    const std::string cmd = std::string("\"") + QRECON_CLI_PATH + "\" run \"" + fixture.string() + "\" --out \"" + out.string() +
                            "\" > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status != 0) throw std::runtime_error(fixture.filename().string() + " exited with status " + std::to_string(status));
    return scenario::canonical_text(io::load_file(out));
}

Outcome cli_determinism() {
    std::vector<fs::path> fixtures;
    for (const auto& entry : fs::directory_iterator(QRECON_SCENARIO_DIR))
        if (entry.path().extension() == ".json") fixtures.push_back(entry.path());
    std::sort(fixtures.begin(), fixtures.end());
    const fs::path tmp = fs::temp_directory_path() / "qrecon_acceptance";
    fs::create_directories(tmp);
    std::size_t identical = 0;
    for (const auto& f : fixtures) {
        const std::string a = run_cli(f, tmp / "a.json");
        const std::string b = run_cli(f, tmp / "b.json");
        if (a == b) ++identical;
    }
    fs::remove_all(tmp);
    return {!fixtures.empty() && identical == fixtures.size(),
            std::to_string(identical) + "/" + std::to_string(fixtures.size()) + " fixtures byte-identical across two CLI runs"};
}

}  // namespace

int main() {
    bool all = true;
    all &= criterion(1, "complete-question closure", 1000, complete_question_closure);
    all &= criterion(2, "double stochasticity", 2000, double_stochasticity);
    all &= criterion(3, "empirical convergence", 5000, empirical_convergence);
    all &= criterion(4, "frame-function fit round trip", 10000, gleason_round_trip);
    all &= criterion(5, "dimension-two counterexample", 1000, dimension_two_necessity);
    all &= criterion(6, "POVM probability contract", 10000, povm_contract);
    all &= criterion(7, "Naimark round trip", 5000, naimark_round_trip);
    all &= criterion(8, "dynamics group law", 5000, dynamics_group_law);
    all &= criterion(9, "orthomodular, not distributive", 1000, orthomodular_not_distributive);
    all &= criterion(10, "CLI determinism", 60000, cli_determinism);
    std::cout << (all ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << std::endl;
    return all ? 0 : 1;
}
