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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrecon/born_engine.hpp"
#include "qrecon/dynamics.hpp"
#include "qrecon/gleason.hpp"
#include "qrecon/io.hpp"
#include "qrecon/povm_engine.hpp"
#include "qrecon/question_lattice.hpp"
#include "qrecon/random.hpp"

namespace qrecon::scenario {

using json = nlohmann::json;

/// Shared by scenario schema and reports.
inline constexpr const char* kFormatVersion = "qrecon-format/1";
inline constexpr const char* kToolVersion = "qrecon 0.1.0";

enum ExitStatus : int {
    kAllPassed = 0,
    kVerdictFailed = 1,
    kParseError = 2,
    kValidationError = 3,
    kInternalError = 4,
    kUsageError = 5,
};

// ---------------------------------------------------------------------------
// Schema

inline json field(const char* type, const char* doc) { return {{"type", type}, {"doc", doc}}; }

inline json field(const char* type, const char* doc, json default_value) {
    return {{"type", type}, {"doc", doc}, {"default", std::move(default_value)}};
}

inline json kind_schema(const char* doc, json required, json optional) {
    return {{"doc", doc}, {"required", std::move(required)}, {"optional", std::move(optional)}};
}

/// Scenario layout: {"kind", "inputs", "seed"?, "tolerances"?}. Any value may
/// be replaced by {"file": "<path relative to the scenario>"}.
inline json emit_schema() {
    json kinds = json::object();
    kinds["lattice-check"] = kind_schema(
        "Orthomodular law, distributivity and superselection sectors of a set of questions.",
        {{"questions", field("question[]", "questions {label, projector}")}},
        {{"close_under_negation", field("boolean", "append the complement of every question first", false)},
         {"expect_distributive", field("boolean|null", "when set, distributivity must match", nullptr)},
         {"max_triples", field("integer", "cap on distributivity triples, 0 = all", 0)}});
    kinds["born-matrix"] = kind_schema(
        "Transition matrix between two complete-question families and its bistochastic check.",
        {{"family_b", field("family", "outcome family")}, {"family_c", field("family", "conditioning family")}},
        {{"expect_bistochastic", field("boolean", "false when row sums are expected to fail", true)}});
    kinds["born-sample"] = kind_schema(
        "Monte-Carlo answers of a complete question on fresh copies of a state.",
        {{"rho", field("matrix", "density matrix")}, {"family", field("family", "measured family")},
         {"n", field("integer", "number of trials")}},
        {{"sigma_bound", field("real", "allowed deviation in binomial standard deviations", 5.0)}});
    kinds["gleason-fit"] = kind_schema(
        "Density-matrix reconstruction from frame-function samples.",
        json::object(),
        {{"rho", field("matrix|null", "state used to generate samples and judge recovery", nullptr)},
         {"n_resolutions", field("integer", "random resolutions generated from rho", 20)},
         {"samples", field("frame-sample[]|null", "explicit samples {projectors, values}", nullptr)},
         {"povm_samples", field("povm-sample[]|null", "explicit POVM samples {effects, values}", nullptr)},
         {"max_residual", field("real", "bound on the RMS fit residual", 1e-10)},
         {"max_recovery_error", field("real", "bound on the Frobenius recovery error", 1e-8)}});
    kinds["gleason-counterexample"] = kind_schema(
        "The qubit frame function (1 + n_z^3)/2: valid frame function, no density matrix.",
        json::object(),
        {{"n_directions", field("integer", "number of random Bloch directions", 100)},
         {"min_residual", field("real", "lower bound on the counterexample fit residual", 0.01)},
         {"control_max_residual", field("real", "upper bound on the linear control residual", 1e-10)},
         {"control_bloch_z", field("real", "control f(n) = (1 + c n_z)/2", 0.5)}});
    kinds["povm-derive"] = kind_schema(
        "Effects induced by an ancilla model and the reduced-vs-joint probability contract.",
        {{"dS", field("integer", "system dimension")},
         {"dP", field("integer", "ancilla dimension")},
         {"U", field("matrix", "unitary on system (x) ancilla, system index major")},
         {"rho_P", field("matrix", "ancilla state")},
         {"projectors_P", field("matrix[]", "ancilla resolution of the identity")}},
        {{"n_states", field("integer", "random system states for the contract", 100)},
         {"contract_tolerance", field("real", "bound on |Tr(rho E_b) - P(b)|", 1e-10)}});
    kinds["povm-dilate"] = kind_schema(
        "Naimark dilation of a POVM and its unitary-completion round trip.",
        {{"effects", field("matrix[]", "POVM effects")}},
        {{"n_states", field("integer", "random states for the statistics check", 50)},
         {"statistics_tolerance", field("real", "bound on dilated vs direct probabilities", 1e-10)},
         {"completion_tolerance", field("real", "bound on recovered effects", 1e-9)}});
    kinds["dynamics-evolve"] = kind_schema(
        "Propagator of a Hamiltonian applied to a question and/or a joint state.",
        {{"hamiltonian", field("hamiltonian", "{h, label}")}, {"t", field("real", "time")}},
        {{"question", field("question|null", "question evolved as U Q U^dag", nullptr)},
         {"rho", field("matrix|null", "state evolved as U rho U^dag", nullptr)},
         {"threshold", field("real", "bound on spectrum and purity drift", 1e-10)}});
    kinds["dynamics-group"] = kind_schema(
        "One-parameter group law of propagators and the logarithm round trip.",
        {{"hamiltonian", field("hamiltonian", "{h, label}")}, {"times", field("real[]", "time grid")}},
        {{"threshold", field("real", "bound on group-law deviations", 1e-9)},
         {"log_round_trip", field("boolean", "recover H from U(t) at every t != 0", true)},
         {"log_tolerance", field("real", "bound on the logarithm round trip", 1e-8)},
         {"compare_with", field("hamiltonian|null", "second generator; cross-commutativity is reported", nullptr)}});

    json tolerance_fields = json::object();
    const Tolerances defaults;
    for (const auto& [name, member] : Tolerances::fields()) tolerance_fields[std::string(name)] = defaults.*member;

    return {{"format_version", kFormatVersion},
            {"layout", {{"kind", "one of kinds"},
                        {"inputs", "kind-specific object"},
                        {"seed", "optional integer, default 0"},
                        {"tolerances", "optional object overriding named tolerances"}}},
            {"file_reference", "{\"file\": \"relative/path.json\"} may replace any value"},
            {"types", {{"matrix", "row-major nested arrays of [re, im] pairs (plain numbers allowed)"},
                       {"question", "{label, projector: matrix}"},
                       {"family", "{dim, questions: question[]} | {basis: matrix (columns)} | {atoms: matrix[]}"},
                       {"hamiltonian", "{h: matrix, label}"},
                       {"frame-sample", "{projectors: matrix[], values: real[]}"},
                       {"povm-sample", "{effects: matrix[], values: real[]}"}}},
            {"kinds", kinds},
            {"tolerances", tolerance_fields}};
}

/// Structural problems of a scenario against the schema; empty when valid.
inline std::vector<std::string> validate_scenario(const json& scenario, const json& schema = emit_schema()) {
    std::vector<std::string> problems;
    if (!scenario.is_object()) return {"scenario must be an object"};
    for (auto it = scenario.begin(); it != scenario.end(); ++it) {
        if (it.key() != "kind" && it.key() != "inputs" && it.key() != "seed" && it.key() != "tolerances" &&
            it.key() != "description") {
            problems.push_back("unknown top-level field '" + it.key() + "'");
        }
    }
    if (!scenario.contains("kind") || !scenario["kind"].is_string()) {
        problems.push_back("field 'kind' is missing");
        return problems;
    }
    const std::string kind = scenario["kind"].get<std::string>();
    if (!schema["kinds"].contains(kind)) {
        problems.push_back("field 'kind': unknown scenario kind '" + kind + "'");
        return problems;
    }
    if (scenario.contains("seed") && !scenario["seed"].is_number_integer()) {
        problems.push_back("field 'seed' must be an integer");
    }
    if (scenario.contains("tolerances")) {
        const json& t = scenario["tolerances"];
        if (!t.is_object()) {
            problems.push_back("field 'tolerances' must be an object");
        } else {
            for (auto it = t.begin(); it != t.end(); ++it) {
                if (!schema["tolerances"].contains(it.key())) problems.push_back("field 'tolerances." + it.key() + "' is unknown");
                else if (!it.value().is_number()) problems.push_back("field 'tolerances." + it.key() + "' must be a number");
            }
        }
    }
    const json& ks = schema["kinds"][kind];
    const json inputs = scenario.value("inputs", json::object());
    if (!inputs.is_object()) {
        problems.push_back("field 'inputs' must be an object");
        return problems;
    }
    for (auto it = ks["required"].begin(); it != ks["required"].end(); ++it) {
        if (!inputs.contains(it.key())) problems.push_back("field 'inputs." + it.key() + "' is missing");
    }
    for (auto it = inputs.begin(); it != inputs.end(); ++it) {
        if (!ks["required"].contains(it.key()) && !ks["optional"].contains(it.key())) {
            problems.push_back("field 'inputs." + it.key() + "' is not part of kind '" + kind + "'");
        }
    }
    return problems;
}

// ---------------------------------------------------------------------------
// Payload decoding

/// Read access to the "inputs" object that tracks the field path for errors
/// and fills schema defaults.
class Inputs {
public:
    Inputs(const json& inputs, const json& kind_schema) : inputs_(inputs), schema_(kind_schema) {}

    [[nodiscard]] bool has(const std::string& key) const {
        return inputs_.contains(key) && !inputs_[key].is_null();
    }

    [[nodiscard]] const json& get(const std::string& key) const {
        if (has(key)) return inputs_[key];
        if (schema_["optional"].contains(key) && schema_["optional"][key].contains("default")) {
            return schema_["optional"][key]["default"];
        }
        throw Error(ErrorKind::ValidationError, "field '" + path(key) + "' is missing");
    }

    [[nodiscard]] double real(const std::string& key) const {
        const json& j = get(key);
        if (!j.is_number()) throw Error(ErrorKind::ParseError, "field '" + path(key) + "': expected a number");
        return j.get<double>();
    }

    [[nodiscard]] std::int64_t integer(const std::string& key) const {
        const json& j = get(key);
        if (!j.is_number_integer()) throw Error(ErrorKind::ParseError, "field '" + path(key) + "': expected an integer");
        return j.get<std::int64_t>();
    }

    [[nodiscard]] std::int64_t positive(const std::string& key) const {
        const std::int64_t v = integer(key);
        if (v < 1) throw Error(ErrorKind::ValidationError, "field '" + path(key) + "' must be >= 1");
        return v;
    }

    [[nodiscard]] bool boolean(const std::string& key) const {
        const json& j = get(key);
        if (!j.is_boolean()) throw Error(ErrorKind::ParseError, "field '" + path(key) + "': expected a boolean");
        return j.get<bool>();
    }

    [[nodiscard]] Matrix matrix(const std::string& key) const { return io::matrix_from_json(get(key), path(key)); }

    [[nodiscard]] std::vector<Matrix> matrices(const std::string& key) const {
        return matrix_list(get(key), path(key));
    }

    [[nodiscard]] std::vector<double> reals(const std::string& key) const { return real_list(get(key), path(key)); }

    [[nodiscard]] static std::string path(const std::string& key) { return "inputs." + key; }

    static std::vector<Matrix> matrix_list(const json& j, const std::string& p) {
        if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, "field '" + p + "': expected a non-empty list of matrices");
        std::vector<Matrix> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(io::matrix_from_json(j[i], io::index_path(p, i)));
        return out;
    }

    static std::vector<double> real_list(const json& j, const std::string& p) {
        if (!j.is_array()) throw Error(ErrorKind::ParseError, "field '" + p + "': expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) throw Error(ErrorKind::ParseError, "field '" + io::index_path(p, i) + "': expected a number");
            out.push_back(j[i].get<double>());
        }
        return out;
    }

private:
    const json& inputs_;
    const json& schema_;
};

inline std::vector<Question> questions_from_json(const json& j, const std::string& p, const Tolerances& tol) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, "field '" + p + "': expected a non-empty list of questions");
    std::vector<Question> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(io::question_from_json(j[i], io::index_path(p, i), tol));
    return out;
}

inline CompleteQuestionSet family_from_json(const json& j, const std::string& p, const Tolerances& tol) {
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "field '" + p + "': expected a family object");
    if (j.contains("basis")) {
        return CompleteQuestionSet::from_basis(io::matrix_from_json(j["basis"], io::join_path(p, "basis")), tol);
    }
    if (j.contains("atoms")) {
        std::vector<ProjectorMatrix> atoms;
        for (const Matrix& m : Inputs::matrix_list(j["atoms"], io::join_path(p, "atoms"))) atoms.emplace_back(m, tol);
        return CompleteQuestionSet(std::move(atoms), tol);
    }
    if (j.contains("questions")) {
        std::vector<Question> qs = questions_from_json(j["questions"], io::join_path(p, "questions"), tol);
        if (j.contains("dim") && (!j["dim"].is_number_integer() || j["dim"].get<Index>() != qs.front().dim())) {
            throw Error(ErrorKind::ValidationError, "field '" + io::join_path(p, "dim") + "' does not match the questions");
        }
        return complete_questions(QuestionFamily(std::move(qs), tol), tol);
    }
    throw Error(ErrorKind::ValidationError, "field '" + p + "' needs one of 'questions', 'basis', 'atoms'");
}

inline Hamiltonian hamiltonian_from_json(const json& j, const std::string& p, const Tolerances& tol) {
    if (!j.is_object() || !j.contains("h")) throw Error(ErrorKind::ValidationError, "field '" + io::join_path(p, "h") + "' is missing");
    return {HermitianMatrix(io::matrix_from_json(j["h"], io::join_path(p, "h")), tol), j.value("label", std::string{})};
}

// ---------------------------------------------------------------------------
// Running

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, double>> tolerance_overrides;
    std::filesystem::path base_dir = ".";
};

struct RunOutcome {
    json report;
    int exit_status = kAllPassed;
};

/// Accumulates verdicts and outputs for one scenario.
class ReportBuilder {
public:
    void add(const ValidationReport& report, const std::string& prefix = {}) { verdicts_.merge(report, prefix); }
    Check& bound(const std::string& name, double deviation, double threshold, const std::string& detail = {}) {
        return verdicts_.bound(name, deviation, threshold, detail);
    }
    Check& at_least(const std::string& name, double value, double minimum, const std::string& detail = {}) {
        Check& c = verdicts_.bound(name, value, minimum, detail);
        c.passed = value >= minimum;
        return c;
    }
    Check& verdict(const std::string& name, bool ok, const std::string& detail = {}) {
        return verdicts_.verdict(name, ok, detail);
    }
    Check& note(const std::string& name, double value, const std::string& detail = {}) {
        return verdicts_.note(name, value, detail);
    }
    json& outputs() { return outputs_; }
    [[nodiscard]] const ValidationReport& verdicts() const { return verdicts_; }

private:
    ValidationReport verdicts_;
    json outputs_ = json::object();
};

inline json effects_to_json(const std::vector<Matrix>& effects) {
    json out = json::array();
    for (const auto& e : effects) out.push_back(io::to_json(e));
    return out;
}

inline void run_lattice_check(const Inputs& in, const Tolerances& tol, std::uint64_t seed, ReportBuilder& rb) {
    std::vector<Question> qs = questions_from_json(in.get("questions"), Inputs::path("questions"), tol);
    if (in.boolean("close_under_negation")) {
        const std::size_t n = qs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Question neg = negation(qs[i]);
            if (!find_question(qs, neg.matrix(), tol)) qs.push_back(neg);
        }
    }
    LatticeCheckOptions options;
    options.max_triples = static_cast<std::size_t>(in.integer("max_triples"));
    options.seed = seed;
    const LatticeReport lr = check_orthomodular(qs, tol, options);

    rb.verdict("closed_under_negation", lr.closed_under_negation,
               lr.closed_under_negation ? "" : std::to_string(lr.missing_negations.size()) + " complements missing (NotClosed)");
    rb.bound("orthomodular_law", lr.worst_orthomodular_deviation, tol.lattice,
             std::to_string(lr.comparable_pairs) + " comparable pairs");
    rb.note("distributivity_violations", static_cast<double>(lr.distributivity_violations.size()),
            std::to_string(lr.triples_checked) + " triples checked");
    if (in.has("expect_distributive")) {
        rb.verdict("distributivity_matches_expectation", lr.distributive() == in.boolean("expect_distributive"));
    }

    const std::vector<ProjectorMatrix> sectors = superselection_sectors(qs, tol, seed);
    const Index d = qs.front().dim();
    Matrix sum = Matrix::Zero(d, d);
    double commute = 0.0;
    json sector_json = json::array();
    for (const auto& s : sectors) {
        sum += s.matrix();
        for (const auto& q : qs) commute = std::max(commute, max_abs(s.matrix() * q.matrix() - q.matrix() * s.matrix()));
        sector_json.push_back({{"rank", s.rank()}, {"projector", io::to_json(s.matrix())}});
    }
    rb.bound("sectors_sum_to_identity", max_abs(sum - identity(d)), tol.lattice);
    rb.bound("sectors_commute_with_questions", commute, tol.lattice);

    json& out = rb.outputs();
    out["element_count"] = qs.size();
    out["comparable_pairs"] = lr.comparable_pairs;
    out["triples_checked"] = lr.triples_checked;
    json violations = json::array();
    for (std::size_t k = 0; k < lr.distributivity_violations.size() && k < 10; ++k) {
        const auto& t = lr.distributivity_violations[k];
        violations.push_back({qs[t[0]].label, qs[t[1]].label, qs[t[2]].label});
    }
    out["distributivity_violation_examples"] = violations;
    out["distributivity_violation_count"] = lr.distributivity_violations.size();
    out["sectors"] = sector_json;
}

inline void run_born_matrix(const Inputs& in, const Tolerances& tol, ReportBuilder& rb) {
    const CompleteQuestionSet b = family_from_json(in.get("family_b"), Inputs::path("family_b"), tol);
    const CompleteQuestionSet c = family_from_json(in.get("family_c"), Inputs::path("family_c"), tol);
    const TransitionMatrix t = transition_matrix(b, c);
    const ValidationReport report = verify_bistochastic(t, tol);
    if (in.boolean("expect_bistochastic")) {
        rb.add(report, "bistochastic.");
    } else {
        for (const auto& check : report.checks) rb.note("bistochastic." + check.name, check.deviation, check.detail);
        const Check* cols = report.find("column_sums");
        const Check* rows = report.find("row_sums");
        rb.verdict("column_sums", cols && cols->passed);
        rb.verdict("row_sums_fail_as_expected", rows && !rows->passed, rows ? rows->detail : "");
    }
    rb.outputs()["transition_matrix"] = io::to_json(t);
}

inline void run_born_sample(const Inputs& in, const Tolerances& tol, std::uint64_t seed, ReportBuilder& rb) {
    const DensityMatrix rho(in.matrix("rho"), tol);
    const CompleteQuestionSet atoms = family_from_json(in.get("family"), Inputs::path("family"), tol);
    const auto n = static_cast<std::uint64_t>(in.positive("n"));
    const SampleRecord record = sample_answers(rho, atoms, n, seed, tol);
    const std::vector<double> probs = atom_probabilities(rho, atoms, tol);

    std::uint64_t total = 0;
    double worst_sigma = 0.0;
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        total += record.counts[i];
        const double sd = std::sqrt(dn * probs[i] * (1.0 - probs[i]));
        const double gap = std::abs(static_cast<double>(record.counts[i]) - dn * probs[i]);
        worst_sigma = std::max(worst_sigma, sd > 0 ? gap / sd : (gap > 0 ? 1e300 : 0.0));
    }
    rb.verdict("counts_sum_to_trials", total == n);
    rb.bound("binomial_deviation_sigmas", worst_sigma, in.real("sigma_bound"));
    rb.outputs()["sample"] = io::to_json(record);
    rb.outputs()["probabilities"] = probs;
}

inline void run_gleason_fit(const Inputs& in, const Tolerances& tol, std::uint64_t seed, ReportBuilder& rb) {
    std::optional<DensityMatrix> rho;
    if (in.has("rho")) rho.emplace(in.matrix("rho"), tol);

    std::vector<FrameSample> samples;
    if (in.has("samples")) {
        const json& js = in.get("samples");
        if (!js.is_array()) throw Error(ErrorKind::ParseError, "field 'inputs.samples': expected a list");
        for (std::size_t i = 0; i < js.size(); ++i) {
            const std::string p = io::index_path(Inputs::path("samples"), i);
            if (!js[i].contains("projectors") || !js[i].contains("values")) {
                throw Error(ErrorKind::ValidationError, "field '" + p + "' needs 'projectors' and 'values'");
            }
            std::vector<ProjectorMatrix> ps;
            for (const Matrix& m : Inputs::matrix_list(js[i]["projectors"], io::join_path(p, "projectors"))) ps.emplace_back(m, tol);
            samples.push_back({ResolutionOfIdentity(std::move(ps), tol), Inputs::real_list(js[i]["values"], io::join_path(p, "values"))});
        }
    } else if (rho && !in.has("povm_samples")) {
        Rng rng = make_stream(seed, 0);
        std::vector<ResolutionOfIdentity> resolutions;
        const auto count = in.positive("n_resolutions");
        for (std::int64_t k = 0; k < count; ++k) resolutions.push_back(random_resolution(rho->dim(), rng, tol));
        samples = frame_samples_from_state(*rho, resolutions);
    }

    std::vector<PovmSample> povm;
    if (in.has("povm_samples")) {
        const json& js = in.get("povm_samples");
        if (!js.is_array()) throw Error(ErrorKind::ParseError, "field 'inputs.povm_samples': expected a list");
        for (std::size_t i = 0; i < js.size(); ++i) {
            const std::string p = io::index_path(Inputs::path("povm_samples"), i);
            if (!js[i].contains("effects") || !js[i].contains("values")) {
                throw Error(ErrorKind::ValidationError, "field '" + p + "' needs 'effects' and 'values'");
            }
            povm.push_back({EffectList{Inputs::matrix_list(js[i]["effects"], io::join_path(p, "effects"))},
                            Inputs::real_list(js[i]["values"], io::join_path(p, "values"))});
        }
    }
    if (samples.empty() && povm.empty()) {
        throw Error(ErrorKind::ValidationError, "field 'inputs.samples' is missing (or give 'rho' to generate samples)");
    }

    if (!samples.empty()) rb.add(check_frame_function(samples, tol), "frame.");
    FitResult fit = [&] {
        if (povm.empty()) return fit_density(samples, tol);
        std::vector<PovmSample> all = povm;
        for (const auto& s : samples) all.push_back(as_povm_sample(s));
        return fit_density_povm(all, tol);
    }();

    rb.verdict("rank_complete", !fit.rank_deficient,
               "design rank " + std::to_string(fit.design_rank) + " from " + std::to_string(fit.equations) + " equations" +
                   (fit.rank_deficient ? " (RankDeficient)" : ""));
    rb.bound("residual", fit.residual, in.real("max_residual"));
    rb.note("psd_violation", fit.psd_violation);
    rb.note("trace_deviation", fit.trace_deviation);
    if (rho) {
        rb.bound("recovery_frobenius", (fit.rho_hat.matrix() - rho->matrix()).norm(), in.real("max_recovery_error"));
    }
    json& out = rb.outputs();
    out["rho_hat"] = io::to_json(fit.rho_hat.matrix());
    out["residual"] = fit.residual;
    out["design_rank"] = fit.design_rank;
    out["equations"] = fit.equations;
}

inline void run_gleason_counterexample(const Inputs& in, const Tolerances& tol, std::uint64_t seed, ReportBuilder& rb) {
    const auto n = static_cast<std::size_t>(in.positive("n_directions"));
    const std::vector<FrameSample> bad = qubit_counterexample(n, seed, tol);
    rb.add(check_frame_function(bad, tol), "counterexample_frame.");
    const FitResult bad_fit = fit_density(bad, tol);
    rb.at_least("counterexample_residual", bad_fit.residual, in.real("min_residual"));

    const double c = in.real("control_bloch_z");
    const std::vector<FrameSample> control = qubit_frame_samples(
        random_bloch_directions(n, seed), [c](const std::array<double, 3>& v) { return 0.5 * (1.0 + c * v[2]); }, tol);
    rb.add(check_frame_function(control, tol), "control_frame.");
    const FitResult control_fit = fit_density(control, tol);
    rb.bound("control_residual", control_fit.residual, in.real("control_max_residual"));

    json& out = rb.outputs();
    out["counterexample_residual"] = bad_fit.residual;
    out["counterexample_rho_hat"] = io::to_json(bad_fit.rho_hat.matrix());
    out["control_residual"] = control_fit.residual;
    out["control_rho_hat"] = io::to_json(control_fit.rho_hat.matrix());
}

inline void run_povm_derive(const Inputs& in, const Tolerances& tol, std::uint64_t seed, ReportBuilder& rb) {
    const auto ds = static_cast<Index>(in.positive("dS"));
    const auto dp = static_cast<Index>(in.positive("dP"));
    std::vector<ProjectorMatrix> ps;
    for (const Matrix& m : in.matrices("projectors_P")) ps.emplace_back(m, tol);
    const AncillaModel model(ds, dp, UnitaryMatrix(in.matrix("U"), tol), DensityMatrix(in.matrix("rho_P"), tol),
                             std::move(ps), tol);
    const EffectList effects = derive_povm(model, tol);
    rb.add(verify_povm(effects, tol), "povm.");

    Rng rng = make_stream(seed, 0);
    const auto n_states = in.positive("n_states");
    double worst = 0.0;
    for (std::int64_t s = 0; s < n_states; ++s) {
        const DensityMatrix rho = random_density(ds, rng);
        for (std::size_t b = 0; b < effects.size(); ++b) {
            worst = std::max(worst, std::abs(effect_probability(rho, effects.effects[b]) - joint_probability(rho, model, b)));
        }
    }
    rb.bound("reduced_vs_joint_probability", worst, in.real("contract_tolerance"));
    rb.note("reversed_ordering_gap", reversed_ordering_gap(model, effects),
            "U (I x Pi_b) U^dag inside the partial trace; only U^dag (I x Pi_b) U reproduces the joint probabilities");
    rb.outputs()["effects"] = effects_to_json(effects.effects);
}

inline void run_povm_dilate(const Inputs& in, const Tolerances& tol, std::uint64_t seed, ReportBuilder& rb) {
    const EffectList effects{in.matrices("effects")};
    const ValidationReport check = verify_povm(effects, tol);
    rb.add(check, "povm.");
    if (!check.passed()) return;
    const NaimarkDilation dil = naimark_dilate(effects, tol);
    rb.bound("isometry", max_abs(dil.isometry.adjoint() * dil.isometry - identity(dil.system_dim)), tol.povm_closure);

    Rng rng = make_stream(seed, 0);
    double worst = 0.0;
    const auto n_states = in.positive("n_states");
    for (std::int64_t s = 0; s < n_states; ++s) {
        const DensityMatrix rho = random_density(dil.system_dim, rng);
        for (std::size_t b = 0; b < effects.size(); ++b) {
            worst = std::max(worst, std::abs(dil.probability(rho, b) - effect_probability(rho, effects.effects[b])));
        }
    }
    rb.bound("dilated_statistics", worst, in.real("statistics_tolerance"));

    const UnitaryMatrix u = unitary_completion(dil, tol);
    std::vector<ProjectorMatrix> ancilla;
    for (Index b = 0; b < dil.ancilla_dim; ++b) ancilla.emplace_back(outer(ket(dil.ancilla_dim, b)), tol);
    const AncillaModel model(dil.system_dim, dil.ancilla_dim, u, DensityMatrix(outer(ket(dil.ancilla_dim, 0)), tol),
                             std::move(ancilla), tol);
    const EffectList recovered = derive_povm(model, tol);
    double recovery = 0.0;
    for (std::size_t b = 0; b < effects.size(); ++b) {
        recovery = std::max(recovery, max_abs(recovered.effects[b] - effects.effects[b]));
    }
    rb.bound("completion_recovers_effects", recovery, in.real("completion_tolerance"));

    rb.outputs()["ancilla_dim"] = dil.ancilla_dim;
    rb.outputs()["isometry"] = io::to_json(dil.isometry);
    rb.outputs()["completion"] = io::to_json(u.matrix());
}

inline void run_dynamics_evolve(const Inputs& in, const Tolerances& tol, ReportBuilder& rb) {
    const Hamiltonian h = hamiltonian_from_json(in.get("hamiltonian"), Inputs::path("hamiltonian"), tol);
    const Propagator p = propagator(h, in.real("t"), tol);
    rb.add(validate(p.u, MatrixKind::Unitary, tol), "propagator.");
    rb.outputs()["propagator"] = io::to_json(p.u.matrix());
    const double threshold = in.real("threshold");
    if (in.has("question")) {
        const Question q = io::question_from_json(in.get("question"), Inputs::path("question"), tol);
        const Question evolved = evolve_question(q, p, tol);
        rb.verdict("rank_preserved", evolved.rank() == q.rank());
        rb.add(validate(evolved.matrix(), MatrixKind::Projector, tol), "evolved_question.");
        rb.outputs()["evolved_question"] = io::to_json(evolved);
    }
    if (in.has("rho")) {
        const DensityMatrix rho(in.matrix("rho"), tol);
        const DensityMatrix out = evolve_joint(rho, p, tol);
        rb.bound("trace_preserved", std::abs(out.matrix().trace().real() - rho.matrix().trace().real()), tol.density_trace);
        rb.bound("spectrum_preserved",
                 (hermitian_eigen(out.matrix()).values - hermitian_eigen(rho.matrix()).values).cwiseAbs().maxCoeff(), threshold);
        rb.bound("purity_preserved",
                 std::abs((out.matrix() * out.matrix()).trace().real() - (rho.matrix() * rho.matrix()).trace().real()),
                 threshold);
        rb.outputs()["evolved_rho"] = io::to_json(out.matrix());
    }
}

inline void run_dynamics_group(const Inputs& in, const Tolerances& tol, ReportBuilder& rb) {
    const Hamiltonian h = hamiltonian_from_json(in.get("hamiltonian"), Inputs::path("hamiltonian"), tol);
    const std::vector<double> times = in.reals("times");
    const double threshold = in.real("threshold");
    rb.add(check_abelian_group(h, times, threshold, tol), "group.");

    if (in.boolean("log_round_trip")) {
        double worst = 0.0;
        std::size_t skipped = 0;
        for (double t : times) {
            if (t == 0.0) continue;
            const Propagator p = propagator(h, t, tol);
            try {
                const Hamiltonian back = hamiltonian_log(p, tol);
                worst = std::max(worst, max_abs(propagator(back, t, tol).u.matrix() - p.u.matrix()));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::BranchCut) throw;
                ++skipped;
            }
        }
        rb.bound("log_round_trip", worst, in.real("log_tolerance"));
        rb.note("log_branch_cut_skips", static_cast<double>(skipped));
    }
    if (in.has("compare_with")) {
        const Hamiltonian other = hamiltonian_from_json(in.get("compare_with"), Inputs::path("compare_with"), tol);
        const ValidationReport cross = check_cross_commutativity(h, other, times, threshold, tol);
        for (const auto& c : cross.checks) rb.note(c.name, c.deviation, c.passed ? "commuting generators" : "non-commuting generators");
    }
}

inline int exit_status_for(ErrorKind kind) {
    return kind == ErrorKind::ParseError ? kParseError : kValidationError;
}

/// Errors raised while decoding inputs are payload errors, not module failures.
inline bool is_payload_error(ErrorKind kind) {
    return kind == ErrorKind::ParseError || kind == ErrorKind::ValidationError;
}

/// Dispatches one parsed scenario. Every failure is reported inside the
/// returned report; nothing escapes as an exception.
inline RunOutcome run(const json& raw_scenario, const RunOptions& options = {}) {
    const auto start = std::chrono::steady_clock::now();
    RunOutcome outcome;
    json& report = outcome.report;
    report["format_version"] = kFormatVersion;
    report["tool_version"] = kToolVersion;
    report["scenario"] = raw_scenario;
    report["errors"] = json::array();

    auto fail = [&](ErrorKind kind, const std::string& message, int status) {
        report["errors"].push_back({{"kind", std::string(to_string(kind))}, {"message", message}});
        outcome.exit_status = status;
    };

    ReportBuilder rb;
    std::uint64_t seed = 0;
    try {
        const json scenario = io::resolve_file_refs(raw_scenario, options.base_dir);
        const json schema = emit_schema();
        const std::vector<std::string> problems = validate_scenario(scenario, schema);
        if (!problems.empty()) {
            std::string message;
            for (const auto& p : problems) message += (message.empty() ? "" : "; ") + p;
            throw Error(ErrorKind::ValidationError, message);
        }

        Tolerances tol;
        if (scenario.contains("tolerances")) {
            for (auto it = scenario["tolerances"].begin(); it != scenario["tolerances"].end(); ++it) {
                tol.set(it.key(), it.value().get<double>());
            }
        }
        for (const auto& [key, value] : options.tolerance_overrides) {
            if (!tol.set(key, value)) throw Error(ErrorKind::ValidationError, "unknown tolerance '" + key + "'");
        }
        json effective = json::object();
        for (const auto& [name, member] : Tolerances::fields()) effective[std::string(name)] = tol.*member;
        report["tolerances"] = effective;

        seed = options.seed.value_or(scenario.value("seed", std::uint64_t{0}));
        report["seed"] = seed;

        const std::string kind = scenario["kind"].get<std::string>();
        const json inputs = scenario.value("inputs", json::object());
        const Inputs in(inputs, schema["kinds"][kind]);
        try {
            if (kind == "lattice-check") run_lattice_check(in, tol, seed, rb);
            else if (kind == "born-matrix") run_born_matrix(in, tol, rb);
            else if (kind == "born-sample") run_born_sample(in, tol, seed, rb);
            else if (kind == "gleason-fit") run_gleason_fit(in, tol, seed, rb);
            else if (kind == "gleason-counterexample") run_gleason_counterexample(in, tol, seed, rb);
            else if (kind == "povm-derive") run_povm_derive(in, tol, seed, rb);
            else if (kind == "povm-dilate") run_povm_dilate(in, tol, seed, rb);
            else if (kind == "dynamics-evolve") run_dynamics_evolve(in, tol, rb);
            else if (kind == "dynamics-group") run_dynamics_group(in, tol, rb);
        } catch (const Error& e) {
            if (is_payload_error(e.kind())) throw;
            // A module rejecting its input is a payload that fails the module's preconditions.
            report["errors"].push_back({{"kind", "ValidationError"},
                                        {"cause", std::string(to_string(e.kind()))},
                                        {"message", e.message()}});
            outcome.exit_status = kValidationError;
        }
    } catch (const Error& e) {
        fail(e.kind(), e.message(), exit_status_for(e.kind()));
    } catch (const std::exception& e) {
        report["errors"].push_back({{"kind", "InternalError"}, {"message", e.what()}});
        outcome.exit_status = kInternalError;
    }

    report["verdicts"] = io::to_json(rb.verdicts());
    report["outputs"] = rb.outputs();
    const bool all_pass = rb.verdicts().passed() && report["errors"].empty();
    report["passed"] = all_pass;
    if (outcome.exit_status == kAllPassed && !all_pass) outcome.exit_status = kVerdictFailed;
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    report["timing_ms"] = elapsed.count();
    return outcome;
}

inline RunOutcome run_file(const std::filesystem::path& path, RunOptions options = {}) {
    json scenario;
    try {
        scenario = io::load_file(path);
    } catch (const Error& e) {
        RunOutcome outcome;
        outcome.report = {{"format_version", kFormatVersion},
                          {"tool_version", kToolVersion},
                          {"scenario", nullptr},
                          {"errors", json::array({{{"kind", std::string(to_string(e.kind()))}, {"message", e.message()}}})},
                          {"verdicts", json::array()},
                          {"outputs", json::object()},
                          {"passed", false},
                          {"timing_ms", 0.0}};
        outcome.exit_status = exit_status_for(e.kind());
        return outcome;
    }
    options.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    return run(scenario, options);
}

/// Report text with the timing field removed; the determinism contract applies to this.
inline std::string canonical_text(json report) {
    report.erase("timing_ms");
    return report.dump(2);
}

}  // namespace qrecon::scenario
