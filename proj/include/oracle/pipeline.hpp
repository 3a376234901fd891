#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracle/datasets.hpp"
#include "oracle/decomposition.hpp"
#include "oracle/llm.hpp"
#include "oracle/prompting.hpp"
#include "oracle/retriever.hpp"

namespace oracle {

// The full method, its two ablations, and the three baselines.
enum class Method { Oracle, OracleNoOntology, OracleNoFol, NoCoT, CoT, Rag };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

// Does this method decompose into sub-questions (vs a single call)?
bool is_decomposition_method(Method m);

struct SubStepTrace {
    int index = 1;
    std::string raw_subquestion;  // before placeholder substitution
    std::string substituted;
    std::vector<std::pair<std::string, double>> retrieved;  // (paragraph id, score)
    std::string answer;
    long latency_ms = 0;
};

struct TokenTotals {
    long prompt = 0;
    long completion = 0;
};

// Full per-question execution trace. Volatile fields (wall_ms and per-step
// latency_ms) are the only ones allowed to differ between identical replay
// runs.
struct TraceRecord {
    std::string question_id;
    Method method = Method::Oracle;
    std::optional<StageOutput> stage1;  // ontology extraction
    std::optional<StageOutput> stage2;  // logical formula
    std::optional<StageOutput> stage3;  // raw decomposition output
    std::optional<DecompositionPlan> plan;  // effective plan actually executed
    std::vector<std::string> assumed_facts;  // constant-only atoms skipped by the fallback
    std::vector<SubStepTrace> substeps;
    std::string final_answer;
    long wall_ms = 0;
    TokenTotals token_totals;
    std::vector<std::string> errors;
};

struct PipelineConfig {
    RetrieverConfig retriever;
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_tokens = 512;
    long question_timeout_ms = 120000;
    std::uint64_t seed = 0;
};

// Runs one question under one method. Per-stage failures degrade (fallback
// decomposition, "unknown" substitution, empty answers recorded) rather than
// abort; only infrastructure errors (AuthError) propagate.
TraceRecord run_question(const QARecord& record, Method method, Gateway& gateway,
                         const PipelineConfig& cfg, const TemplateStore& templates);

// Runs a batch with up to `parallelism` questions in flight. Output order
// matches input order; when `run_dir` is set, traces stream to
// run_dir/traces.jsonl (in input order) and a manifest.json snapshot is
// written alongside.
std::vector<TraceRecord> run_dataset(const std::vector<QARecord>& records, Method method,
                                     Gateway& gateway, const PipelineConfig& cfg,
                                     const TemplateStore& templates, int parallelism,
                                     const std::optional<std::filesystem::path>& run_dir);

nlohmann::ordered_json trace_to_json(const TraceRecord& trace);
TraceRecord trace_from_json(const nlohmann::json& j);

void write_traces_jsonl(const std::filesystem::path& path,
                        const std::vector<TraceRecord>& traces);
std::vector<TraceRecord> read_traces_jsonl(const std::filesystem::path& path);

}  // namespace oracle
