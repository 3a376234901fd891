#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracle/core.hpp"
#include "oracle/pipeline.hpp"

namespace oracle {

// SQuAD-style answer normalization: lowercase, strip punctuation, remove
// standalone articles (a, an, the), collapse whitespace. Idempotent.
std::string normalize(std::string_view s);

// 1 iff the normalized strings are identical.
int exact_match(std::string_view pred, std::string_view gold);

// Token-multiset F1 over normalized strings. Both empty -> 1, exactly one
// empty -> 0. Symmetric in its arguments.
double token_f1(std::string_view pred, std::string_view gold);

// Gold reasoning string: "head relation tail" per triple, concatenated in
// order.
std::string gold_reasoning_string(const std::vector<Triple>& gold);

// Default generated-string builder: substituted sub-question + " " + answer
// per step, concatenated in order.
std::string generated_reasoning_string(const TraceRecord& trace);

// Token F1 between the generated reasoning string and the gold evidence
// string. An alternative string builder may replace the default. Throws
// NoGoldError when gold is empty.
double reasoning_f1(const TraceRecord& trace, const std::vector<Triple>& gold);
double reasoning_f1(std::string_view generated, const std::vector<Triple>& gold);

// Generated step count minus gold triple count, signed. Throws NoGoldError
// when gold is empty.
int deviation(const TraceRecord& trace, const std::vector<Triple>& gold);

struct EvalResult {
    std::string question_id;
    std::string method;
    int em = 0;
    double f1 = 0.0;
    std::optional<double> reasoning_f1;
    std::optional<int> deviation;
    std::optional<std::string> reasoning_type;
};

struct DeviationBucket {
    std::size_t count = 0;
    double proportion = 0.0;
    double mean_f1 = 0.0;
};

struct TypeStats {
    std::size_t count = 0;
    double mean_f1 = 0.0;
};

// Aggregated results for one method's run.
struct MethodStats {
    std::size_t count = 0;
    double mean_em = 0.0;
    double mean_f1 = 0.0;
    std::map<std::string, TypeStats> f1_by_type;

    // Reasoning-quality split at 0.5 (over results carrying a reasoning F1).
    std::size_t reasoning_count = 0;
    double mean_reasoning_f1 = 0.0;
    double high_proportion = 0.0;  // reasoning F1 > 0.5
    double low_proportion = 0.0;
    double f1_given_high = 0.0;
    double f1_given_low = 0.0;

    std::map<int, DeviationBucket> deviation_histogram;
};

struct AggregateReport {
    std::map<std::string, MethodStats> methods;
};

AggregateReport aggregate(const std::vector<EvalResult>& results);

nlohmann::ordered_json report_to_json(const AggregateReport& report);
std::string report_to_csv(const AggregateReport& report);
std::string per_question_csv(const std::vector<EvalResult>& results);

}  // namespace oracle
