#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oracle/core.hpp"
#include "oracle/fol.hpp"

namespace oracle {

// One step of a decomposition plan. `#k` tokens in the text refer to the
// answer of step k and must point backwards (k < index).
struct SubQuestion {
    int index = 1;  // 1-based
    std::string text;
    std::optional<std::string> bound_variable;  // FOL variable this step resolves

    bool operator==(const SubQuestion&) const = default;
};

enum class PlanSource { LlmGenerated, Fallback };

struct DecompositionPlan {
    std::vector<SubQuestion> steps;
    PlanSource source = PlanSource::LlmGenerated;

    bool operator==(const DecompositionPlan&) const = default;
};

// Replaces every `#k` with answers[k-1]. Throws MissingAnswerError when the
// referenced answer is absent or empty.
std::string substitute(const SubQuestion& q, const std::vector<std::string>& answers);

// Checks a plan against the formula it is supposed to realize. Violations are
// data, not failures: forward placeholder references, fewer steps than
// quantified variables, a final step bound to a variable other than the
// answer variable, malformed indices.
std::vector<std::string> validate_plan(const DecompositionPlan& plan, const FolFormula& f);

// Deterministic decomposer used when the model's plan is unusable: one
// sub-question per variable-introducing atom in grounding order, with earlier
// variables replaced by their `#k` placeholders. Constant-only atoms are
// skipped and reported through `assumed_facts` when provided.
DecompositionPlan fallback_decompose(const FolFormula& f, const Ontology& o,
                                     std::vector<std::string>* assumed_facts = nullptr);

// rulerOf -> "ruler of", allied_with -> "allied with".
std::string predicate_phrase(std::string_view predicate);

}  // namespace oracle
