#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "oracle/core.hpp"
#include "oracle/decomposition.hpp"
#include "oracle/fol.hpp"

namespace oracle {

// Canonical template names. The store is keyed by file stem, so variant
// templates (fol_no_onto, decomp_no_fol, ...) live alongside these.
enum class TemplateName { Onto, Fol, Decomp, NoCoT, CoT, Rag, SubSolve };

std::string_view to_string(TemplateName name);

struct PromptTemplate {
    std::string name;  // file stem, e.g. "onto"
    std::string body;  // text with {slot} markers
};

// Prompt templates, keyed by name. Starts from the built-in set; a templates
// directory can override or extend it (one .txt file per template, name =
// file stem). A `<stem>.examples.txt` file fills the {examples} marker of the
// matching template at load time.
class TemplateStore {
public:
    static TemplateStore builtin();

    void load_dir(const std::filesystem::path& dir);
    void dump(const std::filesystem::path& dir) const;

    const PromptTemplate& get(std::string_view name) const;
    const PromptTemplate& get(TemplateName name) const { return get(to_string(name)); }
    bool has(std::string_view name) const;

    // FNV-1a digest per template body, for run manifests.
    std::map<std::string, std::string> digests() const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

// Slots a canonical template must reference exactly once.
std::vector<std::string> required_slots(std::string_view template_name);

// Replaces every `{slot}` marker in the body with slots.at(slot). Throws
// MissingSlotError when the body references a slot that is not provided.
std::string assemble(const PromptTemplate& tmpl,
                     const std::map<std::string, std::string>& slots);

// Canonical text rendering of an ontology: a "Classes and Entities:" section
// and a "Relations:" section. parse_ontology_output of the result reproduces
// the ontology.
std::string render_ontology(const Ontology& o);

// Parses a stage-1 output: class assertions from the classes/entities
// section, relation names from the relations section, query pattern from a
// 2p/3p/2i/3i/ip/pi mention. Throws ParseError when no recognizable section
// exists.
std::pair<Ontology, QueryPattern> parse_ontology_output(std::string_view raw);

// Parses a stage-3 output: a numbered list of sub-questions, `#k`
// placeholders preserved verbatim, optional trailing "(variable: x)" /
// "-> x" annotations captured as bound_variable. Throws ParseError when no
// numbered list is found.
DecompositionPlan parse_plan_output(std::string_view raw);

// Content of the last <answer>...</answer> pair; otherwise the last
// non-empty line with any leading "Answer:" prefix stripped. Throws
// EmptyAnswerError when the result is empty after trimming.
std::string extract_tagged_answer(std::string_view raw);

// Stage outputs preserved for tracing; raw_text is byte-for-byte.
struct OntologyOut {
    Ontology ontology;
    QueryPattern pattern = QueryPattern::Unknown;
};
struct FolOut {
    FolFormula formula;
    std::vector<std::string> warnings;
};
struct PlanOut {
    DecompositionPlan plan;
};
struct StageOutput {
    std::string raw_text;
    std::variant<std::monostate, OntologyOut, FolOut, PlanOut> parsed;
};

}  // namespace oracle
