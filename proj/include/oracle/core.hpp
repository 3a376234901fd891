#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

// A term is either a named constant (America, The Reflections) or an unknown
// variable (m, c, ans). The two are distinguished purely by lexical form: a
// lowercase-initial identifier is a variable, anything else is a constant.
struct Term {
    enum class Kind { Constant, Variable };

    Kind kind = Kind::Constant;
    std::string text;

    static Term constant(std::string s) { return {Kind::Constant, std::move(s)}; }
    static Term variable(std::string s) { return {Kind::Variable, std::move(s)}; }
    static Term from_text(std::string_view s);

    bool is_variable() const { return kind == Kind::Variable; }
    bool is_constant() const { return kind == Kind::Constant; }

    bool operator==(const Term&) const = default;
};

// True for one or more ASCII letters/digits/underscores starting with a
// lowercase letter.
bool is_variable_name(std::string_view s);

std::string_view trim(std::string_view s);

// Class membership statement, e.g. Country(America, c).
struct ClassAssertion {
    std::string class_name;
    std::vector<Term> members;

    std::string render() const;

    bool operator==(const ClassAssertion&) const = default;
};

struct Triple {
    Term head;
    std::string relation;
    Term tail;

    std::string render() const;  // "(head, relation, tail)"

    bool operator==(const Triple&) const = default;
};

// Question-centric ontology: the classes/entities and relation vocabulary
// extracted for a single question, plus the predicted class of the answer.
struct Ontology {
    std::vector<ClassAssertion> class_assertions;
    std::vector<std::string> relations;  // deduplicated, order-preserving
    std::optional<std::string> answer_class;

    bool operator==(const Ontology&) const = default;
};

// The reserved name of the answer variable.
inline constexpr std::string_view kAnswerVariable = "ans";

// Query shapes the stage-1 prompt asks the model to identify.
enum class QueryPattern { Path2, Path3, Intersect2, Intersect3, IP, PI, Unknown };

std::string_view to_string(QueryPattern p);
QueryPattern query_pattern_from_token(std::string_view token);

// Returns one description per invariant violated; empty means valid.
std::vector<std::string> validate_ontology(const Ontology& o);

}  // namespace oracle
