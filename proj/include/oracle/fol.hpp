#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "oracle/core.hpp"

namespace oracle {

// Binary atom: predicate over exactly two terms, e.g. rulerOf(m, c).
struct Atom {
    std::string predicate;
    std::array<Term, 2> args;

    std::string render() const;

    bool operator==(const Atom&) const = default;
};

// Existentially quantified conjunction of binary atoms with per-variable type
// constraints and a designated answer variable.
struct FolFormula {
    std::vector<std::string> quantified_vars;              // existential list, ordered
    std::map<std::string, std::string> type_constraints;   // variable -> class
    std::vector<Atom> atoms;                               // conjunction, ordered
    std::string answer_var;

    bool operator==(const FolFormula&) const = default;
};

// Returns one description per invariant violated; empty means valid.
std::vector<std::string> validate_formula(const FolFormula& f);

// An ordering of the formula's atoms in which each step has at most one
// unbound variable argument, so a chain solver can bind one variable at a
// time. `introduces` maps atom index -> the variable that atom binds first
// (atoms whose arguments are all constants or already-bound variables
// introduce nothing and act as verification steps).
struct GroundingPlan {
    std::vector<std::size_t> order;               // permutation of atom indices
    std::map<std::size_t, std::string> introduces;
};

struct ParsedFol {
    FolFormula formula;
    std::vector<std::string> warnings;
};

// Parses a stage-2 output region: `type(var, Class)` declarations plus a
// conjunction of atoms joined by `∧` or `AND`. Predicates absent from
// `context.relations` are accepted but reported through `warnings`.
// Throws ParseError on malformed syntax (including any negation, disjunction
// or universal quantifier) and ValidationError when the formula violates its
// invariants (unquantified variable, missing type constraint, missing answer
// variable).
ParsedFol parse_fol(std::string_view text, const Ontology& context);

// Canonical text form: one "Type Constraints:" line (declarations in
// quantified order) followed by the ∧-joined conjunction. parse_fol of the
// result reproduces the formula structurally.
std::string render_fol(const FolFormula& f);

// Greedy chain ordering. Among admissible next atoms (at most one unbound
// variable argument), ties break by fewest unbound variables, then original
// atom order. Throws NoChainError when no admissible ordering exists or the
// answer variable is never bound.
GroundingPlan grounding_order(const FolFormula& f);

}  // namespace oracle
