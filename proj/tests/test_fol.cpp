#include <doctest.h>

#include <random>
#include <set>

#include "oracle/errors.hpp"
#include "oracle/fol.hpp"
#include "support/generators.hpp"

using namespace oracle;

namespace {

const char* kMonarchChainText =
    "Type Constraints: type(m, Monarch), type(c, Country), type(ans, Government)\n"
    "retranslated(m, The Reflections) ∧ rulerOf(m, c) ∧ alliedWith(c, America) "
    "∧ finished(America, Saratoga) ∧ followed(ans, c)\n";

Ontology monarch_context() {
    Ontology o;
    o.relations = {"retranslated", "rulerOf", "followed", "finished", "alliedWith"};
    return o;
}

}  // namespace

TEST_CASE("worked-example formula parses to 3 variables and 5 atoms") {
    ParsedFol parsed = parse_fol(kMonarchChainText, monarch_context());
    const FolFormula& f = parsed.formula;

    CHECK(f.quantified_vars == std::vector<std::string>{"m", "c", "ans"});
    CHECK(f.answer_var == "ans");
    REQUIRE(f.atoms.size() == 5);
    CHECK(f.atoms[0].predicate == "retranslated");
    CHECK(f.atoms[0].args[0] == Term::variable("m"));
    CHECK(f.atoms[0].args[1] == Term::constant("The Reflections"));
    CHECK(f.atoms[3].args[0] == Term::constant("America"));
    CHECK(f.atoms[3].args[1] == Term::constant("Saratoga"));
    CHECK(f.atoms[4].predicate == "followed");
    CHECK(f.type_constraints.at("ans") == "Government");
    CHECK(parsed.warnings.empty());
}

TEST_CASE("minimal formula") {
    ParsedFol parsed = parse_fol("type(ans, X); p(ans, A)", Ontology{});
    CHECK(parsed.formula.quantified_vars == std::vector<std::string>{"ans"});
    CHECK(parsed.formula.atoms.size() == 1);
}

TEST_CASE("AND keyword and explicit exists list are accepted") {
    ParsedFol parsed = parse_fol(
        "∃ ans, m\n"
        "type(m, Monarch), type(ans, Country)\n"
        "rulerOf(m, ans) AND partOf(m, Bavaria)",
        Ontology{});
    CHECK(parsed.formula.quantified_vars == std::vector<std::string>{"ans", "m"});
    CHECK(parsed.formula.atoms.size() == 2);
}

TEST_CASE("display-style block with leading conjunctions parses") {
    const char* block =
        "Type Constraints: type(m, Monarch), type(c, Country), type(ans, Government)\n"
        "Φ = ∃ ans, m, c\n"
        "  ∧ retranslated(m, The Reflections)\n"
        "  ∧ rulerOf(m, c)\n"
        "  ∧ alliedWith(c, America)\n"
        "  ∧ finished(America, Saratoga)\n"
        "  ∧ followed(ans, c)\n";
    ParsedFol parsed = parse_fol(block, monarch_context());
    CHECK(parsed.formula.atoms.size() == 5);
    CHECK(parsed.formula.quantified_vars == std::vector<std::string>{"ans", "m", "c"});
}

TEST_CASE("missing type declaration raises a validation error naming the variable") {
    try {
        parse_fol("p(ans, A)", Ontology{});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("ans") != std::string::npos);
    }
}

TEST_CASE("unquantified variable is rejected") {
    CHECK_THROWS_AS(parse_fol("type(ans, X); p(ans, q)", Ontology{}), ValidationError);
}

TEST_CASE("disjunction, negation and universal quantification are parse errors") {
    CHECK_THROWS_AS(parse_fol("type(ans, X); p(ans, A) ∨ q(ans, B)", Ontology{}),
                    ParseError);
    CHECK_THROWS_AS(parse_fol("type(ans, X); p(ans, A) OR q(ans, B)", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("type(ans, X); ¬ p(ans, A)", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("type(ans, X); NOT p(ans, A)", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("∀ x type(ans, X); p(ans, x)", Ontology{}), ParseError);
}

TEST_CASE("malformed syntax is a parse error") {
    CHECK_THROWS_AS(parse_fol("", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("just some prose with no formula", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("type(ans, X); p(ans)", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("type(ans, X); p(ans, a, b)", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("type(ans, X); p(, x)", Ontology{}), ParseError);
    CHECK_THROWS_AS(parse_fol("type(ans, X); p(ans, q(r))", Ontology{}), ParseError);
}

TEST_CASE("unknown predicates are warnings, not errors") {
    Ontology context;
    context.relations = {"rulerOf"};
    ParsedFol parsed = parse_fol("type(ans, X)\nmystery(ans, America)", context);
    REQUIRE(parsed.warnings.size() == 1);
    CHECK(parsed.warnings[0].find("mystery") != std::string::npos);
}

TEST_CASE("worked-example grounding order") {
    ParsedFol parsed = parse_fol(kMonarchChainText, monarch_context());
    GroundingPlan plan = grounding_order(parsed.formula);

    // Atom 3 (all constants) is admissible with zero unbound variables, so
    // the fewest-unbound tie-break runs it first as a verification step; the
    // variable-introducing chain then proceeds in original order.
    CHECK(plan.order == std::vector<std::size_t>{3, 0, 1, 2, 4});
    REQUIRE(plan.introduces.size() == 3);
    CHECK(plan.introduces.at(0) == "m");
    CHECK(plan.introduces.at(1) == "c");
    CHECK(plan.introduces.at(4) == "ans");

    CHECK(testgen::chain_exists_by_permutation(parsed.formula));
}

TEST_CASE("single-atom grounding") {
    FolFormula f;
    f.quantified_vars = {"ans"};
    f.type_constraints["ans"] = "X";
    f.answer_var = "ans";
    f.atoms = {{"p", {Term::variable("ans"), Term::constant("Const")}}};

    GroundingPlan plan = grounding_order(f);
    CHECK(plan.order == std::vector<std::size_t>{0});
    CHECK(plan.introduces.at(0) == "ans");
}

TEST_CASE("two fresh variables in every order has no chain") {
    FolFormula f;
    f.quantified_vars = {"x", "y", "ans"};
    f.type_constraints = {{"x", "A"}, {"y", "B"}, {"ans", "C"}};
    f.answer_var = "ans";
    f.atoms = {{"p", {Term::variable("x"), Term::variable("y")}},
               {"q", {Term::variable("y"), Term::variable("ans")}}};

    CHECK_FALSE(testgen::chain_exists_by_permutation(f));
    try {
        grounding_order(f);
        FAIL("expected NoChainError");
    } catch (const NoChainError& e) {
        CHECK_FALSE(e.blocking.empty());
    }
}

TEST_CASE("answer variable absent from atoms has no chain") {
    FolFormula f;
    f.quantified_vars = {"x", "ans"};
    f.type_constraints = {{"x", "A"}, {"ans", "C"}};
    f.answer_var = "ans";
    f.atoms = {{"p", {Term::variable("x"), Term::constant("K")}}};

    CHECK_FALSE(testgen::chain_exists_by_permutation(f));
    CHECK_THROWS_AS(grounding_order(f), NoChainError);
}

TEST_CASE("render of the worked example keeps every declaration and atom") {
    ParsedFol parsed = parse_fol(kMonarchChainText, monarch_context());
    std::string rendered = render_fol(parsed.formula);
    CHECK(rendered.find("type(m, Monarch)") != std::string::npos);
    CHECK(rendered.find("retranslated(m, The Reflections)") != std::string::npos);
    CHECK(rendered.find("followed(ans, c)") != std::string::npos);
}

TEST_CASE("minimal render is two lines") {
    FolFormula f;
    f.quantified_vars = {"ans"};
    f.type_constraints["ans"] = "X";
    f.answer_var = "ans";
    f.atoms = {{"p", {Term::variable("ans"), Term::constant("A")}}};

    std::string rendered = render_fol(f);
    CHECK(rendered == "Type Constraints: type(ans, X)\np(ans, A)\n");
}

TEST_CASE("parse after render is the identity on 200 generated formulas") {
    std::mt19937_64 rng(20240501);
    for (int i = 0; i < 200; ++i) {
        FolFormula f = testgen::random_chain_formula(rng);
        ParsedFol round = parse_fol(render_fol(f), Ontology{});
        CHECK(round.formula == f);
    }
}

TEST_CASE("grounding agrees with permutation search on loose formulas") {
    std::mt19937_64 rng(987654);
    int chains = 0;
    for (int i = 0; i < 150; ++i) {
        FolFormula f = testgen::random_loose_formula(rng);
        bool expected = testgen::chain_exists_by_permutation(f);
        bool actual = true;
        GroundingPlan plan;
        try {
            plan = grounding_order(f);
        } catch (const NoChainError&) {
            actual = false;
        }
        CHECK(actual == expected);
        if (!actual) continue;
        ++chains;

        // Every step has at most one fresh variable, the bound set grows
        // monotonically, and the answer variable ends bound.
        std::set<std::string> bound;
        std::set<std::size_t> seen;
        for (std::size_t idx : plan.order) {
            CHECK(seen.insert(idx).second);
            std::set<std::string> fresh;
            for (const Term& t : f.atoms[idx].args) {
                if (t.is_variable() && !bound.count(t.text)) fresh.insert(t.text);
            }
            CHECK(fresh.size() <= 1);
            auto intro = plan.introduces.find(idx);
            if (fresh.empty()) {
                CHECK(intro == plan.introduces.end());
            } else {
                REQUIRE(intro != plan.introduces.end());
                CHECK(intro->second == *fresh.begin());
            }
            bound.insert(fresh.begin(), fresh.end());
        }
        CHECK(seen.size() == f.atoms.size());
        CHECK(bound.count(f.answer_var) == 1);
    }
    CHECK(chains > 10);  // the generator must exercise both outcomes
}

TEST_CASE("formula validation lists violations") {
    FolFormula f;
    f.answer_var = "ans";
    CHECK_FALSE(validate_formula(f).empty());

    f.quantified_vars = {"ans"};
    f.type_constraints["ans"] = "X";
    f.atoms = {{"p", {Term::variable("ans"), Term::constant("A")}}};
    CHECK(validate_formula(f).empty());
}
