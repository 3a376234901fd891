#include "oracle/decomposition.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "oracle/errors.hpp"

namespace oracle {

namespace {

// Calls `fn(k, start, end)` for every `#k` token in `text`.
template <typename Fn>
void for_each_placeholder(std::string_view text, Fn&& fn) {
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '#') {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        long long k = 0;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
            if (k < 1000000) k = k * 10 + (text[j] - '0');
            ++j;
        }
        if (j == i + 1) {
            ++i;
            continue;
        }
        fn(static_cast<int>(std::min<long long>(k, 1000000)), i, j);
        i = j;
    }
}

std::string class_of(const FolFormula& f, const Ontology& o, const std::string& var) {
    auto it = f.type_constraints.find(var);
    if (it != f.type_constraints.end() && !it->second.empty()) return it->second;
    for (const ClassAssertion& ca : o.class_assertions) {
        for (const Term& m : ca.members) {
            if (m.is_variable() && m.text == var) return ca.class_name;
        }
    }
    return "Entity";
}

}  // namespace

std::string substitute(const SubQuestion& q, const std::vector<std::string>& answers) {
    std::string out;
    std::size_t last = 0;
    for_each_placeholder(q.text, [&](int k, std::size_t start, std::size_t end) {
        out.append(q.text, last, start - last);
        if (k < 1 || static_cast<std::size_t>(k) > answers.size() ||
            trim(answers[k - 1]).empty()) {
            throw MissingAnswerError(k);
        }
        out += answers[k - 1];
        last = end;
    });
    out.append(q.text, last, q.text.size() - last);
    return out;
}

std::vector<std::string> validate_plan(const DecompositionPlan& plan, const FolFormula& f) {
    std::vector<std::string> violations;

    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const SubQuestion& q = plan.steps[i];
        if (q.index != static_cast<int>(i) + 1) {
            violations.push_back("step " + std::to_string(i + 1) + " carries index " +
                                 std::to_string(q.index));
        }
        if (trim(q.text).empty()) {
            violations.push_back("step " + std::to_string(q.index) + " has empty text");
        }
        for_each_placeholder(q.text, [&](int k, std::size_t, std::size_t) {
            if (k >= q.index || k < 1) {
                violations.push_back("step " + std::to_string(q.index) +
                                     " references #" + std::to_string(k) +
                                     ", which is not an earlier step");
            }
        });
    }

    if (plan.steps.size() < f.quantified_vars.size()) {
        violations.push_back("plan has " + std::to_string(plan.steps.size()) +
                             " steps but the formula quantifies " +
                             std::to_string(f.quantified_vars.size()) +
                             " variables (under-decomposition)");
    }

    if (!plan.steps.empty()) {
        const SubQuestion& final_step = plan.steps.back();
        if (final_step.bound_variable && *final_step.bound_variable != f.answer_var) {
            violations.push_back("final step resolves '" + *final_step.bound_variable +
                                 "' rather than the answer variable '" + f.answer_var + "'");
        }
    } else {
        violations.push_back("plan has no steps");
    }

    return violations;
}

std::string predicate_phrase(std::string_view predicate) {
    std::string out;
    for (char c : predicate) {
        if (c == '_') {
            out += ' ';
        } else if (std::isupper(static_cast<unsigned char>(c))) {
            if (!out.empty() && out.back() != ' ') out += ' ';
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            out += c;
        }
    }
    return out;
}

DecompositionPlan fallback_decompose(const FolFormula& f, const Ontology& o,
                                     std::vector<std::string>* assumed_facts) {
    GroundingPlan grounding = grounding_order(f);

    struct Draft {
        std::string var;
        std::string text;
    };
    std::vector<Draft> drafts;
    std::map<std::string, int> step_of_var;  // variable -> 1-based step that binds it

    for (std::size_t atom_idx : grounding.order) {
        const Atom& atom = f.atoms[atom_idx];
        auto intro = grounding.introduces.find(atom_idx);
        if (intro == grounding.introduces.end()) {
            if (assumed_facts) assumed_facts->push_back(atom.render());
            continue;
        }
        const std::string& var = intro->second;
        bool var_is_head = atom.args[0].is_variable() && atom.args[0].text == var;
        const Term& other = var_is_head ? atom.args[1] : atom.args[0];

        std::string other_text = other.text;
        if (other.is_variable()) {
            other_text = "#" + std::to_string(step_of_var.at(other.text));
        }

        std::string phrase = predicate_phrase(atom.predicate);
        std::string text;
        if (var_is_head) {
            text = "Which " + class_of(f, o, var) + " " + phrase + " " + other_text + "?";
        } else {
            text = "Which " + class_of(f, o, var) + " was " + other_text + " " + phrase + "?";
        }

        step_of_var[var] = static_cast<int>(drafts.size()) + 1;
        drafts.push_back({var, std::move(text)});
    }

    // The chain solver takes the last sub-answer as the final answer, so the
    // step binding the answer variable must come last. Move it there when no
    // later step depends on it.
    auto ans_it = std::find_if(drafts.begin(), drafts.end(),
                               [&](const Draft& d) { return d.var == f.answer_var; });
    if (ans_it != drafts.end() && ans_it + 1 != drafts.end()) {
        int ans_step = static_cast<int>(ans_it - drafts.begin()) + 1;
        bool referenced_later = false;
        for (auto it = ans_it + 1; it != drafts.end(); ++it) {
            for_each_placeholder(it->text, [&](int k, std::size_t, std::size_t) {
                if (k == ans_step) referenced_later = true;
            });
        }
        if (!referenced_later) {
            Draft moved = *ans_it;
            drafts.erase(ans_it);
            drafts.push_back(std::move(moved));
            // Renumber placeholders: steps after the removed slot shifted down.
            std::map<int, int> renumber;
            for (std::size_t pos = 0; pos < drafts.size(); ++pos) {
                int old_step;
                if (drafts[pos].var == f.answer_var) {
                    old_step = ans_step;
                } else {
                    old_step = step_of_var.at(drafts[pos].var);
                }
                renumber[old_step] = static_cast<int>(pos) + 1;
            }
            for (Draft& d : drafts) {
                std::string rewritten;
                std::size_t last = 0;
                for_each_placeholder(d.text, [&](int k, std::size_t start, std::size_t end) {
                    rewritten.append(d.text, last, start - last);
                    rewritten += "#" + std::to_string(renumber.count(k) ? renumber.at(k) : k);
                    last = end;
                });
                rewritten.append(d.text, last, d.text.size() - last);
                d.text = std::move(rewritten);
            }
        }
    }

    DecompositionPlan plan;
    plan.source = PlanSource::Fallback;
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        SubQuestion q;
        q.index = static_cast<int>(i) + 1;
        q.text = drafts[i].text;
        q.bound_variable = drafts[i].var;
        plan.steps.push_back(std::move(q));
    }
    return plan;
}

}  // namespace oracle
