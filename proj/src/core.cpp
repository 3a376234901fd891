#include "oracle/core.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace oracle {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

bool is_variable_name(std::string_view s) {
    if (s.empty()) return false;
    if (!std::islower(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Term Term::from_text(std::string_view s) {
    std::string_view t = trim(s);
    if (is_variable_name(t)) return variable(std::string(t));
    return constant(std::string(t));
}

std::string ClassAssertion::render() const {
    std::string out = class_name;
    out += '(';
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) out += ", ";
        out += members[i].text;
    }
    out += ')';
    return out;
}

std::string Triple::render() const {
    return "(" + head.text + ", " + relation + ", " + tail.text + ")";
}

std::string_view to_string(QueryPattern p) {
    switch (p) {
        case QueryPattern::Path2: return "2p";
        case QueryPattern::Path3: return "3p";
        case QueryPattern::Intersect2: return "2i";
        case QueryPattern::Intersect3: return "3i";
        case QueryPattern::IP: return "ip";
        case QueryPattern::PI: return "pi";
        case QueryPattern::Unknown: return "unknown";
    }
    return "unknown";
}

QueryPattern query_pattern_from_token(std::string_view token) {
    std::string t;
    for (char c : token) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "2p") return QueryPattern::Path2;
    if (t == "3p") return QueryPattern::Path3;
    if (t == "2i") return QueryPattern::Intersect2;
    if (t == "3i") return QueryPattern::Intersect3;
    if (t == "ip") return QueryPattern::IP;
    if (t == "pi") return QueryPattern::PI;
    return QueryPattern::Unknown;
}

std::vector<std::string> validate_ontology(const Ontology& o) {
    std::vector<std::string> violations;

    for (const ClassAssertion& ca : o.class_assertions) {
        if (ca.class_name.empty()) {
            violations.push_back("class assertion with empty class name");
        } else if (!std::isupper(static_cast<unsigned char>(ca.class_name.front()))) {
            violations.push_back("class name does not begin with an uppercase letter: " +
                                 ca.class_name);
        }
        if (ca.members.empty()) {
            violations.push_back("class " + ca.class_name + " has no members");
        }
        for (const Term& m : ca.members) {
            if (m.is_constant() && trim(m.text).empty()) {
                violations.push_back("empty constant in class " + ca.class_name);
            }
            if (m.is_variable() && !is_variable_name(m.text)) {
                violations.push_back("malformed variable name '" + m.text + "' in class " +
                                     ca.class_name);
            }
        }
    }

    // Single-type rule: a variable may appear in at most one class assertion.
    std::map<std::string, std::set<std::size_t>> var_homes;
    for (std::size_t i = 0; i < o.class_assertions.size(); ++i) {
        for (const Term& m : o.class_assertions[i].members) {
            if (m.is_variable()) var_homes[m.text].insert(i);
        }
    }
    for (const auto& [var, homes] : var_homes) {
        if (homes.size() > 1) {
            violations.push_back("variable " + var + " appears in " +
                                 std::to_string(homes.size()) + " class assertions");
        }
    }

    std::set<std::string> seen_relations;
    for (const std::string& r : o.relations) {
        if (!seen_relations.insert(r).second) {
            violations.push_back("duplicate relation: " + r);
        }
    }

    if (o.answer_class) {
        bool found = false;
        for (const ClassAssertion& ca : o.class_assertions) {
            if (ca.class_name != *o.answer_class) continue;
            for (const Term& m : ca.members) {
                if (m.is_variable() && m.text == kAnswerVariable) found = true;
            }
        }
        if (!found) {
            violations.push_back("answer class " + *o.answer_class +
                                 " has no assertion containing the variable ans");
        }
    }

    return violations;
}

}  // namespace oracle
