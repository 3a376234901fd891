#include "oracle/fol.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "oracle/errors.hpp"

namespace oracle {

namespace {

struct Group {
    std::string name;
    std::vector<std::string> args;
    std::size_t pos = 0;
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// UTF-8 sequences the scanner must recognize.
constexpr std::string_view kAnd = "∧";     // ∧
constexpr std::string_view kOr = "∨";      // ∨
constexpr std::string_view kNot = "¬";     // ¬
constexpr std::string_view kForall = "∀";  // ∀
constexpr std::string_view kExists = "∃";  // ∃

bool starts_with_at(std::string_view text, std::size_t i, std::string_view token) {
    return text.substr(i, token.size()) == token;
}

struct Scanner {
    std::string_view text;
    std::size_t i = 0;

    bool done() const { return i >= text.size(); }

    void skip_spaces() {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    }

    std::string read_ident() {
        std::size_t start = i;
        while (i < text.size() && is_ident_char(text[i])) ++i;
        return std::string(text.substr(start, i - start));
    }
};

// Splits the contents of `name( ... )` into comma-separated arguments.
// Nested parentheses are not part of the grammar and are rejected.
std::vector<std::string> parse_args(Scanner& sc, const std::string& name) {
    std::size_t open_pos = sc.i;
    ++sc.i;  // consume '('
    std::vector<std::string> args;
    std::string current;
    while (true) {
        if (sc.done()) throw ParseError("unterminated argument list for " + name, open_pos);
        char c = sc.text[sc.i];
        if (c == '(') throw ParseError("nested parenthesis in arguments of " + name, sc.i);
        if (c == ')') {
            ++sc.i;
            break;
        }
        if (c == ',') {
            args.push_back(std::string(trim(current)));
            current.clear();
            ++sc.i;
            continue;
        }
        current += c;
        ++sc.i;
    }
    args.push_back(std::string(trim(current)));
    for (const std::string& a : args) {
        if (a.empty()) throw ParseError("empty argument in " + name, open_pos);
    }
    return args;
}

struct ScanResult {
    std::vector<std::string> quantified;  // explicit ∃ list, possibly empty
    std::vector<Group> groups;
};

ScanResult scan(std::string_view text) {
    ScanResult out;
    Scanner sc{text};
    while (!sc.done()) {
        char c = sc.text[sc.i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++sc.i;
            continue;
        }
        if (starts_with_at(text, sc.i, kOr)) throw ParseError("disjunction is not supported", sc.i);
        if (starts_with_at(text, sc.i, kNot)) throw ParseError("negation is not supported", sc.i);
        if (starts_with_at(text, sc.i, kForall)) {
            throw ParseError("universal quantification is not supported", sc.i);
        }
        if (starts_with_at(text, sc.i, kAnd)) {
            sc.i += kAnd.size();
            continue;
        }
        bool exists_symbol = starts_with_at(text, sc.i, kExists);
        if (exists_symbol || (is_ident_start(c) && [&] {
                // Peek a word without consuming, to detect a textual "exists".
                Scanner peek = sc;
                return lower(peek.read_ident()) == "exists";
            }())) {
            if (exists_symbol) {
                sc.i += kExists.size();
            } else {
                sc.read_ident();
            }
            // Comma-separated variable list; stops at anything that is not a
            // bare identifier (e.g. a predicate followed by '(').
            while (true) {
                sc.skip_spaces();
                Scanner peek = sc;
                if (peek.done() || !is_ident_start(peek.text[peek.i])) break;
                std::string ident = peek.read_ident();
                peek.skip_spaces();
                if (!peek.done() && peek.text[peek.i] == '(') break;  // predicate, not a var
                out.quantified.push_back(ident);
                sc.i = peek.i;
                if (!sc.done() && sc.text[sc.i] == ',') {
                    ++sc.i;
                    continue;
                }
                break;
            }
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t start = sc.i;
            std::string ident = sc.read_ident();
            std::string low = lower(ident);
            if (low == "or") throw ParseError("disjunction is not supported", start);
            if (low == "not") throw ParseError("negation is not supported", start);
            if (low == "forall") throw ParseError("universal quantification is not supported", start);
            sc.skip_spaces();
            if (!sc.done() && sc.text[sc.i] == '(') {
                Group g;
                g.name = ident;
                g.pos = start;
                g.args = parse_args(sc, ident);
                out.groups.push_back(std::move(g));
            }
            // A bare word ("AND", headers, prose) is separator noise.
            continue;
        }
        // Any other byte (punctuation, unrecognized unicode) is noise.
        ++sc.i;
    }
    return out;
}

}  // namespace

std::string Atom::render() const {
    return predicate + "(" + args[0].text + ", " + args[1].text + ")";
}

std::vector<std::string> validate_formula(const FolFormula& f) {
    std::vector<std::string> violations;
    std::set<std::string> quantified(f.quantified_vars.begin(), f.quantified_vars.end());

    if (f.atoms.empty()) violations.push_back("formula has no atoms");
    if (!quantified.count(f.answer_var)) {
        violations.push_back("answer variable '" + f.answer_var + "' is not quantified");
    }
    for (const Atom& a : f.atoms) {
        if (a.predicate.empty()) violations.push_back("atom with empty predicate");
        for (const Term& t : a.args) {
            if (t.is_variable() && !quantified.count(t.text)) {
                violations.push_back("unquantified variable: " + t.text);
            }
        }
    }
    for (const std::string& v : f.quantified_vars) {
        if (!f.type_constraints.count(v)) {
            violations.push_back("missing type constraint for " + v);
        }
    }
    return violations;
}

ParsedFol parse_fol(std::string_view text, const Ontology& context) {
    ScanResult scanned = scan(text);

    ParsedFol out;
    FolFormula& f = out.formula;
    f.answer_var = std::string(kAnswerVariable);

    // Quantified list: the explicit ∃ list first, then typed variables in
    // declaration order.
    auto add_quantified = [&f](const std::string& v) {
        if (std::find(f.quantified_vars.begin(), f.quantified_vars.end(), v) ==
            f.quantified_vars.end()) {
            f.quantified_vars.push_back(v);
        }
    };
    for (const std::string& v : scanned.quantified) {
        if (!is_variable_name(v)) {
            throw ParseError("quantified name '" + v + "' is not a variable");
        }
        add_quantified(v);
    }

    bool saw_atom = false;
    for (const Group& g : scanned.groups) {
        if (lower(g.name) == "type") {
            if (g.args.size() != 2) {
                throw ParseError("type declaration expects 2 arguments, got " +
                                     std::to_string(g.args.size()),
                                 g.pos);
            }
            if (!is_variable_name(g.args[0])) {
                out.warnings.push_back("type declaration for non-variable '" + g.args[0] +
                                       "' ignored");
                continue;
            }
            add_quantified(g.args[0]);
            f.type_constraints.emplace(g.args[0], g.args[1]);
            continue;
        }
        if (g.args.size() != 2) {
            throw ParseError("predicate " + g.name + " expects 2 arguments, got " +
                                 std::to_string(g.args.size()),
                             g.pos);
        }
        Atom a;
        a.predicate = g.name;
        a.args = {Term::from_text(g.args[0]), Term::from_text(g.args[1])};
        f.atoms.push_back(std::move(a));
        saw_atom = true;
    }

    if (!saw_atom) throw ParseError("no atoms found in formula text");

    std::vector<std::string> violations = validate_formula(f);
    if (!violations.empty()) {
        std::string msg = "invalid formula:";
        for (const std::string& v : violations) msg += " " + v + ";";
        throw ValidationError(msg);
    }

    if (!context.relations.empty()) {
        std::set<std::string> known(context.relations.begin(), context.relations.end());
        std::set<std::string> reported;
        for (const Atom& a : f.atoms) {
            if (!known.count(a.predicate) && reported.insert(a.predicate).second) {
                out.warnings.push_back("predicate not in ontology relations: " + a.predicate);
            }
        }
    }
    return out;
}

std::string render_fol(const FolFormula& f) {
    std::string out = "Type Constraints: ";
    bool first = true;
    for (const std::string& v : f.quantified_vars) {
        auto it = f.type_constraints.find(v);
        if (it == f.type_constraints.end()) continue;
        if (!first) out += ", ";
        out += "type(" + v + ", " + it->second + ")";
        first = false;
    }
    out += '\n';
    for (std::size_t i = 0; i < f.atoms.size(); ++i) {
        if (i) out += " ∧ ";
        out += f.atoms[i].render();
    }
    out += '\n';
    return out;
}

GroundingPlan grounding_order(const FolFormula& f) {
    const std::size_t n = f.atoms.size();
    std::set<std::string> bound;
    std::vector<bool> used(n, false);
    GroundingPlan plan;

    auto unbound_vars = [&](const Atom& a) {
        std::set<std::string> vars;
        for (const Term& t : a.args) {
            if (t.is_variable() && !bound.count(t.text)) vars.insert(t.text);
        }
        return vars;
    };

    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        std::size_t best_unbound = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            std::size_t u = unbound_vars(f.atoms[i]).size();
            if (u > 1) continue;
            if (best == n || u < best_unbound) {
                best = i;
                best_unbound = u;
            }
        }
        if (best == n) {
            std::vector<std::size_t> blocking;
            for (std::size_t i = 0; i < n; ++i) {
                if (!used[i]) blocking.push_back(i);
            }
            throw NoChainError("no atom ordering introduces at most one new variable per step",
                               std::move(blocking));
        }
        std::set<std::string> fresh = unbound_vars(f.atoms[best]);
        used[best] = true;
        plan.order.push_back(best);
        if (!fresh.empty()) {
            plan.introduces.emplace(best, *fresh.begin());
            bound.insert(*fresh.begin());
        }
    }

    if (!bound.count(f.answer_var)) {
        throw NoChainError("answer variable '" + f.answer_var + "' is never bound by any atom",
                           {});
    }
    return plan;
}

}  // namespace oracle
