#include "oracle/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "group_scan.hpp"
#include "oracle/errors.hpp"
#include "oracle/hash.hpp"

namespace oracle {

namespace {

std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    lines.push_back(std::move(current));
    return lines;
}

// ------------------------------------------------------------------
// Built-in templates. The bundled exemplars are hand-written for this
// project; drop replacement .txt files into a templates directory to
// substitute your own few-shots.
// ------------------------------------------------------------------

constexpr std::string_view kOntoTemplate =
    R"(Your task is to analyze a complex reasoning problem so it can be decomposed.
Please follow these steps:
1. Problem Type Identification: determine the problem type (2p/3p path query, 2i/3i intersection query, or ip/pi hybrid query).
2. Classes and Entities: list every entity class relevant to the question, each written as Class(member, ...). Class names are capitalized. Known entities appear by name; unknown values appear as lowercase variables. The final answer must be the variable ans.
3. Relations: list the relation names connecting these entities, comma-separated.

Example:
Question: Which river flows through the city where the composer of Carmen died?
Problem Type: 2p path query
Classes and Entities: Composer(m), Opera(Carmen), City(c), River(ans)
Relations: composedBy, diedIn, flowsThrough

### Your turn. Analyze the following problem.
Question: {question}
)";

constexpr std::string_view kFolTemplate =
    R"(Convert the question ontology below into a first-order-logic reasoning chain.
First write one line of type declarations, one per variable, in the form type(variable, Class).
Then write the formula: a conjunction of binary atoms joined by AND, using the ontology's relations as predicates. Constants appear by name, unknown values as lowercase variables, and the final answer as the variable ans.

Example:
Classes and Entities: Composer(m), Opera(Carmen), City(c), River(ans)
Relations: composedBy, diedIn, flowsThrough
Output:
Type Constraints: type(m, Composer), type(c, City), type(ans, River)
composedBy(Carmen, m) AND diedIn(m, c) AND flowsThrough(ans, c)

### Your turn. Convert the following ontology.
{ontology}
)";

constexpr std::string_view kFolNoOntoTemplate =
    R"(Convert the question below into a first-order-logic reasoning chain.
First write one line of type declarations, one per variable, in the form type(variable, Class).
Then write the formula: a conjunction of binary atoms joined by AND. Constants appear by name, unknown values as lowercase variables, and the final answer as the variable ans.

Example:
Question: Which river flows through the city where the composer of Carmen died?
Output:
Type Constraints: type(m, Composer), type(c, City), type(ans, River)
composedBy(Carmen, m) AND diedIn(m, c) AND flowsThrough(ans, c)

### Your turn. Convert the following problem.
Question: {question}
)";

constexpr std::string_view kDecompTemplate =
    R"(Your task is to decompose a complex reasoning problem into a series of sub-questions, guided by its ontology and its first-order-logic reasoning chain.
Break the problem into an ordered, numbered sequence of simple sub-questions. Each sub-question must be answerable on its own. Use the placeholder #k to refer to the answer of sub-question k. Label each sub-question's answer variable in parentheses at the end, and make the final sub-question resolve the variable ans.

Example:
Question: Which river flows through the city where the composer of Carmen died?
Type Constraints: type(m, Composer), type(c, City), type(ans, River)
composedBy(Carmen, m) AND diedIn(m, c) AND flowsThrough(ans, c)
Output:
1. Who composed Carmen? (variable: m)
2. In which city did #1 die? (variable: c)
3. Which river flows through #2? (variable: ans)

### Your turn. Decompose the following problem.
Question: {question}
Ontology:
{ontology}
Reasoning chain:
{fol}
)";

constexpr std::string_view kDecompNoFolTemplate =
    R"(Your task is to decompose a complex reasoning problem into a series of sub-questions, guided by its ontology.
Break the problem into an ordered, numbered sequence of simple sub-questions. Each sub-question must be answerable on its own. Use the placeholder #k to refer to the answer of sub-question k. Label each sub-question's answer variable in parentheses at the end, and make the final sub-question resolve the variable ans.

Example:
Question: Which river flows through the city where the composer of Carmen died?
Classes and Entities: Composer(m), Opera(Carmen), City(c), River(ans)
Relations: composedBy, diedIn, flowsThrough
Output:
1. Who composed Carmen? (variable: m)
2. In which city did #1 die? (variable: c)
3. Which river flows through #2? (variable: ans)

### Your turn. Decompose the following problem.
Question: {question}
Ontology:
{ontology}
)";

constexpr std::string_view kDecompNoOntoTemplate =
    R"(Your task is to decompose a complex reasoning problem into a series of sub-questions, guided by its first-order-logic reasoning chain.
Break the problem into an ordered, numbered sequence of simple sub-questions. Each sub-question must be answerable on its own. Use the placeholder #k to refer to the answer of sub-question k. Label each sub-question's answer variable in parentheses at the end, and make the final sub-question resolve the variable ans.

Example:
Question: Which river flows through the city where the composer of Carmen died?
Reasoning chain:
Type Constraints: type(m, Composer), type(c, City), type(ans, River)
composedBy(Carmen, m) AND diedIn(m, c) AND flowsThrough(ans, c)
Output:
1. Who composed Carmen? (variable: m)
2. In which city did #1 die? (variable: c)
3. Which river flows through #2? (variable: ans)

### Your turn. Decompose the following problem.
Question: {question}
Reasoning chain:
{fol}
)";

constexpr std::string_view kDecompBasicTemplate =
    R"(Your task is to decompose a complex reasoning problem into a series of sub-questions.
Break the problem into an ordered, numbered sequence of simple sub-questions. Each sub-question must be answerable on its own. Use the placeholder #k to refer to the answer of sub-question k.

Example:
Question: Which river flows through the city where the composer of Carmen died?
Output:
1. Who composed Carmen?
2. In which city did #1 die?
3. Which river flows through #2?

### Your turn. Decompose the following problem.
Question: {question}
)";

constexpr std::string_view kNoCotTemplate =
    R"(You will be provided with a question. Respond with only the final answer, enclosed in <answer></answer> tags.

Question: {question}
)";

constexpr std::string_view kCotTemplate =
    R"(You will be provided with a question. You should think step by step. In the end, put the final answer in <answer></answer> tags.

Question: {question}
)";

constexpr std::string_view kRagTemplate =
    R"(You will be provided with context paragraphs and a question. Answer the question using the context. Respond with the final answer enclosed in <answer></answer> tags.

Context:
{context}

Question: {question}
)";

constexpr std::string_view kSubSolveTemplate =
    R"(Answer the question using the context paragraphs below. Respond with only the final answer, enclosed in <answer></answer> tags.

Context:
{context}

Question: {question}
)";

struct BuiltinEntry {
    std::string_view name;
    std::string_view body;
};

constexpr BuiltinEntry kBuiltins[] = {
    {"onto", kOntoTemplate},
    {"fol", kFolTemplate},
    {"fol_no_onto", kFolNoOntoTemplate},
    {"decomp", kDecompTemplate},
    {"decomp_no_fol", kDecompNoFolTemplate},
    {"decomp_no_onto", kDecompNoOntoTemplate},
    {"decomp_basic", kDecompBasicTemplate},
    {"nocot", kNoCotTemplate},
    {"cot", kCotTemplate},
    {"rag", kRagTemplate},
    {"subsolve", kSubSolveTemplate},
};

std::size_t count_occurrences(std::string_view body, const std::string& marker) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = body.find(marker, pos)) != std::string_view::npos) {
        ++count;
        pos += marker.size();
    }
    return count;
}

void check_template(const PromptTemplate& tmpl) {
    for (const std::string& slot : required_slots(tmpl.name)) {
        std::size_t n = count_occurrences(tmpl.body, "{" + slot + "}");
        if (n != 1) {
            throw ConfigError("template '" + tmpl.name + "' must reference {" + slot +
                              "} exactly once, found " + std::to_string(n));
        }
    }
}

}  // namespace

std::string_view to_string(TemplateName name) {
    switch (name) {
        case TemplateName::Onto: return "onto";
        case TemplateName::Fol: return "fol";
        case TemplateName::Decomp: return "decomp";
        case TemplateName::NoCoT: return "nocot";
        case TemplateName::CoT: return "cot";
        case TemplateName::Rag: return "rag";
        case TemplateName::SubSolve: return "subsolve";
    }
    return "onto";
}

std::vector<std::string> required_slots(std::string_view template_name) {
    if (template_name == "onto") return {"question"};
    if (template_name == "fol") return {"ontology"};
    if (template_name == "fol_no_onto") return {"question"};
    if (template_name == "decomp") return {"question", "ontology", "fol"};
    if (template_name == "decomp_no_fol") return {"question", "ontology"};
    if (template_name == "decomp_no_onto") return {"question", "fol"};
    if (template_name == "decomp_basic") return {"question"};
    if (template_name == "nocot") return {"question"};
    if (template_name == "cot") return {"question"};
    if (template_name == "rag") return {"context", "question"};
    if (template_name == "subsolve") return {"context", "question"};
    return {};
}

TemplateStore TemplateStore::builtin() {
    TemplateStore store;
    for (const BuiltinEntry& e : kBuiltins) {
        PromptTemplate tmpl{std::string(e.name), std::string(e.body)};
        check_template(tmpl);
        store.templates_.emplace(tmpl.name, std::move(tmpl));
    }
    return store;
}

void TemplateStore::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("templates directory does not exist: " + dir.string());
    }
    std::map<std::string, std::string> bodies;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        bodies[path.stem().string()] = ss.str();
    }
    for (auto& [stem, body] : bodies) {
        if (stem.size() > 9 && stem.ends_with(".examples")) continue;
        std::string resolved = body;
        std::size_t pos = resolved.find("{examples}");
        if (pos != std::string::npos) {
            auto ex = bodies.find(stem + ".examples");
            std::string fill = ex == bodies.end() ? std::string() : ex->second;
            while ((pos = resolved.find("{examples}")) != std::string::npos) {
                resolved.replace(pos, 10, fill);
            }
        }
        PromptTemplate tmpl{stem, std::move(resolved)};
        check_template(tmpl);
        templates_[stem] = std::move(tmpl);
    }
}

void TemplateStore::dump(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, tmpl] : templates_) {
        std::ofstream out(dir / (name + ".txt"), std::ios::binary);
        out << tmpl.body;
    }
}

const PromptTemplate& TemplateStore::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw ConfigError("unknown template: " + std::string(name));
    }
    return it->second;
}

bool TemplateStore::has(std::string_view name) const { return templates_.count(name) > 0; }

std::map<std::string, std::string> TemplateStore::digests() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, tmpl] : templates_) out[name] = fnv1a_hex(tmpl.body);
    return out;
}

std::string assemble(const PromptTemplate& tmpl,
                     const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.body.size());
    const std::string& body = tmpl.body;
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] != '{') {
            out += body[i++];
            continue;
        }
        std::size_t j = i + 1;
        while (j < body.size() &&
               (std::islower(static_cast<unsigned char>(body[j])) || body[j] == '_')) {
            ++j;
        }
        if (j > i + 1 && j < body.size() && body[j] == '}') {
            std::string slot = body.substr(i + 1, j - i - 1);
            auto it = slots.find(slot);
            if (it == slots.end()) throw MissingSlotError(slot);
            out += it->second;
            i = j + 1;
        } else {
            out += body[i++];
        }
    }
    return out;
}

std::string render_ontology(const Ontology& o) {
    std::string out = "Classes and Entities:\n";
    for (std::size_t i = 0; i < o.class_assertions.size(); ++i) {
        if (i) out += ", ";
        out += o.class_assertions[i].render();
    }
    out += "\nRelations:\n";
    for (std::size_t i = 0; i < o.relations.size(); ++i) {
        if (i) out += ", ";
        out += o.relations[i];
    }
    out += '\n';
    return out;
}

namespace {

enum class Section { None, Classes, Relations, Combined };

// Strips "1.", "2)", "Step 3:", "Q4." style enumeration prefixes.
std::string_view strip_enumeration(std::string_view s) {
    std::string_view t = trim(s);
    while (!t.empty() && (t.front() == '-' || t.front() == '*' || t.front() == '#')) {
        t.remove_prefix(1);
        t = trim(t);
    }
    std::string low = lower(t.substr(0, 5));
    std::size_t i = 0;
    if (low.rfind("step ", 0) == 0) {
        i = 5;
    } else if (!t.empty() && (t[0] == 'q' || t[0] == 'Q') && t.size() > 1 &&
               std::isdigit(static_cast<unsigned char>(t[1]))) {
        i = 1;
    }
    std::size_t d = i;
    while (d < t.size() && std::isdigit(static_cast<unsigned char>(t[d]))) ++d;
    if (d == i) return t;
    if (d < t.size() && (t[d] == '.' || t[d] == ')' || t[d] == ':' || t[d] == ']')) {
        return trim(t.substr(d + 1));
    }
    return t;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

void collect_relations(std::string_view content, std::vector<std::string>& relations,
                       std::set<std::string>& seen) {
    auto push = [&](std::string_view piece) {
        std::string_view p = trim(piece);
        while (!p.empty() && (p.front() == '-' || p.front() == '*' || p.front() == '.')) {
            p.remove_prefix(1);
            p = trim(p);
        }
        while (!p.empty() && (p.back() == '.' || p.back() == ',' || p.back() == ';')) {
            p.remove_suffix(1);
            p = trim(p);
        }
        std::size_t paren = p.find('(');
        if (paren != std::string_view::npos) p = trim(p.substr(0, paren));
        if (p.empty() || p.size() > 64) return;
        if (lower(p) == "and" || lower(p) == "none") return;
        std::string name(p);
        if (seen.insert(name).second) relations.push_back(std::move(name));
    };

    std::size_t start = 0;
    std::string low = lower(content);
    for (std::size_t i = 0; i <= content.size(); ++i) {
        bool at_comma = i < content.size() && (content[i] == ',' || content[i] == ';');
        bool at_and = i + 5 <= content.size() && low.compare(i, 5, " and ") == 0;
        if (i == content.size() || at_comma) {
            push(content.substr(start, i - start));
            start = i + 1;
        } else if (at_and) {
            push(content.substr(start, i - start));
            start = i + 5;
            i += 4;
        }
    }
}

void collect_assertions(std::string_view content, Ontology& o) {
    for (const detail::TermGroup& g : detail::scan_term_groups(content)) {
        if (g.name.empty() || !std::isupper(static_cast<unsigned char>(g.name.front()))) {
            continue;
        }
        ClassAssertion ca;
        ca.class_name = g.name;
        for (const std::string& a : g.args) ca.members.push_back(Term::from_text(a));
        o.class_assertions.push_back(std::move(ca));
    }
}

QueryPattern find_pattern(std::string_view raw) {
    std::string token;
    auto check = [&](const std::string& t) {
        return query_pattern_from_token(t);
    };
    for (std::size_t i = 0; i <= raw.size(); ++i) {
        bool is_tok = i < raw.size() && std::isalnum(static_cast<unsigned char>(raw[i]));
        if (is_tok) {
            token += raw[i];
            continue;
        }
        if (token.size() == 2) {
            QueryPattern p = check(lower(token));
            if (p != QueryPattern::Unknown) return p;
        }
        token.clear();
    }
    return QueryPattern::Unknown;
}

}  // namespace

std::pair<Ontology, QueryPattern> parse_ontology_output(std::string_view raw) {
    Ontology o;
    std::set<std::string> seen_relations;
    Section current = Section::None;
    bool any_header = false;

    for (const std::string& line : split_lines(raw)) {
        std::string_view stripped = strip_enumeration(line);
        if (stripped.empty()) continue;

        std::size_t colon = stripped.find(':');
        std::string_view head = colon == std::string_view::npos ? stripped
                                                                : trim(stripped.substr(0, colon));
        std::string_view rest =
            colon == std::string_view::npos ? std::string_view{} : trim(stripped.substr(colon + 1));

        Section header = Section::None;
        if (word_count(head) <= 6) {
            bool has_entity = contains_ci(head, "entit") || contains_ci(head, "class");
            bool has_relation = contains_ci(head, "relation");
            if (has_entity && has_relation) {
                header = Section::Combined;
            } else if (has_entity) {
                header = Section::Classes;
            } else if (has_relation) {
                header = Section::Relations;
            }
        }

        if (header != Section::None) {
            current = header;
            any_header = true;
            stripped = rest;
            if (stripped.empty()) continue;
        }

        switch (current) {
            case Section::Classes:
                collect_assertions(stripped, o);
                break;
            case Section::Relations:
                collect_relations(stripped, o.relations, seen_relations);
                break;
            case Section::Combined:
                collect_assertions(stripped, o);
                for (const detail::TermGroup& g : detail::scan_term_groups(stripped)) {
                    if (!g.name.empty() &&
                        std::islower(static_cast<unsigned char>(g.name.front())) &&
                        seen_relations.insert(g.name).second) {
                        o.relations.push_back(g.name);
                    }
                }
                break;
            case Section::None:
                break;
        }
    }

    if (!any_header) {
        throw ParseError("no classes/entities or relations section found");
    }

    for (const ClassAssertion& ca : o.class_assertions) {
        if (o.answer_class) break;
        for (const Term& m : ca.members) {
            if (m.is_variable() && m.text == kAnswerVariable) {
                o.answer_class = ca.class_name;
                break;
            }
        }
    }

    return {std::move(o), find_pattern(raw)};
}

namespace {

// "1. text", "2) text", "Q3: text", "Step 4: text" -> (number, text)
bool match_list_item(std::string_view line, int& number, std::string_view& text) {
    std::string_view t = trim(line);
    while (!t.empty() && (t.front() == '-' || t.front() == '*')) {
        t.remove_prefix(1);
        t = trim(t);
    }
    std::size_t i = 0;
    std::string low = lower(t.substr(0, 5));
    if (low.rfind("step ", 0) == 0) {
        i = 5;
    } else if (!t.empty() && (t[0] == 'q' || t[0] == 'Q')) {
        i = 1;
    }
    std::size_t d = i;
    long long value = 0;
    while (d < t.size() && std::isdigit(static_cast<unsigned char>(t[d]))) {
        if (value < 1000000) value = value * 10 + (t[d] - '0');
        ++d;
    }
    if (d == i || d >= t.size()) return false;
    if (t[d] != '.' && t[d] != ')' && t[d] != ':' && t[d] != ']') return false;
    number = static_cast<int>(value);
    text = trim(t.substr(d + 1));
    return true;
}

// Strips a trailing "(variable: x)" / "(answer variable = x)" / "-> x"
// annotation, returning the variable when present.
std::optional<std::string> strip_bound_variable(std::string& text) {
    std::string_view t = trim(text);

    // Arrow form.
    for (std::string_view arrow : {std::string_view("->"), std::string_view("=>"),
                                   std::string_view("→")}) {
        std::size_t pos = t.rfind(arrow);
        if (pos == std::string_view::npos) continue;
        std::string_view tail = trim(t.substr(pos + arrow.size()));
        if (!tail.empty() && is_variable_name(tail)) {
            std::string var(tail);
            text = std::string(trim(t.substr(0, pos)));
            return var;
        }
    }

    // Parenthetical form at the very end.
    if (t.empty() || t.back() != ')') return std::nullopt;
    std::size_t open = t.rfind('(');
    if (open == std::string_view::npos) return std::nullopt;
    std::string_view inner = trim(t.substr(open + 1, t.size() - open - 2));
    std::string low = lower(inner);
    for (std::string_view prefix : {std::string_view("answer variable"),
                                    std::string_view("answer var"),
                                    std::string_view("variable"), std::string_view("var")}) {
        if (low.rfind(lower(prefix), 0) != 0) continue;
        std::string_view tail = trim(inner.substr(prefix.size()));
        if (!tail.empty() && (tail.front() == ':' || tail.front() == '=')) {
            tail = trim(tail.substr(1));
        }
        if (!tail.empty() && is_variable_name(tail)) {
            std::string var(tail);
            text = std::string(trim(t.substr(0, open)));
            return var;
        }
    }
    return std::nullopt;
}

}  // namespace

DecompositionPlan parse_plan_output(std::string_view raw) {
    DecompositionPlan plan;
    plan.source = PlanSource::LlmGenerated;

    std::vector<std::string> texts;
    for (const std::string& line : split_lines(raw)) {
        int number = 0;
        std::string_view item_text;
        if (match_list_item(line, number, item_text)) {
            texts.emplace_back(item_text);
        } else if (!texts.empty() && !trim(line).empty()) {
            texts.back() += ' ';
            texts.back() += std::string(trim(line));
        }
    }

    if (texts.empty()) throw ParseError("no numbered sub-question list found");

    for (std::size_t i = 0; i < texts.size(); ++i) {
        SubQuestion q;
        q.index = static_cast<int>(i) + 1;
        q.text = std::move(texts[i]);
        q.bound_variable = strip_bound_variable(q.text);
        plan.steps.push_back(std::move(q));
    }
    return plan;
}

std::string extract_tagged_answer(std::string_view raw) {
    constexpr std::string_view open_tag = "<answer>";
    constexpr std::string_view close_tag = "</answer>";

    std::size_t close = raw.rfind(close_tag);
    if (close != std::string_view::npos) {
        std::size_t open = raw.rfind(open_tag, close);
        if (open != std::string_view::npos) {
            std::string_view content =
                trim(raw.substr(open + open_tag.size(), close - open - open_tag.size()));
            if (content.empty()) throw EmptyAnswerError("answer tags are empty");
            return std::string(content);
        }
    }

    std::vector<std::string> lines = split_lines(raw);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string_view line = trim(*it);
        if (line.empty()) continue;
        if (lower(line.substr(0, 7)) == "answer:") line = trim(line.substr(7));
        if (line.empty()) throw EmptyAnswerError("answer line is empty");
        return std::string(line);
    }
    throw EmptyAnswerError("no answer found in model output");
}

}  // namespace oracle
