#include "oracle/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "oracle/errors.hpp"

namespace oracle {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Oracle: return "oracle";
        case Method::OracleNoOntology: return "oracle-no-onto";
        case Method::OracleNoFol: return "oracle-no-fol";
        case Method::NoCoT: return "nocot";
        case Method::CoT: return "cot";
        case Method::Rag: return "rag";
    }
    return "oracle";
}

Method method_from_string(std::string_view s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::replace(t.begin(), t.end(), '_', '-');
    if (t == "oracle") return Method::Oracle;
    if (t == "oracle-no-onto" || t == "oracle-no-ontology") return Method::OracleNoOntology;
    if (t == "oracle-no-fol") return Method::OracleNoFol;
    if (t == "nocot") return Method::NoCoT;
    if (t == "cot") return Method::CoT;
    if (t == "rag") return Method::Rag;
    throw ConfigError("unknown method: " + std::string(s));
}

bool is_decomposition_method(Method m) {
    return m == Method::Oracle || m == Method::OracleNoOntology || m == Method::OracleNoFol;
}

namespace {

long now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Pipeline-level placeholder substitution: unresolved or empty references
// become the literal "unknown" so the chain keeps going.
std::string lenient_substitute(const std::string& text, const std::vector<std::string>& answers,
                               std::vector<std::string>& errors) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '#') {
            out += text[i++];
            continue;
        }
        std::size_t j = i + 1;
        long long k = 0;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
            if (k < 1000000) k = k * 10 + (text[j] - '0');
            ++j;
        }
        if (j == i + 1) {
            out += text[i++];
            continue;
        }
        if (k >= 1 && static_cast<std::size_t>(k) <= answers.size() &&
            !trim(answers[k - 1]).empty()) {
            out += answers[k - 1];
        } else {
            out += "unknown";
            errors.push_back("no answer available for placeholder #" + std::to_string(k) +
                             "; substituted 'unknown'");
        }
        i = j;
    }
    return out;
}

std::string render_context(const std::vector<ScoredParagraph>& paragraphs) {
    std::string out;
    for (const ScoredParagraph& sp : paragraphs) {
        if (!out.empty()) out += "\n";
        out += sp.paragraph.title;
        out += "\n";
        out += sp.paragraph.text;
        out += "\n";
    }
    return out;
}

struct QuestionRun {
    const QARecord& record;
    Gateway& gateway;
    const PipelineConfig& cfg;
    const TemplateStore& templates;
    TraceRecord trace;
    long start = now_ms();

    // Negative budget disables the check; zero expires immediately.
    bool out_of_time() const {
        return cfg.question_timeout_ms >= 0 && now_ms() - start >= cfg.question_timeout_ms;
    }

    // Returns nullopt when the call fails for a non-infrastructure reason;
    // the failure is recorded in the trace.
    std::optional<CompletionResponse> call(const std::string& tag, const std::string& prompt) {
        CompletionRequest req;
        req.model = cfg.model;
        req.messages = {{Role::User, prompt}};
        req.temperature = cfg.temperature;
        req.max_tokens = cfg.max_tokens;
        req.request_tag = tag;
        try {
            CompletionResponse resp = gateway.complete(req);
            trace.token_totals.prompt += resp.prompt_tokens;
            trace.token_totals.completion += resp.completion_tokens;
            return resp;
        } catch (const AuthError&) {
            throw;
        } catch (const OracleError& e) {
            trace.errors.push_back(tag + ": " + e.what());
            return std::nullopt;
        }
    }
};

void run_decomposition_method(QuestionRun& run, Method method) {
    const QARecord& record = run.record;
    TraceRecord& trace = run.trace;
    const TemplateStore& templates = run.templates;

    // Stage 1: ontology extraction.
    Ontology ontology;
    if (method != Method::OracleNoOntology) {
        std::string prompt =
            assemble(templates.get("onto"), {{"question", record.question}});
        if (auto resp = run.call("onto", prompt)) {
            StageOutput stage;
            stage.raw_text = resp->text;
            try {
                auto [parsed, pattern] = parse_ontology_output(resp->text);
                std::vector<std::string> violations = validate_ontology(parsed);
                for (const std::string& v : violations) {
                    trace.errors.push_back("onto: invalid ontology: " + v);
                }
                stage.parsed = OntologyOut{parsed, pattern};
                ontology = std::move(parsed);
            } catch (const ParseError& e) {
                trace.errors.push_back(std::string("onto: ") + e.what());
            }
            trace.stage1 = std::move(stage);
        }
    }

    // Stage 2: logical formula.
    std::optional<FolFormula> formula;
    if (method != Method::OracleNoFol && !run.out_of_time()) {
        std::string prompt;
        if (method == Method::OracleNoOntology) {
            prompt = assemble(templates.get("fol_no_onto"), {{"question", record.question}});
        } else {
            prompt = assemble(templates.get("fol"), {{"ontology", render_ontology(ontology)}});
        }
        if (auto resp = run.call("fol", prompt)) {
            StageOutput stage;
            stage.raw_text = resp->text;
            try {
                ParsedFol parsed = parse_fol(resp->text, ontology);
                stage.parsed = FolOut{parsed.formula, parsed.warnings};
                formula = std::move(parsed.formula);
            } catch (const OracleError& e) {
                trace.errors.push_back(std::string("fol: ") + e.what());
            }
            trace.stage2 = std::move(stage);
        }
    }

    // Stage 3: decomposition.
    std::optional<DecompositionPlan> llm_plan;
    if (!run.out_of_time()) {
        std::string template_name;
        std::map<std::string, std::string> slots{{"question", record.question}};
        if (method == Method::OracleNoOntology) {
            template_name = formula ? "decomp_no_onto" : "decomp_basic";
        } else if (method == Method::OracleNoFol) {
            template_name = "decomp_no_fol";
        } else {
            template_name = formula ? "decomp" : "decomp_no_fol";
        }
        if (template_name == "decomp" || template_name == "decomp_no_fol") {
            slots["ontology"] = render_ontology(ontology);
        }
        if (formula && (template_name == "decomp" || template_name == "decomp_no_onto")) {
            slots["fol"] = render_fol(*formula);
        }
        if (auto resp = run.call("decomp", assemble(templates.get(template_name), slots))) {
            StageOutput stage;
            stage.raw_text = resp->text;
            try {
                DecompositionPlan parsed = parse_plan_output(resp->text);
                stage.parsed = PlanOut{parsed};
                llm_plan = std::move(parsed);
            } catch (const ParseError& e) {
                trace.errors.push_back(std::string("decomp: ") + e.what());
            }
            trace.stage3 = std::move(stage);
        }
    }

    // Effective plan: the model's when it validates, otherwise the
    // deterministic fallback, otherwise the question as its own single step.
    DecompositionPlan plan;
    bool have_plan = false;
    if (llm_plan && formula) {
        std::vector<std::string> violations = validate_plan(*llm_plan, *formula);
        if (violations.empty()) {
            plan = std::move(*llm_plan);
            have_plan = true;
        } else {
            for (const std::string& v : violations) {
                trace.errors.push_back("plan: " + v);
            }
        }
    } else if (llm_plan) {
        plan = std::move(*llm_plan);  // nothing to validate against
        have_plan = true;
    }
    if (!have_plan && formula) {
        try {
            plan = fallback_decompose(*formula, ontology, &trace.assumed_facts);
            have_plan = true;
            trace.errors.push_back("plan: using fallback decomposition");
        } catch (const NoChainError& e) {
            trace.errors.push_back(std::string("plan: fallback failed: ") + e.what());
        }
    }
    if (!have_plan && llm_plan) {
        plan = std::move(*llm_plan);  // invalid but still the best available
        have_plan = true;
        trace.errors.push_back("plan: proceeding with unvalidated plan");
    }
    if (!have_plan) {
        SubQuestion q;
        q.index = 1;
        q.text = record.question;
        plan.steps = {std::move(q)};
        plan.source = PlanSource::Fallback;
        trace.errors.push_back("plan: degenerate single-step plan (original question)");
    }
    trace.plan = plan;

    // Iterative solving: substitute, retrieve, answer.
    std::vector<std::string> answers;
    for (const SubQuestion& step : plan.steps) {
        if (run.out_of_time()) {
            trace.errors.push_back("timeout: question budget exhausted before step " +
                                   std::to_string(step.index));
            break;
        }
        SubStepTrace sub;
        sub.index = step.index;
        sub.raw_subquestion = step.text;
        sub.substituted = lenient_substitute(step.text, answers, trace.errors);

        std::vector<ScoredParagraph> retrieved;
        if (!record.context.empty()) {
            retrieved = retrieve(sub.substituted, record.context, run.cfg.retriever);
            if (retrieved.empty()) {
                retrieved = retrieve_top1(sub.substituted, record.context);
            }
        }
        for (const ScoredParagraph& sp : retrieved) {
            sub.retrieved.emplace_back(sp.paragraph.id, sp.score);
        }

        std::string prompt = assemble(run.templates.get("subsolve"),
                                      {{"context", render_context(retrieved)},
                                       {"question", sub.substituted}});
        long step_start = now_ms();
        if (auto resp = run.call("subsolve", prompt)) {
            try {
                sub.answer = extract_tagged_answer(resp->text);
            } catch (const EmptyAnswerError& e) {
                trace.errors.push_back("subsolve " + std::to_string(step.index) + ": " +
                                       e.what());
            }
        }
        sub.latency_ms = now_ms() - step_start;
        answers.push_back(sub.answer);
        trace.substeps.push_back(std::move(sub));
    }

    trace.final_answer = trace.substeps.empty() ? std::string() : trace.substeps.back().answer;
}

void run_single_call_method(QuestionRun& run, Method method) {
    const QARecord& record = run.record;
    TraceRecord& trace = run.trace;

    SubStepTrace sub;
    sub.index = 1;
    sub.raw_subquestion = record.question;
    sub.substituted = record.question;

    std::string prompt;
    if (method == Method::Rag) {
        RetrieverConfig full = run.cfg.retriever;
        full.mode = RetrievalMode::FullContext;
        std::vector<ScoredParagraph> retrieved = retrieve(record.question, record.context, full);
        for (const ScoredParagraph& sp : retrieved) {
            sub.retrieved.emplace_back(sp.paragraph.id, sp.score);
        }
        prompt = assemble(run.templates.get("rag"), {{"context", render_context(retrieved)},
                                                     {"question", record.question}});
    } else {
        const char* name = method == Method::CoT ? "cot" : "nocot";
        prompt = assemble(run.templates.get(name), {{"question", record.question}});
    }

    long step_start = now_ms();
    if (auto resp = run.call(std::string(to_string(method)), prompt)) {
        try {
            sub.answer = extract_tagged_answer(resp->text);
        } catch (const EmptyAnswerError& e) {
            trace.errors.push_back(std::string(to_string(method)) + ": " + e.what());
        }
    }
    sub.latency_ms = now_ms() - step_start;
    trace.final_answer = sub.answer;
    trace.substeps.push_back(std::move(sub));
}

}  // namespace

TraceRecord run_question(const QARecord& record, Method method, Gateway& gateway,
                         const PipelineConfig& cfg, const TemplateStore& templates) {
    QuestionRun run{record, gateway, cfg, templates, {}};
    run.trace.question_id = record.question_id;
    run.trace.method = method;

    if (is_decomposition_method(method)) {
        run_decomposition_method(run, method);
    } else {
        run_single_call_method(run, method);
    }

    run.trace.wall_ms = now_ms() - run.start;
    return run.trace;
}

// ---------------------------------------------------------------- batch

namespace {

class OrderedJsonlSink {
public:
    explicit OrderedJsonlSink(const std::filesystem::path& path)
        : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw FormatError("cannot write " + path.string());
    }

    void push(std::size_t index, std::string line) {
        std::lock_guard lock(mu_);
        pending_[index] = std::move(line);
        while (true) {
            auto it = pending_.find(next_);
            if (it == pending_.end()) break;
            out_ << it->second << '\n';
            out_.flush();
            pending_.erase(it);
            ++next_;
        }
    }

private:
    std::ofstream out_;
    std::mutex mu_;
    std::map<std::size_t, std::string> pending_;
    std::size_t next_ = 0;
};

}  // namespace

std::vector<TraceRecord> run_dataset(const std::vector<QARecord>& records, Method method,
                                     Gateway& gateway, const PipelineConfig& cfg,
                                     const TemplateStore& templates, int parallelism,
                                     const std::optional<std::filesystem::path>& run_dir) {
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");

    std::unique_ptr<OrderedJsonlSink> sink;
    if (run_dir) {
        std::filesystem::create_directories(*run_dir);
        sink = std::make_unique<OrderedJsonlSink>(*run_dir / "traces.jsonl");
    }

    std::vector<TraceRecord> results(records.size());
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> stop{false};
    std::mutex error_mu;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (!stop.load()) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= records.size()) break;
            try {
                TraceRecord trace = run_question(records[i], method, gateway, cfg, templates);
                if (sink) sink->push(i, trace_to_json(trace).dump());
                results[i] = std::move(trace);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                stop.store(true);
                break;
            }
        }
    };

    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism),
                                                  std::max<std::size_t>(records.size(), 1));
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    if (first_error) std::rethrow_exception(first_error);

    if (run_dir) {
        ordered_json manifest;
        manifest["v"] = 1;
        manifest["created_unix"] = static_cast<long>(std::chrono::duration_cast<std::chrono::seconds>(
                                       std::chrono::system_clock::now().time_since_epoch())
                                       .count());
        manifest["method"] = std::string(to_string(method));
        manifest["backend"] = gateway.backend().id();
        manifest["model"] = cfg.model;
        manifest["temperature"] = cfg.temperature;
        manifest["max_tokens"] = cfg.max_tokens;
        manifest["question_timeout_ms"] = cfg.question_timeout_ms;
        manifest["seed"] = cfg.seed;
        manifest["parallelism"] = parallelism;
        manifest["records"] = records.size();
        manifest["retriever"] = {{"tau", cfg.retriever.threshold_tau},
                                 {"top_k", cfg.retriever.top_k_cap},
                                 {"mode", cfg.retriever.mode == RetrievalMode::Thresholded
                                              ? "thresholded"
                                              : "full"}};
        ordered_json digests = ordered_json::object();
        for (const auto& [name, d] : templates.digests()) digests[name] = d;
        manifest["template_digests"] = std::move(digests);
        std::ofstream out(*run_dir / "manifest.json", std::ios::binary | std::ios::trunc);
        out << manifest.dump(2) << '\n';
    }

    return results;
}

// ---------------------------------------------------------------- json

namespace {

ordered_json term_to_json(const Term& t) { return t.text; }

ordered_json ontology_to_json(const Ontology& o) {
    ordered_json j;
    ordered_json classes = ordered_json::array();
    for (const ClassAssertion& ca : o.class_assertions) {
        ordered_json members = ordered_json::array();
        for (const Term& m : ca.members) members.push_back(term_to_json(m));
        classes.push_back({{"name", ca.class_name}, {"members", std::move(members)}});
    }
    j["classes"] = std::move(classes);
    j["relations"] = o.relations;
    j["answer_class"] = o.answer_class ? ordered_json(*o.answer_class) : ordered_json(nullptr);
    return j;
}

Ontology ontology_from_json(const json& j) {
    Ontology o;
    for (const json& c : j.value("classes", json::array())) {
        ClassAssertion ca;
        ca.class_name = c.value("name", "");
        for (const json& m : c.value("members", json::array())) {
            ca.members.push_back(Term::from_text(m.get<std::string>()));
        }
        o.class_assertions.push_back(std::move(ca));
    }
    for (const json& r : j.value("relations", json::array())) {
        o.relations.push_back(r.get<std::string>());
    }
    if (j.contains("answer_class") && j["answer_class"].is_string()) {
        o.answer_class = j["answer_class"].get<std::string>();
    }
    return o;
}

ordered_json formula_to_json(const FolFormula& f) {
    ordered_json j;
    j["vars"] = f.quantified_vars;
    ordered_json types = ordered_json::object();
    for (const auto& [var, cls] : f.type_constraints) types[var] = cls;
    j["types"] = std::move(types);
    ordered_json atoms = ordered_json::array();
    for (const Atom& a : f.atoms) {
        atoms.push_back({{"pred", a.predicate},
                         {"args", ordered_json::array({a.args[0].text, a.args[1].text})}});
    }
    j["atoms"] = std::move(atoms);
    j["answer_var"] = f.answer_var;
    return j;
}

FolFormula formula_from_json(const json& j) {
    FolFormula f;
    for (const json& v : j.value("vars", json::array())) {
        f.quantified_vars.push_back(v.get<std::string>());
    }
    if (j.contains("types")) {
        for (const auto& [var, cls] : j["types"].items()) {
            f.type_constraints[var] = cls.get<std::string>();
        }
    }
    for (const json& a : j.value("atoms", json::array())) {
        Atom atom;
        atom.predicate = a.value("pred", "");
        const json& args = a.value("args", json::array());
        if (args.size() == 2) {
            atom.args = {Term::from_text(args[0].get<std::string>()),
                         Term::from_text(args[1].get<std::string>())};
        }
        f.atoms.push_back(std::move(atom));
    }
    f.answer_var = j.value("answer_var", std::string(kAnswerVariable));
    return f;
}

ordered_json plan_to_json(const DecompositionPlan& p) {
    ordered_json j;
    j["source"] = p.source == PlanSource::Fallback ? "fallback" : "llm";
    ordered_json steps = ordered_json::array();
    for (const SubQuestion& q : p.steps) {
        steps.push_back({{"index", q.index},
                         {"text", q.text},
                         {"bound_variable", q.bound_variable ? ordered_json(*q.bound_variable)
                                                             : ordered_json(nullptr)}});
    }
    j["steps"] = std::move(steps);
    return j;
}

DecompositionPlan plan_from_json(const json& j) {
    DecompositionPlan p;
    p.source = j.value("source", "llm") == "fallback" ? PlanSource::Fallback
                                                      : PlanSource::LlmGenerated;
    for (const json& s : j.value("steps", json::array())) {
        SubQuestion q;
        q.index = s.value("index", 1);
        q.text = s.value("text", "");
        if (s.contains("bound_variable") && s["bound_variable"].is_string()) {
            q.bound_variable = s["bound_variable"].get<std::string>();
        }
        p.steps.push_back(std::move(q));
    }
    return p;
}

ordered_json stage_to_json(const StageOutput& stage) {
    ordered_json j;
    j["raw_text"] = stage.raw_text;
    if (const auto* onto = std::get_if<OntologyOut>(&stage.parsed)) {
        j["kind"] = "ontology";
        j["ontology"] = ontology_to_json(onto->ontology);
        j["pattern"] = std::string(to_string(onto->pattern));
    } else if (const auto* fol = std::get_if<FolOut>(&stage.parsed)) {
        j["kind"] = "fol";
        j["formula"] = formula_to_json(fol->formula);
        j["warnings"] = fol->warnings;
    } else if (const auto* plan = std::get_if<PlanOut>(&stage.parsed)) {
        j["kind"] = "plan";
        j["plan"] = plan_to_json(plan->plan);
    } else {
        j["kind"] = "unparsed";
    }
    return j;
}

StageOutput stage_from_json(const json& j) {
    StageOutput stage;
    stage.raw_text = j.value("raw_text", "");
    std::string kind = j.value("kind", "unparsed");
    if (kind == "ontology") {
        OntologyOut out;
        out.ontology = ontology_from_json(j.value("ontology", json::object()));
        out.pattern = query_pattern_from_token(j.value("pattern", "unknown"));
        stage.parsed = std::move(out);
    } else if (kind == "fol") {
        FolOut out;
        out.formula = formula_from_json(j.value("formula", json::object()));
        for (const json& w : j.value("warnings", json::array())) {
            out.warnings.push_back(w.get<std::string>());
        }
        stage.parsed = std::move(out);
    } else if (kind == "plan") {
        stage.parsed = PlanOut{plan_from_json(j.value("plan", json::object()))};
    }
    return stage;
}

}  // namespace

ordered_json trace_to_json(const TraceRecord& trace) {
    ordered_json j;
    j["v"] = 1;
    j["question_id"] = trace.question_id;
    j["method"] = std::string(to_string(trace.method));
    j["stage1"] = trace.stage1 ? stage_to_json(*trace.stage1) : ordered_json(nullptr);
    j["stage2"] = trace.stage2 ? stage_to_json(*trace.stage2) : ordered_json(nullptr);
    j["stage3"] = trace.stage3 ? stage_to_json(*trace.stage3) : ordered_json(nullptr);
    j["plan"] = trace.plan ? plan_to_json(*trace.plan) : ordered_json(nullptr);
    j["assumed_facts"] = trace.assumed_facts;
    ordered_json steps = ordered_json::array();
    for (const SubStepTrace& s : trace.substeps) {
        ordered_json retrieved = ordered_json::array();
        for (const auto& [id, score] : s.retrieved) {
            retrieved.push_back({{"id", id}, {"score", score}});
        }
        steps.push_back({{"index", s.index},
                         {"raw_subquestion", s.raw_subquestion},
                         {"substituted", s.substituted},
                         {"retrieved", std::move(retrieved)},
                         {"answer", s.answer},
                         {"latency_ms", s.latency_ms}});
    }
    j["substeps"] = std::move(steps);
    j["final_answer"] = trace.final_answer;
    j["wall_ms"] = trace.wall_ms;
    j["token_totals"] = {{"prompt", trace.token_totals.prompt},
                         {"completion", trace.token_totals.completion}};
    j["errors"] = trace.errors;
    return j;
}

TraceRecord trace_from_json(const json& j) {
    TraceRecord trace;
    trace.question_id = j.value("question_id", "");
    trace.method = method_from_string(j.value("method", "oracle"));
    if (j.contains("stage1") && j["stage1"].is_object()) {
        trace.stage1 = stage_from_json(j["stage1"]);
    }
    if (j.contains("stage2") && j["stage2"].is_object()) {
        trace.stage2 = stage_from_json(j["stage2"]);
    }
    if (j.contains("stage3") && j["stage3"].is_object()) {
        trace.stage3 = stage_from_json(j["stage3"]);
    }
    if (j.contains("plan") && j["plan"].is_object()) {
        trace.plan = plan_from_json(j["plan"]);
    }
    for (const json& f : j.value("assumed_facts", json::array())) {
        trace.assumed_facts.push_back(f.get<std::string>());
    }
    for (const json& s : j.value("substeps", json::array())) {
        SubStepTrace sub;
        sub.index = s.value("index", 1);
        sub.raw_subquestion = s.value("raw_subquestion", "");
        sub.substituted = s.value("substituted", "");
        for (const json& r : s.value("retrieved", json::array())) {
            sub.retrieved.emplace_back(r.value("id", ""), r.value("score", 0.0));
        }
        sub.answer = s.value("answer", "");
        sub.latency_ms = s.value("latency_ms", 0L);
        trace.substeps.push_back(std::move(sub));
    }
    trace.final_answer = j.value("final_answer", "");
    trace.wall_ms = j.value("wall_ms", 0L);
    if (j.contains("token_totals")) {
        trace.token_totals.prompt = j["token_totals"].value("prompt", 0L);
        trace.token_totals.completion = j["token_totals"].value("completion", 0L);
    }
    for (const json& e : j.value("errors", json::array())) {
        trace.errors.push_back(e.get<std::string>());
    }
    return trace;
}

void write_traces_jsonl(const std::filesystem::path& path,
                        const std::vector<TraceRecord>& traces) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    for (const TraceRecord& t : traces) out << trace_to_json(t).dump() << '\n';
}

std::vector<TraceRecord> read_traces_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<TraceRecord> traces;
    std::string line;
    std::size_t idx = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            traces.push_back(trace_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw FormatError("trace line " + std::to_string(idx) + ": " + e.what());
        }
        ++idx;
    }
    return traces;
}

}  // namespace oracle
