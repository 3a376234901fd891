#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oracle/datasets.hpp"
#include "oracle/errors.hpp"
#include "oracle/llm.hpp"
#include "oracle/metrics.hpp"
#include "oracle/pipeline.hpp"
#include "oracle/prompting.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEvalFailure = 1;
constexpr int kExitUsage = 2;

std::map<int, int> parse_ratio(const std::string& spec) {
    // "2=2,3=2,4=1"
    std::map<int, int> ratio;
    std::size_t start = 0;
    while (start < spec.size()) {
        std::size_t comma = spec.find(',', start);
        std::string piece = spec.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
        std::size_t eq = piece.find('=');
        if (eq == std::string::npos) {
            throw oracle::ConfigError("ratio entries must look like hop=weight: " + piece);
        }
        try {
            ratio[std::stoi(piece.substr(0, eq))] = std::stoi(piece.substr(eq + 1));
        } catch (const std::exception&) {
            throw oracle::ConfigError("ratio entries must look like hop=weight: " + piece);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (ratio.empty()) throw oracle::ConfigError("empty ratio spec");
    return ratio;
}

std::shared_ptr<oracle::MockBackend> build_mock(const std::string& script_path) {
    auto mock = std::make_shared<oracle::MockBackend>();
    if (script_path.empty()) {
        mock->set_default_response("<answer>mock answer</answer>");
        return mock;
    }
    std::ifstream in(script_path, std::ios::binary);
    if (!in) throw oracle::ConfigError("cannot open mock script: " + script_path);
    json doc;
    in >> doc;
    const json by_digest = doc.value("by_digest", json::object());
    for (const auto& [digest, response] : by_digest.items()) {
        mock->script_digest(digest, response.get<std::string>());
    }
    const json by_tag = doc.value("by_tag", json::object());
    for (const auto& [tag, responses] : by_tag.items()) {
        std::vector<std::string> queue;
        for (const json& r : responses) queue.push_back(r.get<std::string>());
        mock->script_tag(tag, std::move(queue));
    }
    for (const json& rule : doc.value("rules", json::array())) {
        mock->script_contains(rule.at("contains").get<std::string>(),
                              rule.at("response").get<std::string>());
    }
    if (doc.contains("default")) {
        mock->set_default_response(doc["default"].get<std::string>());
    }
    return mock;
}

struct RunOptions {
    std::string records_path;
    std::string data_path;
    std::string dataset = "records";
    std::string method = "oracle";
    std::string backend = "mock";
    std::string model = "gpt-3.5-turbo";
    std::string fixtures_dir;
    std::string mock_script;
    std::string base_url = "https://api.openai.com/v1";
    std::string templates_dir;
    std::string out_dir = "run_out";
    double temperature = 0.0;
    int max_tokens = 512;
    double tau = 0.15;
    int top_k = 4;
    std::string retrieval_mode = "thresholded";
    int parallelism = 1;
    long timeout_ms = 120000;
    long limit = -1;
    std::uint64_t seed = 0;
    int max_in_flight = 4;
    bool record = false;
};

int cmd_run(const RunOptions& opt) {
    std::vector<oracle::QARecord> records;
    if (!opt.records_path.empty()) {
        records = oracle::read_records_jsonl(opt.records_path);
    } else if (!opt.data_path.empty()) {
        records = oracle::load(opt.data_path, oracle::dataset_kind_from_string(opt.dataset));
    } else {
        throw oracle::ConfigError("either --records or --data is required");
    }
    if (opt.limit >= 0 && static_cast<std::size_t>(opt.limit) < records.size()) {
        records.resize(static_cast<std::size_t>(opt.limit));
    }

    std::shared_ptr<oracle::LlmBackend> backend;
    if (opt.backend == "mock") {
        backend = build_mock(opt.mock_script);
    } else if (opt.backend == "replay") {
        if (opt.fixtures_dir.empty()) {
            throw oracle::ConfigError("--fixtures is required for the replay backend");
        }
        backend = std::make_shared<oracle::ReplayBackend>(opt.fixtures_dir);
    } else if (opt.backend == "live") {
        const char* key = std::getenv("ORACLE_API_KEY");
        backend = std::make_shared<oracle::HttpBackend>(opt.base_url, key ? key : "");
    } else {
        throw oracle::ConfigError("unknown backend: " + opt.backend);
    }
    if (opt.record) {
        if (opt.fixtures_dir.empty()) {
            throw oracle::ConfigError("--fixtures is required when recording");
        }
        backend = std::make_shared<oracle::RecordingBackend>(backend, opt.fixtures_dir);
    }

    oracle::TemplateStore templates = oracle::TemplateStore::builtin();
    if (!opt.templates_dir.empty()) templates.load_dir(opt.templates_dir);

    oracle::PipelineConfig cfg;
    cfg.model = opt.model;
    cfg.temperature = opt.temperature;
    cfg.max_tokens = opt.max_tokens;
    cfg.retriever.threshold_tau = opt.tau;
    cfg.retriever.top_k_cap = opt.top_k;
    cfg.retriever.mode = opt.retrieval_mode == "full" ? oracle::RetrievalMode::FullContext
                                                      : oracle::RetrievalMode::Thresholded;
    cfg.question_timeout_ms = opt.timeout_ms;
    cfg.seed = opt.seed;
    if (cfg.retriever.threshold_tau < 0.0 || cfg.retriever.threshold_tau > 1.0) {
        throw oracle::ConfigError("--tau must be in [0,1]");
    }

    oracle::Gateway gateway(backend, {}, opt.max_in_flight, opt.seed);
    oracle::Method method = oracle::method_from_string(opt.method);

    std::vector<oracle::TraceRecord> traces = oracle::run_dataset(
        records, method, gateway, cfg, templates, opt.parallelism, fs::path(opt.out_dir));

    std::size_t errored = 0;
    for (const oracle::TraceRecord& t : traces) {
        if (!t.errors.empty()) ++errored;
    }
    std::cout << "wrote " << traces.size() << " traces to " << opt.out_dir
              << "/traces.jsonl (" << errored << " with degradations)\n";
    return kExitOk;
}

struct SampleOptions {
    std::string data_path;
    std::string dataset;
    std::size_t total = 500;
    std::uint64_t seed = 0;
    std::string ratio;
    std::string out_dir = "sample_out";
};

int cmd_sample(const SampleOptions& opt) {
    oracle::DatasetKind kind = oracle::dataset_kind_from_string(opt.dataset);
    std::vector<oracle::QARecord> records = oracle::load(opt.data_path, kind);

    oracle::SamplePlan plan;
    plan.dataset = kind;
    plan.total = opt.total;
    plan.seed = opt.seed;
    if (!opt.ratio.empty()) plan.ratio = parse_ratio(opt.ratio);

    std::vector<oracle::QARecord> sampled = oracle::sample(records, plan);

    fs::create_directories(opt.out_dir);
    oracle::write_records_jsonl(fs::path(opt.out_dir) / "records.jsonl", sampled);

    ordered_json manifest;
    manifest["dataset"] = std::string(oracle::to_string(kind));
    manifest["source"] = opt.data_path;
    manifest["total"] = sampled.size();
    manifest["seed"] = opt.seed;
    manifest["ratio"] = opt.ratio.empty() ? ordered_json(nullptr) : ordered_json(opt.ratio);
    std::map<std::string, std::size_t> strata;
    for (const oracle::QARecord& r : sampled) {
        std::string key = r.hop_count ? std::to_string(*r.hop_count) + "hop" : "unstratified";
        ++strata[key];
    }
    ordered_json counts = ordered_json::object();
    for (const auto& [key, n] : strata) counts[key] = n;
    manifest["counts"] = std::move(counts);
    std::ofstream out(fs::path(opt.out_dir) / "sample_manifest.json",
                      std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';

    std::cout << "sampled " << sampled.size() << " records into " << opt.out_dir
              << "/records.jsonl\n";
    return kExitOk;
}

struct EvalOptions {
    std::vector<std::string> trace_paths;
    std::string records_path;
    std::string out_dir = "eval_out";
    bool by_type = false;
    bool reasoning = false;
};

int cmd_eval(const EvalOptions& opt) {
    std::map<std::string, oracle::QARecord> by_id;
    for (oracle::QARecord& r : oracle::read_records_jsonl(opt.records_path)) {
        by_id[r.question_id] = std::move(r);
    }

    std::vector<oracle::EvalResult> results;
    std::size_t missing_records = 0;
    std::size_t missing_gold = 0;

    for (const std::string& path : opt.trace_paths) {
        for (const oracle::TraceRecord& trace : oracle::read_traces_jsonl(path)) {
            auto it = by_id.find(trace.question_id);
            if (it == by_id.end()) {
                ++missing_records;
                continue;
            }
            const oracle::QARecord& record = it->second;
            oracle::EvalResult r;
            r.question_id = trace.question_id;
            r.method = std::string(oracle::to_string(trace.method));
            r.em = oracle::exact_match(trace.final_answer, record.gold_answer);
            r.f1 = oracle::token_f1(trace.final_answer, record.gold_answer);
            if (opt.by_type && record.reasoning_type) {
                r.reasoning_type = std::string(oracle::to_string(*record.reasoning_type));
            }
            if (opt.reasoning) {
                if (record.gold_decomposition && !record.gold_decomposition->empty()) {
                    r.reasoning_f1 = oracle::reasoning_f1(trace, *record.gold_decomposition);
                    r.deviation = oracle::deviation(trace, *record.gold_decomposition);
                } else {
                    ++missing_gold;
                }
            }
            results.push_back(std::move(r));
        }
    }

    oracle::AggregateReport report = oracle::aggregate(results);

    fs::create_directories(opt.out_dir);
    {
        std::ofstream out(fs::path(opt.out_dir) / "report.json",
                          std::ios::binary | std::ios::trunc);
        out << oracle::report_to_json(report).dump(2) << '\n';
    }
    {
        std::ofstream out(fs::path(opt.out_dir) / "report.csv",
                          std::ios::binary | std::ios::trunc);
        out << oracle::report_to_csv(report);
    }
    {
        std::ofstream out(fs::path(opt.out_dir) / "per_question.csv",
                          std::ios::binary | std::ios::trunc);
        out << oracle::per_question_csv(results);
    }

    if (missing_records) {
        std::cerr << "warning: " << missing_records
                  << " trace(s) had no matching record and were skipped\n";
    }
    if (missing_gold) {
        std::cerr << "warning: " << missing_gold
                  << " record(s) had no gold decomposition; reasoning metrics left null\n";
    }
    for (const auto& [method, stats] : report.methods) {
        std::cout << method << ": n=" << stats.count << " EM=" << stats.mean_em
                  << " F1=" << stats.mean_f1 << "\n";
    }
    std::cout << "reports written to " << opt.out_dir << "\n";
    return kExitOk;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Ontology-guided multi-hop question answering pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI/TOML, sections per subcommand)");

    SampleOptions sample_opt;
    CLI::App* sample = app.add_subcommand("sample", "Sample a dataset into records.jsonl");
    sample->add_option("--data", sample_opt.data_path, "Dataset dev file")->required();
    sample->add_option("--dataset", sample_opt.dataset, "hotpotqa | 2wikimqa | musique")
        ->required();
    sample->add_option("--total", sample_opt.total, "Number of records to sample");
    sample->add_option("--seed", sample_opt.seed, "Sampling seed");
    sample->add_option("--ratio", sample_opt.ratio,
                       "Stratified quota by hop count, e.g. 2=2,3=2,4=1");
    sample->add_option("--out", sample_opt.out_dir, "Output directory");

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "Run a method over records, writing traces");
    run->add_option("--records", run_opt.records_path, "Canonical records.jsonl");
    run->add_option("--data", run_opt.data_path, "Raw dataset dev file");
    run->add_option("--dataset", run_opt.dataset, "Dataset name for --data");
    run->add_option("--method", run_opt.method,
                    "oracle | oracle-no-onto | oracle-no-fol | nocot | cot | rag");
    run->add_option("--backend", run_opt.backend, "mock | replay | live");
    run->add_option("--model", run_opt.model, "Model name");
    run->add_option("--fixtures", run_opt.fixtures_dir, "Fixture directory (replay/record)");
    run->add_flag("--record", run_opt.record, "Record responses into --fixtures");
    run->add_option("--mock-script", run_opt.mock_script, "Mock backend script (JSON)");
    run->add_option("--base-url", run_opt.base_url, "Chat-completions base URL");
    run->add_option("--templates", run_opt.templates_dir, "Template override directory");
    run->add_option("--temperature", run_opt.temperature, "Sampling temperature");
    run->add_option("--max-tokens", run_opt.max_tokens, "Completion token cap");
    run->add_option("--tau", run_opt.tau, "Retrieval similarity threshold");
    run->add_option("--top-k", run_opt.top_k, "Retrieval result cap");
    run->add_option("--retrieval", run_opt.retrieval_mode, "thresholded | full");
    run->add_option("--parallelism", run_opt.parallelism, "Concurrent questions")
        ->check(CLI::PositiveNumber);
    run->add_option("--timeout-ms", run_opt.timeout_ms, "Per-question wall budget");
    run->add_option("--limit", run_opt.limit, "Run only the first N records");
    run->add_option("--seed", run_opt.seed, "Seed (retry jitter, manifest)");
    run->add_option("--max-in-flight", run_opt.max_in_flight, "Backend request limiter");
    run->add_option("--out", run_opt.out_dir, "Run output directory");

    EvalOptions eval_opt;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate trace files against gold records");
    eval->add_option("--traces", eval_opt.trace_paths, "Trace JSONL file(s)")->required();
    eval->add_option("--records", eval_opt.records_path, "Canonical records.jsonl")->required();
    eval->add_option("--out", eval_opt.out_dir, "Report output directory");
    eval->add_flag("--by-type", eval_opt.by_type, "Break mean F1 down by reasoning type");
    eval->add_flag("--reasoning", eval_opt.reasoning,
                   "Compute reasoning F1 and step-count deviation");

    std::string templates_out;
    CLI::App* templates = app.add_subcommand("templates", "Dump built-in prompt templates");
    templates->add_option("--out", templates_out, "Directory to write template files")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sample->parsed()) return cmd_sample(sample_opt);
        if (run->parsed()) return cmd_run(run_opt);
        if (eval->parsed()) return cmd_eval(eval_opt);
        if (templates->parsed()) {
            oracle::TemplateStore::builtin().dump(templates_out);
            std::cout << "templates written to " << templates_out << "\n";
            return kExitOk;
        }
    } catch (const oracle::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const oracle::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const oracle::OracleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEvalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEvalFailure;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (...) {
        std::cerr << "error: unexpected failure\n";
        return kExitUsage;
    }
}
