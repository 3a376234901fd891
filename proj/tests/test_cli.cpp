#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracle/datasets.hpp"
#include "oracle/pipeline.hpp"
#include "support/scenarios.hpp"

using namespace oracle;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cli(const std::string& args) {
    std::string cmd = std::string(ORACLE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// MuSiQue-format dev file with the given per-hop counts.
fs::path write_musique(const fs::path& dir, int h2, int h3, int h4) {
    fs::path path = dir / "musique_dev.jsonl";
    std::ofstream out(path, std::ios::binary);
    auto emit = [&](int hop, int i) {
        json rec = {
            {"id", std::to_string(hop) + "hop__" + std::to_string(hop * 100000 + i)},
            {"question", "Question " + std::to_string(i) + "?"},
            {"answer", "Answer " + std::to_string(i)},
            {"paragraphs",
             json::array({{{"idx", 0}, {"title", "T"}, {"paragraph_text", "text"},
                           {"is_supporting", true}}})},
        };
        out << rec.dump() << "\n";
    };
    for (int i = 0; i < h2; ++i) emit(2, i);
    for (int i = 0; i < h3; ++i) emit(3, i);
    for (int i = 0; i < h4; ++i) emit(4, i);
    return path;
}

}  // namespace

TEST_CASE("sample: stratified quotas land in the manifest") {
    fs::path dir = fresh_dir("cli_sample");
    fs::path data = write_musique(dir, 300, 280, 150);

    int rc = cli("sample --data " + data.string() + " --dataset musique --total 500 --seed 7" +
                 " --ratio 2=2,3=2,4=1 --out " + (dir / "out").string());
    CHECK(rc == 0);

    auto manifest = json::parse(read_file(dir / "out" / "sample_manifest.json"));
    CHECK(manifest["counts"]["2hop"] == 200);
    CHECK(manifest["counts"]["3hop"] == 200);
    CHECK(manifest["counts"]["4hop"] == 100);

    std::vector<QARecord> records = read_records_jsonl(dir / "out" / "records.jsonl");
    CHECK(records.size() == 500);
    fs::remove_all(dir);
}

TEST_CASE("sample: total 0 writes an empty file and exits 0") {
    fs::path dir = fresh_dir("cli_sample_zero");
    fs::path data = write_musique(dir, 5, 0, 0);
    int rc = cli("sample --data " + data.string() + " --dataset musique --total 0 --out " +
                 (dir / "out").string());
    CHECK(rc == 0);
    CHECK(read_file(dir / "out" / "records.jsonl").empty());
    fs::remove_all(dir);
}

TEST_CASE("sample: bad path exits 2") {
    CHECK(cli("sample --data /nonexistent.json --dataset musique --out /tmp/cli_never") == 2);
}

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(cli("definitely-not-a-subcommand") == 2);
    CHECK(cli("run") == 2);  // neither --records nor --data
    CHECK(cli("--help") == 0);
}

TEST_CASE("run flag validation exits 2") {
    fs::path dir = fresh_dir("cli_flags");
    write_records_jsonl(dir / "records.jsonl", scenarios::synthetic_records(1));
    std::string records = " --records " + (dir / "records.jsonl").string();

    CHECK(cli("run" + records + " --backend mock --tau 1.5") == 2);
    CHECK(cli("run" + records + " --backend replay") == 2);  // no --fixtures
    CHECK(cli("run" + records + " --backend warp-drive") == 2);
    CHECK(cli("run" + records + " --method mystery") == 2);
    CHECK(cli("run" + records + " --backend mock --parallelism 0") == 2);
    fs::remove_all(dir);
}

TEST_CASE("run: mock backend three-question run writes three trace lines") {
    fs::path dir = fresh_dir("cli_run_mock");
    write_records_jsonl(dir / "records.jsonl", scenarios::synthetic_records(3));

    int rc = cli("run --records " + (dir / "records.jsonl").string() +
                 " --method nocot --backend mock --out " + (dir / "out").string());
    CHECK(rc == 0);

    std::vector<TraceRecord> traces = read_traces_jsonl(dir / "out" / "traces.jsonl");
    REQUIRE(traces.size() == 3);
    CHECK(traces[0].method == Method::NoCoT);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("run: mock script file drives staged outputs") {
    fs::path dir = fresh_dir("cli_run_script");
    write_records_jsonl(dir / "records.jsonl", {scenarios::monarch_record()});

    json script;
    script["by_tag"]["onto"] = {scenarios::monarch_onto_output()};
    script["by_tag"]["fol"] = {scenarios::monarch_fol_output()};
    script["by_tag"]["decomp"] = {scenarios::monarch_decomp_output()};
    script["by_tag"]["subsolve"] = scenarios::monarch_subanswers();
    {
        std::ofstream out(dir / "script.json");
        out << script.dump();
    }

    int rc = cli("run --records " + (dir / "records.jsonl").string() +
                 " --method oracle --backend mock --mock-script " +
                 (dir / "script.json").string() + " --out " + (dir / "out").string());
    CHECK(rc == 0);

    std::vector<TraceRecord> traces = read_traces_jsonl(dir / "out" / "traces.jsonl");
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].final_answer == "French First Republic");
    fs::remove_all(dir);
}

TEST_CASE("run: no-fol ablation leaves stage 2 out of the traces") {
    fs::path dir = fresh_dir("cli_run_nofol");
    write_records_jsonl(dir / "records.jsonl", scenarios::synthetic_records(2));

    json script;
    script["by_tag"]["onto"] = {scenarios::synthetic_onto_output(0),
                                scenarios::synthetic_onto_output(1)};
    script["by_tag"]["decomp"] = {scenarios::synthetic_decomp_output(0),
                                  scenarios::synthetic_decomp_output(1)};
    script["default"] = "<answer>whatever</answer>";
    {
        std::ofstream out(dir / "script.json");
        out << script.dump();
    }

    int rc = cli("run --records " + (dir / "records.jsonl").string() +
                 " --method oracle-no-fol --backend mock --mock-script " +
                 (dir / "script.json").string() + " --out " + (dir / "out").string());
    CHECK(rc == 0);

    for (const TraceRecord& t : read_traces_jsonl(dir / "out" / "traces.jsonl")) {
        CHECK(t.stage1.has_value());
        CHECK_FALSE(t.stage2.has_value());
    }
    fs::remove_all(dir);
}

TEST_CASE("eval: computes EM and F1 from traces plus records") {
    fs::path dir = fresh_dir("cli_eval");
    std::vector<QARecord> records = scenarios::synthetic_records(2);
    write_records_jsonl(dir / "records.jsonl", records);

    std::vector<TraceRecord> traces;
    for (int i = 0; i < 2; ++i) {
        TraceRecord t;
        t.question_id = records[i].question_id;
        t.method = Method::Oracle;
        t.final_answer = i == 0 ? records[i].gold_answer : "wrong answer";
        SubStepTrace s;
        s.index = 1;
        s.substituted = records[i].question;
        s.answer = t.final_answer;
        t.substeps.push_back(s);
        traces.push_back(t);
    }
    write_traces_jsonl(dir / "traces.jsonl", traces);

    int rc = cli("eval --traces " + (dir / "traces.jsonl").string() + " --records " +
                 (dir / "records.jsonl").string() + " --out " + (dir / "out").string());
    CHECK(rc == 0);

    auto report = json::parse(read_file(dir / "out" / "report.json"));
    CHECK(report["oracle"]["count"] == 2);
    CHECK(report["oracle"]["mean_em"] == doctest::Approx(0.5));
    CHECK(fs::exists(dir / "out" / "per_question.csv"));
    CHECK(fs::exists(dir / "out" / "report.csv"));
    fs::remove_all(dir);
}

TEST_CASE("eval: multiple trace files produce one report row per method") {
    fs::path dir = fresh_dir("cli_eval_multi");
    std::vector<QARecord> records = scenarios::synthetic_records(1);
    write_records_jsonl(dir / "records.jsonl", records);

    auto make_trace = [&](Method m) {
        TraceRecord t;
        t.question_id = records[0].question_id;
        t.method = m;
        t.final_answer = records[0].gold_answer;
        return t;
    };
    write_traces_jsonl(dir / "oracle.jsonl", {make_trace(Method::Oracle)});
    write_traces_jsonl(dir / "nocot.jsonl", {make_trace(Method::NoCoT)});

    int rc = cli("eval --traces " + (dir / "oracle.jsonl").string() + " --traces " +
                 (dir / "nocot.jsonl").string() + " --records " +
                 (dir / "records.jsonl").string() + " --out " + (dir / "out").string());
    CHECK(rc == 0);

    auto report = json::parse(read_file(dir / "out" / "report.json"));
    CHECK(report.contains("oracle"));
    CHECK(report.contains("nocot"));
    fs::remove_all(dir);
}

TEST_CASE("eval: empty trace file gives an empty report and exit 0") {
    fs::path dir = fresh_dir("cli_eval_empty");
    write_records_jsonl(dir / "records.jsonl", scenarios::synthetic_records(1));
    {
        std::ofstream out(dir / "traces.jsonl");
    }
    int rc = cli("eval --traces " + (dir / "traces.jsonl").string() + " --records " +
                 (dir / "records.jsonl").string() + " --out " + (dir / "out").string());
    CHECK(rc == 0);
    auto report = json::parse(read_file(dir / "out" / "report.json"));
    CHECK(report.empty());
    fs::remove_all(dir);
}

TEST_CASE("eval: reasoning flag without gold leaves nulls") {
    fs::path dir = fresh_dir("cli_eval_nogold");
    std::vector<QARecord> records = scenarios::synthetic_records(1);  // no gold triples
    write_records_jsonl(dir / "records.jsonl", records);

    TraceRecord t;
    t.question_id = records[0].question_id;
    t.method = Method::Oracle;
    t.final_answer = records[0].gold_answer;
    write_traces_jsonl(dir / "traces.jsonl", {t});

    int rc = cli("eval --reasoning --traces " + (dir / "traces.jsonl").string() +
                 " --records " + (dir / "records.jsonl").string() + " --out " +
                 (dir / "out").string());
    CHECK(rc == 0);

    std::string pq = read_file(dir / "out" / "per_question.csv");
    // reasoning_f1 and deviation columns stay empty.
    CHECK(pq.find("syn0,oracle,1,1.000000,,,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("sample, run and eval chain into a full workflow") {
    fs::path dir = fresh_dir("cli_workflow");

    int rc = cli("sample --data " + std::string(ORACLE_FIXTURES_DIR) + "/wiki20.json" +
                 " --dataset 2wikimqa --total 20 --seed 1 --out " + (dir / "s").string());
    REQUIRE(rc == 0);
    std::vector<QARecord> records = read_records_jsonl(dir / "s" / "records.jsonl");
    REQUIRE(records.size() == 20);

    rc = cli("run --records " + (dir / "s" / "records.jsonl").string() +
             " --method rag --backend mock --out " + (dir / "r").string());
    REQUIRE(rc == 0);

    rc = cli("eval --by-type --reasoning --traces " + (dir / "r" / "traces.jsonl").string() +
             " --records " + (dir / "s" / "records.jsonl").string() + " --out " +
             (dir / "e").string());
    REQUIRE(rc == 0);

    auto report = json::parse(read_file(dir / "e" / "report.json"));
    REQUIRE(report.contains("rag"));
    CHECK(report["rag"]["count"] == 20);
    CHECK(report["rag"]["f1_by_type"].contains("compositional"));
    CHECK(report["rag"]["f1_by_type"].contains("inference"));
    CHECK(report["rag"]["reasoning"]["count"] == 20);

    std::string pq = read_file(dir / "e" / "per_question.csv");
    CHECK(std::count(pq.begin(), pq.end(), '\n') == 21);  // header + 20 rows
    fs::remove_all(dir);
}

TEST_CASE("templates dump writes every builtin") {
    fs::path dir = fresh_dir("cli_templates");
    int rc = cli("templates --out " + dir.string());
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "onto.txt"));
    CHECK(fs::exists(dir / "subsolve.txt"));
    fs::remove_all(dir);
}
