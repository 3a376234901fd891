#include "oracle/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>

#include "oracle/errors.hpp"

namespace oracle {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::HotPotQA: return "hotpotqa";
        case DatasetKind::TwoWikiMQA: return "2wikimqa";
        case DatasetKind::MuSiQue: return "musique";
        case DatasetKind::RecordsJsonl: return "records";
    }
    return "records";
}

DatasetKind dataset_kind_from_string(std::string_view s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "hotpotqa" || t == "hotpot") return DatasetKind::HotPotQA;
    if (t == "2wikimqa" || t == "2wiki" || t == "2wikimultihopqa") return DatasetKind::TwoWikiMQA;
    if (t == "musique") return DatasetKind::MuSiQue;
    if (t == "records" || t == "jsonl") return DatasetKind::RecordsJsonl;
    throw ConfigError("unknown dataset: " + std::string(s));
}

std::string_view to_string(ReasoningType t) {
    switch (t) {
        case ReasoningType::Compositional: return "compositional";
        case ReasoningType::Comparison: return "comparison";
        case ReasoningType::BridgeComparison: return "bridge_comparison";
        case ReasoningType::Inference: return "inference";
    }
    return "compositional";
}

std::optional<ReasoningType> reasoning_type_from_string(std::string_view s) {
    std::string t;
    for (char c : s) {
        t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    std::replace(t.begin(), t.end(), '-', '_');
    std::replace(t.begin(), t.end(), ' ', '_');
    if (t == "compositional") return ReasoningType::Compositional;
    if (t == "comparison") return ReasoningType::Comparison;
    if (t == "bridge_comparison") return ReasoningType::BridgeComparison;
    if (t == "inference") return ReasoningType::Inference;
    return std::nullopt;
}

namespace {

[[noreturn]] void fail(std::size_t record_index, const std::string& field,
                       const std::string& what) {
    throw FormatError("record " + std::to_string(record_index) + ": " + field + ": " + what);
}

std::string join_sentences(const json& sentences, std::size_t idx, const std::string& field) {
    if (!sentences.is_array()) fail(idx, field, "expected an array of sentences");
    std::string text;
    for (const json& s : sentences) {
        if (!s.is_string()) fail(idx, field, "expected string sentences");
        text += s.get<std::string>();
    }
    return text;
}

// HotPotQA and 2WikiMQA share the context/supporting_facts shape.
QARecord parse_wiki_style(const json& item, std::size_t idx, bool with_evidences) {
    QARecord r;
    if (!item.is_object()) fail(idx, "", "expected an object");
    try {
        r.question_id = item.at("_id").get<std::string>();
    } catch (const json::exception&) {
        fail(idx, "_id", "missing or not a string");
    }
    try {
        r.question = item.at("question").get<std::string>();
        r.gold_answer = item.at("answer").get<std::string>();
    } catch (const json::exception&) {
        fail(idx, "question/answer", "missing or not a string");
    }
    if (trim(r.question).empty()) fail(idx, "question", "empty");
    if (trim(r.gold_answer).empty()) fail(idx, "answer", "empty");

    std::vector<std::string> gold_titles;
    if (item.contains("supporting_facts")) {
        const json& sf = item["supporting_facts"];
        if (!sf.is_array()) fail(idx, "supporting_facts", "expected an array");
        for (const json& fact : sf) {
            if (fact.is_array() && !fact.empty() && fact[0].is_string()) {
                gold_titles.push_back(fact[0].get<std::string>());
            }
        }
    }

    const json& ctx = item.value("context", json::array());
    if (!ctx.is_array()) fail(idx, "context", "expected an array");
    for (std::size_t p = 0; p < ctx.size(); ++p) {
        const json& entry = ctx[p];
        std::string field = "context[" + std::to_string(p) + "]";
        if (!entry.is_array() || entry.size() < 2 || !entry[0].is_string()) {
            fail(idx, field, "expected [title, [sentences]]");
        }
        Paragraph para;
        para.id = "p" + std::to_string(p);
        para.title = entry[0].get<std::string>();
        para.text = join_sentences(entry[1], idx, field);
        para.is_gold = std::find(gold_titles.begin(), gold_titles.end(), para.title) !=
                       gold_titles.end();
        r.context.push_back(std::move(para));
    }

    if (item.contains("type") && item["type"].is_string()) {
        r.reasoning_type = reasoning_type_from_string(item["type"].get<std::string>());
    }

    if (with_evidences && item.contains("evidences") && item["evidences"].is_array()) {
        std::vector<Triple> triples;
        for (const json& ev : item["evidences"]) {
            if (!ev.is_array() || ev.size() != 3) continue;
            Triple t;
            t.head = Term::constant(ev[0].is_string() ? ev[0].get<std::string>() : ev[0].dump());
            t.relation = ev[1].is_string() ? ev[1].get<std::string>() : ev[1].dump();
            t.tail = Term::constant(ev[2].is_string() ? ev[2].get<std::string>() : ev[2].dump());
            triples.push_back(std::move(t));
        }
        if (!triples.empty()) r.gold_decomposition = std::move(triples);
    }
    return r;
}

QARecord parse_musique(const json& item, std::size_t idx) {
    QARecord r;
    if (!item.is_object()) fail(idx, "", "expected an object");
    try {
        r.question_id = item.at("id").get<std::string>();
        r.question = item.at("question").get<std::string>();
        r.gold_answer = item.at("answer").get<std::string>();
    } catch (const json::exception&) {
        fail(idx, "id/question/answer", "missing or not a string");
    }
    if (trim(r.question).empty()) fail(idx, "question", "empty");
    if (trim(r.gold_answer).empty()) fail(idx, "answer", "empty");

    // "2hop__..." / "4hop1__..." -> leading digits before "hop".
    std::size_t d = 0;
    while (d < r.question_id.size() &&
           std::isdigit(static_cast<unsigned char>(r.question_id[d]))) {
        ++d;
    }
    if (d > 0 && r.question_id.compare(d, 3, "hop") == 0) {
        r.hop_count = std::stoi(r.question_id.substr(0, d));
    }

    const json& paragraphs = item.value("paragraphs", json::array());
    if (!paragraphs.is_array()) fail(idx, "paragraphs", "expected an array");
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        const json& entry = paragraphs[p];
        std::string field = "paragraphs[" + std::to_string(p) + "]";
        if (!entry.is_object()) fail(idx, field, "expected an object");
        Paragraph para;
        para.id = entry.contains("idx") && entry["idx"].is_number()
                      ? "p" + std::to_string(entry["idx"].get<long>())
                      : "p" + std::to_string(p);
        para.title = entry.value("title", "");
        para.text = entry.value("paragraph_text", "");
        para.is_gold = entry.value("is_supporting", false);
        r.context.push_back(std::move(para));
    }
    return r;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return doc;
}

}  // namespace

std::vector<QARecord> load(const std::filesystem::path& path, DatasetKind kind) {
    std::vector<QARecord> records;

    if (kind == DatasetKind::RecordsJsonl) return read_records_jsonl(path);

    if (kind == DatasetKind::MuSiQue) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("cannot open " + path.string());
        std::string line;
        std::size_t idx = 0;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            json item;
            try {
                item = json::parse(line);
            } catch (const json::exception& e) {
                fail(idx, "", e.what());
            }
            records.push_back(parse_musique(item, idx));
            ++idx;
        }
        return records;
    }

    json doc = read_json_file(path);
    if (!doc.is_array()) throw FormatError(path.string() + ": expected a JSON array");
    for (std::size_t i = 0; i < doc.size(); ++i) {
        records.push_back(parse_wiki_style(doc[i], i, kind == DatasetKind::TwoWikiMQA));
    }
    return records;
}

namespace {

// Platform-stable uniform draw in [0, n) via rejection sampling.
std::size_t bounded_draw(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
}

// Selection-ordered sample of k distinct indices out of n.
std::vector<std::size_t> draw_indices(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + bounded_draw(rng, n - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace

std::vector<QARecord> sample(const std::vector<QARecord>& records, const SamplePlan& plan) {
    std::vector<QARecord> out;
    if (plan.total == 0) return out;

    std::mt19937_64 rng(plan.seed);

    if (!plan.ratio) {
        if (records.size() < plan.total) {
            throw InsufficientStratumError(-1, records.size(), plan.total);
        }
        for (std::size_t i : draw_indices(rng, records.size(), plan.total)) {
            out.push_back(records[i]);
        }
        return out;
    }

    // Quotas by largest remainder.
    long weight_sum = 0;
    for (const auto& [hop, w] : *plan.ratio) {
        if (w <= 0) throw ConfigError("ratio weights must be positive");
        weight_sum += w;
    }
    std::map<int, std::size_t> quota;
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (const auto& [hop, w] : *plan.ratio) {
        double exact = static_cast<double>(plan.total) * w / static_cast<double>(weight_sum);
        std::size_t q = static_cast<std::size_t>(exact);
        quota[hop] = q;
        assigned += q;
        remainders.emplace_back(exact - static_cast<double>(q), hop);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < plan.total && i < remainders.size(); ++i) {
        ++quota[remainders[i].second];
        ++assigned;
    }

    for (const auto& [hop, q] : quota) {
        std::vector<std::size_t> stratum;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].hop_count && *records[i].hop_count == hop) stratum.push_back(i);
        }
        if (stratum.size() < q) throw InsufficientStratumError(hop, stratum.size(), q);
        for (std::size_t pick : draw_indices(rng, stratum.size(), q)) {
            out.push_back(records[stratum[pick]]);
        }
    }
    return out;
}

ordered_json record_to_json(const QARecord& r) {
    ordered_json j;
    j["question_id"] = r.question_id;
    j["question"] = r.question;
    j["gold_answer"] = r.gold_answer;
    ordered_json ctx = ordered_json::array();
    for (const Paragraph& p : r.context) {
        ctx.push_back({{"id", p.id}, {"title", p.title}, {"text", p.text},
                       {"is_gold", p.is_gold}});
    }
    j["context"] = std::move(ctx);
    if (r.gold_decomposition) {
        ordered_json triples = ordered_json::array();
        for (const Triple& t : *r.gold_decomposition) {
            triples.push_back({t.head.text, t.relation, t.tail.text});
        }
        j["gold_decomposition"] = std::move(triples);
    } else {
        j["gold_decomposition"] = nullptr;
    }
    j["reasoning_type"] =
        r.reasoning_type ? ordered_json(std::string(to_string(*r.reasoning_type)))
                         : ordered_json(nullptr);
    j["hop_count"] = r.hop_count ? ordered_json(*r.hop_count) : ordered_json(nullptr);
    return j;
}

QARecord record_from_json(const json& j) {
    QARecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    r.gold_answer = j.at("gold_answer").get<std::string>();
    for (const json& p : j.value("context", json::array())) {
        Paragraph para;
        para.id = p.value("id", "");
        para.title = p.value("title", "");
        para.text = p.value("text", "");
        para.is_gold = p.value("is_gold", false);
        r.context.push_back(std::move(para));
    }
    if (j.contains("gold_decomposition") && j["gold_decomposition"].is_array()) {
        std::vector<Triple> triples;
        for (const json& t : j["gold_decomposition"]) {
            if (!t.is_array() || t.size() != 3) continue;
            triples.push_back({Term::constant(t[0].get<std::string>()),
                               t[1].get<std::string>(),
                               Term::constant(t[2].get<std::string>())});
        }
        if (!triples.empty()) r.gold_decomposition = std::move(triples);
    }
    if (j.contains("reasoning_type") && j["reasoning_type"].is_string()) {
        r.reasoning_type = reasoning_type_from_string(j["reasoning_type"].get<std::string>());
    }
    if (j.contains("hop_count") && j["hop_count"].is_number_integer()) {
        r.hop_count = j["hop_count"].get<int>();
    }
    return r;
}

void write_records_jsonl(const std::filesystem::path& path,
                         const std::vector<QARecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    for (const QARecord& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<QARecord> read_records_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<QARecord> records;
    std::string line;
    std::size_t idx = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            records.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            fail(idx, "", e.what());
        }
        ++idx;
    }
    return records;
}

}  // namespace oracle
