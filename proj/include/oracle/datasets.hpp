#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracle/core.hpp"
#include "oracle/retriever.hpp"

namespace oracle {

enum class DatasetKind { HotPotQA, TwoWikiMQA, MuSiQue, RecordsJsonl };

std::string_view to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(std::string_view s);

enum class ReasoningType { Compositional, Comparison, BridgeComparison, Inference };

std::string_view to_string(ReasoningType t);
std::optional<ReasoningType> reasoning_type_from_string(std::string_view s);

// One normalized dataset item.
struct QARecord {
    std::string question_id;
    std::string question;
    std::string gold_answer;
    std::vector<Paragraph> context;
    std::optional<std::vector<Triple>> gold_decomposition;  // 2WikiMQA evidences
    std::optional<ReasoningType> reasoning_type;
    std::optional<int> hop_count;  // MuSiQue, from the id prefix

    bool operator==(const QARecord&) const = default;
};

// Reads a published dev-set file (JSON array for HotPotQA/2WikiMQA, JSONL for
// MuSiQue) or a canonical records.jsonl. Throws FormatError naming the record
// index and field on malformed input.
std::vector<QARecord> load(const std::filesystem::path& path, DatasetKind kind);

struct SamplePlan {
    DatasetKind dataset = DatasetKind::RecordsJsonl;
    std::size_t total = 0;
    std::uint64_t seed = 0;
    std::optional<std::map<int, int>> ratio;  // hop count -> weight
};

// Seeded, reproducible sampling without replacement. With a ratio, records
// are stratified by hop_count and quotas follow the weights (largest
// remainder on non-exact division); throws InsufficientStratumError when a
// stratum cannot fill its quota. Without a ratio, sampling is uniform.
std::vector<QARecord> sample(const std::vector<QARecord>& records, const SamplePlan& plan);

nlohmann::ordered_json record_to_json(const QARecord& r);
QARecord record_from_json(const nlohmann::json& j);

void write_records_jsonl(const std::filesystem::path& path,
                         const std::vector<QARecord>& records);
std::vector<QARecord> read_records_jsonl(const std::filesystem::path& path);

}  // namespace oracle
