#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oracle {

// One context paragraph from a dataset record. `is_gold` marks supporting
// paragraphs when the dataset provides that signal.
struct Paragraph {
    std::string id;
    std::string title;
    std::string text;
    bool is_gold = false;

    bool operator==(const Paragraph&) const = default;
};

enum class RetrievalMode { Thresholded, FullContext };

struct RetrieverConfig {
    double threshold_tau = 0.15;
    int top_k_cap = 4;
    RetrievalMode mode = RetrievalMode::Thresholded;
};

// Lowercased alphanumeric tokens; bytes >= 0x80 are kept as letter bytes so
// UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

struct ScoredParagraph {
    Paragraph paragraph;
    double score = 0.0;
};

// tf-idf over one record's context. Document frequencies come from the given
// paragraphs only; idf is smoothed (ln((1+N)/(1+df)) + 1) so identical token
// vectors always score 1.
class TfIdfIndex {
public:
    explicit TfIdfIndex(const std::vector<Paragraph>& context);

    // Cosine similarity in [0,1] between the query and paragraph `idx`
    // (title + text). Empty query or empty paragraph scores 0.
    double score(std::string_view query, std::size_t idx) const;

    std::size_t size() const { return doc_vectors_.size(); }

private:
    struct WeightedTerm {
        std::string term;
        double weight;
    };
    std::vector<std::vector<WeightedTerm>> doc_vectors_;  // sorted by term
    std::vector<double> doc_norms_;
    std::vector<std::pair<std::string, std::size_t>> df_;  // sorted by term
    std::size_t n_docs_ = 0;

    double idf(std::string_view term) const;
};

// Thresholded mode: paragraphs scoring >= tau, sorted by descending score
// (ties keep original order), truncated to top_k_cap. FullContext mode: the
// whole context in original order with scores attached.
std::vector<ScoredParagraph> retrieve(std::string_view query,
                                      const std::vector<Paragraph>& context,
                                      const RetrieverConfig& cfg);

// Highest-scoring paragraph (ties by original order); used as the fallback
// when a thresholded retrieval comes back empty.
std::vector<ScoredParagraph> retrieve_top1(std::string_view query,
                                           const std::vector<Paragraph>& context);

}  // namespace oracle
