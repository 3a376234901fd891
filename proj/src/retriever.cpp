#include "oracle/retriever.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace oracle {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

std::map<std::string, std::size_t> term_counts(std::string_view text) {
    std::map<std::string, std::size_t> counts;
    for (std::string& t : tokenize(text)) ++counts[t];
    return counts;
}

}  // namespace

TfIdfIndex::TfIdfIndex(const std::vector<Paragraph>& context) {
    n_docs_ = context.size();

    std::map<std::string, std::size_t> df;
    std::vector<std::map<std::string, std::size_t>> counts;
    counts.reserve(context.size());
    for (const Paragraph& p : context) {
        counts.push_back(term_counts(p.title + " " + p.text));
        for (const auto& [term, _] : counts.back()) ++df[term];
    }
    df_.assign(df.begin(), df.end());

    for (const auto& c : counts) {
        std::vector<WeightedTerm> vec;
        double norm_sq = 0.0;
        for (const auto& [term, tf] : c) {
            double w = static_cast<double>(tf) * idf(term);
            vec.push_back({term, w});
            norm_sq += w * w;
        }
        doc_vectors_.push_back(std::move(vec));
        doc_norms_.push_back(std::sqrt(norm_sq));
    }
}

double TfIdfIndex::idf(std::string_view term) const {
    auto it = std::lower_bound(df_.begin(), df_.end(), term,
                               [](const auto& a, std::string_view b) { return a.first < b; });
    std::size_t df = (it != df_.end() && it->first == term) ? it->second : 0;
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df))) + 1.0;
}

double TfIdfIndex::score(std::string_view query, std::size_t idx) const {
    const auto& doc = doc_vectors_[idx];
    if (doc.empty()) return 0.0;

    std::map<std::string, std::size_t> q = term_counts(query);
    if (q.empty()) return 0.0;

    double q_norm_sq = 0.0;
    double dot = 0.0;
    for (const auto& [term, tf] : q) {
        double w = static_cast<double>(tf) * idf(term);
        q_norm_sq += w * w;
        auto it = std::lower_bound(doc.begin(), doc.end(), term,
                                   [](const WeightedTerm& a, const std::string& b) {
                                       return a.term < b;
                                   });
        if (it != doc.end() && it->term == term) dot += w * it->weight;
    }
    if (dot == 0.0) return 0.0;
    double denom = std::sqrt(q_norm_sq) * doc_norms_[idx];
    return std::min(1.0, dot / denom);
}

std::vector<ScoredParagraph> retrieve(std::string_view query,
                                      const std::vector<Paragraph>& context,
                                      const RetrieverConfig& cfg) {
    TfIdfIndex index(context);
    std::vector<ScoredParagraph> scored;
    scored.reserve(context.size());
    for (std::size_t i = 0; i < context.size(); ++i) {
        scored.push_back({context[i], index.score(query, i)});
    }

    if (cfg.mode == RetrievalMode::FullContext) return scored;

    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].score > scored[b].score;
    });

    std::vector<ScoredParagraph> out;
    for (std::size_t i : order) {
        if (scored[i].score < cfg.threshold_tau) continue;
        out.push_back(scored[i]);
        if (static_cast<int>(out.size()) >= cfg.top_k_cap) break;
    }
    return out;
}

std::vector<ScoredParagraph> retrieve_top1(std::string_view query,
                                           const std::vector<Paragraph>& context) {
    RetrieverConfig cfg;
    cfg.threshold_tau = 0.0;
    cfg.top_k_cap = 1;
    cfg.mode = RetrievalMode::Thresholded;
    return retrieve(query, context, cfg);
}

}  // namespace oracle
