#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle/retriever.hpp"

using namespace oracle;

namespace {

// Independent tf-idf cosine oracle, written against the declared scheme:
// weight = tf * (ln((1+N)/(1+df)) + 1), cosine over title+text vs query.
double oracle_score(const std::string& query, const std::vector<Paragraph>& context,
                    std::size_t target) {
    std::size_t n = context.size();

    auto counts = [](const std::string& text) {
        std::map<std::string, int> c;
        std::string word;
        for (unsigned char ch : text) {
            if (std::isalnum(ch) || ch >= 0x80) {
                word += static_cast<char>(std::tolower(ch));
            } else if (!word.empty()) {
                ++c[word];
                word.clear();
            }
        }
        if (!word.empty()) ++c[word];
        return c;
    };

    std::vector<std::map<std::string, int>> docs;
    for (const Paragraph& p : context) docs.push_back(counts(p.title + " " + p.text));
    std::map<std::string, int> q = counts(query);

    std::map<std::string, int> df;
    for (const auto& d : docs) {
        for (const auto& [term, _] : d) ++df[term];
    }
    auto idf = [&](const std::string& term) {
        int f = df.count(term) ? df.at(term) : 0;
        return std::log((1.0 + double(n)) / (1.0 + double(f))) + 1.0;
    };

    double dot = 0, qn = 0, dn = 0;
    for (const auto& [term, tf] : q) {
        double w = tf * idf(term);
        qn += w * w;
        if (docs[target].count(term)) dot += w * docs[target].at(term) * idf(term);
    }
    for (const auto& [term, tf] : docs[target]) {
        double w = tf * idf(term);
        dn += w * w;
    }
    if (dot == 0 || qn == 0 || dn == 0) return 0.0;
    return dot / (std::sqrt(qn) * std::sqrt(dn));
}

std::vector<Paragraph> toy_corpus() {
    return {
        {"p0", "Louis XVI", "Louis XVI was the king of France before the revolution.", true},
        {"p1", "Battle of Saratoga", "The battle of Saratoga ended in American victory.", false},
        {"p2", "Danube", "The Danube flows through Vienna and Budapest.", false},
    };
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Louis XVI, king of France!") ==
          std::vector<std::string>{"louis", "xvi", "king", "of", "france"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("  \t\n ") == std::vector<std::string>{});
}

TEST_CASE("query identical to a paragraph scores 1") {
    std::vector<Paragraph> corpus = toy_corpus();
    TfIdfIndex index(corpus);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        double s = index.score(corpus[i].title + " " + corpus[i].text, i);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("disjoint token sets score 0") {
    std::vector<Paragraph> corpus = toy_corpus();
    TfIdfIndex index(corpus);
    CHECK(index.score("quantum entanglement spectra", 0) == 0.0);
    CHECK(index.score("", 0) == 0.0);
}

TEST_CASE("empty paragraph scores 0") {
    std::vector<Paragraph> corpus = {{"p0", "", "", false}};
    TfIdfIndex index(corpus);
    CHECK(index.score("anything", 0) == 0.0);
}

TEST_CASE("scores match the independent oracle on the toy corpus") {
    std::vector<Paragraph> corpus = toy_corpus();
    TfIdfIndex index(corpus);
    std::vector<std::string> queries = {
        "who was the king of France",
        "battle of Saratoga victory",
        "river through Vienna",
        "Louis XVI France revolution king",
    };
    for (const std::string& q : queries) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            CHECK(index.score(q, i) == doctest::Approx(oracle_score(q, corpus, i)).epsilon(1e-6));
        }
    }
}

TEST_CASE("duplicating a paragraph's content leaves its score unchanged") {
    // The scored document is title + text; duplicating both scales every
    // term frequency uniformly, which cosine ignores.
    std::vector<Paragraph> corpus = toy_corpus();
    std::vector<Paragraph> doubled = corpus;
    doubled[0].title = corpus[0].title + " " + corpus[0].title;
    doubled[0].text = corpus[0].text + " " + corpus[0].text;

    TfIdfIndex a(corpus), b(doubled);
    std::string query = "king of France";
    CHECK(a.score(query, 0) == doctest::Approx(b.score(query, 0)).epsilon(1e-12));
}

TEST_CASE("threshold floor returns everything, ceiling returns nothing") {
    std::vector<Paragraph> corpus = toy_corpus();
    RetrieverConfig cfg;
    cfg.top_k_cap = 10;

    cfg.threshold_tau = 0.0;
    CHECK(retrieve("king of France", corpus, cfg).size() == corpus.size());

    cfg.threshold_tau = 1.5;
    CHECK(retrieve("king of France", corpus, cfg).empty());
}

TEST_CASE("thresholded results sort by score with original-order ties and honor the cap") {
    std::vector<Paragraph> corpus = toy_corpus();
    RetrieverConfig cfg;
    cfg.threshold_tau = 0.0;
    cfg.top_k_cap = 2;

    std::vector<ScoredParagraph> out = retrieve("king of France", corpus, cfg);
    REQUIRE(out.size() == 2);
    CHECK(out[0].score >= out[1].score);
    CHECK(out[0].paragraph.id == "p0");
}

TEST_CASE("full-context mode preserves order and content") {
    std::vector<Paragraph> corpus = toy_corpus();
    RetrieverConfig cfg;
    cfg.mode = RetrievalMode::FullContext;
    cfg.threshold_tau = 0.9;  // ignored in full mode

    std::vector<ScoredParagraph> out = retrieve("anything", corpus, cfg);
    REQUIRE(out.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CHECK(out[i].paragraph == corpus[i]);
    }
}

TEST_CASE("raising the threshold never adds a paragraph") {
    std::mt19937_64 rng(31337);
    std::vector<std::string> words = {"king",  "france", "battle", "river", "vienna",
                                      "louis", "danube", "war",    "treaty", "empire"};
    auto sentence = [&](std::size_t len) {
        std::string s;
        for (std::size_t i = 0; i < len; ++i) {
            if (!s.empty()) s += ' ';
            s += words[rng() % words.size()];
        }
        return s;
    };

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Paragraph> corpus;
        std::size_t n = 2 + rng() % 5;
        for (std::size_t i = 0; i < n; ++i) {
            corpus.push_back({"p" + std::to_string(i), sentence(2), sentence(6 + rng() % 8),
                              false});
        }
        std::string query = sentence(3);

        RetrieverConfig lo, hi;
        lo.top_k_cap = hi.top_k_cap = 100;
        lo.threshold_tau = double(rng() % 50) / 100.0;
        hi.threshold_tau = lo.threshold_tau + double(rng() % 50) / 100.0;

        std::set<std::string> lo_ids, hi_ids;
        for (const auto& sp : retrieve(query, corpus, lo)) lo_ids.insert(sp.paragraph.id);
        for (const auto& sp : retrieve(query, corpus, hi)) hi_ids.insert(sp.paragraph.id);
        for (const std::string& id : hi_ids) CHECK(lo_ids.count(id) == 1);
    }
}

TEST_CASE("top-1 fallback returns the single best paragraph") {
    std::vector<Paragraph> corpus = toy_corpus();
    std::vector<ScoredParagraph> out = retrieve_top1("battle of Saratoga", corpus);
    REQUIRE(out.size() == 1);
    CHECK(out[0].paragraph.id == "p1");
}
