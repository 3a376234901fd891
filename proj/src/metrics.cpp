#include "oracle/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "oracle/errors.hpp"

namespace oracle {

using nlohmann::ordered_json;

std::string normalize(std::string_view s) {
    std::string lowered;
    lowered.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) continue;
        lowered += static_cast<char>(std::tolower(c));
    }

    std::string out;
    std::istringstream words(lowered);
    std::string word;
    while (words >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

namespace {

std::map<std::string, std::size_t> token_multiset(std::string_view normalized) {
    std::map<std::string, std::size_t> counts;
    std::istringstream words{std::string(normalized)};
    std::string word;
    while (words >> word) ++counts[word];
    return counts;
}

}  // namespace

int exact_match(std::string_view pred, std::string_view gold) {
    return normalize(pred) == normalize(gold) ? 1 : 0;
}

double token_f1(std::string_view pred, std::string_view gold) {
    std::map<std::string, std::size_t> p = token_multiset(normalize(pred));
    std::map<std::string, std::size_t> g = token_multiset(normalize(gold));

    std::size_t p_total = 0, g_total = 0;
    for (const auto& [_, n] : p) p_total += n;
    for (const auto& [_, n] : g) g_total += n;

    if (p_total == 0 && g_total == 0) return 1.0;
    if (p_total == 0 || g_total == 0) return 0.0;

    std::size_t overlap = 0;
    for (const auto& [token, n] : p) {
        auto it = g.find(token);
        if (it != g.end()) overlap += std::min(n, it->second);
    }
    if (overlap == 0) return 0.0;

    double precision = static_cast<double>(overlap) / static_cast<double>(p_total);
    double recall = static_cast<double>(overlap) / static_cast<double>(g_total);
    return 2.0 * precision * recall / (precision + recall);
}

std::string gold_reasoning_string(const std::vector<Triple>& gold) {
    std::string out;
    for (const Triple& t : gold) {
        if (!out.empty()) out += ' ';
        out += t.head.text + " " + t.relation + " " + t.tail.text;
    }
    return out;
}

std::string generated_reasoning_string(const TraceRecord& trace) {
    std::string out;
    for (const SubStepTrace& s : trace.substeps) {
        if (!out.empty()) out += ' ';
        out += s.substituted + " " + s.answer;
    }
    return out;
}

double reasoning_f1(std::string_view generated, const std::vector<Triple>& gold) {
    if (gold.empty()) throw NoGoldError("no gold decomposition available");
    return token_f1(generated, gold_reasoning_string(gold));
}

double reasoning_f1(const TraceRecord& trace, const std::vector<Triple>& gold) {
    return reasoning_f1(generated_reasoning_string(trace), gold);
}

int deviation(const TraceRecord& trace, const std::vector<Triple>& gold) {
    if (gold.empty()) throw NoGoldError("no gold decomposition available");
    return static_cast<int>(trace.substeps.size()) - static_cast<int>(gold.size());
}

AggregateReport aggregate(const std::vector<EvalResult>& results) {
    AggregateReport report;

    struct Accum {
        std::size_t n = 0;
        double em_sum = 0, f1_sum = 0;
        std::map<std::string, std::pair<std::size_t, double>> by_type;
        std::size_t rn = 0;
        double r_sum = 0;
        std::size_t high_n = 0, low_n = 0;
        double high_f1_sum = 0, low_f1_sum = 0;
        std::map<int, std::pair<std::size_t, double>> dev;  // deviation -> (n, f1 sum)
    };
    std::map<std::string, Accum> accums;

    for (const EvalResult& r : results) {
        Accum& a = accums[r.method];
        ++a.n;
        a.em_sum += r.em;
        a.f1_sum += r.f1;
        if (r.reasoning_type) {
            auto& [n, sum] = a.by_type[*r.reasoning_type];
            ++n;
            sum += r.f1;
        }
        if (r.reasoning_f1) {
            ++a.rn;
            a.r_sum += *r.reasoning_f1;
            if (*r.reasoning_f1 > 0.5) {
                ++a.high_n;
                a.high_f1_sum += r.f1;
            } else {
                ++a.low_n;
                a.low_f1_sum += r.f1;
            }
        }
        if (r.deviation) {
            auto& [n, sum] = a.dev[*r.deviation];
            ++n;
            sum += r.f1;
        }
    }

    for (const auto& [method, a] : accums) {
        MethodStats stats;
        stats.count = a.n;
        if (a.n) {
            stats.mean_em = a.em_sum / static_cast<double>(a.n);
            stats.mean_f1 = a.f1_sum / static_cast<double>(a.n);
        }
        for (const auto& [type, pair] : a.by_type) {
            stats.f1_by_type[type] = {pair.first,
                                      pair.second / static_cast<double>(pair.first)};
        }
        stats.reasoning_count = a.rn;
        if (a.rn) {
            stats.mean_reasoning_f1 = a.r_sum / static_cast<double>(a.rn);
            stats.high_proportion = static_cast<double>(a.high_n) / static_cast<double>(a.rn);
            stats.low_proportion = static_cast<double>(a.low_n) / static_cast<double>(a.rn);
            if (a.high_n) stats.f1_given_high = a.high_f1_sum / static_cast<double>(a.high_n);
            if (a.low_n) stats.f1_given_low = a.low_f1_sum / static_cast<double>(a.low_n);
        }
        std::size_t dev_total = 0;
        for (const auto& [_, pair] : a.dev) dev_total += pair.first;
        for (const auto& [d, pair] : a.dev) {
            DeviationBucket bucket;
            bucket.count = pair.first;
            bucket.proportion = static_cast<double>(pair.first) / static_cast<double>(dev_total);
            bucket.mean_f1 = pair.second / static_cast<double>(pair.first);
            stats.deviation_histogram[d] = bucket;
        }
        report.methods[method] = std::move(stats);
    }
    return report;
}

ordered_json report_to_json(const AggregateReport& report) {
    ordered_json j = ordered_json::object();
    for (const auto& [method, stats] : report.methods) {
        ordered_json m;
        m["count"] = stats.count;
        m["mean_em"] = stats.mean_em;
        m["mean_f1"] = stats.mean_f1;
        ordered_json by_type = ordered_json::object();
        for (const auto& [type, ts] : stats.f1_by_type) {
            by_type[type] = {{"count", ts.count}, {"mean_f1", ts.mean_f1}};
        }
        m["f1_by_type"] = std::move(by_type);
        m["reasoning"] = {{"count", stats.reasoning_count},
                          {"mean_reasoning_f1", stats.mean_reasoning_f1},
                          {"high_proportion", stats.high_proportion},
                          {"low_proportion", stats.low_proportion},
                          {"f1_given_high", stats.f1_given_high},
                          {"f1_given_low", stats.f1_given_low}};
        ordered_json dev = ordered_json::object();
        for (const auto& [d, bucket] : stats.deviation_histogram) {
            dev[std::to_string(d)] = {{"count", bucket.count},
                                      {"proportion", bucket.proportion},
                                      {"mean_f1", bucket.mean_f1}};
        }
        m["deviation_histogram"] = std::move(dev);
        j[method] = std::move(m);
    }
    return j;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string report_to_csv(const AggregateReport& report) {
    std::string out = "method,metric,value\n";
    for (const auto& [method, stats] : report.methods) {
        out += method + ",count," + std::to_string(stats.count) + "\n";
        out += method + ",mean_em," + fmt(stats.mean_em) + "\n";
        out += method + ",mean_f1," + fmt(stats.mean_f1) + "\n";
        for (const auto& [type, ts] : stats.f1_by_type) {
            out += method + ",mean_f1[" + type + "]," + fmt(ts.mean_f1) + "\n";
        }
        if (stats.reasoning_count) {
            out += method + ",mean_reasoning_f1," + fmt(stats.mean_reasoning_f1) + "\n";
            out += method + ",reasoning_high_proportion," + fmt(stats.high_proportion) + "\n";
            out += method + ",reasoning_low_proportion," + fmt(stats.low_proportion) + "\n";
            out += method + ",f1_given_high_reasoning," + fmt(stats.f1_given_high) + "\n";
            out += method + ",f1_given_low_reasoning," + fmt(stats.f1_given_low) + "\n";
        }
        for (const auto& [d, bucket] : stats.deviation_histogram) {
            std::string sign = d >= 0 ? "+" : "";
            out += method + ",deviation_proportion[" + sign + std::to_string(d) + "]," +
                   fmt(bucket.proportion) + "\n";
            out += method + ",deviation_mean_f1[" + sign + std::to_string(d) + "]," +
                   fmt(bucket.mean_f1) + "\n";
        }
    }
    return out;
}

std::string per_question_csv(const std::vector<EvalResult>& results) {
    std::string out = "question_id,method,em,f1,reasoning_f1,deviation,reasoning_type\n";
    for (const EvalResult& r : results) {
        out += r.question_id + "," + r.method + "," + std::to_string(r.em) + "," + fmt(r.f1);
        out += ",";
        if (r.reasoning_f1) out += fmt(*r.reasoning_f1);
        out += ",";
        if (r.deviation) out += std::to_string(*r.deviation);
        out += ",";
        if (r.reasoning_type) out += *r.reasoning_type;
        out += "\n";
    }
    return out;
}

}  // namespace oracle
