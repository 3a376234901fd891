#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace oracle::detail {

// `Name(arg, arg)` occurrence in free-form text.
struct TermGroup {
    std::string name;
    std::vector<std::string> args;
    std::size_t pos = 0;
    std::size_t end = 0;  // one past the closing parenthesis
};

// Tolerant scanner for model output sections: collects identifier(...) groups
// and skips everything else. Groups with unbalanced parentheses are dropped.
inline std::vector<TermGroup> scan_term_groups(std::string_view text) {
    std::vector<TermGroup> groups;
    std::size_t i = 0;
    auto is_start = [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    };
    auto is_part = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    while (i < text.size()) {
        if (!is_start(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && is_part(text[i])) ++i;
        std::size_t after_ident = i;
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i >= text.size() || text[i] != '(') {
            i = after_ident;
            continue;
        }
        ++i;  // consume '('
        TermGroup g;
        g.name = std::string(text.substr(start, after_ident - start));
        g.pos = start;
        std::string current;
        bool closed = false;
        while (i < text.size()) {
            char c = text[i];
            if (c == ')') {
                ++i;
                closed = true;
                break;
            }
            if (c == '(' || c == '\n') break;  // malformed group, bail out
            if (c == ',') {
                g.args.push_back(current);
                current.clear();
                ++i;
                continue;
            }
            current += c;
            ++i;
        }
        if (!closed) continue;
        g.args.push_back(current);
        g.end = i;
        // Trim arguments, drop empties.
        std::vector<std::string> cleaned;
        for (std::string& a : g.args) {
            std::size_t b = a.find_first_not_of(" \t\r");
            std::size_t e = a.find_last_not_of(" \t\r");
            if (b == std::string::npos) continue;
            cleaned.push_back(a.substr(b, e - b + 1));
        }
        g.args = std::move(cleaned);
        if (!g.args.empty()) groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace oracle::detail
