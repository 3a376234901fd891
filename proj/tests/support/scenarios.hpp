#pragma once

#include <string>
#include <vector>

#include "oracle/datasets.hpp"
#include "oracle/llm.hpp"

namespace oracle::scenarios {

// ------------------------------------------------------------------
// Worked example: monarch -> country -> government chain.
// ------------------------------------------------------------------

inline QARecord monarch_record() {
    QARecord r;
    r.question_id = "monarch1";
    r.question =
        "What government followed the monarch who retranslated the Reflections into French "
        "from the country that allied with America after the Battle of Saratoga?";
    r.gold_answer = "French First Republic";
    r.context = {
        {"p0", "The Reflections",
         "The Reflections was retranslated into French by the monarch Louis XVI.", true},
        {"p1", "Louis XVI", "Louis XVI was the ruler of France until 1792.", true},
        {"p2", "Franco-American alliance",
         "France allied with America after the Battle of Saratoga was finished.", true},
        {"p3", "French First Republic",
         "The French First Republic was the government that followed Louis XVI in France.",
         true},
        {"p4", "Danube", "The Danube flows through Vienna and Budapest.", false},
    };
    return r;
}

inline std::string monarch_onto_output() {
    return "1. Problem Type Identification: This is a 3p path query.\n"
           "2. Classes and Entities:\n"
           "Country(America, c), Book(The Reflections), Monarch(m), Government(ans), "
           "Battle(Saratoga)\n"
           "3. Relations:\n"
           "retranslated, rulerOf, followed, finished, alliedWith\n";
}

inline std::string monarch_fol_output() {
    return "Type Constraints: type(m, Monarch), type(c, Country), type(ans, Government)\n"
           "retranslated(m, The Reflections) ∧ rulerOf(m, c) ∧ "
           "alliedWith(c, America) ∧ finished(America, Saratoga) ∧ "
           "followed(ans, c)\n";
}

inline std::string monarch_decomp_output() {
    return "1. Which monarch retranslated The Reflections into French? (variable: m)\n"
           "2. Which country was #1 the ruler of? (variable: c)\n"
           "3. What government followed #1 in #2? (variable: ans)\n";
}

inline std::vector<std::string> monarch_subanswers() {
    return {"<answer>Louis XVI</answer>", "<answer>France</answer>",
            "<answer>French First Republic</answer>"};
}

inline void script_monarch(MockBackend& mock) {
    mock.script_tag("onto", {monarch_onto_output()});
    mock.script_tag("fol", {monarch_fol_output()});
    mock.script_tag("decomp", {monarch_decomp_output()});
    mock.script_tag("subsolve", monarch_subanswers());
}

// ------------------------------------------------------------------
// Synthetic two-hop world: book -> author -> birth city. Deterministic
// per-index stage outputs; useful for batch runs of any size.
// ------------------------------------------------------------------

inline std::string book_title(int i) { return "The Chronicle " + std::to_string(i); }
inline std::string author_name(int i) { return "Author " + std::to_string(i); }
inline std::string city_name(int i) { return "City " + std::to_string(i); }

inline QARecord synthetic_record(int i) {
    QARecord r;
    r.question_id = "syn" + std::to_string(i);
    r.question = "In which city was the author of " + book_title(i) + " born?";
    r.gold_answer = city_name(i);
    r.context = {
        {"p0", book_title(i), book_title(i) + " was written by " + author_name(i) + ".",
         true},
        {"p1", author_name(i), author_name(i) + " was born in " + city_name(i) + ".", true},
        {"p2", "Moon", "The moon is covered in craters and dust.", false},
    };
    return r;
}

inline std::string synthetic_onto_output(int i) {
    return "1. Problem Type Identification: 2p path query\n"
           "2. Classes and Entities:\n"
           "Book(" + book_title(i) + "), Author(m), City(ans)\n"
           "3. Relations:\n"
           "wrote, bornIn\n";
}

inline std::string synthetic_fol_output(int i) {
    return "Type Constraints: type(m, Author), type(ans, City)\n"
           "wrote(m, " + book_title(i) + ") ∧ bornIn(m, ans)\n";
}

inline std::string synthetic_decomp_output(int i) {
    return "1. Which author wrote " + book_title(i) + "? (variable: m)\n"
           "2. In which city was #1 born? (variable: ans)\n";
}

// Scripts stage outputs for records 0..n-1 in order. Consume with
// parallelism 1 so the tag queues line up with the records.
inline void script_synthetic(MockBackend& mock, int n, bool with_onto = true,
                             bool with_fol = true) {
    std::vector<std::string> onto, fol, decomp, subsolve;
    for (int i = 0; i < n; ++i) {
        onto.push_back(synthetic_onto_output(i));
        fol.push_back(synthetic_fol_output(i));
        decomp.push_back(synthetic_decomp_output(i));
        subsolve.push_back("<answer>" + author_name(i) + "</answer>");
        subsolve.push_back("<answer>" + city_name(i) + "</answer>");
    }
    if (with_onto) mock.script_tag("onto", onto);
    if (with_fol) mock.script_tag("fol", fol);
    mock.script_tag("decomp", decomp);
    mock.script_tag("subsolve", subsolve);
}

inline std::vector<QARecord> synthetic_records(int n) {
    std::vector<QARecord> out;
    for (int i = 0; i < n; ++i) out.push_back(synthetic_record(i));
    return out;
}

}  // namespace oracle::scenarios
