#pragma once

#include <array>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarg/assets.hpp"
#include "sarg/error.hpp"
#include "sarg/providers.hpp"
#include "sarg/util.hpp"

namespace sarg {

enum class Schema { Reasoning, Spo };

inline std::string_view schema_name(Schema s) {
    return s == Schema::Reasoning ? "reasoning" : "spo";
}

struct Document {
    std::string doc_id;
    std::string text;
    std::map<std::string, std::string> source_meta;

    void validate() const {
        if (doc_id.empty()) throw Error(ErrorCode::InvalidArgument, "document has empty doc_id");
        if (trim(text).empty())
            throw Error(ErrorCode::InvalidArgument, "document " + doc_id + " has empty text");
    }
};

struct Triple {
    std::string cause;
    std::string relation;
    std::string effect;
    std::string doc_id;
    int line_index = 0;

    std::string to_line() const { return cause + " | " + relation + " | " + effect; }

    bool operator==(const Triple&) const = default;
};

struct ParseSkip {
    enum class Reason { Arity, Pronoun };
    int line_index = 0;
    Reason reason = Reason::Arity;
    std::string content;
};

inline std::string_view skip_reason_name(ParseSkip::Reason r) {
    return r == ParseSkip::Reason::Arity ? "arity" : "pronoun";
}

struct ParseReport {
    int non_blank_lines = 0;
    int retained = 0;
    std::vector<ParseSkip> skips;

    int arity_skips() const {
        int n = 0;
        for (const auto& s : skips)
            if (s.reason == ParseSkip::Reason::Arity) ++n;
        return n;
    }

    int pronoun_skips() const {
        int n = 0;
        for (const auto& s : skips)
            if (s.reason == ParseSkip::Reason::Pronoun) ++n;
        return n;
    }

    void merge(const ParseReport& other) {
        non_blank_lines += other.non_blank_lines;
        retained += other.retained;
        skips.insert(skips.end(), other.skips.begin(), other.skips.end());
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["non_blank_lines"] = non_blank_lines;
        j["retained"] = retained;
        j["skipped"] = static_cast<int>(skips.size());
        j["arity_skips"] = arity_skips();
        j["pronoun_skips"] = pronoun_skips();
        auto arr = nlohmann::ordered_json::array();
        for (const auto& s : skips) {
            arr.push_back({{"line", s.line_index},
                           {"reason", std::string(skip_reason_name(s.reason))},
                           {"content", s.content}});
        }
        j["skips"] = arr;
        return j;
    }
};

struct ExtractionResult {
    std::vector<Triple> triples;
    ParseReport report;
};

// Renders the few-shot extraction prompt for a document by filling the
// template's single {text} slot. Byte-stable for a given document.
inline std::string render_extraction_prompt(const Document& doc, Schema schema = Schema::Reasoning) {
    doc.validate();
    std::string_view tpl = schema == Schema::Reasoning ? assets::kReasoningExtractionPromptTemplate
                                                       : assets::kSpoExtractionPromptTemplate;
    constexpr std::string_view kSlot = "{text}";
    std::size_t pos = tpl.find(kSlot);
    std::string out;
    out.reserve(tpl.size() + doc.text.size());
    out.append(tpl.substr(0, pos));
    out.append(doc.text);
    out.append(tpl.substr(pos + kSlot.size()));
    return out;
}

namespace detail {

inline std::vector<std::string> split_on(std::string_view s, std::string_view sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(s.substr(start));
            return parts;
        }
        parts.emplace_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
}

// Strips leading list bullets ("- ", "* ") and numbering like "1. " / "2) "
// to a fixed point. Numbering must be followed by whitespace so decimal
// values such as "2.3" survive; looping keeps retained fields free of any
// leading bullet pattern, which makes re-parsing serialized triples stable.
inline std::string strip_bullet(std::string_view s) {
    std::string cur(s);
    while (true) {
        std::string_view v = cur;
        if (v.size() >= 2 && (v[0] == '-' || v[0] == '*') && is_ascii_space(v[1])) {
            cur = trim(v.substr(2));
            continue;
        }
        std::size_t i = 0;
        while (i < v.size() && v[i] >= '0' && v[i] <= '9') ++i;
        if (i > 0 && i + 1 < v.size() && (v[i] == '.' || v[i] == ')') &&
            is_ascii_space(v[i + 1])) {
            cur = trim(v.substr(i + 1));
            continue;
        }
        return cur;
    }
}

inline bool is_banned_pronoun(std::string_view field) {
    static constexpr std::array<std::string_view, 6> kBanned = {"he",   "she",  "it",
                                                                "this", "that", "they"};
    std::string lowered = ascii_lower(trim(field));
    for (std::string_view p : kBanned)
        if (lowered == p) return true;
    return false;
}

inline bool try_split_fields(const std::string& line, std::array<std::string, 3>& out) {
    for (std::string_view sep : {std::string_view(" | "), std::string_view("|")}) {
        std::vector<std::string> parts = split_on(line, sep);
        if (parts.size() != 3) continue;
        bool ok = true;
        for (std::size_t i = 0; i < 3; ++i) {
            out[i] = trim(parts[i]);
            if (out[i].empty()) ok = false;
        }
        if (ok) return true;
    }
    return false;
}

} // namespace detail

// Total parser for the pipe-delimited triple format. One triple per line that
// splits into exactly three non-empty fields; malformed and pronoun-violating
// lines are skipped and counted. retained + skipped == non-blank lines.
inline ExtractionResult parse_triples(std::string_view raw, const std::string& doc_id) {
    ExtractionResult result;
    std::vector<std::string> lines = split_lines(raw);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string s = trim(lines[i]);
        if (s.empty()) continue;
        ++result.report.non_blank_lines;
        s = detail::strip_bullet(s);

        std::array<std::string, 3> fields;
        if (!detail::try_split_fields(s, fields)) {
            result.report.skips.push_back(
                {static_cast<int>(i), ParseSkip::Reason::Arity, std::string(lines[i])});
            continue;
        }
        if (detail::is_banned_pronoun(fields[0]) || detail::is_banned_pronoun(fields[2])) {
            result.report.skips.push_back(
                {static_cast<int>(i), ParseSkip::Reason::Pronoun, std::string(lines[i])});
            continue;
        }
        result.triples.push_back(
            {fields[0], fields[1], fields[2], doc_id, static_cast<int>(i)});
        ++result.report.retained;
    }
    return result;
}

// Loads a JSON-lines documents file: {"doc_id": ..., "text": ...} per line.
inline std::vector<Document> load_documents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open documents file: " + path);
    std::vector<Document> docs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            Document d{j.at("doc_id").get<std::string>(), j.at("text").get<std::string>(), {}};
            d.validate();
            docs.push_back(std::move(d));
        } catch (const Error&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::FormatError,
                        "bad document at line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return docs;
}

// One LLM call per document; the result equals
// parse_triples(generate(render_extraction_prompt(doc)), doc.doc_id).
inline ExtractionResult extract_triples(const Document& doc, const Generator& llm,
                                        Schema schema = Schema::Reasoning) {
    GenerationRequest req;
    req.user_text = render_extraction_prompt(doc, schema);
    req.temperature = 0.0;
    req.max_tokens = 2048;
    std::string raw = llm.generate(req);
    return parse_triples(raw, doc.doc_id);
}

} // namespace sarg
