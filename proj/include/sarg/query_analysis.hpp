#pragma once

#include <array>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarg/assets.hpp"
#include "sarg/error.hpp"
#include "sarg/graph.hpp"
#include "sarg/providers.hpp"
#include "sarg/text.hpp"

namespace sarg {

enum class Direction { Forward, Backward, Bidirectional };

inline std::string_view direction_name(Direction d) {
    switch (d) {
        case Direction::Forward: return "forward";
        case Direction::Backward: return "backward";
        case Direction::Bidirectional: return "bidirectional";
    }
    return "bidirectional";
}

inline Direction parse_direction(std::string_view name) {
    if (name == "forward") return Direction::Forward;
    if (name == "backward") return Direction::Backward;
    if (name == "bidirectional") return Direction::Bidirectional;
    throw Error(ErrorCode::FormatError, "unknown direction label: " + std::string(name));
}

inline const std::unordered_set<std::string>& stopwords_en() {
    static const std::unordered_set<std::string> words = [] {
        std::unordered_set<std::string> s;
        for (const auto& w : split_lines(assets::kStopwordsEn))
            if (!w.empty()) s.insert(w);
        return s;
    }();
    return words;
}

struct QueryAnalysis {
    std::string query_text;
    EmbeddingVector query_embedding;
    std::vector<std::string> keyphrases;
    std::vector<NodeId> start_nodes; // ascending node ids
    Direction direction = Direction::Bidirectional;
};

// Distills the query into candidate keyphrases: all 1..3-grams over the
// stopword-filtered, punctuation-stripped tokens of the canonicalized query,
// ranked by cosine similarity to the full-query embedding. Ties break by
// earlier query position, then shorter phrase.
inline std::vector<std::string> extract_keyphrases(const std::string& query,
                                                   const Embedder& embedder, int top_m = 5) {
    if (trim(query).empty()) throw Error(ErrorCode::EmptyInput, "query is empty");
    if (top_m < 1) throw Error(ErrorCode::InvalidArgument, "top_m must be positive");

    std::string qnorm = canonical_key(query);
    std::vector<std::string> tokens;
    for (const auto& raw : split_whitespace(qnorm)) {
        std::string tok = strip_token_punct(raw);
        if (tok.empty() || stopwords_en().count(tok)) continue;
        tokens.push_back(std::move(tok));
    }
    if (tokens.empty()) return {trim(query)};

    struct Candidate {
        std::string phrase;
        int position;
        int length;
        double score;
    };
    std::vector<Candidate> candidates;
    std::unordered_set<std::string> seen;
    for (int n = 1; n <= 3; ++n) {
        for (int start = 0; start + n <= static_cast<int>(tokens.size()); ++start) {
            std::string phrase = tokens[static_cast<std::size_t>(start)];
            for (int i = 1; i < n; ++i)
                phrase += " " + tokens[static_cast<std::size_t>(start + i)];
            if (seen.insert(phrase).second)
                candidates.push_back({std::move(phrase), start, n, 0.0});
        }
    }

    EmbeddingVector query_emb = embedder.embed(qnorm);
    for (auto& c : candidates) c.score = cosine(embedder.embed(c.phrase), query_emb);

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.position != b.position) return a.position < b.position;
        if (a.length != b.length) return a.length < b.length;
        return a.phrase < b.phrase;
    });

    std::vector<std::string> out;
    for (const auto& c : candidates) {
        if (static_cast<int>(out.size()) >= top_m) break;
        out.push_back(c.phrase);
    }
    return out;
}

// Entry-node selection: nodes whose best cosine against any keyphrase
// strictly exceeds tau, capped at the max_start_nodes highest-scoring nodes.
inline std::vector<NodeId> match_start_nodes(const ReasoningGraph& g,
                                             const std::vector<std::string>& keyphrases,
                                             const Embedder& embedder, double tau,
                                             int max_start_nodes = 5) {
    if (keyphrases.empty()) throw Error(ErrorCode::EmptyInput, "keyphrases must be non-empty");
    if (tau <= 0.0 || tau > 1.0)
        throw Error(ErrorCode::InvalidArgument, "tau must be in (0, 1]");
    if (max_start_nodes < 1)
        throw Error(ErrorCode::InvalidArgument, "max_start_nodes must be positive");

    std::vector<EmbeddingVector> key_embs = embedder.embed_batch(keyphrases);
    std::vector<std::pair<double, NodeId>> matched;
    for (const auto& node : g.nodes) {
        double best = -1.0;
        for (const auto& ke : key_embs) best = std::max(best, cosine(ke, node.embedding));
        if (best > tau) matched.emplace_back(best, node.node_id);
    }
    std::sort(matched.begin(), matched.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (static_cast<int>(matched.size()) > max_start_nodes) matched.resize(max_start_nodes);

    std::vector<NodeId> out;
    out.reserve(matched.size());
    for (const auto& [score, id] : matched) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

class DirectionClassifier {
public:
    virtual ~DirectionClassifier() = default;
    virtual Direction classify(const std::string& query) const = 0;
};

// Cue-phrase baseline. Matching is case-insensitive on the normalized query;
// the first matching rule in the fixed priority list (Backward, Forward,
// Bidirectional) wins, and no cue defaults to Bidirectional.
class RuleDirectionClassifier final : public DirectionClassifier {
public:
    Direction classify(const std::string& query) const override {
        if (trim(query).empty()) throw Error(ErrorCode::EmptyInput, "query is empty");
        std::string q = collapse_whitespace(nfc_lower(query));
        static constexpr std::array<std::string_view, 5> kBackward = {
            "why", "what caused", "reason for", "due to what", "origin of"};
        static constexpr std::array<std::string_view, 5> kForward = {
            "what happens if", "effects of", "impact of", "consequences", "lead to what"};
        static constexpr std::array<std::string_view, 4> kBidirectional = {
            "relationship between", "link between", "related to", "correlation"};
        for (std::string_view cue : kBackward)
            if (contains_ci(q, cue)) return Direction::Backward;
        for (std::string_view cue : kForward)
            if (contains_ci(q, cue)) return Direction::Forward;
        for (std::string_view cue : kBidirectional)
            if (contains_ci(q, cue)) return Direction::Bidirectional;
        return Direction::Bidirectional;
    }
};

// Classifies with the given classifier, falling back to the rule baseline
// when a remote adapter reports ProviderUnavailable.
inline Direction classify_direction(const std::string& query,
                                    const DirectionClassifier& classifier) {
    if (trim(query).empty()) throw Error(ErrorCode::EmptyInput, "query is empty");
    try {
        return classifier.classify(query);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ProviderUnavailable)
            return RuleDirectionClassifier{}.classify(query);
        throw;
    }
}

struct LabeledQuery {
    std::string text;
    Direction label = Direction::Bidirectional;
};

struct PerClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int support = 0;
};

struct ClassifierMetrics {
    double accuracy = 0.0;
    std::array<PerClassMetrics, 3> per_class{}; // indexed Forward, Backward, Bidirectional
    std::array<std::array<int, 3>, 3> confusion{}; // [gold][pred]
    int total = 0;

    nlohmann::ordered_json to_json() const {
        static constexpr std::array<std::string_view, 3> kNames = {"forward", "backward",
                                                                   "bidirectional"};
        nlohmann::ordered_json j;
        j["accuracy"] = accuracy;
        j["total"] = total;
        for (std::size_t i = 0; i < 3; ++i) {
            j["per_class"][std::string(kNames[i])] = {{"precision", per_class[i].precision},
                                                      {"recall", per_class[i].recall},
                                                      {"f1", per_class[i].f1},
                                                      {"support", per_class[i].support}};
        }
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : confusion)
            rows.push_back(nlohmann::ordered_json::array({row[0], row[1], row[2]}));
        j["confusion"] = rows;
        return j;
    }
};

inline ClassifierMetrics evaluate_classifier(const DirectionClassifier& classifier,
                                             const std::vector<LabeledQuery>& labeled) {
    if (labeled.empty()) throw Error(ErrorCode::EmptyInput, "labeled set is empty");
    ClassifierMetrics m;
    m.total = static_cast<int>(labeled.size());
    int correct = 0;
    for (const auto& item : labeled) {
        int gold = static_cast<int>(item.label);
        int pred = static_cast<int>(classifier.classify(item.text));
        ++m.confusion[static_cast<std::size_t>(gold)][static_cast<std::size_t>(pred)];
        if (gold == pred) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
    for (int c = 0; c < 3; ++c) {
        int tp = m.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        int gold_total = 0, pred_total = 0;
        for (int o = 0; o < 3; ++o) {
            gold_total += m.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)];
            pred_total += m.confusion[static_cast<std::size_t>(o)][static_cast<std::size_t>(c)];
        }
        auto& pc = m.per_class[static_cast<std::size_t>(c)];
        pc.support = gold_total;
        pc.precision = pred_total == 0 ? 0.0 : static_cast<double>(tp) / pred_total;
        pc.recall = gold_total == 0 ? 0.0 : static_cast<double>(tp) / gold_total;
        pc.f1 = (pc.precision + pc.recall) == 0.0
                    ? 0.0
                    : 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall);
    }
    return m;
}

// Loads the JSON-lines labeled fixture: {"text": ..., "label":
// "forward|backward|bidirectional"} per line.
inline std::vector<LabeledQuery> load_labeled_queries(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open labeled fixture: " + path);
    std::vector<LabeledQuery> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            out.push_back({j.at("text").get<std::string>(),
                           parse_direction(j.at("label").get<std::string>())});
        } catch (const Error&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::FormatError,
                        "bad labeled query at line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace sarg
