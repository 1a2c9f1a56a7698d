#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarg/error.hpp"
#include "sarg/graph.hpp"
#include "sarg/providers.hpp"
#include "sarg/query_analysis.hpp"

namespace sarg {

// One traversed step: the graph edge plus whether its direction agrees with
// the chain's position order (false for predecessor moves).
struct ChainEdge {
    int edge_id = 0;
    bool along = true;

    bool operator==(const ChainEdge&) const = default;
};

struct ReasoningChain {
    std::vector<NodeId> node_ids;   // traversal order
    std::vector<ChainEdge> edge_refs; // size node_ids.size() - 1
    double score = 0.0;             // mean query similarity over nodes 2..L
    Direction direction = Direction::Forward;

    std::size_t length() const { return node_ids.size(); }

    bool contains(NodeId id) const {
        return std::find(node_ids.begin(), node_ids.end(), id) != node_ids.end();
    }
};

struct TraversalConfig {
    int beam_width = 3;
    int max_depth = 4;
    Direction direction = Direction::Bidirectional;
    int top_k_chains = 3;

    void validate() const {
        if (beam_width < 1) throw Error(ErrorCode::InvalidArgument, "beam_width must be >= 1");
        if (max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 1");
        if (top_k_chains < 1) throw Error(ErrorCode::InvalidArgument, "top_k_chains must be >= 1");
    }
};

struct TraversalReport {
    std::int64_t nodes_expanded = 0;
    std::int64_t chains_emitted = 0;
    std::int64_t chains_after_dedup = 0;
    double wall_time_s = 0.0;

    nlohmann::ordered_json to_json() const {
        return {{"nodes_expanded", nodes_expanded},
                {"chains_emitted", chains_emitted},
                {"chains_after_dedup", chains_after_dedup},
                {"wall_time_s", wall_time_s}};
    }
};

// Per-depth frontier dump for the trace mode.
struct FrontierSnapshot {
    int depth = 0;
    std::vector<std::pair<std::vector<NodeId>, double>> chains;
};

// Running-average score recurrence. t is the 1-based index of the node being
// appended; the anchor node v1 is excluded, so the result is the mean of the
// per-node similarities over nodes 2..t.
inline double score_update(double prev_score, int t, double sim) {
    if (t < 2) throw Error(ErrorCode::InvalidArgument, "score_update requires t >= 2");
    return (prev_score * (t - 2) + sim) / (t - 1);
}

namespace detail {

inline bool chain_order_less(const ReasoningChain& a, const ReasoningChain& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::lexicographical_compare(a.node_ids.begin(), a.node_ids.end(), b.node_ids.begin(),
                                        b.node_ids.end());
}

// Legal moves from the chain tail, deduplicated by target node. Forward
// orientation wins over backward when both reach the same target, then the
// smallest edge id.
inline std::vector<std::pair<NodeId, ChainEdge>> legal_moves(const ReasoningGraph& g,
                                                             const ReasoningChain& chain,
                                                             Direction direction) {
    std::vector<std::pair<NodeId, ChainEdge>> moves;
    std::unordered_set<NodeId> seen;
    NodeId tail = chain.node_ids.back();
    auto consider = [&](NodeId target, int edge_id, bool along) {
        if (chain.contains(target) || !seen.insert(target).second) return;
        moves.emplace_back(target, ChainEdge{edge_id, along});
    };
    if (direction == Direction::Forward || direction == Direction::Bidirectional)
        for (int eid : g.forward[static_cast<std::size_t>(tail)])
            consider(g.edges[static_cast<std::size_t>(eid)].to, eid, true);
    if (direction == Direction::Backward || direction == Direction::Bidirectional)
        for (int eid : g.backward[static_cast<std::size_t>(tail)])
            consider(g.edges[static_cast<std::size_t>(eid)].from, eid, false);
    return moves;
}

} // namespace detail

// Direction-aware semantic beam search. The frontier starts with one
// length-1 chain per start node (score 0); each depth expands every frontier
// chain along direction-consistent edges, skipping nodes already on the
// chain, scores extensions with the running average, and prunes the pooled
// extension set to the global top-beta (ties: lexicographically smaller
// node-id sequence). Dead-end chains are emitted complete; the depth cap
// emits all surviving frontier chains; length-1 chains are discarded.
inline std::pair<std::vector<ReasoningChain>, TraversalReport> beam_search(
    const ReasoningGraph& g, const std::vector<NodeId>& starts, const EmbeddingVector& query_emb,
    const TraversalConfig& cfg, std::vector<FrontierSnapshot>* trace = nullptr) {
    cfg.validate();
    if (starts.empty()) throw Error(ErrorCode::EmptyStartSet, "beam search requires start nodes");

    std::vector<NodeId> start_ids = starts;
    std::sort(start_ids.begin(), start_ids.end());
    start_ids.erase(std::unique(start_ids.begin(), start_ids.end()), start_ids.end());

    TraversalReport report;
    std::vector<ReasoningChain> frontier;
    for (NodeId s : start_ids) {
        g.node(s); // bounds check
        ReasoningChain c;
        c.node_ids = {s};
        c.score = 0.0;
        c.direction = cfg.direction;
        frontier.push_back(std::move(c));
    }
    report.nodes_expanded = static_cast<std::int64_t>(frontier.size());

    auto snapshot = [&](int depth) {
        if (!trace) return;
        FrontierSnapshot snap;
        snap.depth = depth;
        for (const auto& c : frontier) snap.chains.emplace_back(c.node_ids, c.score);
        trace->push_back(std::move(snap));
    };
    snapshot(0);

    std::vector<ReasoningChain> emitted;
    for (int depth = 1; depth <= cfg.max_depth && !frontier.empty(); ++depth) {
        std::vector<ReasoningChain> extensions;
        for (const auto& chain : frontier) {
            auto moves = detail::legal_moves(g, chain, cfg.direction);
            if (moves.empty()) {
                emitted.push_back(chain); // dead end
                continue;
            }
            for (const auto& [target, edge] : moves) {
                ++report.nodes_expanded;
                double sim = cosine(query_emb, g.node(target).embedding);
                ReasoningChain next = chain;
                next.node_ids.push_back(target);
                next.edge_refs.push_back(edge);
                next.score = score_update(chain.score, static_cast<int>(next.node_ids.size()), sim);
                extensions.push_back(std::move(next));
            }
        }
        std::sort(extensions.begin(), extensions.end(), detail::chain_order_less);
        if (static_cast<int>(extensions.size()) > cfg.beam_width)
            extensions.resize(static_cast<std::size_t>(cfg.beam_width));
        frontier = std::move(extensions);
        snapshot(depth);
    }
    emitted.insert(emitted.end(), frontier.begin(), frontier.end());

    std::vector<ReasoningChain> result;
    for (auto& c : emitted)
        if (c.length() >= 2) result.push_back(std::move(c));
    report.chains_emitted = static_cast<std::int64_t>(result.size());
    return {std::move(result), report};
}

namespace detail {

inline bool is_contiguous_subsequence(const std::vector<NodeId>& needle,
                                      const std::vector<NodeId>& haystack) {
    if (needle.size() > haystack.size()) return false;
    for (std::size_t off = 0; off + needle.size() <= haystack.size(); ++off) {
        bool match = true;
        for (std::size_t i = 0; i < needle.size(); ++i) {
            if (haystack[off + i] != needle[i]) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

} // namespace detail

// Collapses exact duplicates and removes chains that are contiguous
// sub-paths of a retained chain with a score at least as high. Output is
// ordered by score desc, then length desc, then node-id sequence.
inline std::vector<ReasoningChain> dedup_chains(std::vector<ReasoningChain> chains) {
    std::sort(chains.begin(), chains.end(), [](const ReasoningChain& a, const ReasoningChain& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.length() != b.length()) return a.length() > b.length();
        return std::lexicographical_compare(a.node_ids.begin(), a.node_ids.end(),
                                            b.node_ids.begin(), b.node_ids.end());
    });
    std::vector<ReasoningChain> retained;
    for (auto& c : chains) {
        bool subsumed = false;
        for (const auto& r : retained) {
            if (detail::is_contiguous_subsequence(c.node_ids, r.node_ids)) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) retained.push_back(std::move(c));
    }
    return retained;
}

// First k chains of the dedup ordering.
inline std::vector<ReasoningChain> select_top_chains(const std::vector<ReasoningChain>& chains,
                                                     int k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
    std::vector<ReasoningChain> out(chains.begin(),
                                    chains.begin() + std::min<std::size_t>(chains.size(),
                                                                           static_cast<std::size_t>(k)));
    return out;
}

} // namespace sarg
