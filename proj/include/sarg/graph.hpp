#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarg/error.hpp"
#include "sarg/extraction.hpp"
#include "sarg/providers.hpp"
#include "sarg/text.hpp"

namespace sarg {

using NodeId = int;

struct ConceptNode {
    NodeId node_id = 0;
    std::string display_label; // first-seen surface form
    std::string canonical;     // canonical_key(display_label)
    EmbeddingVector embedding; // embedding of display_label, unit norm
    std::vector<std::string> merged_labels;

    bool operator==(const ConceptNode&) const = default;
};

struct Provenance {
    std::string doc_id;
    int line_index = 0;

    bool operator==(const Provenance&) const = default;
};

struct ReasoningEdge {
    int edge_id = 0;
    NodeId from = 0;
    NodeId to = 0;
    std::string relation; // first-seen surface form; identity uses lowercase
    std::vector<Provenance> provenance;

    bool operator==(const ReasoningEdge&) const = default;
};

struct MergeEvent {
    std::string label_a;
    std::string label_b;
    double cos = 0.0;
};

struct GraphBuildInfo {
    int input_triples = 0;
    int self_loops_dropped = 0;
    int duplicate_edges_merged = 0;
    int merge_classes = 0;
    std::vector<MergeEvent> merge_events;
};

struct GraphStats {
    int node_count = 0;
    int edge_count = 0;
    int self_loops_dropped = 0;
    int merge_classes = 0;
    double density = 0.0;

    nlohmann::ordered_json to_json() const {
        return {{"nodes", node_count},
                {"edges", edge_count},
                {"self_loops_dropped", self_loops_dropped},
                {"merge_classes", merge_classes},
                {"density", density}};
    }
};

// Immutable after construction; traversal relies on concurrent read safety.
struct ReasoningGraph {
    std::vector<ConceptNode> nodes;
    std::vector<ReasoningEdge> edges;
    std::vector<std::vector<int>> forward;  // node id -> outgoing edge ids
    std::vector<std::vector<int>> backward; // node id -> incoming edge ids
    GraphBuildInfo build_info;

    const ConceptNode& node(NodeId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes.size())
            throw Error(ErrorCode::DanglingNode, "node id " + std::to_string(id) + " not in graph");
        return nodes[static_cast<std::size_t>(id)];
    }

    void rebuild_indexes() {
        forward.assign(nodes.size(), {});
        backward.assign(nodes.size(), {});
        for (const auto& e : edges) {
            if (e.from < 0 || static_cast<std::size_t>(e.from) >= nodes.size() || e.to < 0 ||
                static_cast<std::size_t>(e.to) >= nodes.size())
                throw Error(ErrorCode::DanglingNode, "edge endpoint out of range");
            forward[static_cast<std::size_t>(e.from)].push_back(e.edge_id);
            backward[static_cast<std::size_t>(e.to)].push_back(e.edge_id);
        }
    }
};

inline bool structurally_equal(const ReasoningGraph& a, const ReasoningGraph& b) {
    return a.nodes == b.nodes && a.edges == b.edges;
}

namespace detail {

// Union-find with the smallest member id as class representative.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns true if the two were in different classes.
    bool unite(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if (ra > rb) std::swap(ra, rb);
        parent_[rb] = ra;
        return true;
    }

private:
    std::vector<int> parent_;
};

} // namespace detail

// Aggregates triples into the query-local reasoning graph: one node per
// distinct canonical key, then an embedding-similarity merge pass (union-find,
// earliest-created node represents the class), edges rewritten onto
// representatives with provenance-merging dedup. Self-loops are dropped.
inline ReasoningGraph build_graph(const std::vector<Triple>& triples, const Embedder& embedder,
                                  double merge_threshold = 0.90) {
    if (merge_threshold < 0.0 || merge_threshold > 1.0)
        throw Error(ErrorCode::InvalidArgument, "merge_threshold must be in [0, 1]");

    struct Provisional {
        std::string display;
        std::string key;
        std::set<std::string> alt_labels;
    };
    std::vector<Provisional> prov;
    std::unordered_map<std::string, int> by_key;

    auto intern = [&](const std::string& surface) {
        std::string display = trim(surface);
        std::string key = canonical_key(display);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            by_key.emplace(key, static_cast<int>(prov.size()));
            prov.push_back({display, key, {}});
            return static_cast<int>(prov.size()) - 1;
        }
        Provisional& p = prov[static_cast<std::size_t>(it->second)];
        if (display != p.display) p.alt_labels.insert(display);
        return it->second;
    };

    std::vector<std::pair<int, int>> triple_endpoints;
    triple_endpoints.reserve(triples.size());
    for (const auto& t : triples) {
        int u = intern(t.cause); // cause interned first: creation order is part of the contract
        int v = intern(t.effect);
        triple_endpoints.emplace_back(u, v);
    }

    std::vector<std::string> labels;
    labels.reserve(prov.size());
    for (const auto& p : prov) labels.push_back(p.display);

    std::vector<EmbeddingVector> embeddings;
    try {
        embeddings = embedder.embed_batch(labels);
    } catch (const Error& e) {
        throw Error(ErrorCode::EmbeddingFailure, std::string("graph build aborted: ") + e.what());
    }

    ReasoningGraph g;
    g.build_info.input_triples = static_cast<int>(triples.size());

    detail::UnionFind uf(prov.size());
    for (std::size_t i = 0; i < prov.size(); ++i) {
        for (std::size_t j = i + 1; j < prov.size(); ++j) {
            double c = cosine(embeddings[i], embeddings[j]);
            if (c >= merge_threshold && uf.unite(static_cast<int>(i), static_cast<int>(j)))
                g.build_info.merge_events.push_back({prov[i].display, prov[j].display, c});
        }
    }

    // compact representatives to dense ids, earliest creation order first
    std::vector<int> rep_to_final(prov.size(), -1);
    std::vector<std::set<std::string>> merged_sets;
    for (std::size_t i = 0; i < prov.size(); ++i) {
        int root = uf.find(static_cast<int>(i));
        if (rep_to_final[static_cast<std::size_t>(root)] == -1 &&
            root == static_cast<int>(i)) {
            rep_to_final[i] = static_cast<int>(g.nodes.size());
            ConceptNode node;
            node.node_id = rep_to_final[i];
            node.display_label = prov[i].display;
            node.canonical = prov[i].key;
            node.embedding = embeddings[i];
            g.nodes.push_back(std::move(node));
            merged_sets.push_back(prov[i].alt_labels);
        }
    }
    std::vector<bool> class_has_merge(g.nodes.size(), false);
    for (std::size_t i = 0; i < prov.size(); ++i) {
        int root = uf.find(static_cast<int>(i));
        int final_id = rep_to_final[static_cast<std::size_t>(root)];
        if (static_cast<int>(i) != root) {
            class_has_merge[static_cast<std::size_t>(final_id)] = true;
            merged_sets[static_cast<std::size_t>(final_id)].insert(prov[i].display);
            merged_sets[static_cast<std::size_t>(final_id)].insert(prov[i].alt_labels.begin(),
                                                                   prov[i].alt_labels.end());
        }
    }
    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
        merged_sets[n].erase(g.nodes[n].display_label);
        g.nodes[n].merged_labels.assign(merged_sets[n].begin(), merged_sets[n].end());
    }
    for (bool merged : class_has_merge)
        if (merged) ++g.build_info.merge_classes;

    auto final_id = [&](int provisional) {
        return rep_to_final[static_cast<std::size_t>(uf.find(provisional))];
    };

    std::map<std::tuple<int, std::string, int>, int> edge_index;
    for (std::size_t ti = 0; ti < triples.size(); ++ti) {
        int u = final_id(triple_endpoints[ti].first);
        int v = final_id(triple_endpoints[ti].second);
        if (u == v) {
            ++g.build_info.self_loops_dropped;
            continue;
        }
        std::string relation = trim(triples[ti].relation);
        std::tuple<int, std::string, int> key{u, ascii_lower(relation), v};
        Provenance where{triples[ti].doc_id, triples[ti].line_index};
        auto it = edge_index.find(key);
        if (it == edge_index.end()) {
            ReasoningEdge e;
            e.edge_id = static_cast<int>(g.edges.size());
            e.from = u;
            e.to = v;
            e.relation = relation;
            e.provenance.push_back(std::move(where));
            edge_index.emplace(std::move(key), e.edge_id);
            g.edges.push_back(std::move(e));
        } else {
            g.edges[static_cast<std::size_t>(it->second)].provenance.push_back(std::move(where));
            ++g.build_info.duplicate_edges_merged;
        }
    }

    g.rebuild_indexes();
    return g;
}

inline GraphStats graph_stats(const ReasoningGraph& g) {
    GraphStats s;
    s.node_count = static_cast<int>(g.nodes.size());
    s.edge_count = static_cast<int>(g.edges.size());
    s.self_loops_dropped = g.build_info.self_loops_dropped;
    s.merge_classes = g.build_info.merge_classes;
    s.density = s.node_count == 0 ? 0.0
                                  : static_cast<double>(s.edge_count) / static_cast<double>(s.node_count);
    return s;
}

inline constexpr int kGraphFormatVersion = 1;

inline nlohmann::ordered_json graph_to_json(const ReasoningGraph& g) {
    nlohmann::ordered_json j;
    j["version"] = kGraphFormatVersion;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes) {
        nlohmann::ordered_json jn;
        jn["id"] = n.node_id;
        jn["label"] = n.display_label;
        jn["key"] = n.canonical;
        jn["merged"] = n.merged_labels;
        jn["embedding"] = n.embedding;
        nodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(nodes);
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : g.edges) {
        nlohmann::ordered_json je;
        je["from"] = e.from;
        je["to"] = e.to;
        je["relation"] = e.relation;
        auto prov = nlohmann::ordered_json::array();
        for (const auto& p : e.provenance)
            prov.push_back(nlohmann::ordered_json::array({p.doc_id, p.line_index}));
        je["provenance"] = std::move(prov);
        edges.push_back(std::move(je));
    }
    j["edges"] = std::move(edges);
    return j;
}

inline void save_graph(const ReasoningGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
    out << graph_to_json(g).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

inline ReasoningGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("version"))
        throw Error(ErrorCode::FormatVersionMismatch, "graph file missing version field");
    if (!j["version"].is_number_integer() || j["version"].get<int>() != kGraphFormatVersion)
        throw Error(ErrorCode::FormatVersionMismatch,
                    "unsupported graph format version: " + j["version"].dump());
    ReasoningGraph g;
    try {
        for (const auto& jn : j.at("nodes")) {
            ConceptNode n;
            n.node_id = jn.at("id").get<int>();
            if (n.node_id != static_cast<int>(g.nodes.size()))
                throw Error(ErrorCode::IoError, "graph node ids must be dense and ordered");
            n.display_label = jn.at("label").get<std::string>();
            n.canonical = jn.at("key").get<std::string>();
            n.merged_labels = jn.at("merged").get<std::vector<std::string>>();
            n.embedding = jn.at("embedding").get<EmbeddingVector>();
            g.nodes.push_back(std::move(n));
        }
        for (const auto& je : j.at("edges")) {
            ReasoningEdge e;
            e.edge_id = static_cast<int>(g.edges.size());
            e.from = je.at("from").get<int>();
            e.to = je.at("to").get<int>();
            e.relation = je.at("relation").get<std::string>();
            for (const auto& jp : je.at("provenance"))
                e.provenance.push_back({jp.at(0).get<std::string>(), jp.at(1).get<int>()});
            if (e.provenance.empty())
                throw Error(ErrorCode::IoError, "edge provenance must be non-empty");
            g.edges.push_back(std::move(e));
        }
        g.rebuild_indexes();
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("malformed graph file: ") + e.what());
    }
    return g;
}

inline ReasoningGraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open graph file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("graph file is not valid JSON: ") + e.what());
    }
    return graph_from_json(j);
}

} // namespace sarg
