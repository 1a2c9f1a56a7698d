#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarg/assets.hpp"
#include "sarg/clock.hpp"
#include "sarg/error.hpp"
#include "sarg/extraction.hpp"
#include "sarg/graph.hpp"
#include "sarg/providers.hpp"
#include "sarg/query_analysis.hpp"
#include "sarg/traversal.hpp"

namespace sarg {

inline constexpr std::string_view kInstructionMarker = "### INSTRUCTION";
inline constexpr std::string_view kQuestionMarker = "### QUESTION";
inline constexpr std::string_view kChainsMarker = "### REASONING CHAINS";
inline constexpr std::string_view kEvidenceMarker = "### EVIDENCE";

// One line per chain: display labels joined by relation arrows in
// presentation order. Backward chains are rendered cause-to-effect (reversed
// from traversal order); bidirectional chains keep traversal order with
// per-edge arrows, so arrows always follow graph-edge orientation.
inline std::string serialize_chain(const ReasoningChain& chain, const ReasoningGraph& g) {
    if (chain.node_ids.size() < 2 || chain.edge_refs.size() + 1 != chain.node_ids.size())
        throw Error(ErrorCode::InvalidArgument, "chain must have L >= 2 nodes and L-1 edges");

    std::vector<NodeId> order = chain.node_ids;
    std::vector<ChainEdge> edges = chain.edge_refs;
    bool reversed = chain.direction == Direction::Backward;
    if (reversed) {
        std::reverse(order.begin(), order.end());
        std::reverse(edges.begin(), edges.end());
        for (auto& e : edges) e.along = !e.along;
    }

    char score_buf[32];
    std::snprintf(score_buf, sizeof(score_buf), "(score=%.2f) ", chain.score);
    std::string out = score_buf;
    out += g.node(order[0]).display_label;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].edge_id < 0 || static_cast<std::size_t>(edges[i].edge_id) >= g.edges.size())
            throw Error(ErrorCode::DanglingNode, "chain references unknown edge");
        const std::string& rel = g.edges[static_cast<std::size_t>(edges[i].edge_id)].relation;
        if (edges[i].along)
            out += " --[" + rel + "]--> ";
        else
            out += " <--[" + rel + "]-- ";
        out += g.node(order[i + 1]).display_label;
    }
    return out;
}

struct ParsedChainLine {
    double score = 0.0;
    std::vector<std::string> labels;
    std::vector<std::pair<std::string, bool>> relations; // (relation, along)
};

// Inverse of serialize_chain; used by the trace-faithfulness checks.
inline std::optional<ParsedChainLine> parse_chain_line(std::string_view line) {
    constexpr std::string_view kPrefix = "(score=";
    if (line.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
    std::size_t close = line.find(") ");
    if (close == std::string_view::npos) return std::nullopt;
    ParsedChainLine parsed;
    try {
        parsed.score = std::stod(std::string(line.substr(kPrefix.size(), close - kPrefix.size())));
    } catch (...) {
        return std::nullopt;
    }
    std::string_view rest = line.substr(close + 2);
    while (true) {
        std::size_t fwd = rest.find(" --[");
        std::size_t bwd = rest.find(" <--[");
        if (fwd == std::string_view::npos && bwd == std::string_view::npos) {
            parsed.labels.emplace_back(rest);
            break;
        }
        bool along = fwd != std::string_view::npos && (bwd == std::string_view::npos || fwd < bwd);
        std::size_t open = along ? fwd : bwd;
        std::size_t open_len = along ? 4 : 5;
        std::string_view closer = along ? std::string_view("]--> ") : std::string_view("]-- ");
        std::size_t end = rest.find(closer, open + open_len);
        if (end == std::string_view::npos) return std::nullopt;
        parsed.labels.emplace_back(rest.substr(0, open));
        parsed.relations.emplace_back(
            std::string(rest.substr(open + open_len, end - open - open_len)), along);
        rest = rest.substr(end + closer.size());
    }
    if (parsed.labels.size() < 2) return std::nullopt;
    return parsed;
}

// Union of source documents over all chain-edge provenance, ordered by first
// appearance, each document once with its full text.
inline std::vector<std::pair<std::string, std::string>> gather_evidence(
    const std::vector<ReasoningChain>& chains, const ReasoningGraph& g,
    const std::vector<Document>& documents) {
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : documents) by_id.emplace(d.doc_id, &d);

    std::vector<std::pair<std::string, std::string>> out;
    std::unordered_set<std::string> seen;
    for (const auto& chain : chains) {
        for (const auto& edge_ref : chain.edge_refs) {
            if (edge_ref.edge_id < 0 ||
                static_cast<std::size_t>(edge_ref.edge_id) >= g.edges.size())
                throw Error(ErrorCode::DanglingNode, "chain references unknown edge");
            for (const auto& prov : g.edges[static_cast<std::size_t>(edge_ref.edge_id)].provenance) {
                if (!seen.insert(prov.doc_id).second) continue;
                auto it = by_id.find(prov.doc_id);
                if (it == by_id.end())
                    throw Error(ErrorCode::UnknownDocId,
                                "provenance references unknown document: " + prov.doc_id);
                out.emplace_back(prov.doc_id, it->second->text);
            }
        }
    }
    return out;
}

struct CompiledPrompt {
    std::string instruction;
    std::string query;
    std::vector<std::string> chain_lines;
    std::string chains_block; // joined lines or the fallback sentence
    std::vector<std::pair<std::string, std::string>> evidence; // (doc_id, text)
    std::string rendered;
    bool flat_mode = false;
    bool fallback = false;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["instruction"] = instruction;
        j["query"] = query;
        j["chain_lines"] = chain_lines;
        j["chains_block"] = chains_block;
        auto ev = nlohmann::ordered_json::array();
        for (const auto& [id, text] : evidence)
            ev.push_back(nlohmann::ordered_json::array({id, text}));
        j["evidence"] = std::move(ev);
        j["flat_mode"] = flat_mode;
        j["fallback"] = fallback;
        j["rendered"] = rendered;
        return j;
    }
};

// Assembles the generation prompt: instruction, question, serialized chains,
// evidence, in that order with fixed section markers. With no chains the
// chains block carries the fallback sentence and evidence degrades to all
// retrieved documents (flat-RAG path). The flat ablation keeps the same
// evidence selection but omits the chains section entirely.
inline CompiledPrompt compile_prompt(const std::string& instruction, const std::string& query,
                                     const std::vector<ReasoningChain>& chains,
                                     const ReasoningGraph& g,
                                     const std::vector<Document>& documents,
                                     bool flat_mode = false) {
    CompiledPrompt p;
    p.instruction = instruction;
    p.query = query;
    p.flat_mode = flat_mode;
    p.fallback = chains.empty();

    for (const auto& c : chains) p.chain_lines.push_back(serialize_chain(c, g));

    if (p.fallback) {
        p.chains_block = std::string(assets::kNoChainsFallback);
        for (const auto& d : documents) p.evidence.emplace_back(d.doc_id, d.text);
    } else {
        std::string joined;
        for (std::size_t i = 0; i < p.chain_lines.size(); ++i) {
            if (i) joined += '\n';
            joined += p.chain_lines[i];
        }
        p.chains_block = std::move(joined);
        p.evidence = gather_evidence(chains, g, documents);
    }

    std::string evidence_block;
    for (std::size_t i = 0; i < p.evidence.size(); ++i) {
        if (i) evidence_block += '\n';
        evidence_block += "[" + p.evidence[i].first + "] " + p.evidence[i].second;
    }

    std::string r;
    r += std::string(kInstructionMarker) + "\n" + p.instruction + "\n";
    r += std::string(kQuestionMarker) + "\n" + p.query + "\n";
    if (!flat_mode) r += std::string(kChainsMarker) + "\n" + p.chains_block + "\n";
    r += std::string(kEvidenceMarker) + "\n" + evidence_block + "\n";
    p.rendered = std::move(r);
    return p;
}

struct StageTimings {
    double t_graph_s = 0.0;
    double t_construct_s = 0.0;
    double t_generate_s = 0.0;

    nlohmann::ordered_json to_json() const {
        return {{"t_graph_s", t_graph_s},
                {"t_construct_s", t_construct_s},
                {"t_generate_s", t_generate_s}};
    }
};

struct PipelineOptions {
    Schema schema = Schema::Reasoning;
    bool flat_serialization = false; // drop the chains section, keep evidence selection
    bool blind_traversal = false;    // skip direction classification, always bidirectional
    double tau = 0.55;
    double merge_threshold = 0.90;
    int beam_width = 3;
    int max_depth = 4;
    int top_k_chains = 3;
    int top_m_keyphrases = 5;
    int max_start_nodes = 5;
    std::string instruction = std::string(assets::kDefaultInstruction);
    double temperature = 0.0;
    int max_tokens = 1024;
    bool capture_frontiers = false;
};

struct PipelineProviders {
    std::shared_ptr<const Embedder> embedder;
    std::shared_ptr<const Generator> generator;
    std::shared_ptr<const DirectionClassifier> classifier; // null -> rule baseline
    bool deterministic_clock = false; // mock mode: virtual clock for timings
};

struct TraceError {
    ErrorCode code = ErrorCode::InputError;
    std::string message;
};

struct AnswerTrace {
    std::string answer;
    std::vector<ReasoningChain> chains; // exactly the chains compiled into the prompt
    CompiledPrompt prompt;
    QueryAnalysis analysis;
    ParseReport parse_report;
    TraversalReport traversal_report;
    GraphStats graph;
    StageTimings timings;
    std::vector<FrontierSnapshot> frontiers; // populated in trace mode
    bool fallback = false;
    std::optional<TraceError> error;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["answer"] = answer;
        auto chain_arr = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < chains.size(); ++i) {
            nlohmann::ordered_json jc;
            jc["nodes"] = chains[i].node_ids;
            jc["score"] = chains[i].score;
            jc["direction"] = std::string(direction_name(chains[i].direction));
            jc["serialized"] = i < prompt.chain_lines.size() ? prompt.chain_lines[i] : "";
            chain_arr.push_back(std::move(jc));
        }
        j["chains"] = std::move(chain_arr);
        j["prompt"] = prompt.to_json();
        j["analysis"] = {{"query", analysis.query_text},
                         {"keyphrases", analysis.keyphrases},
                         {"start_nodes", analysis.start_nodes},
                         {"direction", std::string(direction_name(analysis.direction))}};
        j["reports"] = {{"parse", parse_report.to_json()},
                        {"traversal", traversal_report.to_json()},
                        {"graph", graph.to_json()},
                        {"timings", timings.to_json()}};
        if (!frontiers.empty()) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& snap : frontiers) {
                auto chains_j = nlohmann::ordered_json::array();
                for (const auto& [nodes, score] : snap.chains)
                    chains_j.push_back({{"nodes", nodes}, {"score", score}});
                arr.push_back({{"depth", snap.depth}, {"chains", std::move(chains_j)}});
            }
            j["frontiers"] = std::move(arr);
        }
        j["fallback"] = fallback;
        if (error)
            j["error"] = {{"code", std::string(error_code_name(error->code))},
                          {"message", error->message}};
        else
            j["error"] = nullptr;
        return j;
    }
};

namespace detail {

inline void validate_answer_inputs(const std::string& query,
                                   const std::vector<Document>& documents,
                                   const PipelineProviders& providers) {
    if (documents.empty())
        throw Error(ErrorCode::InputError, "answer requires at least one document");
    if (trim(query).empty()) throw Error(ErrorCode::InputError, "question must be non-empty");
    if (!providers.embedder || !providers.generator)
        throw Error(ErrorCode::InputError, "embedder and generator providers are required");
    std::unordered_set<std::string> ids;
    for (const auto& d : documents) {
        d.validate();
        if (!ids.insert(d.doc_id).second)
            throw Error(ErrorCode::InputError, "duplicate doc_id: " + d.doc_id);
    }
}

inline std::unique_ptr<VirtualClock> make_clock(const PipelineProviders& providers) {
    if (providers.deterministic_clock) return std::make_unique<DeterministicClock>();
    return std::make_unique<SteadyClock>();
}

// Query analysis, traversal, prompt compilation and generation over an
// already-built graph; fills the construct and generate stage timings.
inline void pipeline_tail(AnswerTrace& trace, const ReasoningGraph& graph,
                          const std::string& query, const std::vector<Document>& documents,
                          const PipelineOptions& opts, const Embedder& embedder,
                          const Generator& generator, const PipelineProviders& providers,
                          VirtualClock& clock) {
    auto seconds_since = [&](std::uint64_t from) {
        return static_cast<double>(clock.now_us() - from) / 1e6;
    };
    std::uint64_t t1 = clock.now_us();
    trace.analysis.keyphrases = extract_keyphrases(query, embedder, opts.top_m_keyphrases);
    std::string query_norm = canonical_key(query);
    if (query_norm.empty()) query_norm = trim(query); // all-punctuation query
    trace.analysis.query_embedding = embedder.embed(query_norm);
    if (opts.blind_traversal) {
        trace.analysis.direction = Direction::Bidirectional;
    } else if (providers.classifier) {
        trace.analysis.direction = classify_direction(query, *providers.classifier);
    } else {
        trace.analysis.direction = RuleDirectionClassifier{}.classify(query);
    }
    trace.analysis.start_nodes = match_start_nodes(graph, trace.analysis.keyphrases, embedder,
                                                   opts.tau, opts.max_start_nodes);

    std::vector<ReasoningChain> selected;
    if (!trace.analysis.start_nodes.empty()) {
        TraversalConfig tc;
        tc.beam_width = opts.beam_width;
        tc.max_depth = opts.max_depth;
        tc.direction = trace.analysis.direction;
        tc.top_k_chains = opts.top_k_chains;
        std::uint64_t tb = clock.now_us();
        auto [emitted, report] =
            beam_search(graph, trace.analysis.start_nodes, trace.analysis.query_embedding, tc,
                        opts.capture_frontiers ? &trace.frontiers : nullptr);
        std::vector<ReasoningChain> deduped = dedup_chains(std::move(emitted));
        report.chains_after_dedup = static_cast<std::int64_t>(deduped.size());
        report.wall_time_s = seconds_since(tb);
        trace.traversal_report = report;
        selected = select_top_chains(deduped, opts.top_k_chains);
    }
    trace.fallback = selected.empty();
    trace.chains = selected;
    trace.prompt = compile_prompt(opts.instruction, query, selected, graph, documents,
                                  opts.flat_serialization);
    trace.timings.t_construct_s = seconds_since(t1);

    std::uint64_t t2 = clock.now_us();
    GenerationRequest req;
    req.user_text = trace.prompt.rendered;
    req.temperature = opts.temperature;
    req.max_tokens = opts.max_tokens;
    trace.answer = generator.generate(req);
    trace.timings.t_generate_s = seconds_since(t2);
}

} // namespace detail

// End-to-end pipeline: extraction, graph construction, query analysis,
// direction-aware beam search, chain selection, prompt compilation and final
// generation. Stage failures yield a trace with the completed prefix and the
// error recorded; empty document sets are rejected up front.
inline AnswerTrace answer(const std::string& query, const std::vector<Document>& documents,
                          const PipelineOptions& opts, const PipelineProviders& providers) {
    detail::validate_answer_inputs(query, documents, providers);
    auto clock = detail::make_clock(providers);
    TickingEmbedder embedder(providers.embedder, clock.get());
    TickingGenerator generator(providers.generator, clock.get());

    AnswerTrace trace;
    trace.analysis.query_text = query;
    try {
        std::uint64_t t0 = clock->now_us();
        std::vector<Triple> triples;
        for (const auto& doc : documents) {
            ExtractionResult ext = extract_triples(doc, generator, opts.schema);
            triples.insert(triples.end(), ext.triples.begin(), ext.triples.end());
            trace.parse_report.merge(ext.report);
        }
        ReasoningGraph graph = build_graph(triples, embedder, opts.merge_threshold);
        trace.graph = graph_stats(graph);
        trace.timings.t_graph_s = static_cast<double>(clock->now_us() - t0) / 1e6;

        detail::pipeline_tail(trace, graph, query, documents, opts, embedder, generator,
                              providers, *clock);
    } catch (const Error& e) {
        trace.error = TraceError{e.code(), e.what()};
    } catch (const std::exception& e) {
        trace.error = TraceError{ErrorCode::InputError, std::string("unexpected: ") + e.what()};
    }
    return trace;
}

// Variant over a previously built graph (no extraction stage); the documents
// supply evidence text for the graph's provenance.
inline AnswerTrace answer_from_graph(const std::string& query, const ReasoningGraph& graph,
                                     const std::vector<Document>& documents,
                                     const PipelineOptions& opts,
                                     const PipelineProviders& providers) {
    detail::validate_answer_inputs(query, documents, providers);
    auto clock = detail::make_clock(providers);
    TickingEmbedder embedder(providers.embedder, clock.get());
    TickingGenerator generator(providers.generator, clock.get());

    AnswerTrace trace;
    trace.analysis.query_text = query;
    trace.graph = graph_stats(graph);
    try {
        detail::pipeline_tail(trace, graph, query, documents, opts, embedder, generator,
                              providers, *clock);
    } catch (const Error& e) {
        trace.error = TraceError{e.code(), e.what()};
    } catch (const std::exception& e) {
        trace.error = TraceError{ErrorCode::InputError, std::string("unexpected: ") + e.what()};
    }
    return trace;
}

} // namespace sarg
