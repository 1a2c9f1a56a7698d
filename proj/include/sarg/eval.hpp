#pragma once

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarg/compile.hpp"
#include "sarg/error.hpp"
#include "sarg/extraction.hpp"
#include "sarg/text.hpp"
#include "sarg/util.hpp"

namespace sarg {

// QA answer normalization (SQuAD convention): lowercase, strip punctuation,
// drop articles as whole words, collapse whitespace.
inline std::string normalize_answer(std::string_view text) {
    std::string lowered = nfc_lower(text);
    std::string no_punct;
    no_punct.reserve(lowered.size());
    for (char c : lowered)
        if (!std::ispunct(static_cast<unsigned char>(c))) no_punct.push_back(c);
    std::string out;
    for (const auto& tok : split_whitespace(no_punct)) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

inline int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw Error(ErrorCode::EmptyInput, "golds must be non-empty");
    std::string p = normalize_answer(pred);
    for (const auto& g : golds)
        if (p == normalize_answer(g)) return 1;
    return 0;
}

namespace detail {

inline double f1_single(const std::string& pred_norm, const std::string& gold_norm) {
    std::vector<std::string> pred_tokens = split_whitespace(pred_norm);
    std::vector<std::string> gold_tokens = split_whitespace(gold_norm);
    if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : gold_tokens) ++counts[t];
    int overlap = 0;
    for (const auto& t : pred_tokens) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / pred_tokens.size();
    double recall = static_cast<double>(overlap) / gold_tokens.size();
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace detail

// Token-level F1, maximized over the gold answers.
inline double f1(std::string_view pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw Error(ErrorCode::EmptyInput, "golds must be non-empty");
    std::string pred_norm = normalize_answer(pred);
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, detail::f1_single(pred_norm, normalize_answer(g)));
    return best;
}

struct QaItem {
    std::string item_id;
    std::string question;
    std::vector<std::string> gold_answers;
    std::vector<Document> documents;

    void validate() const {
        if (item_id.empty()) throw Error(ErrorCode::FormatError, "QA item has empty item_id");
        if (gold_answers.empty())
            throw Error(ErrorCode::FormatError, "QA item " + item_id + " has no gold answers");
        if (documents.empty())
            throw Error(ErrorCode::FormatError, "QA item " + item_id + " has no documents");
    }
};

enum class DatasetFormat { Native, Hotpot, Musique };

inline DatasetFormat parse_dataset_format(std::string_view name) {
    if (name == "native") return DatasetFormat::Native;
    if (name == "hotpot") return DatasetFormat::Hotpot;
    if (name == "musique") return DatasetFormat::Musique;
    throw Error(ErrorCode::FormatError, "unknown dataset format: " + std::string(name));
}

namespace detail {

inline std::vector<QaItem> load_native(std::istream& in) {
    std::vector<QaItem> items;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            QaItem item;
            item.item_id = j.at("item_id").get<std::string>();
            item.question = j.at("question").get<std::string>();
            item.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
            for (const auto& jd : j.at("documents"))
                item.documents.push_back(
                    {jd.at("doc_id").get<std::string>(), jd.at("text").get<std::string>(), {}});
            item.validate();
            items.push_back(std::move(item));
        } catch (const Error& e) {
            throw Error(ErrorCode::FormatError,
                        "line " + std::to_string(lineno) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::FormatError,
                        "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return items;
}

inline std::vector<QaItem> load_hotpot(std::istream& in) {
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("not valid JSON: ") + e.what());
    }
    if (!root.is_array())
        throw Error(ErrorCode::FormatError, "hotpot-style file must be a JSON array");
    std::vector<QaItem> items;
    for (std::size_t idx = 0; idx < root.size(); ++idx) {
        const auto& j = root[idx];
        try {
            QaItem item;
            item.item_id = j.at("_id").get<std::string>();
            item.question = j.at("question").get<std::string>();
            item.gold_answers = {j.at("answer").get<std::string>()};
            std::unordered_set<std::string> supporting;
            for (const auto& sf : j.at("supporting_facts"))
                supporting.insert(sf.at(0).get<std::string>());
            for (const auto& ctx : j.at("context")) {
                std::string title = ctx.at(0).get<std::string>();
                if (!supporting.count(title)) continue;
                std::string text;
                for (const auto& sent : ctx.at(1)) text += sent.get<std::string>();
                item.documents.push_back({title, text, {}});
            }
            item.validate();
            items.push_back(std::move(item));
        } catch (const Error& e) {
            throw Error(ErrorCode::FormatError,
                        "record " + std::to_string(idx) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::FormatError,
                        "record " + std::to_string(idx) + ": " + e.what());
        }
    }
    return items;
}

inline std::vector<QaItem> load_musique(std::istream& in) {
    std::vector<QaItem> items;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            QaItem item;
            item.item_id = j.at("id").get<std::string>();
            item.question = j.at("question").get<std::string>();
            item.gold_answers = {j.at("answer").get<std::string>()};
            if (j.contains("answer_aliases"))
                for (const auto& alias : j["answer_aliases"])
                    item.gold_answers.push_back(alias.get<std::string>());
            for (const auto& para : j.at("paragraphs")) {
                if (!para.at("is_supporting").get<bool>()) continue;
                item.documents.push_back({"p" + std::to_string(para.at("idx").get<int>()),
                                          para.at("paragraph_text").get<std::string>(),
                                          {}});
            }
            item.validate();
            items.push_back(std::move(item));
        } catch (const Error& e) {
            throw Error(ErrorCode::FormatError,
                        "line " + std::to_string(lineno) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::FormatError,
                        "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return items;
}

} // namespace detail

inline std::vector<QaItem> load_dataset(const std::string& path, DatasetFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open dataset: " + path);
    switch (format) {
        case DatasetFormat::Native: return detail::load_native(in);
        case DatasetFormat::Hotpot: return detail::load_hotpot(in);
        case DatasetFormat::Musique: return detail::load_musique(in);
    }
    throw Error(ErrorCode::FormatError, "unreachable dataset format");
}

struct EvalRow {
    std::string item_id;
    int em = 0;
    double f1 = 0.0;
    int chains = 0;
    int evidence_docs = 0;
    std::int64_t nodes_expanded = 0;
    double t_graph_s = 0.0;
    double t_construct_s = 0.0;
    double t_generate_s = 0.0;
    int graph_nodes = 0;
    int graph_edges = 0;
    std::string error; // empty when the item succeeded
};

struct EvalAggregates {
    double em_mean = 0.0;
    double f1_mean = 0.0;
    double chains_mean = 0.0;
    double evidence_mean = 0.0;
    double nodes_expanded_mean = 0.0;
    double t_graph_mean = 0.0;
    double t_construct_mean = 0.0;
    double t_generate_mean = 0.0;
    double graph_nodes_mean = 0.0;
    double graph_edges_mean = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows; // ordered by item_id
    EvalAggregates agg;

    void recompute_aggregates() {
        agg = {};
        if (rows.empty()) return;
        for (const auto& r : rows) {
            agg.em_mean += r.em;
            agg.f1_mean += r.f1;
            agg.chains_mean += r.chains;
            agg.evidence_mean += r.evidence_docs;
            agg.nodes_expanded_mean += static_cast<double>(r.nodes_expanded);
            agg.t_graph_mean += r.t_graph_s;
            agg.t_construct_mean += r.t_construct_s;
            agg.t_generate_mean += r.t_generate_s;
            agg.graph_nodes_mean += r.graph_nodes;
            agg.graph_edges_mean += r.graph_edges;
        }
        double n = static_cast<double>(rows.size());
        agg.em_mean /= n;
        agg.f1_mean /= n;
        agg.chains_mean /= n;
        agg.evidence_mean /= n;
        agg.nodes_expanded_mean /= n;
        agg.t_graph_mean /= n;
        agg.t_construct_mean /= n;
        agg.t_generate_mean /= n;
        agg.graph_nodes_mean /= n;
        agg.graph_edges_mean /= n;
    }

    std::string to_csv() const {
        std::string out =
            "item_id,em,f1,chains,evidence_docs,nodes_expanded,t_graph_s,t_construct_s,"
            "t_generate_s\n";
        for (const auto& r : rows) {
            out += r.item_id + "," + format_double(r.em) + "," + format_double(r.f1) + "," +
                   std::to_string(r.chains) + "," + std::to_string(r.evidence_docs) + "," +
                   std::to_string(r.nodes_expanded) + "," + format_double(r.t_graph_s) + "," +
                   format_double(r.t_construct_s) + "," + format_double(r.t_generate_s) + "\n";
        }
        out += "aggregate," + format_double(agg.em_mean) + "," + format_double(agg.f1_mean) + "," +
               format_double(agg.chains_mean) + "," + format_double(agg.evidence_mean) + "," +
               format_double(agg.nodes_expanded_mean) + "," + format_double(agg.t_graph_mean) +
               "," + format_double(agg.t_construct_mean) + "," +
               format_double(agg.t_generate_mean) + "\n";
        return out;
    }
};

struct JudgeDumpEntry {
    std::string id;
    std::string question;
    std::string answer;
    std::vector<std::string> context;
    std::vector<std::string> gold;

    nlohmann::ordered_json to_json() const {
        return {{"id", id},
                {"question", question},
                {"answer", answer},
                {"context", context},
                {"gold", gold}};
    }
};

struct EvalOutput {
    EvalReport report;
    std::vector<JudgeDumpEntry> judge_dump; // ordered by item_id
};

// Runs the pipeline on each item's gold documents and scores EM/F1.
// Per-item failures are recorded in the row, not fatal. Items may evaluate in
// parallel; assembly is a deterministic fold ordered by item_id.
inline EvalOutput run_eval(const std::vector<QaItem>& items, const PipelineOptions& opts,
                           const PipelineProviders& providers, int jobs = 1) {
    if (items.empty()) throw Error(ErrorCode::EmptyInput, "no items to evaluate");
    if (jobs < 1) jobs = 1;

    struct Slot {
        EvalRow row;
        JudgeDumpEntry dump;
    };
    std::vector<Slot> slots(items.size());

    auto eval_one = [&](std::size_t i) {
        const QaItem& item = items[i];
        Slot& slot = slots[i];
        slot.row.item_id = item.item_id;
        slot.dump.id = item.item_id;
        slot.dump.question = item.question;
        slot.dump.gold = item.gold_answers;
        try {
            AnswerTrace trace = answer(item.question, item.documents, opts, providers);
            slot.row.em = exact_match(trace.answer, item.gold_answers);
            slot.row.f1 = f1(trace.answer, item.gold_answers);
            slot.row.chains = static_cast<int>(trace.chains.size());
            slot.row.evidence_docs = static_cast<int>(trace.prompt.evidence.size());
            slot.row.nodes_expanded = trace.traversal_report.nodes_expanded;
            slot.row.t_graph_s = trace.timings.t_graph_s;
            slot.row.t_construct_s = trace.timings.t_construct_s;
            slot.row.t_generate_s = trace.timings.t_generate_s;
            slot.row.graph_nodes = trace.graph.node_count;
            slot.row.graph_edges = trace.graph.edge_count;
            if (trace.error) slot.row.error = trace.error->message;
            slot.dump.answer = trace.answer;
            for (const auto& [id, text] : trace.prompt.evidence) slot.dump.context.push_back(text);
        } catch (const Error& e) {
            slot.row.error = e.what();
        } catch (const std::exception& e) {
            slot.row.error = std::string("unexpected: ") + e.what();
        }
    };

    if (jobs == 1 || items.size() == 1) {
        for (std::size_t i = 0; i < items.size(); ++i) eval_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= items.size()) return;
                eval_one(i);
            }
        };
        std::vector<std::thread> pool;
        int n = std::min<int>(jobs, static_cast<int>(items.size()));
        pool.reserve(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::sort(slots.begin(), slots.end(),
              [](const Slot& a, const Slot& b) { return a.row.item_id < b.row.item_id; });

    EvalOutput out;
    for (auto& s : slots) {
        out.report.rows.push_back(std::move(s.row));
        out.judge_dump.push_back(std::move(s.dump));
    }
    out.report.recompute_aggregates();
    return out;
}

inline void write_judge_dump(const std::vector<JudgeDumpEntry>& entries, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open judge dump for writing: " + path);
    for (const auto& e : entries) out << e.to_json().dump() << '\n';
}

struct SweepCell {
    int beam_width = 3;
    int top_k = 3;
    Schema schema = Schema::Reasoning;
    bool flat = false;
    bool blind = false;

    std::string label() const {
        std::string s = "beam" + std::to_string(beam_width) + "_topk" + std::to_string(top_k);
        s += std::string("_") + std::string(schema_name(schema));
        s += flat ? "_flat" : "_chains";
        s += blind ? "_blind" : "_targeted";
        return s;
    }
};

struct SweepGrid {
    std::vector<int> beam_width;
    std::vector<int> top_k;
    std::vector<Schema> schema;
    std::vector<bool> serialization_flat;
    std::vector<bool> traversal_blind;

    // Cartesian product with unset axes inherited from the base options.
    std::vector<SweepCell> cells(const PipelineOptions& base) const {
        std::vector<int> beams = beam_width.empty() ? std::vector<int>{base.beam_width} : beam_width;
        std::vector<int> topks = top_k.empty() ? std::vector<int>{base.top_k_chains} : top_k;
        std::vector<Schema> schemas = schema.empty() ? std::vector<Schema>{base.schema} : schema;
        std::vector<bool> flats = serialization_flat.empty()
                                      ? std::vector<bool>{base.flat_serialization}
                                      : serialization_flat;
        std::vector<bool> blinds =
            traversal_blind.empty() ? std::vector<bool>{base.blind_traversal} : traversal_blind;
        std::vector<SweepCell> out;
        for (int b : beams)
            for (int k : topks)
                for (Schema s : schemas)
                    for (bool fl : flats)
                        for (bool bl : blinds) out.push_back({b, k, s, fl, bl});
        return out;
    }

    static SweepGrid from_json(const nlohmann::json& j) {
        if (!j.is_object()) throw Error(ErrorCode::FormatError, "sweep grid must be a JSON object");
        SweepGrid g;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            if (key == "beam_width") {
                g.beam_width = it.value().get<std::vector<int>>();
            } else if (key == "top_k") {
                g.top_k = it.value().get<std::vector<int>>();
            } else if (key == "schema") {
                for (const auto& s : it.value()) {
                    std::string name = s.get<std::string>();
                    if (name == "reasoning")
                        g.schema.push_back(Schema::Reasoning);
                    else if (name == "spo")
                        g.schema.push_back(Schema::Spo);
                    else
                        throw Error(ErrorCode::FormatError, "unknown schema in grid: " + name);
                }
            } else if (key == "serialization") {
                for (const auto& s : it.value()) {
                    std::string name = s.get<std::string>();
                    if (name == "chains")
                        g.serialization_flat.push_back(false);
                    else if (name == "flat")
                        g.serialization_flat.push_back(true);
                    else
                        throw Error(ErrorCode::FormatError,
                                    "unknown serialization in grid: " + name);
                }
            } else if (key == "traversal") {
                for (const auto& s : it.value()) {
                    std::string name = s.get<std::string>();
                    if (name == "targeted")
                        g.traversal_blind.push_back(false);
                    else if (name == "blind")
                        g.traversal_blind.push_back(true);
                    else
                        throw Error(ErrorCode::FormatError, "unknown traversal in grid: " + name);
                }
            } else {
                throw Error(ErrorCode::FormatError, "unknown sweep grid key: " + key);
            }
        }
        return g;
    }

    static SweepGrid load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoError, "cannot open sweep grid: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::FormatError, std::string("grid is not valid JSON: ") + e.what());
        }
        return from_json(j);
    }
};

struct SweepResult {
    SweepCell cell;
    EvalReport report;
};

inline std::vector<SweepResult> run_sweep(const std::vector<QaItem>& items,
                                          const PipelineOptions& base,
                                          const PipelineProviders& providers,
                                          const SweepGrid& grid, int jobs = 1) {
    std::vector<SweepCell> cells = grid.cells(base);
    if (cells.empty()) throw Error(ErrorCode::EmptyInput, "sweep grid is empty");
    std::vector<SweepResult> results;
    for (const auto& cell : cells) {
        PipelineOptions opts = base;
        opts.beam_width = cell.beam_width;
        opts.top_k_chains = cell.top_k;
        opts.schema = cell.schema;
        opts.flat_serialization = cell.flat;
        opts.blind_traversal = cell.blind;
        results.push_back({cell, run_eval(items, opts, providers, jobs).report});
    }
    return results;
}

inline std::string sweep_summary_csv(const std::vector<SweepResult>& results) {
    std::string out =
        "beam,topk,schema,serialization,traversal,em,f1,chains,evidence_docs,nodes_expanded,"
        "t_graph_s,t_construct_s,t_generate_s\n";
    for (const auto& r : results) {
        out += std::to_string(r.cell.beam_width) + "," + std::to_string(r.cell.top_k) + "," +
               std::string(schema_name(r.cell.schema)) + "," +
               (r.cell.flat ? "flat" : "chains") + "," +
               (r.cell.blind ? "blind" : "targeted") + "," + format_double(r.report.agg.em_mean) +
               "," + format_double(r.report.agg.f1_mean) + "," +
               format_double(r.report.agg.chains_mean) + "," +
               format_double(r.report.agg.evidence_mean) + "," +
               format_double(r.report.agg.nodes_expanded_mean) + "," +
               format_double(r.report.agg.t_graph_mean) + "," +
               format_double(r.report.agg.t_construct_mean) + "," +
               format_double(r.report.agg.t_generate_mean) + "\n";
    }
    return out;
}

} // namespace sarg
