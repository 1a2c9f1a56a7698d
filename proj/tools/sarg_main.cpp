// sarg: build query-local reasoning graphs over retrieved documents,
// traverse them with direction-aware beam search, and compile the surviving
// chains into generation prompts. Batch commands only; see --help.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sarg/factory.hpp"
#include "sarg/sarg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitProvider = 3;

int exit_code_for(const sarg::Error& e) {
    switch (e.code()) {
        case sarg::ErrorCode::ProviderUnavailable:
        case sarg::ErrorCode::ResponseEmpty:
        case sarg::ErrorCode::EmbeddingFailure:
            return kExitProvider;
        default:
            return kExitInput;
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw sarg::Error(sarg::ErrorCode::IoError, "cannot open for writing: " + path);
    out << content;
    if (!out) throw sarg::Error(sarg::ErrorCode::IoError, "write failed: " + path);
}

// Config file values are applied before CLI11 assigns flag values, so the
// precedence is CLI flags > config file > built-in defaults.
void preload_config(int argc, char** argv, sarg::RunConfig& cfg) {
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) {
            cfg.load_file(argv[i + 1]);
            return;
        }
        if (arg.rfind("--config=", 0) == 0) {
            cfg.load_file(arg.substr(9));
            return;
        }
    }
}

struct CliState {
    sarg::RunConfig cfg;
    bool trace = false;
    // build-graph
    std::string docs_path, out_path;
    // ask
    std::string question, graph_path;
    // eval / sweep
    std::string dataset_path, format = "native", eval_out, judge_dump, grid_path, out_dir;
    // stats
    std::string stats_graph_path;
};

int cmd_build_graph(const CliState& st) {
    auto docs = sarg::load_documents(st.docs_path);
    auto providers = sarg::make_providers(st.cfg);
    auto opts = st.cfg.pipeline_options();

    std::vector<sarg::Triple> triples;
    sarg::ParseReport report;
    sarg::TickingGenerator generator(providers.generator, nullptr);
    for (const auto& doc : docs) {
        auto ext = sarg::extract_triples(doc, generator, opts.schema);
        triples.insert(triples.end(), ext.triples.begin(), ext.triples.end());
        report.merge(ext.report);
    }
    auto graph = sarg::build_graph(triples, *providers.embedder, opts.merge_threshold);
    sarg::save_graph(graph, st.out_path);

    nlohmann::ordered_json out = sarg::graph_stats(graph).to_json();
    out["parse"] = report.to_json();
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_ask(const CliState& st) {
    if (sarg::trim(st.question).empty())
        throw sarg::Error(sarg::ErrorCode::InputError, "question must be non-empty");
    if (st.docs_path.empty())
        throw sarg::Error(sarg::ErrorCode::InputError,
                          st.graph_path.empty()
                              ? "ask requires --docs (and optionally --graph)"
                              : "ask with --graph still requires --docs for evidence text");
    auto docs = sarg::load_documents(st.docs_path);
    auto providers = sarg::make_providers(st.cfg);
    auto opts = st.cfg.pipeline_options();
    opts.capture_frontiers = st.trace;

    sarg::AnswerTrace trace;
    if (!st.graph_path.empty()) {
        auto graph = sarg::load_graph(st.graph_path);
        trace = sarg::answer_from_graph(st.question, graph, docs, opts, providers);
    } else {
        trace = sarg::answer(st.question, docs, opts, providers);
    }
    if (trace.error)
        throw sarg::Error(trace.error->code, trace.error->message);

    std::cout << trace.answer << "\n";
    if (st.trace) std::cout << trace.to_json().dump(2) << "\n";
    return kExitOk;
}

int cmd_eval(const CliState& st) {
    auto items = sarg::load_dataset(st.dataset_path, sarg::parse_dataset_format(st.format));
    auto providers = sarg::make_providers(st.cfg);
    auto out = sarg::run_eval(items, st.cfg.pipeline_options(), providers, st.cfg.jobs);

    std::string csv = out.report.to_csv();
    if (st.eval_out.empty())
        std::cout << csv;
    else
        write_text_file(st.eval_out, csv);
    if (!st.judge_dump.empty()) sarg::write_judge_dump(out.judge_dump, st.judge_dump);

    int failed = 0;
    for (const auto& row : out.report.rows)
        if (!row.error.empty()) ++failed;
    if (failed > 0)
        std::cerr << failed << " of " << out.report.rows.size()
                  << " items recorded errors (see report)\n";
    return kExitOk; // per-item failures live in the report
}

int cmd_sweep(const CliState& st) {
    auto items = sarg::load_dataset(st.dataset_path, sarg::parse_dataset_format(st.format));
    auto grid = sarg::SweepGrid::load(st.grid_path);
    auto providers = sarg::make_providers(st.cfg);

    std::filesystem::create_directories(st.out_dir);
    auto results = sarg::run_sweep(items, st.cfg.pipeline_options(), providers, grid, st.cfg.jobs);
    for (const auto& r : results) {
        std::string path = st.out_dir + "/sweep_" + r.cell.label() + ".csv";
        write_text_file(path, r.report.to_csv());
    }
    write_text_file(st.out_dir + "/sweep_summary.csv", sarg::sweep_summary_csv(results));
    std::cout << "wrote " << results.size() << " cell reports to " << st.out_dir << "\n";
    return kExitOk;
}

int cmd_classify(const CliState& st) {
    std::unique_ptr<sarg::DirectionClassifier> remote;
    if (!st.cfg.mock && !st.cfg.classifier_endpoint.empty()) {
        auto pc = st.cfg.provider_config();
        pc.endpoint_url = st.cfg.classifier_endpoint;
        pc.model_name = st.cfg.classifier_model;
        remote = std::make_unique<sarg::RemoteDirectionClassifier>(pc);
    }
    sarg::RuleDirectionClassifier rule;
    const sarg::DirectionClassifier& cls =
        remote ? static_cast<const sarg::DirectionClassifier&>(*remote) : rule;

    std::string line;
    while (std::getline(std::cin, line)) {
        if (sarg::trim(line).empty()) continue;
        std::cout << sarg::direction_name(sarg::classify_direction(line, cls)) << "\n";
    }
    return kExitOk;
}

int cmd_stats(const CliState& st) {
    auto graph = sarg::load_graph(st.stats_graph_path);
    std::cout << sarg::graph_stats(graph).to_json().dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sarg: query-local reasoning graphs and semantic beam search for RAG"};
    app.require_subcommand(1);
    app.fallthrough();

    CliState st;
    try {
        preload_config(argc, argv, st.cfg);
    } catch (const sarg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }

    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON config file (CLI flags override it)");
    app.add_option("--tau", st.cfg.tau, "start-node similarity threshold")
        ->capture_default_str();
    app.add_option("--merge", st.cfg.merge_threshold, "node merge cosine threshold")
        ->capture_default_str();
    app.add_option("--beam", st.cfg.beam_width, "beam width")->capture_default_str();
    app.add_option("--topk", st.cfg.top_k_chains, "chains compiled into the prompt")
        ->capture_default_str();
    app.add_option("--depth", st.cfg.max_depth, "max traversal depth")->capture_default_str();
    app.add_option("--top-m", st.cfg.top_m_keyphrases, "keyphrases distilled from the query")
        ->capture_default_str();
    app.add_option("--max-starts", st.cfg.max_start_nodes, "cap on matched start nodes")
        ->capture_default_str();
    app.add_option("--schema", st.cfg.schema, "extraction schema: reasoning|spo")
        ->capture_default_str();
    app.add_flag_callback("--flat", [&] { st.cfg.serialization = "flat"; },
                          "render evidence only, omitting serialized chains");
    app.add_flag_callback("--blind", [&] { st.cfg.traversal = "blind"; },
                          "blind bidirectional traversal (skip direction classification)");
    app.add_option("--seed", st.cfg.seed, "seed for deterministic mock providers")
        ->capture_default_str();
    app.add_option("--jobs", st.cfg.jobs, "parallel items for eval/sweep")
        ->capture_default_str();
    app.add_flag("--mock", st.cfg.mock, "use deterministic offline providers");
    app.add_option("--fixture", st.cfg.fixture_path, "mock generator fixture (JSON hash map)");
    app.add_option("--dim", st.cfg.embed_dim, "embedding dimension")->capture_default_str();
    app.add_option("--endpoint", st.cfg.endpoint_url, "chat-completion endpoint URL");
    app.add_option("--model", st.cfg.model_name, "generation model name");
    app.add_option("--embed-endpoint", st.cfg.embed_endpoint, "embedding endpoint URL");
    app.add_option("--embed-model", st.cfg.embed_model, "embedding model name");
    app.add_option("--classifier-endpoint", st.cfg.classifier_endpoint,
                   "direction classifier endpoint URL (rule baseline when unset)");
    app.add_option("--classifier-model", st.cfg.classifier_model, "classifier model name");
    app.add_option("--api-key-env", st.cfg.api_key_env_var, "env var holding the bearer token")
        ->capture_default_str();
    app.add_option("--timeout", st.cfg.timeout_s, "provider timeout in seconds")
        ->capture_default_str();
    app.add_option("--retries", st.cfg.retry_count, "provider retry count (max 5)")
        ->capture_default_str();
    app.add_option("--backoff", st.cfg.backoff_base_s, "retry backoff base in seconds")
        ->capture_default_str();

    auto* build = app.add_subcommand("build-graph", "extract triples and write the graph JSON");
    build->add_option("--docs", st.docs_path, "documents file (JSON lines)")->required();
    build->add_option("--out", st.out_path, "output graph path")->required();

    auto* ask = app.add_subcommand("ask", "answer a question over retrieved documents");
    ask->add_option("-q,--question", st.question, "the question")->required();
    ask->add_option("--docs", st.docs_path, "documents file (JSON lines)");
    ask->add_option("--graph", st.graph_path, "pre-built graph file (skips extraction)");
    ask->add_flag("--trace", st.trace, "print the full answer trace as JSON");

    auto* eval = app.add_subcommand("eval", "run EM/F1 evaluation over a QA dataset");
    eval->add_option("--dataset", st.dataset_path, "dataset path")->required();
    eval->add_option("--format", st.format, "dataset format: native|hotpot|musique")
        ->capture_default_str();
    eval->add_option("--out", st.eval_out, "CSV report path (stdout when omitted)");
    eval->add_option("--judge-dump", st.judge_dump,
                     "write {id,question,answer,context,gold} JSON lines for external judges");

    auto* sweep = app.add_subcommand("sweep", "run a config grid and emit CSV reports");
    sweep->add_option("--dataset", st.dataset_path, "dataset path")->required();
    sweep->add_option("--format", st.format, "dataset format: native|hotpot|musique")
        ->capture_default_str();
    sweep->add_option("--grid", st.grid_path, "sweep grid JSON")->required();
    sweep->add_option("--out-dir", st.out_dir, "directory for per-cell CSVs")->required();

    auto* classify =
        app.add_subcommand("classify", "classify traversal direction for stdin lines");
    (void)classify;

    auto* stats = app.add_subcommand("stats", "print stats for a graph file");
    stats->add_option("--graph", st.stats_graph_path, "graph file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        st.cfg.validate();
        if (build->parsed()) return cmd_build_graph(st);
        if (ask->parsed()) return cmd_ask(st);
        if (eval->parsed()) return cmd_eval(st);
        if (sweep->parsed()) return cmd_sweep(st);
        if (classify->parsed()) return cmd_classify(st);
        if (stats->parsed()) return cmd_stats(st);
    } catch (const sarg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
