// Regenerates fixtures/mock_fixture.json: the scripted-response map for the
// mock generator, keyed by the FNV-1a hash of each prompt the shipped
// fixtures can produce. Covers per-document extraction prompts (both
// schemas) plus the compiled generation prompts for the eval items, the ask
// scenario, the ablation variants, and the shipped sweep grid.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "sarg/sarg.hpp"

using namespace sarg;

namespace {

struct FixtureSources {
    std::vector<Document> bp_docs;
    std::vector<Document> flood_docs;
    std::vector<QaItem> items;
    nlohmann::json responses; // {"reasoning": {doc_id: lines}, "spo": {...}}
    nlohmann::json answers;   // {item_id_or_scenario: answer text}
};

std::string response_for(const FixtureSources& src, Schema schema, const std::string& doc_id) {
    const auto& table = src.responses.at(schema == Schema::Reasoning ? "reasoning" : "spo");
    if (!table.contains(doc_id))
        throw Error(ErrorCode::FormatError,
                    "mock_responses.json has no " +
                        std::string(schema_name(schema)) + " entry for " + doc_id);
    return table.at(doc_id).get<std::string>();
}

void add_extraction_entries(std::map<std::string, std::string>& out, MockGenerator& gen,
                            const FixtureSources& src, const std::vector<Document>& docs) {
    for (const auto& doc : docs) {
        for (Schema schema : {Schema::Reasoning, Schema::Spo}) {
            std::string prompt = render_extraction_prompt(doc, schema);
            std::string response = response_for(src, schema, doc.doc_id);
            out[to_hex16(fnv1a_64(prompt))] = response;
            gen.script(prompt, response);
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "fixtures";
    try {
        FixtureSources src;
        src.bp_docs = load_documents(dir + "/docs_bp_mini.jsonl");
        src.flood_docs = load_documents(dir + "/docs_flood.jsonl");
        src.items = load_dataset(dir + "/qa_native.jsonl", DatasetFormat::Native);
        {
            std::ifstream in(dir + "/mock_responses.json");
            if (!in) throw Error(ErrorCode::IoError, "missing mock_responses.json");
            in >> src.responses;
        }
        {
            std::ifstream in(dir + "/mock_answers.json");
            if (!in) throw Error(ErrorCode::IoError, "missing mock_answers.json");
            in >> src.answers;
        }

        // extraction entries double as the scripted generator used to drive
        // the compile stage below (final generation intentionally fails, the
        // trace still carries the compiled prompt bytes to pin)
        std::map<std::string, std::string> entries;
        auto extraction_gen = std::make_shared<MockGenerator>();
        add_extraction_entries(entries, *extraction_gen, src, src.bp_docs);
        add_extraction_entries(entries, *extraction_gen, src, src.flood_docs);
        for (const auto& item : src.items)
            add_extraction_entries(entries, *extraction_gen, src, item.documents);

        PipelineProviders providers;
        providers.embedder = std::make_shared<MockEmbedder>(384, 42);
        providers.generator = extraction_gen;
        providers.deterministic_clock = true;

        struct Variant {
            const char* name;
            Schema schema;
            bool flat;
            bool blind;
            int beam;
            int topk;
        };
        std::vector<Variant> variants = {
            {"default", Schema::Reasoning, false, false, 3, 3},
            {"flat", Schema::Reasoning, true, false, 3, 3},
            {"blind", Schema::Reasoning, false, true, 3, 3},
            {"spo", Schema::Spo, false, false, 3, 3},
        };
        for (int beam : {1, 3})
            for (int topk : {1, 3})
                variants.push_back({"sweep", Schema::Reasoning, false, false, beam, topk});

        int scenario_count = 0;
        auto pin_scenario = [&](const std::string& question, const std::vector<Document>& docs,
                                const Variant& v, const std::string& answer_key) {
            PipelineOptions opts;
            opts.schema = v.schema;
            opts.flat_serialization = v.flat;
            opts.blind_traversal = v.blind;
            opts.beam_width = v.beam;
            opts.top_k_chains = v.topk;
            AnswerTrace trace = answer(question, docs, opts, providers);
            if (trace.prompt.rendered.empty())
                throw Error(ErrorCode::FormatError,
                            "scenario produced no prompt: " + answer_key);
            if (!src.answers.contains(answer_key))
                throw Error(ErrorCode::FormatError, "mock_answers.json missing " + answer_key);
            entries[to_hex16(fnv1a_64(trace.prompt.rendered))] =
                src.answers.at(answer_key).get<std::string>();
            ++scenario_count;
        };

        for (const auto& item : src.items)
            for (const auto& v : variants) pin_scenario(item.question, item.documents, v, item.item_id);

        // ask scenario: first eval question over the full 20-document corpus
        for (const auto& v : variants)
            pin_scenario(src.items[0].question, src.bp_docs, v, "ask_bp");

        nlohmann::json out(entries);
        std::ofstream f(dir + "/mock_fixture.json");
        if (!f) throw Error(ErrorCode::IoError, "cannot write mock_fixture.json");
        f << out.dump(2) << "\n";
        f.close();

        // golden trace: rerun the default ask scenario against the complete
        // fixture (final answers now scripted) and pin the whole trace
        {
            PipelineProviders full = providers;
            full.generator = std::make_shared<MockGenerator>(
                MockGenerator::from_file(dir + "/mock_fixture.json"));
            PipelineOptions opts;
            AnswerTrace trace = answer(src.items[0].question, src.bp_docs, opts, full);
            if (trace.error)
                throw Error(ErrorCode::FormatError,
                            "golden ask scenario errored: " + trace.error->message);
            std::ofstream g(dir + "/golden_ask_trace.json");
            if (!g) throw Error(ErrorCode::IoError, "cannot write golden_ask_trace.json");
            g << trace.to_json().dump(2) << "\n";
        }

        std::cout << "wrote " << entries.size() << " fixture entries ("
                  << scenario_count << " compiled-prompt scenarios) to " << dir
                  << "/mock_fixture.json and the golden ask trace\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "fixturegen failed: " << e.what() << "\n";
        return 1;
    }
}
