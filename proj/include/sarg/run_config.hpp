#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "sarg/compile.hpp"
#include "sarg/error.hpp"
#include "sarg/providers.hpp"
#include "sarg/query_analysis.hpp"

namespace sarg {

// Aggregated run configuration. Precedence is CLI flags > config file >
// built-in defaults; unknown config-file keys are rejected.
struct RunConfig {
    // providers
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var = "SARG_API_KEY";
    double timeout_s = 30.0;
    int retry_count = 2;
    double backoff_base_s = 0.5;
    std::string embed_endpoint; // remote embedding endpoint (required unless mock)
    std::string embed_model;
    std::string classifier_endpoint; // empty -> rule baseline
    std::string classifier_model;
    bool mock = false;
    std::string fixture_path; // mock generator script file
    int embed_dim = 384;
    // pipeline
    double tau = 0.55;
    double merge_threshold = 0.90;
    int beam_width = 3;
    int max_depth = 4;
    int top_k_chains = 3;
    int top_m_keyphrases = 5;
    int max_start_nodes = 5;
    std::string schema = "reasoning";      // reasoning | spo
    std::string serialization = "chains";  // chains | flat
    std::string traversal = "targeted";    // targeted | blind
    std::uint64_t seed = 42;
    int jobs = 1;

    void validate() const {
        if (tau <= 0.0 || tau > 1.0) throw Error(ErrorCode::InputError, "tau must be in (0, 1]");
        if (merge_threshold < 0.0 || merge_threshold > 1.0)
            throw Error(ErrorCode::InputError, "merge_threshold must be in [0, 1]");
        if (beam_width < 1) throw Error(ErrorCode::InputError, "beam_width must be >= 1");
        if (max_depth < 1) throw Error(ErrorCode::InputError, "max_depth must be >= 1");
        if (top_k_chains < 1) throw Error(ErrorCode::InputError, "top_k_chains must be >= 1");
        if (top_m_keyphrases < 1) throw Error(ErrorCode::InputError, "top_m must be >= 1");
        if (max_start_nodes < 1) throw Error(ErrorCode::InputError, "max_start_nodes must be >= 1");
        if (embed_dim < 1) throw Error(ErrorCode::InputError, "embed_dim must be >= 1");
        if (jobs < 1) throw Error(ErrorCode::InputError, "jobs must be >= 1");
        if (schema != "reasoning" && schema != "spo")
            throw Error(ErrorCode::InputError, "schema must be 'reasoning' or 'spo'");
        if (serialization != "chains" && serialization != "flat")
            throw Error(ErrorCode::InputError, "serialization must be 'chains' or 'flat'");
        if (traversal != "targeted" && traversal != "blind")
            throw Error(ErrorCode::InputError, "traversal must be 'targeted' or 'blind'");
        if (retry_count < 0 || retry_count > 5)
            throw Error(ErrorCode::InputError, "retry_count must be in [0, 5]");
        if (timeout_s <= 0.0) throw Error(ErrorCode::InputError, "timeout must be > 0");
    }

    ProviderConfig provider_config() const {
        ProviderConfig p;
        p.endpoint_url = endpoint_url;
        p.model_name = model_name;
        p.api_key_env_var = api_key_env_var;
        p.timeout_s = timeout_s;
        p.retry_count = retry_count;
        p.backoff_base_s = backoff_base_s;
        return p;
    }

    PipelineOptions pipeline_options() const {
        PipelineOptions o;
        o.schema = schema == "spo" ? Schema::Spo : Schema::Reasoning;
        o.flat_serialization = serialization == "flat";
        o.blind_traversal = traversal == "blind";
        o.tau = tau;
        o.merge_threshold = merge_threshold;
        o.beam_width = beam_width;
        o.max_depth = max_depth;
        o.top_k_chains = top_k_chains;
        o.top_m_keyphrases = top_m_keyphrases;
        o.max_start_nodes = max_start_nodes;
        return o;
    }

    void apply_json(const nlohmann::json& j) {
        if (!j.is_object()) throw Error(ErrorCode::InputError, "config must be a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            const auto& v = it.value();
            try {
                if (key == "endpoint_url") endpoint_url = v.get<std::string>();
                else if (key == "model_name") model_name = v.get<std::string>();
                else if (key == "api_key_env_var") api_key_env_var = v.get<std::string>();
                else if (key == "timeout_s") timeout_s = v.get<double>();
                else if (key == "retry_count") retry_count = v.get<int>();
                else if (key == "backoff_base_s") backoff_base_s = v.get<double>();
                else if (key == "embed_endpoint") embed_endpoint = v.get<std::string>();
                else if (key == "embed_model") embed_model = v.get<std::string>();
                else if (key == "classifier_endpoint") classifier_endpoint = v.get<std::string>();
                else if (key == "classifier_model") classifier_model = v.get<std::string>();
                else if (key == "mock") mock = v.get<bool>();
                else if (key == "fixture_path") fixture_path = v.get<std::string>();
                else if (key == "embed_dim") embed_dim = v.get<int>();
                else if (key == "tau") tau = v.get<double>();
                else if (key == "merge_threshold") merge_threshold = v.get<double>();
                else if (key == "beam_width") beam_width = v.get<int>();
                else if (key == "max_depth") max_depth = v.get<int>();
                else if (key == "top_k_chains") top_k_chains = v.get<int>();
                else if (key == "top_m_keyphrases") top_m_keyphrases = v.get<int>();
                else if (key == "max_start_nodes") max_start_nodes = v.get<int>();
                else if (key == "schema") schema = v.get<std::string>();
                else if (key == "serialization") serialization = v.get<std::string>();
                else if (key == "traversal") traversal = v.get<std::string>();
                else if (key == "seed") seed = v.get<std::uint64_t>();
                else if (key == "jobs") jobs = v.get<int>();
                else throw Error(ErrorCode::InputError, "unknown config key: " + key);
            } catch (const Error&) {
                throw;
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::InputError,
                            "bad value for config key '" + key + "': " + e.what());
            }
        }
    }

    void load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::InputError, "cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InputError, std::string("config is not valid JSON: ") + e.what());
        }
        apply_json(j);
    }
};

} // namespace sarg
