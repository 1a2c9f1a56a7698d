#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sarg/error.hpp"
#include "sarg/providers.hpp"
#include "sarg/query_analysis.hpp"

namespace sarg {

namespace detail {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path; // leading slash, "/" when absent
};

inline ParsedUrl parse_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "endpoint URL must include a scheme: " + url);
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline httplib::Headers auth_headers(const ProviderConfig& cfg) {
    httplib::Headers headers;
    if (!cfg.api_key_env_var.empty()) {
        if (const char* key = std::getenv(cfg.api_key_env_var.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    return headers;
}

// POSTs a JSON body with retry and exponential backoff (base doubling per
// attempt). Any transport failure or non-200 status is retried; exhausting
// the budget raises ProviderUnavailable.
inline nlohmann::json post_json(const ProviderConfig& cfg, const std::string& url,
                                const nlohmann::json& body) {
    cfg.validate();
    ParsedUrl parsed = parse_url(url);
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= cfg.retry_count; ++attempt) {
        if (attempt > 0) {
            double delay_s = cfg.backoff_base_s * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
        }
        httplib::Client client(parsed.base);
        client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
        auto res = client.Post(parsed.path, auth_headers(cfg), body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("invalid JSON response: ") + e.what();
        }
    }
    throw Error(ErrorCode::ProviderUnavailable,
                url + " failed after " + std::to_string(cfg.retry_count + 1) +
                    " attempts (" + last_error + ")");
}

} // namespace detail

// Chat-completion-style HTTP generator: single system + single user message,
// response text taken from the first choice.
class RemoteGenerator final : public Generator {
public:
    explicit RemoteGenerator(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    std::string generate(const GenerationRequest& req) const override {
        req.validate();
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        auto messages = nlohmann::json::array();
        if (!req.system_text.empty())
            messages.push_back({{"role", "system"}, {"content", req.system_text}});
        messages.push_back({{"role", "user"}, {"content", req.user_text}});
        body["messages"] = std::move(messages);
        body["temperature"] = req.temperature;
        body["max_tokens"] = req.max_tokens;

        nlohmann::json res = detail::post_json(cfg_, cfg_.endpoint_url, body);
        try {
            const auto& choices = res.at("choices");
            if (!choices.is_array() || choices.empty())
                throw Error(ErrorCode::ResponseEmpty, "response has no choices");
            std::string text = choices[0].at("message").at("content").get<std::string>();
            if (text.empty()) throw Error(ErrorCode::ResponseEmpty, "response text is empty");
            return text;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ResponseEmpty,
                        std::string("malformed completion response: ") + e.what());
        }
    }

private:
    ProviderConfig cfg_;
};

// Embeddings-API-style HTTP embedder. Returned vectors are re-normalized to
// unit length; the dimension is fixed by the first response and enforced on
// every later call.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(ProviderConfig cfg, std::size_t expected_dim = 0)
        : cfg_(std::move(cfg)), dim_(expected_dim) {
        cfg_.validate();
    }

    std::size_t dimension() const override { return dim_.load(); }

    EmbeddingVector embed(std::string_view text) const override {
        return embed_batch({std::string(text)})[0];
    }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override {
        for (const auto& t : texts)
            if (trim(t).empty()) throw Error(ErrorCode::EmptyInput, "embed: text empty after trimming");
        if (texts.empty()) return {};

        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["input"] = texts;
        nlohmann::json res = detail::post_json(cfg_, cfg_.endpoint_url, body);

        std::vector<EmbeddingVector> out;
        try {
            const auto& data = res.at("data");
            if (!data.is_array() || data.size() != texts.size())
                throw Error(ErrorCode::EmbeddingFailure, "embedding count mismatch");
            for (const auto& item : data)
                out.push_back(item.at("embedding").get<EmbeddingVector>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::EmbeddingFailure,
                        std::string("malformed embedding response: ") + e.what());
        }
        for (auto& v : out) {
            double n = l2_norm(v);
            if (v.empty() || n < 1e-12)
                throw Error(ErrorCode::EmbeddingFailure, "provider returned a degenerate vector");
            for (float& x : v) x = static_cast<float>(static_cast<double>(x) / n);
            std::size_t expected = dim_.load();
            if (expected == 0)
                dim_.store(v.size());
            else if (v.size() != expected)
                throw Error(ErrorCode::EmbeddingFailure,
                            "provider changed embedding dimension mid-instance");
        }
        return out;
    }

private:
    ProviderConfig cfg_;
    mutable std::atomic<std::size_t> dim_;
};

// Adapter for any probability-emitting direction endpoint. Request carries
// the query, the response maps class names to probabilities; argmax wins
// with ties resolved in the fixed priority order backward, forward,
// bidirectional.
class RemoteDirectionClassifier final : public DirectionClassifier {
public:
    explicit RemoteDirectionClassifier(ProviderConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
    }

    Direction classify(const std::string& query) const override {
        if (trim(query).empty()) throw Error(ErrorCode::EmptyInput, "query is empty");
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["input"] = query;
        nlohmann::json res = detail::post_json(cfg_, cfg_.endpoint_url, body);
        double pf = 0.0, pb = 0.0, pbi = 0.0;
        try {
            const auto& probs = res.at("probabilities");
            pf = probs.at("forward").get<double>();
            pb = probs.at("backward").get<double>();
            pbi = probs.at("bidirectional").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ProviderUnavailable,
                        std::string("malformed classifier response: ") + e.what());
        }
        Direction best = Direction::Backward;
        double best_p = pb;
        if (pf > best_p) {
            best = Direction::Forward;
            best_p = pf;
        }
        if (pbi > best_p) best = Direction::Bidirectional;
        return best;
    }

private:
    ProviderConfig cfg_;
};

} // namespace sarg
