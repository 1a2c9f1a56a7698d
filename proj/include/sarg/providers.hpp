#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarg/clock.hpp"
#include "sarg/error.hpp"
#include "sarg/util.hpp"

namespace sarg {

using EmbeddingVector = std::vector<float>;

inline double l2_norm(const EmbeddingVector& v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(acc);
}

// Cosine similarity in double precision, clamped to [-1, 1]. Bitwise-equal
// inputs return exactly 1.0 so that threshold comparisons like `>= 1.0`
// behave as expected for identical vectors.
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size() || a.empty())
        throw Error(ErrorCode::InvalidArgument, "cosine: dimension mismatch");
    if (a == b) return 1.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a[i], y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    double denom = std::sqrt(na) * std::sqrt(nb);
    if (denom < 1e-30) return 0.0;
    return std::clamp(dot / denom, -1.0, 1.0);
}

struct GenerationRequest {
    std::string system_text;
    std::string user_text;
    double temperature = 0.0;
    int max_tokens = 1024;

    void validate() const {
        if (trim(user_text).empty())
            throw Error(ErrorCode::InvalidArgument, "generation request has empty user_text");
        if (temperature < 0.0)
            throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
        if (max_tokens <= 0)
            throw Error(ErrorCode::InvalidArgument, "max_tokens must be positive");
    }
};

struct ProviderConfig {
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var = "SARG_API_KEY";
    double timeout_s = 30.0;
    int retry_count = 2;
    double backoff_base_s = 0.5;

    void validate() const {
        if (retry_count < 0 || retry_count > 5)
            throw Error(ErrorCode::InvalidArgument, "retry_count must be in [0, 5]");
        if (timeout_s <= 0.0)
            throw Error(ErrorCode::InvalidArgument, "timeout must be > 0");
        if (backoff_base_s < 0.0)
            throw Error(ErrorCode::InvalidArgument, "backoff base must be >= 0");
    }
};

// Text embedding interface. Implementations are immutable after construction
// and safe for concurrent calls.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;

    // Pointwise batched form; a failing element aborts the whole batch.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed(t));
        return out;
    }
};

// Chat-style text generation interface.
class Generator {
public:
    virtual ~Generator() = default;
    virtual std::string generate(const GenerationRequest& req) const = 0;
};

// Deterministic offline embedder: whitespace tokens are hashed to seeds for a
// splitmix64-driven gaussian draw, the resulting unit vectors averaged and
// re-normalized. Identical token multisets embed identically (tokens are
// sorted before accumulation, so summation order is fixed).
class MockEmbedder final : public Embedder {
public:
    explicit MockEmbedder(std::size_t dim = 384, std::uint64_t seed = 42)
        : dim_(dim), seed_(seed) {
        if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be > 0");
    }

    std::size_t dimension() const override { return dim_; }

    EmbeddingVector embed(std::string_view text) const override {
        if (trim(text).empty())
            throw Error(ErrorCode::EmptyInput, "embed: text empty after trimming");
        std::vector<std::string> tokens = split_whitespace(text);
        std::sort(tokens.begin(), tokens.end());

        std::vector<double> acc(dim_, 0.0);
        for (const auto& tok : tokens) {
            std::vector<double> tv = token_vector(tok);
            for (std::size_t i = 0; i < dim_; ++i) acc[i] += tv[i];
        }
        for (double& x : acc) x /= static_cast<double>(tokens.size());
        normalize(acc);

        EmbeddingVector out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i]);
        // one re-normalization pass over the rounded floats keeps the norm
        // within 1e-6 of 1.0
        double n = l2_norm(out);
        if (n > 0.0)
            for (float& x : out) x = static_cast<float>(static_cast<double>(x) / n);
        return out;
    }

private:
    std::vector<double> token_vector(const std::string& token) const {
        SplitMix64 rng(fnv1a_64(token) ^ SplitMix64(seed_).next());
        std::vector<double> v(dim_, 0.0);
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        for (std::size_t i = 0; i < dim_; i += 2) {
            double u1 = rng.next_unit();
            double u2 = rng.next_unit();
            double r = std::sqrt(-2.0 * std::log(u1));
            v[i] = r * std::cos(kTwoPi * u2);
            if (i + 1 < dim_) v[i + 1] = r * std::sin(kTwoPi * u2);
        }
        normalize(v);
        return v;
    }

    static void normalize(std::vector<double>& v) {
        double acc = 0.0;
        for (double x : v) acc += x * x;
        double n = std::sqrt(acc);
        if (n > 0.0)
            for (double& x : v) x /= n;
    }

    std::size_t dim_;
    std::uint64_t seed_;
};

// Fixture-scripted generator. Responses are keyed by the 64-bit FNV-1a hash
// of the request's user_text; the on-disk form is a JSON map from the hash
// rendered as 16 lowercase hex chars to the response text.
class MockGenerator final : public Generator {
public:
    MockGenerator() = default;

    static MockGenerator from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoError, "cannot open mock fixture: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::IoError, "mock fixture is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object())
            throw Error(ErrorCode::FormatError, "mock fixture must be a JSON object");
        MockGenerator g;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            bool hex16 = key.size() == 16 &&
                         std::all_of(key.begin(), key.end(), [](char c) {
                             return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                         });
            if (!hex16)
                throw Error(ErrorCode::FormatError,
                            "mock fixture keys must be 16 lowercase hex chars, got: " + key);
            if (!it.value().is_string())
                throw Error(ErrorCode::FormatError, "mock fixture values must be strings");
            g.responses_[parse_hex64(key)] = it.value().get<std::string>();
        }
        return g;
    }

    // Test/tooling helper: script a response for a prompt before sharing the
    // instance. Not thread safe; providers are immutable once in use.
    void script(std::string_view user_text, std::string response) {
        responses_[fnv1a_64(user_text)] = std::move(response);
    }

    bool has_script_for(std::string_view user_text) const {
        return responses_.count(fnv1a_64(user_text)) > 0;
    }

    std::size_t script_count() const { return responses_.size(); }

    std::string generate(const GenerationRequest& req) const override {
        req.validate();
        auto it = responses_.find(fnv1a_64(req.user_text));
        if (it == responses_.end())
            throw Error(ErrorCode::ResponseEmpty,
                        "no scripted response for prompt hash " + to_hex16(fnv1a_64(req.user_text)));
        return it->second;
    }

private:
    std::unordered_map<std::uint64_t, std::string> responses_;
};

// Per-query decorators that charge deterministic costs to a virtual clock.
class TickingEmbedder final : public Embedder {
public:
    TickingEmbedder(std::shared_ptr<const Embedder> inner, VirtualClock* clock)
        : inner_(std::move(inner)), clock_(clock) {}

    EmbeddingVector embed(std::string_view text) const override {
        if (clock_) clock_->tick(kMockEmbedCostUs);
        return inner_->embed(text);
    }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override {
        if (clock_) clock_->tick(kMockEmbedCostUs * texts.size());
        return inner_->embed_batch(texts);
    }

    std::size_t dimension() const override { return inner_->dimension(); }

private:
    std::shared_ptr<const Embedder> inner_;
    VirtualClock* clock_;
};

class TickingGenerator final : public Generator {
public:
    TickingGenerator(std::shared_ptr<const Generator> inner, VirtualClock* clock)
        : inner_(std::move(inner)), clock_(clock) {}

    std::string generate(const GenerationRequest& req) const override {
        if (clock_) clock_->tick(kMockGenerateCostUs);
        return inner_->generate(req);
    }

private:
    std::shared_ptr<const Generator> inner_;
    VirtualClock* clock_;
};

} // namespace sarg
