#pragma once

#include <memory>

#include "sarg/compile.hpp"
#include "sarg/providers.hpp"
#include "sarg/remote.hpp"
#include "sarg/run_config.hpp"

namespace sarg {

// Builds the provider bundle for a run. Mock mode pairs the deterministic
// embedder/generator with the virtual clock; remote mode wires the HTTP
// adapters, with the optional remote direction classifier falling back to
// the rule baseline when unset.
inline PipelineProviders make_providers(const RunConfig& cfg) {
    cfg.validate();
    PipelineProviders p;
    if (cfg.mock) {
        p.embedder =
            std::make_shared<MockEmbedder>(static_cast<std::size_t>(cfg.embed_dim), cfg.seed);
        auto gen = std::make_shared<MockGenerator>();
        if (!cfg.fixture_path.empty()) *gen = MockGenerator::from_file(cfg.fixture_path);
        p.generator = gen;
        p.deterministic_clock = true;
        return p;
    }
    if (cfg.endpoint_url.empty())
        throw Error(ErrorCode::InputError,
                    "no endpoint configured; set endpoint_url or pass --mock");
    if (cfg.embed_endpoint.empty())
        throw Error(ErrorCode::InputError,
                    "no embedding endpoint configured; set embed_endpoint or pass --mock");
    ProviderConfig base = cfg.provider_config();

    ProviderConfig embed_cfg = base;
    embed_cfg.endpoint_url = cfg.embed_endpoint;
    embed_cfg.model_name = cfg.embed_model;
    p.embedder =
        std::make_shared<RemoteEmbedder>(embed_cfg, static_cast<std::size_t>(cfg.embed_dim));

    p.generator = std::make_shared<RemoteGenerator>(base);

    if (!cfg.classifier_endpoint.empty()) {
        ProviderConfig cls_cfg = base;
        cls_cfg.endpoint_url = cfg.classifier_endpoint;
        cls_cfg.model_name = cfg.classifier_model;
        p.classifier = std::make_shared<RemoteDirectionClassifier>(cls_cfg);
    }
    return p;
}

} // namespace sarg
