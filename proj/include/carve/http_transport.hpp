// Copyright 2026 The Carve Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CARVE_HTTP_TRANSPORT_HPP_
#define CARVE_HTTP_TRANSPORT_HPP_

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "carve/error.hpp"
#include "carve/gateway.hpp"

namespace carve {

// Live chat-completion transport. The API key comes from the environment
// only (OPENAI_API_KEY); it is checked before any network activity.
class HttpTransport : public Transport {
  public:
    static constexpr const char* kApiKeyEnv = "OPENAI_API_KEY";

    TransportReply send(const PromptPair& prompt, const ModelConfig& config) override {
        const char* key = std::getenv(kApiKeyEnv);
        if (!key || !*key)
            throw ConfigError(std::string("missing API key: set ") + kApiKeyEnv);

        nlohmann::json body = {
            {"model", config.model},
            {"messages",
             {{{"role", "system"}, {"content", prompt.system}},
              {{"role", "user"}, {"content", prompt.user}}}},
            {"temperature", config.temperature},
        };
        if (config.max_tokens > 0) body["max_tokens"] = config.max_tokens;

        httplib::Client client(config.api_base);
        client.set_connection_timeout(std::chrono::duration<double>(config.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(config.timeout_seconds));
        client.set_write_timeout(std::chrono::duration<double>(config.timeout_seconds));
        httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

        auto res = client.Post(config.api_path, headers, body.dump(), "application/json");
        if (!res)
            throw TransportError("connection to " + config.api_base + " failed: " +
                                     httplib::to_string(res.error()),
                                 /*transient=*/true);
        if (res->status == 429 || res->status >= 500)
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body,
                                 /*transient=*/true);
        if (res->status != 200)
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body,
                                 /*transient=*/false);

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw TransportError(std::string("bad completion payload: ") + e.what(),
                                 /*transient=*/false);
        }
        TransportReply reply;
        try {
            reply.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw TransportError("completion payload has no message content",
                                 /*transient=*/false);
        }
        if (doc.contains("usage")) {
            const auto& usage = doc["usage"];
            if (usage.contains("prompt_tokens"))
                reply.input_tokens = usage["prompt_tokens"].get<int64_t>();
            if (usage.contains("completion_tokens"))
                reply.output_tokens = usage["completion_tokens"].get<int64_t>();
        }
        return reply;
    }
};

}  // namespace carve

#endif  // CARVE_HTTP_TRANSPORT_HPP_
