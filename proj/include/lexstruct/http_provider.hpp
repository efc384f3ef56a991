// Copyright 2026 The lexstruct Authors.
//
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

// OpenAI-compatible chat-completions provider (also spoken by Mistral).
// https endpoints need CPPHTTPLIB_OPENSSL_SUPPORT and OpenSSL at link time.

#ifndef LEXSTRUCT_HTTP_PROVIDER_HPP_
#define LEXSTRUCT_HTTP_PROVIDER_HPP_

#include <cstdlib>
#include <memory>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "lexstruct/triples.hpp"

namespace lexstruct {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // request path, e.g. /v1/chat/completions
};

inline Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "endpoint '" + url + "' has no scheme");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::ConfigError, "endpoint scheme '" + scheme + "' is not http(s)");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.base = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  if (path.size() < 17 || path.substr(path.size() - 17) != "/chat/completions") path += "/chat/completions";
  e.path = path;
  return e;
}

class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderSpec spec) : spec_(std::move(spec)), endpoint_(parse_endpoint(spec_.endpoint)) {}

  const ProviderSpec& spec() const override { return spec_; }

  std::string complete(const ProviderRequest& request) override {
    std::string key;
    if (!spec_.auth_env.empty()) {
      const char* v = std::getenv(spec_.auth_env.c_str());
      if (!v || !*v) {
        throw ProviderFailure("environment variable " + spec_.auth_env + " is not set", false);
      }
      key = v;
    }
    nlohmann::json body;
    body["model"] = spec_.model;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
    if (spec_.temperature) body["temperature"] = *spec_.temperature;
    if (spec_.max_tokens) body["max_tokens"] = *spec_.max_tokens;

    httplib::Client client(endpoint_.base);
    client.set_connection_timeout(spec_.timeout_s, 0);
    client.set_read_timeout(spec_.timeout_s, 0);
    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
    auto res = client.Post(endpoint_.path, headers, body.dump(), "application/json");
    if (!res) {
      throw ProviderFailure("transport error: " + httplib::to_string(res.error()), true);
    }
    const int status = res->status;
    if (status == 401 || status == 403) throw ProviderFailure("authentication rejected (HTTP " + std::to_string(status) + ")", false);
    if (status == 429) throw ProviderFailure("rate limited (HTTP 429)", true);
    if (status >= 500) throw ProviderFailure("server error (HTTP " + std::to_string(status) + ")", true);
    if (status != 200) throw ProviderFailure("unexpected HTTP " + std::to_string(status), false);
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ProviderFailure("malformed completion payload", false);
    }
  }

 private:
  ProviderSpec spec_;
  Endpoint endpoint_;
};

inline std::unique_ptr<Provider> make_provider(const ProviderSpec& spec, std::shared_ptr<const GroundTruth> truth) {
  if (spec.kind == "mock") return std::make_unique<MockProvider>(spec, std::move(truth));
  return std::make_unique<HttpProvider>(spec);
}

}  // namespace lexstruct

#endif  // LEXSTRUCT_HTTP_PROVIDER_HPP_
