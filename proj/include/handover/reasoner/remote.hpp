#pragma once

// Chat-completions client. The prompt carries TD, SI and OS sections; the
// reply must be a JSON object satisfying OS. Invalid replies are sent back
// with the violations for repair, up to `retries` times.

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdlib>
#include <string>

#include "handover/reasoner/query.hpp"

namespace handover::reasoner {

struct RemoteConfig {
  std::string endpoint;  // full URL, e.g. https://host/v1/chat/completions
  std::string api_key;
  std::string model{"gpt-4o-2024-11-20"};
  double temperature{0.0};
  int retries{3};
  int timeout_s{60};

  /// Overrides endpoint, key and model from LLM_ENDPOINT, LLM_API_KEY, LLM_MODEL.
  RemoteConfig with_env() const {
    RemoteConfig c = *this;
    if (const char* v = std::getenv("LLM_ENDPOINT")) c.endpoint = v;
    if (const char* v = std::getenv("LLM_API_KEY")) c.api_key = v;
    if (const char* v = std::getenv("LLM_MODEL")) c.model = v;
    return c;
  }
};

namespace detail {

struct Url {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || (url.compare(0, scheme, "http") != 0 && url.compare(0, scheme, "https") != 0)) {
    throw InputError("LLM endpoint must be an http(s) URL, got '" + url + "'");
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

/// Drops a surrounding ``` fence if the model added one.
inline std::string strip_fence(std::string s) {
  auto trim = [](std::string& t) {
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    std::size_t i = 0;
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
    t.erase(0, i);
  };
  trim(s);
  if (s.rfind("```", 0) == 0) {
    const auto nl = s.find('\n');
    s = nl == std::string::npos ? "" : s.substr(nl + 1);
    if (s.size() >= 3 && s.compare(s.size() - 3, 3, "```") == 0) s.resize(s.size() - 3);
    trim(s);
  }
  return s;
}

}  // namespace detail

class RemoteReasoner : public Reasoner {
 public:
  explicit RemoteReasoner(RemoteConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw InputError("remote reasoner: LLM_ENDPOINT is not set");
    if (config_.retries < 0) throw InputError("remote reasoner: retries must be non-negative");
    url_ = detail::split_url(config_.endpoint);
  }

  std::string_view name() const override { return "remote"; }
  const RemoteConfig& config() const noexcept { return config_; }

  Answer answer(const ReasonerQuery& q) override {
    const Prompt prompt = render_prompt(q);
    json messages = json::array({{{"role", "system"}, {"content", prompt.system}},
                                 {{"role", "user"}, {"content", prompt.user}}});
    Answer out;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      const std::string content = post(q, messages);
      Attempt a{content, {}};
      json value;
      try {
        value = json::parse(detail::strip_fence(content));
        if (!value.is_object()) a.violations.push_back("$: reply is not a JSON object");
      } catch (const json::parse_error&) {
        a.violations.push_back("$: reply is not valid JSON");
      }
      if (a.violations.empty()) a.violations = check_response(q, value);
      out.attempts.push_back(a);
      if (a.violations.empty()) {
        out.value = std::move(value);
        return out;
      }
      std::string list;
      for (const auto& v : a.violations) list += "- " + v + "\n";
      messages.push_back({{"role", "assistant"}, {"content", content}});
      messages.push_back({{"role", "user"}, {"content", fill_template(resources::kRepairTemplate, {{"violations", list}})}});
    }
    std::string message = "no valid " + std::string(to_string(q.kind)) + " answer after " +
                          std::to_string(config_.retries) + " retries; last problem: " +
                          out.attempts.back().violations.front();
    throw AttemptsExhaustedError(std::move(message), std::move(out.attempts));
  }

 private:
  std::string post(const ReasonerQuery& q, const json& messages) const {
    json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["messages"] = messages;
    body["response_format"] = {{"type", "json_schema"},
                               {"json_schema", {{"name", std::string(to_string(q.kind))}, {"schema", q.output_schema}}}};

    httplib::Client client(url_.base);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_write_timeout(config_.timeout_s, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(url_.path, headers, body.dump(), "application/json");
    if (!res) throw NetworkError("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw NetworkError("endpoint answered HTTP " + std::to_string(res->status));
    }
    try {
      const auto envelope = json::parse(res->body);
      return envelope.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw NetworkError(std::string("malformed chat response envelope: ") + e.what());
    }
  }

  RemoteConfig config_;
  detail::Url url_;
};

}  // namespace handover::reasoner
