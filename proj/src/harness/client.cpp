// HTTP transport kept in its own translation unit: httplib is a heavy header.
#include "httplib.h"

#include <cstdlib>
#include <regex>

#include "pambench/errors.hpp"
#include "pambench/harness.hpp"
#include "pambench/json_io.hpp"

namespace pambench {
namespace {

const std::regex kUrl(R"(^(https?)://([^/\s]+)(/[^\s]*)?$)");

bool retryable_status(int status) { return status == 408 || status == 409 || status == 429 || status >= 500; }

std::optional<std::chrono::milliseconds> parse_retry_after(const httplib::Result& res) {
  if (!res->has_header("Retry-After")) return std::nullopt;
  const std::string v = res->get_header_value("Retry-After");
  char* end = nullptr;
  const double secs = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || secs < 0) return std::nullopt;
  return std::chrono::milliseconds(static_cast<long long>(secs * 1000));
}

std::string content_text(const Json& content) {
  if (content.is_string()) return content.get<std::string>();
  std::string out;
  if (content.is_array()) {
    for (const Json& p : content) {
      if (p.is_object() && p.value("type", "") == "text" && p.contains("text") && p["text"].is_string()) {
        out += p["text"].get<std::string>();
      }
    }
  }
  return out;
}

}  // namespace

void ModelEndpoint::validate() const {
  if (base_url.starts_with("mock:")) return;
  if (!std::regex_match(base_url, kUrl)) throw InvalidParams("malformed endpoint URL \"" + base_url + "\"");
  if (model.empty()) throw InvalidParams("endpoint needs a model name");
  if (max_tokens <= 0 || caption_max_tokens <= 0) throw InvalidParams("max tokens must be positive");
  if (max_retries < 0) throw InvalidParams("max retries must be non-negative");
  if (timeout.count() <= 0) throw InvalidParams("timeout must be positive");
}

std::string request_payload(const ChatRequest& req, const std::string& model) {
  Json messages = Json::array();
  for (const Turn& t : req.messages.turns) {
    Json content = Json::array();
    for (const Part& p : t.parts) {
      if (p.type == Part::Type::text) {
        content.push_back({{"type", "text"}, {"text", p.text}});
      } else {
        content.push_back(
            {{"type", "image_url"}, {"image_url", {{"url", "data:" + p.media_type + ";base64," + p.data}}}});
      }
    }
    messages.push_back({{"role", t.role}, {"content", std::move(content)}});
  }
  Json body = {{"model", model},
               {"messages", std::move(messages)},
               {"max_tokens", req.max_tokens},
               {"temperature", req.temperature}};
  return body.dump();
}

HttpChatClient::HttpChatClient(ModelEndpoint ep) : ep_(std::move(ep)) {
  ep_.validate();
  std::smatch m;
  std::regex_match(ep_.base_url, m, kUrl);
  scheme_host_ = m[1].str() + "://" + m[2].str();
  path_prefix_ = m[3].str();
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ChatResponse HttpChatClient::complete(const ChatRequest& req) {
  httplib::Client cli(scheme_host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep_.timeout);
  cli.set_connection_timeout(secs);
  cli.set_read_timeout(secs);
  cli.set_write_timeout(secs);
  httplib::Headers headers;
  if (!ep_.api_key_env.empty()) {
    const char* key = std::getenv(ep_.api_key_env.c_str());
    if (!key || !*key) throw EndpointError("environment variable " + ep_.api_key_env + " is not set", 0, false);
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = cli.Post(path_prefix_ + "/chat/completions", headers, request_payload(req, ep_.model),
                      "application/json");
  if (!res) throw EndpointError("request failed: " + httplib::to_string(res.error()), 0, true);
  if (res->status != 200) {
    throw EndpointError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300), res->status,
                        retryable_status(res->status), parse_retry_after(res));
  }
  try {
    const Json body = Json::parse(res->body);
    ChatResponse out;
    out.text = content_text(body.at("choices").at(0).at("message").at("content"));
    if (body.contains("usage") && body["usage"].is_object()) {
      out.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
      out.usage.completion_tokens = body["usage"].value("completion_tokens", 0);
    }
    return out;
  } catch (const Json::exception& e) {
    throw EndpointError(std::string("malformed response: ") + e.what(), res->status, false);
  }
}

std::unique_ptr<ChatClient> make_client(const ModelEndpoint& ep) {
  if (ep.base_url.starts_with("mock:")) {
    const std::string rest = ep.base_url.substr(5);
    if (rest == "random" || rest.starts_with("random:")) {
      std::uint64_t seed = 0;
      if (rest.size() > 7) {
        try {
          seed = std::stoull(rest.substr(7));
        } catch (const std::exception&) {
          throw InvalidParams("bad mock seed in \"" + ep.base_url + "\"");
        }
      }
      return std::make_unique<UniformRandomModel>(seed);
    }
    throw InvalidParams("unknown mock endpoint \"" + ep.base_url + "\"");
  }
  return std::make_unique<HttpChatClient>(ep);
}

}  // namespace pambench
