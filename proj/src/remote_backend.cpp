// remote_backend.cpp
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

#include "wozsynth/remote_backend.hpp"

#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "wozsynth/errors.hpp"

namespace wozsynth {

using nlohmann::json;

namespace {

[[noreturn]] void throw_status(const std::string& route, int status, const std::string& body) {
  std::string detail = body;
  try {
    json j = json::parse(body);
    if (j.is_object() && j.contains("message"))
      detail = j.value("code", std::string("error")) + ": " + j["message"].get<std::string>();
  } catch (const std::exception&) {
  }
  const std::string what = route + " returned HTTP " + std::to_string(status) + " (" + detail + ")";
  if (status == 429 || status >= 500) throw BackendError(what, true);
  throw ProtocolError(what);
}

json parse_body(const std::string& route, const std::string& body) {
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw ProtocolError(route + ": response is not a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ProtocolError(route + ": malformed response body: " + e.what());
  }
}

std::string post(const Endpoint& ep, const std::string& route, const std::string& body, int* status) {
  httplib::Client client(ep.scheme_host_port);
  const auto secs = static_cast<time_t>(ep.timeout_seconds);
  const auto usecs = static_cast<time_t>((ep.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  auto res = client.Post(ep.path_prefix + route, body, "application/json");
  if (!res)
    throw BackendError(route + ": transport failure (" + httplib::to_string(res.error()) + ")", true);
  *status = res->status;
  return res->body;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& url) {
  const auto sep = url.find("://");
  if (sep == std::string::npos) throw ConfigError("backend URL needs a scheme: '" + url + "'");
  const std::string scheme = url.substr(0, sep);
  if (scheme != "http" && scheme != "https")
    throw ConfigError("unsupported backend URL scheme '" + scheme + "'");
  const auto path = url.find('/', sep + 3);
  Endpoint ep;
  ep.scheme_host_port = url.substr(0, path);
  if (ep.scheme_host_port.size() == sep + 3) throw ConfigError("backend URL has no host: '" + url + "'");
  if (path != std::string::npos) {
    ep.path_prefix = url.substr(path);
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  }
  return ep;
}

std::string generate_request_json(const CollectorInput& input, const GenerationParams& params) {
  json j;
  j["input_text"] = input.text;
  j["top_p"] = params.top_p;
  j["temperature"] = params.temperature;
  j["max_tokens"] = params.max_tokens;
  j["seed"] = params.seed;
  return j.dump();
}

GenerationResult parse_generate_response(int status, const std::string& body) {
  if (status < 200 || status >= 300) throw_status("/generate", status, body);
  json j = parse_body("/generate", body);
  if (!j.contains("text") || !j["text"].is_string())
    throw ProtocolError("/generate: response lacks a string 'text' field");
  GenerationResult out;
  out.text = j["text"].get<std::string>();
  if (j.contains("token_logprobs") && !j["token_logprobs"].is_null()) {
    const auto& lp = j["token_logprobs"];
    if (!lp.is_array()) throw ProtocolError("/generate: 'token_logprobs' is not an array");
    std::vector<double> values;
    for (const auto& v : lp) {
      if (!v.is_number()) throw ProtocolError("/generate: non-numeric token log-probability");
      values.push_back(v.get<double>());
    }
    out.token_logprobs = std::move(values);
  }
  return out;
}

std::string score_request_json(const std::string& context, const std::string& question,
                               const std::vector<std::string>& options) {
  json j;
  j["context"] = context;
  j["question"] = question;
  j["options"] = options;
  return j.dump();
}

std::vector<double> parse_score_response(int status, const std::string& body) {
  if (status < 200 || status >= 300) throw_status("/score", status, body);
  json j = parse_body("/score", body);
  if (!j.contains("logits") || !j["logits"].is_array())
    throw ProtocolError("/score: response lacks a 'logits' array");
  std::vector<double> out;
  for (const auto& v : j["logits"]) {
    if (!v.is_number()) throw ProtocolError("/score: non-numeric logit");
    out.push_back(v.get<double>());
  }
  return out;
}

RemoteCollector::RemoteCollector(Endpoint endpoint, BackendCapabilities caps)
    : endpoint_(std::move(endpoint)), caps_(caps) {}

BackendCapabilities RemoteCollector::remote_caps() {
  BackendCapabilities caps;
  caps.max_input_symbols = kCollectorMaxSource;
  caps.returns_logprobs = true;
  caps.deterministic = false;
  return caps;
}

GenerationResult RemoteCollector::generate(const CollectorInput& input,
                                           const GenerationParams& params) const {
  int status = 0;
  std::string body = post(endpoint_, "/generate", generate_request_json(input, params), &status);
  return parse_generate_response(status, body);
}

std::vector<double> RemoteLabeler::score(const std::string& context, const std::string& question,
                                         const std::vector<std::string>& options) const {
  int status = 0;
  std::string body = post(endpoint_, "/score", score_request_json(context, question, options), &status);
  return parse_score_response(status, body);
}

}  // namespace wozsynth
