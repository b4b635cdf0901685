// remote_backend.hpp
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
//
// HTTP clients for an external model service.
//
//   POST /generate  {input_text, top_p, temperature, max_tokens, seed}
//                   -> {text, token_logprobs?}
//   POST /score     {context, question, options} -> {logits}
//
// Non-2xx responses carry {code, message}. Transport failures, 429 and 5xx
// are retryable; other statuses and malformed bodies raise ProtocolError.

#pragma once

#include <string>
#include <vector>

#include "wozsynth/collector.hpp"
#include "wozsynth/labeler.hpp"

namespace wozsynth {

struct Endpoint {
  std::string scheme_host_port;  // "http://127.0.0.1:8000"
  std::string path_prefix;       // "" or "/v1"
  double timeout_seconds = 120.0;

  // Throws ConfigError on anything but http(s)://host[:port][/prefix].
  static Endpoint parse(const std::string& url);
};

// Request/response bodies, exposed for contract tests.
std::string generate_request_json(const CollectorInput& input, const GenerationParams& params);
GenerationResult parse_generate_response(int status, const std::string& body);
std::string score_request_json(const std::string& context, const std::string& question,
                               const std::vector<std::string>& options);
std::vector<double> parse_score_response(int status, const std::string& body);

class RemoteCollector : public CollectorBackend {
 public:
  explicit RemoteCollector(Endpoint endpoint, BackendCapabilities caps = remote_caps());

  BackendCapabilities capabilities() const override { return caps_; }
  GenerationResult generate(const CollectorInput& input,
                            const GenerationParams& params) const override;

  static BackendCapabilities remote_caps();

 private:
  Endpoint endpoint_;
  BackendCapabilities caps_;
};

class RemoteLabeler : public LabelerBackend {
 public:
  explicit RemoteLabeler(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::vector<double> score(const std::string& context, const std::string& question,
                            const std::vector<std::string>& options) const override;

 private:
  Endpoint endpoint_;
};

}  // namespace wozsynth
