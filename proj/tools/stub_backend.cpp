// Copyright 2026 The facesweep Authors
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

// The stub recognizer behind the external-backend line protocol. Reads
// {"op":"embed","image":"<path>"} requests from stdin and answers each with
// {"embedding":[...]} holding the unnormalized stub features, or {"error":...}.

#include <iostream>
#include <string>

#include "json.hpp"

#include "facesweep/error.hpp"
#include "facesweep/recognizer.hpp"
#include "facesweep/render.hpp"

int main() {
  std::ios::sync_with_stdio(false);
  std::string line;
  while (std::getline(std::cin, line)) {
    nlohmann::json reply;
    try {
      const auto request = nlohmann::json::parse(line);
      if (request.value("op", "") != "embed" || !request.contains("image")) {
        reply = {{"error", "expected {\"op\":\"embed\",\"image\":...}"}};
      } else {
        const auto features = facesweep::stub_features(facesweep::read_pnm(request["image"].get<std::string>()));
        reply = {{"embedding", std::vector<double>(features.data(), features.data() + features.size())}};
      }
    } catch (const std::exception& e) {
      reply = {{"error", e.what()}};
    }
    std::cout << reply.dump() << "\n" << std::flush;
  }
  return 0;
}
