// Copyright 2026 The Labelopt Authors
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

#ifndef LABELOPT_SERVICE_HPP_
#define LABELOPT_SERVICE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "json.hpp"
#include "labelopt/error.hpp"
#include "labelopt/pipeline.hpp"

namespace httplib {
class Server;
}

namespace labelopt {

struct ServiceOptions {
  std::filesystem::path data_dir;
  // Truth file (`id,truth`) enabling simulation: queue auto-answering and
  // accuracy in the metrics.
  std::optional<std::filesystem::path> simulate_truth;
};

// Labelling sessions over OpalRun. Every mutation is persisted as a JSON
// snapshot under data_dir/sessions before it is acknowledged.
class LabelService {
 public:
  using Json = nlohmann::ordered_json;

  explicit LabelService(ServiceOptions options);
  ~LabelService();

  Json CreateSession(const Json& request);
  Json GetSession(const std::string& id) const;
  Json Queue(const std::string& id, std::optional<long long> limit) const;
  Json SubmitLabels(const std::string& id, const Json& body);
  Json Advance(const std::string& id);
  Json Metrics(const std::string& id) const;
  Json Report(const std::string& id) const;
  // Answers the pending queue from the simulation truth.
  Json Simulate(const std::string& id);

  size_t session_count() const;
  bool simulating() const { return options_.simulate_truth.has_value(); }

  // Registers the HTTP routes; errors map to 4xx JSON bodies.
  void Mount(httplib::Server& server);

 private:
  struct Session;
  std::shared_ptr<Session> Find(const std::string& id) const;
  std::shared_ptr<Session> Build(const std::string& id, const Json& request) const;
  void Persist(const Session& session) const;
  void LoadSnapshots();
  Json StateJson(const Session& session) const;

  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long long next_id_ = 1;
};

int HttpStatusFor(ErrorCode code);

}  // namespace labelopt

#endif  // LABELOPT_SERVICE_HPP_
