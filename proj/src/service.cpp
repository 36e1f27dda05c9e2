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

#include "labelopt/service.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "httplib.h"
#include "labelopt/csv.hpp"
#include "labelopt/error.hpp"
#include "labelopt/io.hpp"

namespace labelopt {

namespace fs = std::filesystem;
using Json = LabelService::Json;

struct LabelService::Session {
  std::string id;
  Json request;
  std::string mode;
  std::shared_ptr<const Dataset> dataset;
  std::optional<OpalRun> run;
  mutable std::shared_mutex mutex;
};

namespace {

template <typename T>
T Field(const Json& request, const char* key, T fallback) {
  if (!request.contains(key) || request.at(key).is_null()) return fallback;
  try {
    return request.at(key).get<T>();
  } catch (const Json::exception&) {
    Fail(ErrorCode::kConfig, std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<fs::path> Paths(const Json& request, const char* key) {
  std::vector<fs::path> out;
  for (const auto& s : Field(request, key, std::vector<std::string>{})) out.emplace_back(s);
  return out;
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kFailedPrecondition: return 409;
    case ErrorCode::kOracle: return 422;
    case ErrorCode::kIo: return 400;
    default: return 400;
  }
}

LabelService::LabelService(ServiceOptions options) : options_(std::move(options)) {
  fs::create_directories(options_.data_dir / "sessions");
  LoadSnapshots();
}

LabelService::~LabelService() = default;

std::shared_ptr<LabelService::Session> LabelService::Build(const std::string& id,
                                                           const Json& request) const {
  Require(request.is_object(), ErrorCode::kConfig, "session request must be a JSON object");
  auto session = std::make_shared<Session>();
  session->id = id;
  session->request = request;
  session->mode = Field<std::string>(request, "mode", "opal");
  Require(session->mode == "opal" || session->mode == "opal-al", ErrorCode::kConfig,
          "mode must be opal or opal-al");

  const std::string dataset_path = Field<std::string>(request, "dataset", "");
  Require(!dataset_path.empty(), ErrorCode::kConfig, "request needs 'dataset'");
  std::optional<fs::path> features;
  if (request.contains("features")) features = Field<std::string>(request, "features", "");
  const std::vector<fs::path> predictions = Paths(request, "predictions");

  LabelAlphabet alphabet;
  if (request.contains("alphabet")) {
    alphabet = LabelAlphabet(Field(request, "alphabet", std::vector<std::string>{}));
  } else {
    std::vector<std::string> tokens = io::CollectTruthLabels(dataset_path);
    for (auto& t : io::CollectPredictionLabels(predictions)) tokens.push_back(std::move(t));
    alphabet = io::InferAlphabet(std::move(tokens));
  }
  // Truth in the dataset file is never used unless simulating, and then only
  // from the simulation truth file.
  Dataset loaded = io::StripTruth(io::LoadDataset(dataset_path, features, alphabet));
  if (options_.simulate_truth) {
    const auto truth = io::LoadLabels(*options_.simulate_truth, alphabet);
    std::vector<Element> elements = loaded.elements();
    for (Element& e : elements) {
      auto it = truth.find(e.id);
      if (it != truth.end()) e.truth = it->second;
    }
    loaded = Dataset(std::move(elements), alphabet);
  }
  session->dataset = std::make_shared<const Dataset>(std::move(loaded));

  OpalConfig config;
  config.alpha = Field(request, "alpha", 1.0);
  config.split.h_initial = Field(request, "h_initial", 0.15);
  config.split.s_max = Field<int64_t>(request, "s_max", 1000);
  if (request.contains("dbscan_eps")) config.split.dbscan_eps = Field(request, "dbscan_eps", 1.0);
  config.split.dbscan_min_pts = Field(request, "dbscan_min_pts", 4);
  config.milp.big_m = Field(request, "big_m", 1e6);
  config.milp.epsilon = Field(request, "epsilon", 1e-6);
  if (request.contains("node_limit")) config.milp.node_limit = Field<int64_t>(request, "node_limit", 0);
  if (request.contains("time_limit_seconds")) {
    config.milp.time_limit_seconds = Field(request, "time_limit_seconds", 0.0);
  }
  config.seed = Field<uint64_t>(request, "seed", 0);

  const std::string providers =
      Field<std::string>(request, "providers", predictions.empty() ? "synthetic" : "files");
  const int classifiers = Field(request, "classifiers", 3);
  Require(classifiers >= 1, ErrorCode::kConfig, "classifiers must be positive");
  if (providers == "files") {
    Require(!predictions.empty(), ErrorCode::kConfig, "providers 'files' needs 'predictions'");
    config.providers = FileProviders(io::LoadPredictions(predictions, alphabet));
  } else if (providers == "synthetic") {
    Require(simulating(), ErrorCode::kConfig,
            "synthetic classifiers need the server to run with --simulate");
    SynthConfig synth;
    synth.correct_probability = Field(request, "synthetic_p", 1.0);
    synth.calibrated = Field(request, "calibrated", true);
    if (request.contains("correctness")) {
      synth.per_element = io::LoadScalarColumn(Field<std::string>(request, "correctness", ""), "p");
    }
    for (int j = 1; j <= classifiers; ++j) {
      config.providers.push_back(ProviderSpec::Synthetic("c" + std::to_string(j), synth));
    }
  } else if (providers == "softmax") {
    TrainConfig train;
    train.epochs = Field(request, "epochs", 20);
    train.learning_rate = Field(request, "learning_rate", 0.1);
    train.l2 = Field(request, "l2", 1e-4);
    for (int j = 1; j <= classifiers; ++j) {
      config.providers.push_back(ProviderSpec::Softmax("c" + std::to_string(j), train));
    }
  } else {
    Fail(ErrorCode::kConfig, "providers must be files, synthetic or softmax");
  }
  std::optional<int> beta;
  if (session->mode == "opal-al") beta = Field(request, "beta", 50);

  if (request.contains("state")) {
    session->run.emplace(OpalRun::Restore(session->dataset, config, beta, request.at("state")));
  } else {
    session->run.emplace(session->dataset, config, beta);
  }
  return session;
}

void LabelService::Persist(const Session& session) const {
  Json snapshot;
  snapshot["id"] = session.id;
  snapshot["request"] = session.request;
  snapshot["state"] = session.run->SaveState();
  const fs::path dir = options_.data_dir / "sessions";
  const fs::path tmp = dir / (session.id + ".json.tmp");
  csv::WriteText(tmp, snapshot.dump(1) + "\n");
  fs::rename(tmp, dir / (session.id + ".json"));
}

void LabelService::LoadSnapshots() {
  const fs::path dir = options_.data_dir / "sessions";
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    Json snapshot;
    try {
      snapshot = Json::parse(csv::ReadText(file));
    } catch (const Json::exception& e) {
      Fail(ErrorCode::kParse, file.string() + ": " + e.what());
    }
    const std::string id = snapshot.at("id").get<std::string>();
    Json request = snapshot.at("request");
    request["state"] = snapshot.at("state");
    auto session = Build(id, request);
    session->request.erase("state");
    sessions_[id] = session;
    if (id.size() > 1 && id[0] == 's') {
      next_id_ = std::max(next_id_, std::stoll(id.substr(1)) + 1);
    }
  }
}

std::shared_ptr<LabelService::Session> LabelService::Find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  Require(it != sessions_.end(), ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

size_t LabelService::session_count() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

Json LabelService::StateJson(const Session& session) const {
  const OpalRun& run = *session.run;
  Json j;
  j["id"] = session.id;
  j["mode"] = session.mode;
  j["beta"] = run.beta() ? Json(*run.beta()) : Json(nullptr);
  j["phase"] = std::string(PhaseName(run.phase()));
  j["iteration"] = run.iteration();
  j["size"] = run.dataset().size();
  j["queue_size"] = run.queue_size();
  j["remaining"] = run.remaining();
  j["manual_count"] = run.manual_count();
  j["alphabet"] = run.dataset().alphabet().labels();
  j["milp"] = {{"status", run.milp_status()}, {"gap", run.milp_gap()}, {"omega", run.omega()}};
  return j;
}

Json LabelService::CreateSession(const Json& request) {
  std::string id;
  {
    std::unique_lock lock(mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06lld", next_id_++);
    id = buf;
  }
  Json clean = request;
  clean.erase("state");
  auto session = Build(id, clean);
  Persist(*session);
  std::unique_lock lock(mutex_);
  sessions_[id] = session;
  return StateJson(*session);
}

Json LabelService::GetSession(const std::string& id) const {
  auto session = Find(id);
  std::shared_lock lock(session->mutex);
  return StateJson(*session);
}

Json LabelService::Queue(const std::string& id, std::optional<long long> limit) const {
  Require(!limit || *limit >= 1, ErrorCode::kInvalidArgument, "limit must be positive");
  auto session = Find(id);
  std::shared_lock lock(session->mutex);
  const OpalRun& run = *session->run;
  const std::vector<std::string> pending = run.Pending();
  const size_t count = limit ? std::min(pending.size(), static_cast<size_t>(*limit)) : pending.size();
  Json items = Json::array();
  for (size_t k = 0; k < count; ++k) {
    const Element& e = run.dataset().element(run.dataset().IndexOf(pending[k]));
    items.push_back({{"id", e.id},
                     {"payload_uri", e.payload_uri ? Json(*e.payload_uri) : Json(nullptr)},
                     {"position", k + 1}});
  }
  return {{"phase", std::string(PhaseName(run.phase()))},
          {"iteration", run.iteration()},
          {"remaining", pending.size()},
          {"alphabet", run.dataset().alphabet().labels()},
          {"items", std::move(items)}};
}

Json LabelService::SubmitLabels(const std::string& id, const Json& body) {
  Require(body.is_object() && body.contains("labels") && body.at("labels").is_array(),
          ErrorCode::kInvalidArgument, "body needs a 'labels' array");
  auto session = Find(id);
  std::unique_lock lock(session->mutex);
  OpalRun next = *session->run;
  size_t accepted = 0, unchanged = 0;
  for (const auto& pair : body.at("labels")) {
    Require(pair.is_object() && pair.contains("id") && pair.contains("label") &&
                pair.at("id").is_string() && pair.at("label").is_string(),
            ErrorCode::kInvalidArgument, "each label needs string 'id' and 'label'");
    const std::string element = pair.at("id").get<std::string>();
    const std::string token = pair.at("label").get<std::string>();
    auto label = next.dataset().alphabet().Find(token);
    Require(label.has_value(), ErrorCode::kInvalidArgument,
            "label '" + token + "' is not in the alphabet");
    Require(next.dataset().Find(element).has_value(), ErrorCode::kNotFound,
            "unknown element '" + element + "'");
    if (next.Submit(element, *label) == SubmitOutcome::kAccepted) {
      ++accepted;
    } else {
      ++unchanged;
    }
  }
  std::swap(*session->run, next);
  try {
    Persist(*session);
  } catch (...) {
    std::swap(*session->run, next);
    throw;
  }
  return {{"accepted", accepted},
          {"unchanged", unchanged},
          {"remaining", session->run->remaining()},
          {"phase", std::string(PhaseName(session->run->phase()))}};
}

Json LabelService::Advance(const std::string& id) {
  auto session = Find(id);
  std::unique_lock lock(session->mutex);
  OpalRun next = *session->run;
  next.Advance();
  std::swap(*session->run, next);
  try {
    Persist(*session);
  } catch (...) {
    std::swap(*session->run, next);
    throw;
  }
  return StateJson(*session);
}

Json LabelService::Metrics(const std::string& id) const {
  auto session = Find(id);
  std::shared_lock lock(session->mutex);
  const OpalRun& run = *session->run;
  const RunReport report = run.Report();
  Json j;
  j["phase"] = std::string(PhaseName(run.phase()));
  j["iteration"] = run.iteration();
  j["size"] = run.dataset().size();
  j["labelled"] = report.assignments.size();
  j["manual_count"] = run.manual_count();
  j["manual_effort"] = report.manual_effort;
  j["accuracy"] = simulating() && report.accuracy ? Json(*report.accuracy) : Json(nullptr);
  j["milp"] = {{"status", run.milp_status()}, {"gap", run.milp_gap()}, {"omega", run.omega()}};
  Json conditions = nullptr;
  if (!run.iterations().empty()) {
    const IterationRecord& last = run.iterations().back();
    conditions = {{"condition1", last.condition1},
                  {"condition2", last.condition2},
                  {"both", last.both_conditions},
                  {"auto_labelled", last.auto_labelled},
                  {"residual", last.residual}};
  }
  j["conditions"] = std::move(conditions);
  Json history = Json::array();
  for (const IterationRecord& it : run.iterations()) history.push_back(io::IterationToJson(it));
  j["history"] = std::move(history);
  j["timings"] = report.timings;
  return j;
}

Json LabelService::Report(const std::string& id) const {
  auto session = Find(id);
  std::shared_lock lock(session->mutex);
  Require(session->run->phase() == Phase::kDone, ErrorCode::kFailedPrecondition,
          "the report is available once the session is done");
  RunReport report = session->run->Report();
  if (!simulating()) report.accuracy.reset();
  return io::ReportToJson(report);
}

Json LabelService::Simulate(const std::string& id) {
  Require(simulating(), ErrorCode::kFailedPrecondition,
          "queue answering needs the server to run with --simulate");
  Json labels = Json::array();
  {
    auto session = Find(id);
    std::shared_lock lock(session->mutex);
    const Dataset& data = session->run->dataset();
    for (const std::string& element : session->run->Pending()) {
      const Element& e = data.element(data.IndexOf(element));
      Require(e.truth.has_value(), ErrorCode::kOracle, "simulation truth lacks '" + element + "'");
      labels.push_back({{"id", element}, {"label", data.alphabet().name(*e.truth)}});
    }
  }
  return SubmitLabels(id, {{"labels", std::move(labels)}});
}

void LabelService::Mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto guard = [reply](httplib::Response& res, const std::function<Json()>& action, int ok = 200) {
    try {
      reply(res, ok, action());
    } catch (const Error& e) {
      reply(res, HttpStatusFor(e.code()),
            {{"error", {{"code", std::string(ErrorCodeName(e.code()))}, {"message", e.what()}}}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", {{"code", "internal"}, {"message", e.what()}}}});
    }
  };
  auto body_json = [](const httplib::Request& req) {
    try {
      return req.body.empty() ? Json::object() : Json::parse(req.body);
    } catch (const Json::exception& e) {
      Fail(ErrorCode::kParse, std::string("request body: ") + e.what());
    }
  };

  server.Post("/sessions", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { return CreateSession(body_json(req)); }, 201);
  });
  server.Get(R"(/sessions/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { return GetSession(req.matches[1]); });
  });
  server.Get(R"(/sessions/([^/]+)/queue)", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] {
      std::optional<long long> limit;
      if (req.has_param("limit")) limit = csv::ParseInt(req.get_param_value("limit"), "limit");
      return Queue(req.matches[1], limit);
    });
  });
  server.Post(R"(/sessions/([^/]+)/labels)", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { return SubmitLabels(req.matches[1], body_json(req)); });
  });
  server.Post(R"(/sessions/([^/]+)/advance)", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { return Advance(req.matches[1]); });
  });
  server.Post(R"(/sessions/([^/]+)/simulate)", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { return Simulate(req.matches[1]); });
  });
  server.Get(R"(/sessions/([^/]+)/metrics)", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { return Metrics(req.matches[1]); });
  });
  server.Get(R"(/sessions/([^/]+)/report)", [=, this](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { return Report(req.matches[1]); });
  });
}

}  // namespace labelopt
