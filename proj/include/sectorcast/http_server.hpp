#pragma once

// HTTP wiring: routes delegate to the pure handlers in serving.hpp. Handlers
// run on httplib's worker threads; reads go through immutable model snapshots
// so they never wait on a training run, and a mutex keeps training runs from
// overlapping each other.

#include <ctime>
#include <filesystem>
#include <mutex>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "model_store.hpp"
#include "pi_store.hpp"
#include "serving.hpp"
#include "training.hpp"
#include "weather.hpp"

namespace sectorcast {

struct ServiceState {
  std::filesystem::path root;
  ModelStore store;
  std::mutex train_mutex;

  explicit ServiceState(std::filesystem::path data_root)
      : root(std::move(data_root)), store(root) {}
};

namespace servedetail {

inline ServeResult handle_train_body(const std::string& body, ServiceState& state) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return {400, error_body("BadRequest", "request body is not valid JSON")};
  UtcDate from{};
  UtcDate to{};
  TrainingConfig cfg;
  try {
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    auto date_field = [&](const char* key) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) throw BadRequest(std::string(key) + " is required");
      try {
        return require_date(it->get<std::string>());
      } catch (const std::exception& e) {
        throw BadRequest(std::string(key) + ": " + e.what());
      }
    };
    from = date_field("from");
    to = date_field("to");
    if (auto it = j.find("withUncertainty"); it != j.end()) {
      if (!it->is_boolean()) throw BadRequest("withUncertainty must be a boolean");
      cfg.schema.with_uncertainty = it->get<bool>();
    }
    if (auto it = j.find("learners"); it != j.end()) {
      if (!it->is_number_integer()) throw BadRequest("learners must be an integer");
      cfg.boost.n_learners = it->get<int>();
    }
    if (auto it = j.find("shrinkage"); it != j.end()) {
      if (!it->is_number()) throw BadRequest("shrinkage must be a number");
      cfg.boost.shrinkage = it->get<double>();
    }
  } catch (const BadRequest& e) {
    return {400, error_body("BadRequest", e.what())};
  }
  std::unique_lock<std::mutex> lock(state.train_mutex, std::try_to_lock);
  if (!lock.owns_lock()) return {409, error_body("Busy", "a training run is already in progress")};
  cfg.created_at = static_cast<Timestamp>(std::time(nullptr));
  try {
    PiStore pi(state.root);
    WeatherTable wx = WeatherTable::load_dir(state.root / "wx");
    TrainingReport report = train_all_sectors(pi, state.store, from, to, cfg, wx);
    return {200, training_report_to_json(report)};
  } catch (const std::exception& e) {
    return {500, error_body("Internal", e.what())};
  }
}

}  // namespace servedetail

inline void register_routes(httplib::Server& srv, ServiceState& state) {
  srv.Post("/predict", [&state](const httplib::Request& req, httplib::Response& res) {
    ServeResult r = handle_predict_body(req.body, state.store);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  });
  srv.Get("/health", [&state](const httplib::Request&, httplib::Response& res) {
    nlohmann::json j;
    j["status"] = "ok";
    j["sectors"] = state.store.sectors();
    res.set_content(j.dump(), "application/json");
  });
  srv.Post("/train", [&state](const httplib::Request& req, httplib::Response& res) {
    ServeResult r = servedetail::handle_train_body(req.body, state);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  });
}

}  // namespace sectorcast
