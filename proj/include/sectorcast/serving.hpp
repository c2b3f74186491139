#pragma once

// Request handling for the prediction service, kept free of transport
// concerns so the whole layer is testable without sockets. A handler returns
// an HTTP-ish status plus a JSON body; client errors come back as structured
// bodies ({"error": "NotFound" | "BadRequest", "message": ...}), never as
// exceptions, so the transport can relay them verbatim.

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boosting.hpp"
#include "features.hpp"
#include "model_store.hpp"
#include "time.hpp"
#include "training.hpp"

namespace sectorcast {

class BadRequest : public std::runtime_error {
 public:
  explicit BadRequest(const std::string& what) : std::runtime_error(what) {}
};

struct PredictionRequest {
  std::string sector;
  Timestamp start_time = 0;
  Timestamp end_time = 0;
  int step_minutes = 1;
  // One forecast for the whole horizon; absent fields are masked off in the
  // feature encoding, same as at training time.
  std::optional<WeatherObs> weather;
};

struct PredictionBucket {
  Timestamp time = 0;
  double predicted_count = 0;
};

struct PredictionResponse {
  std::string sector;
  int model_id = 0;
  double elapsed_millis = 0;
  std::vector<PredictionBucket> buckets;
};

struct ServeResult {
  int status = 200;
  nlohmann::json body;
};

inline void validate_request(const PredictionRequest& req) {
  if (req.sector.empty()) throw BadRequest("sector is required");
  if (req.step_minutes < 1) throw BadRequest("stepMinutes must be at least 1");
  if (req.end_time <= req.start_time) throw BadRequest("endTime must be after startTime");
  if (req.start_time % 60 != 0) throw BadRequest("startTime must be minute-aligned");
}

// Bucket times cover [start, end) at the requested stride, so the count is
// the horizon length divided by the step, rounded up.
inline std::vector<Timestamp> bucket_times(Timestamp start, Timestamp end, int step_minutes) {
  std::vector<Timestamp> out;
  Timestamp stride = static_cast<Timestamp>(step_minutes) * 60;
  for (Timestamp t = start; t < end; t += stride) out.push_back(t);
  return out;
}

inline PredictionResponse predict_horizon(const BoostedModel& model, int model_id,
                                          const PredictionRequest& req) {
  validate_request(req);
  PredictionResponse resp;
  resp.sector = req.sector;
  resp.model_id = model_id;
  for (Timestamp t : bucket_times(req.start_time, req.end_time, req.step_minutes)) {
    std::vector<double> x = encode_features(model.schema, t, req.weather, 1);
    resp.buckets.push_back({t, model.predict(x).count});
  }
  return resp;
}

// ---- Wire format ----

namespace servedetail {

inline std::optional<double> opt_number(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw BadRequest(std::string(key) + " must be a number");
  return it->get<double>();
}

inline Timestamp required_time(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw BadRequest(std::string(key) + " is required");
  try {
    return require_timestamp(it->get<std::string>());
  } catch (const std::exception& e) {
    throw BadRequest(std::string(key) + ": " + e.what());
  }
}

}  // namespace servedetail

inline PredictionRequest request_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw BadRequest("request body must be a JSON object");
  PredictionRequest req;
  auto sector = j.find("sector");
  if (sector == j.end() || !sector->is_string()) throw BadRequest("sector is required");
  req.sector = sector->get<std::string>();
  req.start_time = servedetail::required_time(j, "startTime");
  req.end_time = servedetail::required_time(j, "endTime");
  auto step = j.find("stepMinutes");
  if (step != j.end()) {
    if (!step->is_number_integer()) throw BadRequest("stepMinutes must be an integer");
    req.step_minutes = step->get<int>();
  }
  auto wx = j.find("weather");
  if (wx != j.end() && !wx->is_null()) {
    if (!wx->is_object()) throw BadRequest("weather must be an object");
    WeatherObs obs;
    obs.temperature_c = servedetail::opt_number(*wx, "temperatureC");
    obs.wind_speed_kts = servedetail::opt_number(*wx, "windSpeedKts");
    obs.wind_dir_deg = servedetail::opt_number(*wx, "windDirDeg");
    obs.humidity_pct = servedetail::opt_number(*wx, "humidityPct");
    obs.pressure_hpa = servedetail::opt_number(*wx, "pressureHpa");
    req.weather = obs;
  }
  return req;
}

inline nlohmann::json response_to_json(const PredictionResponse& resp) {
  nlohmann::json j;
  j["sector"] = resp.sector;
  j["modelId"] = resp.model_id;
  j["elapsedMillis"] = resp.elapsed_millis;
  nlohmann::json buckets = nlohmann::json::array();
  for (const PredictionBucket& b : resp.buckets) {
    buckets.push_back({{"time", format_timestamp(b.time)}, {"predictedCount", b.predicted_count}});
  }
  j["buckets"] = std::move(buckets);
  return j;
}

inline nlohmann::json error_body(const std::string& error, const std::string& message) {
  return {{"error", error}, {"message", message}};
}

// ---- Handlers ----

inline ServeResult handle_predict_request(const PredictionRequest& req, const ModelStore& store) {
  auto start = std::chrono::steady_clock::now();
  try {
    validate_request(req);
    std::optional<int> id = store.active_id(req.sector);
    if (!id) throw ModelNotFound(req.sector);
    StoredModel stored = store.load_by_id(req.sector, *id);
    PredictionResponse resp = predict_horizon(stored.model, *id, req);
    resp.elapsed_millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return {200, response_to_json(resp)};
  } catch (const BadRequest& e) {
    return {400, error_body("BadRequest", e.what())};
  } catch (const ModelNotFound& e) {
    return {404, error_body("NotFound", e.what())};
  }
}

// Entry point for the transport: body text in, status and body out. Malformed
// JSON is a BadRequest like any other invalid input.
inline ServeResult handle_predict_body(const std::string& body, const ModelStore& store) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return {400, error_body("BadRequest", "request body is not valid JSON")};
  try {
    return handle_predict_request(request_from_json(j), store);
  } catch (const BadRequest& e) {
    return {400, error_body("BadRequest", e.what())};
  }
}

// ---- Report rendering shared by the CLI and the /train endpoint ----

inline nlohmann::json training_report_to_json(const TrainingReport& r) {
  nlohmann::json j;
  j["from"] = format_date(r.from);
  j["to"] = format_date(r.to);
  j["totalDurationSeconds"] = r.total_duration_s;
  nlohmann::json sectors = nlohmann::json::array();
  for (const SectorTrainingOutcome& s : r.sectors) {
    nlohmann::json e;
    e["sector"] = s.sector;
    e["curvesTotal"] = s.curves_total;
    e["curvesAccepted"] = s.curves_accepted;
    e["sampleCount"] = s.sample_count;
    e["durationSeconds"] = s.duration_s;
    if (s.ok()) {
      e["modelId"] = s.model_id;
    } else {
      e["error"] = s.error;
    }
    sectors.push_back(std::move(e));
  }
  j["sectors"] = std::move(sectors);
  return j;
}

inline nlohmann::json validation_report_to_json(const ValidationReport& r) {
  nlohmann::json j;
  j["from"] = format_date(r.from);
  j["to"] = format_date(r.to);
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["meanScore"] = r.mean_score;
  nlohmann::json sectors = nlohmann::json::array();
  for (const SectorValidationOutcome& s : r.sectors) {
    nlohmann::json e;
    e["sector"] = s.sector;
    e["sampleCount"] = s.sample_count;
    if (s.ok()) {
      e["meanScore"] = s.cv.mean_score;
      e["foldScores"] = s.cv.per_fold_score;
    } else {
      e["error"] = s.error;
    }
    sectors.push_back(std::move(e));
  }
  j["sectors"] = std::move(sectors);
  return j;
}

}  // namespace sectorcast
