#pragma once

// Versioned on-disk model collection under `<root>/ml/<sector>/`. Every save
// writes a new `model-<id>.json` and repoints the ACTIVE marker with an
// atomic rename, so a concurrent reader sees the previous model or the new
// one, never a torn state. Old versions stay retrievable by id.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boosting.hpp"
#include "pathname.hpp"
#include "time.hpp"

namespace sectorcast {

struct ModelNotFound : std::runtime_error {
  explicit ModelNotFound(const std::string& sector)
      : std::runtime_error("no active model for sector " + sector) {}
  ModelNotFound(const std::string& sector, int id)
      : std::runtime_error("no model " + std::to_string(id) + " for sector " + sector) {}
};

struct StorageFailure : std::runtime_error {
  explicit StorageFailure(const std::string& what) : std::runtime_error(what) {}
};

struct StoredModel {
  std::string sector;
  BoostedModel model;
  UtcDate trained_through{};
  double training_duration_s = 0;
  std::optional<double> cv_mean_score;
  Timestamp created_at = 0;
  std::vector<double> mse_trace;  // training error per boosting iteration
};

namespace modeldetail {

inline nlohmann::json stored_to_json(const StoredModel& s) {
  nlohmann::json j;
  j["version"] = 1;
  j["sector"] = s.sector;
  j["trainedThrough"] = format_date(s.trained_through);
  j["trainingDurationSeconds"] = s.training_duration_s;
  if (s.cv_mean_score)
    j["cvMeanScore"] = *s.cv_mean_score;
  else
    j["cvMeanScore"] = nullptr;
  j["createdAt"] = format_timestamp(s.created_at);
  j["model"] = model_to_json(s.model);
  j["mseTrace"] = s.mse_trace;
  return j;
}

inline StoredModel stored_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw ModelParseError("unsupported stored version");
    StoredModel s;
    s.sector = j.at("sector").get<std::string>();
    s.trained_through = require_date(j.at("trainedThrough").get<std::string>());
    s.training_duration_s = j.at("trainingDurationSeconds").get<double>();
    if (!j.at("cvMeanScore").is_null()) s.cv_mean_score = j.at("cvMeanScore").get<double>();
    s.created_at = require_timestamp(j.at("createdAt").get<std::string>());
    s.model = model_from_json(j.at("model"));
    s.mse_trace = j.at("mseTrace").get<std::vector<double>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ModelParseError(e.what());
  } catch (const std::runtime_error& e) {
    throw ModelParseError(e.what());
  }
}

}  // namespace modeldetail

class ModelStore {
 public:
  explicit ModelStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path sector_dir(const std::string& sector) const {
    return root_ / "ml" / sanitize_component(sector);
  }

  // Persists a new version and makes it the active model for the sector.
  int save_model(const StoredModel& stored) const {
    namespace fs = std::filesystem;
    fs::path dir = sector_dir(stored.sector);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw StorageFailure("cannot create " + dir.string() + ": " + ec.message());

    int id = 1;
    for (int existing : list_ids(stored.sector)) id = std::max(id, existing + 1);

    fs::path model_path = dir / ("model-" + std::to_string(id) + ".json");
    {
      std::ofstream out(model_path, std::ios::binary | std::ios::trunc);
      out << modeldetail::stored_to_json(stored).dump(2) << '\n';
      if (!out) throw StorageFailure("failed writing " + model_path.string());
    }

    // Activation: write aside, then rename over ACTIVE in one step.
    fs::path tmp = dir / ("ACTIVE.tmp." + std::to_string(id));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << id << '\n';
      if (!out) throw StorageFailure("failed writing " + tmp.string());
    }
    fs::rename(tmp, dir / "ACTIVE", ec);
    if (ec) throw StorageFailure("failed activating model " + std::to_string(id) + ": " +
                                 ec.message());
    return id;
  }

  std::optional<int> active_id(const std::string& sector) const {
    std::ifstream in(sector_dir(sector) / "ACTIVE", std::ios::binary);
    if (!in) return std::nullopt;
    int id = 0;
    in >> id;
    if (!in || id < 1) return std::nullopt;
    return id;
  }

  std::vector<int> list_ids(const std::string& sector) const {
    namespace fs = std::filesystem;
    std::vector<int> ids;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(sector_dir(sector), ec)) {
      int id = 0;
      if (std::sscanf(entry.path().filename().c_str(), "model-%d.json", &id) == 1 && id >= 1)
        ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  std::vector<std::string> sectors() const {
    namespace fs = std::filesystem;
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_ / "ml", ec))
      if (entry.is_directory()) out.push_back(entry.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  StoredModel load_by_id(const std::string& sector, int id) const {
    std::filesystem::path p = sector_dir(sector) / ("model-" + std::to_string(id) + ".json");
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ModelNotFound(sector, id);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ModelParseError("model document is not valid JSON");
    return modeldetail::stored_from_json(j);
  }

  StoredModel load_active(const std::string& sector) const {
    std::optional<int> id = active_id(sector);
    if (!id) throw ModelNotFound(sector);
    return load_by_id(sector, *id);
  }

 private:
  std::filesystem::path root_;
};

}  // namespace sectorcast
