#pragma once

// HTTP/JSON facade over the engine: an in-memory dataset store, layout and 3D
// export endpoints, and per-dataset interaction sessions.
//
//   POST   /datasets                    multipart: flows, regions[, grid]
//   GET    /datasets/{id}/layout        ?kind=maptrix|odmaps|flowmap&w=&h=
//   POST   /datasets/{id}/relayout      {filter?: [lo, hi], groups?: [...]}
//   GET    /datasets/{id}/flows3d       ?repr=map|globe|mapslink&encoding=
//   GET    /datasets/{id}/session
//   POST   /datasets/{id}/selection     {regions?: [...], cells?: [[o, d]]}
//   DELETE /datasets/{id}/selection

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odflow/error.hpp"
#include "odflow/layouts.hpp"
#include "odflow/oddata.hpp"

namespace httplib {
class Server;
}

namespace odflow::service {

struct Config {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path fixtures_dir;  // each subdirectory is preloaded under its name
  std::string cors_origin = "*";
};

// Reads ODFLOW_PORT / PORT and ODFLOW_FIXTURES_DIR / FIXTURES_DIR over the
// values already in `config`.
Config apply_env(Config config);

struct Response {
  int status = 200;
  nlohmann::json body;
};

// 400 for malformed requests, 422 for well-formed requests the engine rejects.
int status_for(ErrorCode code);
nlohmann::json error_body(const Error& e);

struct SessionState {
  std::string dataset_id;
  std::optional<std::pair<double, double>> filter;
  std::vector<oddata::RegionGroup> groups;
  layouts::Selection selection;
  std::uint64_t version = 0;  // bumped by every mutation

  nlohmann::json json() const;
};

class Service {
 public:
  explicit Service(Config config = {});

  // Returns the new dataset id; throws Error on invalid payloads.
  std::string add_dataset(std::string_view flows_csv, std::string_view regions_geojson,
                          std::optional<std::string> grid_json = std::nullopt);
  // Stores a dataset under a fixed id (fixtures).
  void put_dataset(const std::string& id, std::string_view flows_csv, std::string_view regions_geojson,
                   std::optional<std::string> grid_json);
  std::size_t load_fixtures(const std::filesystem::path& dir);

  using Query = std::map<std::string, std::string>;
  Response layout(const std::string& id, const Query& query) const;
  Response relayout(const std::string& id, std::string_view body, const Query& query);
  Response flows3d(const std::string& id, const Query& query) const;
  Response session(const std::string& id) const;
  Response select(const std::string& id, std::string_view body);
  Response clear_selection(const std::string& id);

  void mount(httplib::Server& server);
  // Blocks until the server stops; returns false when the port cannot be bound.
  bool run();

  const Config& config() const { return config_; }

 private:
  struct Entry {
    std::shared_ptr<const oddata::FlowDataset> dataset;
    std::optional<layouts::GridAssignment> grid;
    mutable std::mutex mutex;  // guards session
    SessionState session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;  // throws NotFound

  Config config_;
  mutable std::shared_mutex store_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> store_;
  std::uint64_t counter_ = 0;
};

}  // namespace odflow::service
