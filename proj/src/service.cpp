#include "odflow/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "odflow/flow3d.hpp"

namespace odflow::service {

namespace {

using nlohmann::json;

struct NotFound {
  std::string id;
};

constexpr const char* kEngineVersion = ODFLOW_VERSION;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double number(const Service::Query& q, const std::string& key, double fallback) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end != it->second.c_str() + it->second.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument, "query parameter '" + key + "' is not a number", it->second);
  }
  return v;
}

std::string text(const Service::Query& q, const std::string& key, std::string fallback) {
  const auto it = q.find(key);
  return it == q.end() || it->second.empty() ? fallback : it->second;
}

scene::Canvas canvas_from(const Service::Query& q) {
  const scene::Canvas c{number(q, "w", 1200.0), number(q, "h", 900.0)};
  if (!(c.width > 0.0 && c.width <= 20000.0 && c.height > 0.0 && c.height <= 20000.0)) {
    throw Error(ErrorCode::kInvalidArgument, "canvas size must be in (0, 20000] px");
  }
  return c;
}

layouts::MapTrixParams maptrix_params(const Service::Query& q) {
  layouts::MapTrixParams p;
  p.k = number(q, "k", p.k);
  p.w = number(q, "weight", p.w);
  return p;
}

double round_ms(std::chrono::steady_clock::duration d) {
  return std::round(std::chrono::duration<double, std::milli>(d).count() * 1000.0) / 1000.0;
}

Response layout_response(json layout, double ms) {
  return {200,
          {{"schemaVersion", scene::kSchemaVersion},
           {"engineVersion", kEngineVersion},
           {"layout", std::move(layout)},
           {"timing", {{"layoutMs", ms}}}}};
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::kParseError, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, "request body is not valid JSON", std::to_string(e.byte));
  }
}

layouts::RelayoutRequest parse_relayout(const json& j) {
  layouts::RelayoutRequest r;
  try {
    if (j.contains("filter") && !j["filter"].is_null()) {
      const json& f = j["filter"];
      if (f.is_string()) {
        r.filter = oddata::parse_range(f.get<std::string>());
      } else if (f.is_array() && f.size() == 2 && f[0].is_number() && f[1].is_number()) {
        r.filter = std::pair{f[0].get<double>(), f[1].get<double>()};
      } else {
        throw Error(ErrorCode::kParseError, "filter must be [lo, hi] or \"lo:hi\"");
      }
    }
    if (j.contains("groups") && !j["groups"].is_null()) {
      const json& g = j["groups"];
      if (g.is_string()) {
        r.groups = oddata::parse_groups(g.get<std::string>());
      } else if (g.is_array()) {
        for (const json& item : g) {
          oddata::RegionGroup group;
          group.label = item.at("label").get<std::string>();
          for (const json& m : item.at("members")) group.members.insert(m.get<std::string>());
          r.groups.push_back(std::move(group));
        }
      } else {
        throw Error(ErrorCode::kParseError, "groups must be an array or \"A=r1,r2;B=r3\"");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, "malformed relayout request", e.what());
  }
  return r;
}

layouts::Selection parse_selection(const json& j) {
  layouts::Selection s;
  try {
    if (j.contains("regions")) s.regions = j["regions"].get<std::vector<std::string>>();
    if (j.contains("cells")) {
      for (const json& c : j["cells"]) {
        if (!c.is_array() || c.size() != 2) throw Error(ErrorCode::kParseError, "cells must be [origin, dest] pairs");
        s.cells.emplace_back(c[0].get<std::string>(), c[1].get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, "malformed selection", e.what());
  }
  return s;
}

template <typename F>
Response guarded(F&& f) {
  try {
    return f();
  } catch (const NotFound& e) {
    return {404, {{"schemaVersion", scene::kSchemaVersion},
                  {"error", {{"code", "NotFound"}, {"message", "unknown dataset"}, {"detail", e.id}}}}};
  } catch (const Error& e) {
    return {status_for(e.code()), error_body(e)};
  } catch (const std::exception& e) {
    return {500, {{"schemaVersion", scene::kSchemaVersion},
                  {"error", {{"code", "Internal"}, {"message", e.what()}, {"detail", ""}}}}};
  }
}

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

Service::Query query_of(const httplib::Request& req) {
  Service::Query q;
  for (const auto& [k, v] : req.params) q.emplace(k, v);
  return q;
}

}  // namespace

Config apply_env(Config config) {
  for (const char* name : {"PORT", "ODFLOW_PORT"}) {
    if (const char* v = std::getenv(name)) config.port = std::atoi(v);
  }
  for (const char* name : {"FIXTURES_DIR", "ODFLOW_FIXTURES_DIR"}) {
    if (const char* v = std::getenv(name)) config.fixtures_dir = v;
  }
  return config;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidArgument:
      return 400;
    default:
      return 422;
  }
}

json error_body(const Error& e) {
  json err = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"detail", e.detail()}};
  if (e.code() == ErrorCode::kAntipodalAmbiguity) {
    json flows = json::array();
    std::stringstream ss(e.detail());
    for (std::string item; std::getline(ss, item, ',');) flows.push_back(item);
    err["flows"] = flows;
  }
  return {{"schemaVersion", scene::kSchemaVersion}, {"error", err}};
}

json SessionState::json() const {
  nlohmann::json groups_json = nlohmann::json::array();
  for (const auto& g : groups) groups_json.push_back({{"label", g.label}, {"members", g.members}});
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [o, d] : selection.cells) cells.push_back({o, d});
  return {{"datasetId", dataset_id},
          {"filter", filter ? nlohmann::json{filter->first, filter->second} : nlohmann::json(nullptr)},
          {"groups", groups_json},
          {"selection", {{"regions", selection.regions}, {"cells", cells}}},
          {"version", version}};
}

Service::Service(Config config) : config_(std::move(config)) {
  if (!config_.fixtures_dir.empty()) load_fixtures(config_.fixtures_dir);
}

void Service::put_dataset(const std::string& id, std::string_view flows_csv, std::string_view regions_geojson,
                          std::optional<std::string> grid_json) {
  auto entry = std::make_shared<Entry>();
  entry->dataset = std::make_shared<const oddata::FlowDataset>(oddata::load_dataset(flows_csv, regions_geojson));
  if (grid_json) entry->grid = layouts::parse_grid(*grid_json);
  entry->session.dataset_id = id;
  std::unique_lock lock(store_mutex_);
  store_[id] = std::move(entry);
}

std::string Service::add_dataset(std::string_view flows_csv, std::string_view regions_geojson,
                                 std::optional<std::string> grid_json) {
  std::uint64_t h = fnv1a(flows_csv);
  h = fnv1a(regions_geojson, fnv1a("\n", h));
  if (grid_json) h = fnv1a(*grid_json, fnv1a("\n", h));
  char prefix[9];
  std::snprintf(prefix, sizeof prefix, "%08llx", static_cast<unsigned long long>(h >> 32));
  std::uint64_t n;
  {
    std::unique_lock lock(store_mutex_);
    n = ++counter_;
  }
  const std::string id = std::string(prefix) + "-" + std::to_string(n);
  put_dataset(id, flows_csv, regions_geojson, std::move(grid_json));
  return id;
}

std::size_t Service::load_fixtures(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "flows.csv") &&
        std::filesystem::exists(e.path() / "regions.geojson")) {
      dirs.push_back(e.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& p : dirs) {
    std::optional<std::string> grid;
    if (std::filesystem::exists(p / "grid.json")) grid = read_file(p / "grid.json");
    put_dataset(p.filename().string(), read_file(p / "flows.csv"), read_file(p / "regions.geojson"), grid);
  }
  return dirs.size();
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::shared_lock lock(store_mutex_);
  const auto it = store_.find(id);
  if (it == store_.end()) throw NotFound{id};
  return it->second;
}

Response Service::layout(const std::string& id, const Query& query) const {
  return guarded([&] {
    const auto entry = find(id);
    const std::string kind = text(query, "kind", "maptrix");
    const scene::Canvas canvas = canvas_from(query);
    const auto start = std::chrono::steady_clock::now();
    json doc;
    if (kind == "maptrix") {
      doc = layouts::layout_maptrix(*entry->dataset, canvas, maptrix_params(query)).json();
    } else if (kind == "odmaps") {
      if (!entry->grid) throw Error(ErrorCode::kBadGridAssignment, "dataset has no grid assignment", id);
      doc = layouts::layout_odmaps(*entry->dataset, *entry->grid, canvas).json();
    } else if (kind == "flowmap") {
      doc = layouts::layout_flowmap(*entry->dataset, canvas).json();
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown layout kind", kind);
    }
    return layout_response(std::move(doc), round_ms(std::chrono::steady_clock::now() - start));
  });
}

Response Service::relayout(const std::string& id, std::string_view body, const Query& query) {
  return guarded([&] {
    const auto entry = find(id);
    const layouts::RelayoutRequest request = parse_relayout(parse_body(body));
    const scene::Canvas canvas = canvas_from(query);
    const layouts::MapTrixParams params = maptrix_params(query);
    std::lock_guard lock(entry->mutex);
    const auto start = std::chrono::steady_clock::now();
    json doc = layouts::relayout(*entry->dataset, request, canvas, params).json();
    Response r = layout_response(std::move(doc), round_ms(std::chrono::steady_clock::now() - start));
    entry->session.filter = request.filter;
    entry->session.groups = request.groups;
    entry->session.selection = {};
    ++entry->session.version;
    r.body["state"] = entry->session.json();
    return r;
  });
}

Response Service::flows3d(const std::string& id, const Query& query) const {
  return guarded([&] {
    const auto entry = find(id);
    flow3d::ExportOptions options;
    options.representation = flow3d::parse_representation(text(query, "repr", "map"));
    options.encoding = flow3d::parse_encoding(text(query, "encoding", "distance"));
    options.samples = static_cast<int>(number(query, "samples", flow3d::kDefaultSamples));
    if (options.samples < flow3d::kMinSamples) {
      throw Error(ErrorCode::kInvalidArgument, "samples must be at least " + std::to_string(flow3d::kMinSamples));
    }
    const auto start = std::chrono::steady_clock::now();
    const auto curves = flow3d::build_flows3d(*entry->dataset, options);
    return layout_response(flow3d::document(curves, options), round_ms(std::chrono::steady_clock::now() - start));
  });
}

Response Service::session(const std::string& id) const {
  return guarded([&] {
    const auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return Response{200, {{"schemaVersion", scene::kSchemaVersion}, {"state", entry->session.json()}}};
  });
}

Response Service::select(const std::string& id, std::string_view body) {
  return guarded([&] {
    const auto entry = find(id);
    const layouts::Selection selection = parse_selection(parse_body(body));
    std::lock_guard lock(entry->mutex);
    const layouts::RelayoutRequest current{entry->session.filter, entry->session.groups};
    const auto layout = layouts::relayout(*entry->dataset, current, {});
    const auto overlay = layouts::highlight(layout, selection);
    entry->session.selection = selection;
    ++entry->session.version;
    return Response{200,
                    {{"schemaVersion", scene::kSchemaVersion},
                     {"overlay", overlay.json()},
                     {"state", entry->session.json()}}};
  });
}

Response Service::clear_selection(const std::string& id) {
  return guarded([&] {
    const auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    entry->session.selection = {};
    ++entry->session.version;
    return Response{200, {{"schemaVersion", scene::kSchemaVersion}, {"state", entry->session.json()}}};
  });
}

void Service::mount(httplib::Server& server) {
  const std::string origin = config_.cors_origin;
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
  });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, {200, {{"schemaVersion", scene::kSchemaVersion}, {"engineVersion", kEngineVersion}}});
  });
  server.Get("/datasets", [this](const httplib::Request&, httplib::Response& res) {
    json ids = json::array();
    {
      std::shared_lock lock(store_mutex_);
      for (const auto& [id, entry] : store_) ids.push_back(id);
    }
    send(res, {200, {{"schemaVersion", scene::kSchemaVersion}, {"datasets", ids}}});
  });
  server.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, guarded([&] {
           auto part = [&](std::initializer_list<const char*> names) -> std::optional<std::string> {
             for (const char* n : names) {
               if (req.has_file(n)) return req.get_file_value(n).content;
             }
             return std::nullopt;
           };
           std::optional<std::string> flows, regions, grid;
           if (req.is_multipart_form_data()) {
             flows = part({"flows", "flows.csv"});
             regions = part({"regions", "regions.geojson"});
             grid = part({"grid", "grid.json"});
           } else {
             const json j = parse_body(req.body);
             if (j.contains("flows") && j["flows"].is_string()) flows = j["flows"].get<std::string>();
             if (j.contains("regions") && j["regions"].is_string()) regions = j["regions"].get<std::string>();
             if (j.contains("grid") && j["grid"].is_string()) grid = j["grid"].get<std::string>();
           }
           if (!flows) throw Error(ErrorCode::kParseError, "missing part 'flows'", "flows");
           if (!regions) throw Error(ErrorCode::kParseError, "missing part 'regions'", "regions");
           const std::string id = add_dataset(*flows, *regions, grid);
           const auto entry = find(id);
           return Response{201,
                           {{"schemaVersion", scene::kSchemaVersion},
                            {"datasetId", id},
                            {"regions", entry->dataset->regions().size()},
                            {"flows", entry->dataset->flows().size()}}};
         }));
  });
  server.Get(R"(/datasets/([^/]+)/layout)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, layout(req.matches[1], query_of(req)));
  });
  server.Post(R"(/datasets/([^/]+)/relayout)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, relayout(req.matches[1], req.body, query_of(req)));
  });
  server.Get(R"(/datasets/([^/]+)/flows3d)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, flows3d(req.matches[1], query_of(req)));
  });
  server.Get(R"(/datasets/([^/]+)/session)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, session(req.matches[1]));
  });
  server.Post(R"(/datasets/([^/]+)/selection)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, select(req.matches[1], req.body));
  });
  server.Delete(R"(/datasets/([^/]+)/selection)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, clear_selection(req.matches[1]));
  });
}

bool Service::run() {
  httplib::Server server;
  mount(server);
  return server.listen(config_.host, config_.port);
}

}  // namespace odflow::service
