// odflow: batch front end. Renders layouts to SVG or JSON, exports 3D flow
// geometry, runs the HTTP service and times the MapTrix solver.
//
// Exit codes: 0 ok, 2 validation error, 3 internal error.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "odflow/error.hpp"
#include "odflow/flow3d.hpp"
#include "odflow/layouts.hpp"
#include "odflow/oddata.hpp"
#include "odflow/rendersvg.hpp"
#include "odflow/service.hpp"

namespace fs = std::filesystem;
using namespace odflow;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInternal = 3;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read file", p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write output file", path);
  out << content;
}

bool has_extension(const std::string& path, const std::string& ext) {
  return fs::path(path).extension() == ext;
}

struct DataArgs {
  std::string flows;
  std::string regions;
  std::string filter;
  std::string groups;
  bool allow_self_flows = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--flows", flows, "Flow table CSV (origin,dest,magnitude)")->required();
    cmd->add_option("--regions", regions, "Region boundaries, GeoJSON FeatureCollection")->required();
    cmd->add_option("--filter", filter, "Keep flows with lo <= magnitude <= hi, as lo:hi");
    cmd->add_option("--groups", groups, "Aggregate regions, as A=r1,r2;B=r3");
    cmd->add_flag("--allow-self-flows", allow_self_flows, "Accept flows from a region to itself");
  }

  oddata::FlowDataset load() const {
    const oddata::FlowDataset d =
        oddata::load_dataset(read_file(flows), read_file(regions), {.allow_self_flows = allow_self_flows});
    layouts::RelayoutRequest request;
    if (!filter.empty()) request.filter = oddata::parse_range(filter);
    if (!groups.empty()) request.groups = oddata::parse_groups(groups);
    return layouts::apply_request(d, request);
  }
};

struct RenderArgs {
  DataArgs data;
  std::string kind = "maptrix";
  std::string grid;
  std::string output;
  double width = 1200.0;
  double height = 900.0;
  double k = 1.0;
  double weight = 1.0;
  bool no_refine = false;
  std::vector<std::string> select;
  double legend_x = 0.0;
  double legend_y = 0.0;
};

void run_render(const RenderArgs& a) {
  const oddata::FlowDataset d = a.data.load();
  const scene::Canvas canvas{a.width, a.height};
  rendersvg::SvgOptions svg;
  svg.legend_offset = {a.legend_x, a.legend_y};
  const bool json_out = has_extension(a.output, ".json");
  std::string out;
  if (a.kind == "maptrix") {
    layouts::MapTrixParams params;
    params.k = a.k;
    params.w = a.weight;
    params.refine = !a.no_refine;
    const auto layout = layouts::layout_maptrix(d, canvas, params);
    layouts::Selection selection;
    for (const std::string& s : a.select) {
      const auto colon = s.find(':');
      if (colon == std::string::npos) {
        selection.regions.push_back(s);
      } else {
        selection.cells.emplace_back(s.substr(0, colon), s.substr(colon + 1));
      }
    }
    const auto overlay = layouts::highlight(layout, selection);
    if (json_out) {
      nlohmann::json j = layout.json();
      if (!overlay.empty()) j["highlight"] = overlay.json();
      out = j.dump();
    } else {
      out = rendersvg::render_maptrix(layout, svg, overlay.empty() ? nullptr : &overlay);
    }
  } else if (a.kind == "odmaps") {
    if (a.grid.empty()) throw Error(ErrorCode::kBadGridAssignment, "--kind odmaps requires --grid");
    const auto layout = layouts::layout_odmaps(d, layouts::parse_grid(read_file(a.grid)), canvas);
    out = json_out ? layout.to_json() : rendersvg::render_odmaps(layout, svg);
  } else if (a.kind == "flowmap") {
    const auto layout = layouts::layout_flowmap(d, canvas);
    out = json_out ? layout.to_json() : rendersvg::render_flowmap(layout, svg);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown layout kind", a.kind);
  }
  write_output(a.output, out);
}

struct ExportArgs {
  DataArgs data;
  std::string repr = "map";
  std::string encoding = "distance";
  int samples = flow3d::kDefaultSamples;
  int sides = 8;
  std::string output;
};

void run_export3d(const ExportArgs& a) {
  const oddata::FlowDataset d = a.data.load();
  flow3d::ExportOptions options;
  options.representation = flow3d::parse_representation(a.repr);
  options.encoding = flow3d::parse_encoding(a.encoding);
  options.samples = a.samples;
  if (a.samples < flow3d::kMinSamples) {
    throw Error(ErrorCode::kInvalidArgument, "--samples must be at least " + std::to_string(flow3d::kMinSamples));
  }
  const auto curves = flow3d::build_flows3d(d, options);
  if (curves.empty()) throw Error(ErrorCode::kInvalidArgument, "dataset has no flows to export");
  write_output(a.output, has_extension(a.output, ".obj") ? flow3d::to_obj(curves, a.sides)
                                                         : flow3d::to_json(curves, options));
}

struct BenchArgs {
  std::string regions;
  std::string flows;
  int n = 51;
  int trials = 20;
  unsigned seed = 1;
  bool json = false;
};

// Times layout_maptrix (ordering, routing, QP refinement and scene assembly)
// on the first n regions. Without --flows, every ordered pair gets a random
// integer magnitude.
void run_bench(const BenchArgs& a) {
  std::vector<oddata::Region> regions = oddata::parse_regions(read_file(a.regions));
  if (a.n < 2 || a.n > static_cast<int>(regions.size())) {
    throw Error(ErrorCode::kInvalidArgument, "--n must be in [2, " + std::to_string(regions.size()) + "]");
  }
  if (a.trials < 1) throw Error(ErrorCode::kInvalidArgument, "--trials must be positive");
  regions.resize(static_cast<std::size_t>(a.n));
  std::vector<oddata::Flow> flows;
  if (!a.flows.empty()) {
    std::set<std::string> keep;
    for (const auto& r : regions) keep.insert(r.id);
    for (const auto& f : oddata::parse_flows(read_file(a.flows))) {
      if (keep.count(f.origin) && keep.count(f.dest)) flows.push_back(f);
    }
  } else {
    std::mt19937 rng(a.seed);
    std::uniform_int_distribution<int> magnitude(1, 1000);
    for (const auto& o : regions) {
      for (const auto& d : regions) {
        if (o.id != d.id) flows.push_back({o.id, d.id, static_cast<double>(magnitude(rng))});
      }
    }
  }
  const oddata::FlowDataset d(std::move(regions), std::move(flows));
  layouts::layout_maptrix(d, {});  // warm-up
  std::vector<double> ms;
  for (int t = 0; t < a.trials; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const auto layout = layouts::layout_maptrix(d, {});
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(ms.begin(), ms.end());
  const double median = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
  if (a.json) {
    std::cout << nlohmann::json{{"n", a.n}, {"trials", a.trials}, {"medianMs", median}, {"minMs", ms.front()},
                                {"maxMs", ms.back()}}
                     .dump()
              << "\n";
  } else {
    std::cout << "bench-qp n=" << a.n << " trials=" << a.trials << " median_ms=" << median
              << " min_ms=" << ms.front() << " max_ms=" << ms.back() << "\n";
  }
}

struct DemoArgs {
  std::string fixtures_dir;
  std::string out_dir = ".";
};

void run_demo(const DemoArgs& a) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(a.fixtures_dir)) {
    if (e.is_directory() && fs::exists(e.path() / "flows.csv")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  fs::create_directories(a.out_dir);
  for (const fs::path& dir : dirs) {
    const std::string name = dir.filename().string();
    const oddata::FlowDataset d = oddata::load_dataset_files(dir / "flows.csv", dir / "regions.geojson");
    const fs::path out = a.out_dir;
    write_output((out / (name + "_maptrix.svg")).string(), rendersvg::render_maptrix(layouts::layout_maptrix(d, {})));
    write_output((out / (name + "_flowmap.svg")).string(), rendersvg::render_flowmap(layouts::layout_flowmap(d, {})));
    if (fs::exists(dir / "grid.json")) {
      const auto grid = layouts::parse_grid(read_file(dir / "grid.json"));
      write_output((out / (name + "_odmaps.svg")).string(), rendersvg::render_odmaps(layouts::layout_odmaps(d, grid, {})));
    }
    std::cerr << "rendered " << name << "\n";
  }
}

void report(bool json_errors, std::string_view code, const std::string& message, const std::string& detail) {
  if (json_errors) {
    std::cerr << nlohmann::json{{"error", {{"code", code}, {"message", message}, {"detail", detail}}}}.dump()
              << "\n";
  } else {
    std::cerr << "error: " << code << ": " << message;
    if (!detail.empty()) std::cerr << " (" << detail << ")";
    std::cerr << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Origin-destination flow layouts: MapTrix, OD Maps, flow maps and 3D flow geometry"};
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Report errors on stderr as JSON");
  app.set_config("--config", "odflow.toml", "Key/value defaults file");
  app.set_version_flag("--version", ODFLOW_VERSION);

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render a 2D layout to SVG (or layout JSON for *.json)");
  render.data.add(render_cmd);
  render_cmd->add_option("--kind", render.kind, "maptrix | odmaps | flowmap")
      ->check(CLI::IsMember({"maptrix", "odmaps", "flowmap"}));
  render_cmd->add_option("--grid", render.grid, "Grid assignment JSON for OD Maps");
  render_cmd->add_option("-o,--output", render.output, "Output file; '-' or omitted for stdout");
  render_cmd->add_option("--width", render.width, "Canvas width, px");
  render_cmd->add_option("--height", render.height, "Canvas height, px");
  render_cmd->add_option("--k", render.k, "Leader diagonal slope");
  render_cmd->add_option("--weight", render.weight, "Separation weight of the refinement");
  render_cmd->add_flag("--no-refine", render.no_refine, "Skip the QP refinement");
  render_cmd->add_option("--select", render.select, "Highlight regions (id) or cells (origin:dest)");
  render_cmd->add_option("--legend-x", render.legend_x, "Legend offset, px");
  render_cmd->add_option("--legend-y", render.legend_y, "Legend offset, px");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export3d", "Export 3D flow curves as JSON or OBJ (by extension)");
  exp.data.add(export_cmd);
  export_cmd->add_option("--repr", exp.repr, "map | globe | mapslink");
  export_cmd->add_option("--encoding", exp.encoding, "constant | quantity | distance");
  export_cmd->add_option("--samples", exp.samples, "Samples per curve");
  export_cmd->add_option("--sides", exp.sides, "Tube cross-section sides (OBJ)")->check(CLI::Range(3, 64));
  export_cmd->add_option("-o,--output", exp.output, "Output file; '-' or omitted for stdout");

  service::Config serve = service::apply_env({});
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--port", serve.port, "TCP port");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--fixtures-dir", serve.fixtures_dir, "Preload each subdirectory as a dataset");
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Access-Control-Allow-Origin value");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench-qp", "Time MapTrix ordering, routing and QP refinement");
  bench_cmd->add_option("--regions", bench.regions, "Region boundaries GeoJSON")->required();
  bench_cmd->add_option("--flows", bench.flows, "Optional flow CSV; default is random all-pairs flows");
  bench_cmd->add_option("--n", bench.n, "Number of regions");
  bench_cmd->add_option("--trials", bench.trials, "Timed runs");
  bench_cmd->add_option("--seed", bench.seed, "Seed for the random flows");
  bench_cmd->add_flag("--json", bench.json, "Print a JSON summary");

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("demo", "Render every fixture in a directory");
  demo_cmd->add_option("--fixtures-dir", demo.fixtures_dir, "Fixture root")->required();
  demo_cmd->add_option("--out-dir", demo.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report(json_errors, "UsageError", e.what(), "");
    return kExitValidation;
  }

  try {
    if (*render_cmd) run_render(render);
    if (*export_cmd) run_export3d(exp);
    if (*bench_cmd) run_bench(bench);
    if (*demo_cmd) run_demo(demo);
    if (*serve_cmd) {
      service::Service svc(serve);
      std::cerr << "odflow serving on http://" << serve.host << ":" << serve.port << "\n";
      if (!svc.run()) {
        report(json_errors, "Internal", "cannot bind the service port", std::to_string(serve.port));
        return kExitInternal;
      }
    }
  } catch (const Error& e) {
    report(json_errors, to_string(e.code()), e.what(), e.detail());
    return kExitValidation;
  } catch (const std::exception& e) {
    report(json_errors, "Internal", e.what(), "");
    return kExitInternal;
  }
  return 0;
}
