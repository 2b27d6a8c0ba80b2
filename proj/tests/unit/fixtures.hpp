#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "odflow/oddata.hpp"

namespace fixture {

inline const std::string kDir = ODFLOW_FIXTURES_DIR;

inline std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline odflow::oddata::FlowDataset load(const std::string& name) {
  return odflow::oddata::load_dataset_files(kDir + "/" + name + "/flows.csv", kDir + "/" + name + "/regions.geojson");
}

inline std::string grid(const std::string& name) { return read(kDir + "/" + name + "/grid.json"); }

// Square region of side `size` degrees centred on (lon, lat).
inline odflow::oddata::Region square(const std::string& id, double lon, double lat, double size = 2.0) {
  const double h = size / 2;
  odflow::oddata::Region r;
  r.id = id;
  r.name = id;
  r.abbr = odflow::oddata::derive_abbr(id);
  r.boundary = {{{{lon - h, lat - h}, {lon + h, lat - h}, {lon + h, lat + h}, {lon - h, lat + h}, {lon - h, lat - h}}}};
  r.anchor = {lon, lat};
  return r;
}

}  // namespace fixture
