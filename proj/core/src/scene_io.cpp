#include <fstream>
#include <sstream>
#include <unordered_set>

#include "extrude3d/errors.hpp"
#include "extrude3d/scene.hpp"
#include "text_util.hpp"

namespace extrude3d {

namespace {

std::string next_header_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("comment", 0) == 0) continue;
    return line;
  }
  raise(Errc::truncated_data, "unexpected end of PLY header");
}

}  // namespace

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());

  if (next_header_line(in) != "ply") {
    raise(Errc::bad_magic, "missing 'ply' magic in " + path.string());
  }
  if (next_header_line(in) != "format ascii 1.0") {
    raise(Errc::bad_magic, "only 'format ascii 1.0' is supported");
  }

  std::string line = next_header_line(in);
  std::size_t vertex_count = 0;
  {
    std::istringstream ss(line);
    std::string kw, name;
    std::size_t count = 0;
    if (!(ss >> kw >> name >> count) || kw != "element" || name != "vertex") {
      raise(Errc::bad_dimensions, "expected 'element vertex <n>', got '" + line + "'");
    }
    vertex_count = count;
  }

  // Property list must be exactly float x, float y, float z, then an
  // optional uchar label.
  static const std::vector<std::pair<std::string, std::string>> required = {
      {"float", "x"}, {"float", "y"}, {"float", "z"}};
  std::size_t property_index = 0;
  bool has_label = false;
  while ((line = next_header_line(in)) != "end_header") {
    std::istringstream ss(line);
    std::string kw, type, name;
    if (!(ss >> kw >> type >> name) || kw != "property") {
      raise(Errc::bad_dimensions, "unexpected PLY header line '" + line + "'");
    }
    if (property_index < required.size()) {
      if (type != required[property_index].first ||
          name != required[property_index].second) {
        raise(Errc::bad_dimensions,
              "unsupported PLY property '" + type + " " + name + "'");
      }
      ++property_index;
    } else if (property_index == required.size() && !has_label &&
               type == "uchar" && name == "label") {
      has_label = true;
    } else {
      raise(Errc::bad_dimensions,
            "unsupported PLY property '" + type + " " + name + "'");
    }
  }
  if (property_index != required.size()) {
    raise(Errc::bad_dimensions, "PLY vertex element must declare x, y, z");
  }

  PointCloud cloud;
  cloud.positions.reserve(vertex_count);
  if (has_label) {
    cloud.labels.emplace();
    cloud.labels->reserve(vertex_count);
  }
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) {
      raise(Errc::truncated_data, "PLY vertex data ends early at row " +
                                      std::to_string(i));
    }
    std::istringstream ss(line);
    double x = 0, y = 0, z = 0;
    if (!(ss >> x >> y >> z)) {
      raise(Errc::truncated_data, "malformed PLY vertex line '" + line + "'");
    }
    if (has_label) {
      int label = 0;
      if (!(ss >> label)) {
        raise(Errc::truncated_data, "missing label in PLY vertex line");
      }
      if (label < 0 || label > 255 ||
          (!is_taxonomy_id(static_cast<ClassId>(label)) && label != kVoidLabel)) {
        raise(Errc::unknown_class_id,
              "PLY label " + std::to_string(label) + " is outside the taxonomy");
      }
      cloud.labels->push_back(static_cast<ClassId>(label));
    }
    std::string trailing;
    if (ss >> trailing) {
      raise(Errc::bad_dimensions, "extra values in PLY vertex line '" + line + "'");
    }
    cloud.positions.emplace_back(x, y, z);
  }
  cloud.validate();
  return cloud;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.positions.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (cloud.labels) out << "property uchar label\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
    const auto& p = cloud.positions[i];
    out << detail::format_double(p.x()) << ' ' << detail::format_double(p.y())
        << ' ' << detail::format_double(p.z());
    if (cloud.labels) out << ' ' << static_cast<int>((*cloud.labels)[i]);
    out << '\n';
  }
  if (!out) raise(Errc::io_failure, "write failed for " + path.string());
}

std::vector<CameraView> read_camera_file(const std::filesystem::path& path,
                                         double z_near) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  std::vector<CameraView> views;
  std::unordered_set<ViewId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    CameraView view;
    view.geometry.z_near = z_near;
    std::uint64_t id = 0;
    if (!(ss >> id >> view.image_name >> view.geometry.height >>
          view.geometry.width >> view.geometry.fx >> view.geometry.fy >>
          view.geometry.cx >> view.geometry.cy)) {
      raise(Errc::truncated_data,
            "malformed camera line " + std::to_string(line_no));
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        if (!(ss >> view.rotation(r, c))) {
          raise(Errc::truncated_data,
                "missing rotation entries on camera line " + std::to_string(line_no));
        }
      }
    }
    if (!(ss >> view.translation.x() >> view.translation.y() >>
          view.translation.z())) {
      raise(Errc::truncated_data,
            "missing translation on camera line " + std::to_string(line_no));
    }
    view.view_id = static_cast<ViewId>(id);
    view.validate();
    if (!seen.insert(view.view_id).second) {
      raise(Errc::duplicate_view_id,
            "view id " + std::to_string(view.view_id) + " appears twice");
    }
    views.push_back(std::move(view));
  }
  return views;
}

void write_camera_file(const std::vector<CameraView>& views,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  for (const auto& view : views) {
    view.validate();
    out << view.view_id << ' ' << view.image_name << ' '
        << view.geometry.height << ' ' << view.geometry.width << ' '
        << detail::format_double(view.geometry.fx) << ' '
        << detail::format_double(view.geometry.fy) << ' '
        << detail::format_double(view.geometry.cx) << ' '
        << detail::format_double(view.geometry.cy);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        out << ' ' << detail::format_double(view.rotation(r, c));
      }
    }
    out << ' ' << detail::format_double(view.translation.x()) << ' '
        << detail::format_double(view.translation.y()) << ' '
        << detail::format_double(view.translation.z()) << '\n';
  }
  if (!out) raise(Errc::io_failure, "write failed for " + path.string());
}

}  // namespace extrude3d
