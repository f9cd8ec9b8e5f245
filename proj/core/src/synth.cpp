#include "extrude3d/synth.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "extrude3d/errors.hpp"
#include "extrude3d/rng.hpp"
#include "text_util.hpp"

namespace extrude3d {

namespace {

constexpr double kPi = std::numbers::pi;

const char* shape_name(PrimitiveShape shape) {
  switch (shape) {
    case PrimitiveShape::plane: return "plane";
    case PrimitiveShape::box: return "box";
    case PrimitiveShape::cylinder: return "cylinder";
    case PrimitiveShape::sphere: return "sphere";
  }
  return "?";
}

std::size_t expected_size_params(PrimitiveShape shape) {
  switch (shape) {
    case PrimitiveShape::plane: return 2;
    case PrimitiveShape::box: return 3;
    case PrimitiveShape::cylinder: return 2;
    case PrimitiveShape::sphere: return 1;
  }
  return 0;
}

}  // namespace

double PrimitiveSpec::surface_area() const {
  switch (shape) {
    case PrimitiveShape::plane:
      return size[0] * size[1];
    case PrimitiveShape::box:
      return 2.0 * (size[0] * size[1] + size[1] * size[2] + size[2] * size[0]);
    case PrimitiveShape::cylinder:
      return 2.0 * kPi * size[0] * size[1];  // lateral surface only
    case PrimitiveShape::sphere:
      return 4.0 * kPi * size[0] * size[0];
  }
  return 0.0;
}

std::size_t PrimitiveSpec::point_count() const {
  return static_cast<std::size_t>(std::llround(surface_area() * density));
}

void PrimitiveSpec::validate() const {
  if (size.size() != expected_size_params(shape)) {
    raise(Errc::invalid_argument,
          std::string(shape_name(shape)) + " primitive expects " +
              std::to_string(expected_size_params(shape)) + " size values");
  }
  for (double s : size) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      raise(Errc::invalid_argument, "primitive dimensions must be positive");
    }
  }
  if (!(density > 0.0) || !std::isfinite(density)) {
    raise(Errc::invalid_argument, "primitive density must be positive");
  }
  if (!is_taxonomy_id(class_id)) {
    raise(Errc::unknown_class_id,
          "primitive class " + std::to_string(class_id) +
              " is outside the taxonomy");
  }
  if (!center.allFinite() || !std::isfinite(yaw)) {
    raise(Errc::invalid_argument, "primitive pose must be finite");
  }
}

void SceneSpec::validate() const {
  std::size_t total = 0;
  for (const PrimitiveSpec& object : objects) {
    object.validate();
    total += object.point_count();
  }
  if (total > point_cap) {
    raise(Errc::point_budget_exceeded,
          "scene would generate " + std::to_string(total) +
              " points, cap is " + std::to_string(point_cap));
  }
  for (const CameraSpec& camera : cameras) {
    camera.geometry.validate();
    if ((camera.target - camera.position).norm() < 1e-12) {
      raise(Errc::invalid_argument, "camera position equals its target");
    }
  }
}

CameraView make_look_at_camera(ViewId view_id, const std::string& image_name,
                               const ViewGeometry& geometry,
                               const Eigen::Vector3d& position,
                               const Eigen::Vector3d& target,
                               const Eigen::Vector3d& up) {
  const Eigen::Vector3d forward = target - position;
  if (forward.norm() < 1e-12) {
    raise(Errc::invalid_argument, "camera position equals its target");
  }
  const Eigen::Vector3d z_axis = forward.normalized();
  Eigen::Vector3d x_axis = z_axis.cross(up);
  // Forward parallel to up: pick an arbitrary perpendicular roll reference.
  if (x_axis.norm() < 1e-9) {
    x_axis = z_axis.cross(Eigen::Vector3d::UnitX());
    if (x_axis.norm() < 1e-9) x_axis = z_axis.cross(Eigen::Vector3d::UnitY());
  }
  x_axis.normalize();
  const Eigen::Vector3d y_axis = z_axis.cross(x_axis);

  CameraView view;
  view.geometry = geometry;
  view.view_id = view_id;
  view.image_name = image_name;
  view.rotation.row(0) = x_axis;
  view.rotation.row(1) = y_axis;
  view.rotation.row(2) = z_axis;
  view.translation = -(view.rotation * position);
  view.validate();
  return view;
}

namespace {

Eigen::Vector3d sample_plane(const PrimitiveSpec& p, CounterRng& rng) {
  const double x = (rng.next_double() - 0.5) * p.size[0];
  const double y = (rng.next_double() - 0.5) * p.size[1];
  return {x, y, 0.0};
}

Eigen::Vector3d sample_box(const PrimitiveSpec& p, CounterRng& rng) {
  const double sx = p.size[0], sy = p.size[1], sz = p.size[2];
  const double face_areas[3] = {sx * sy, sy * sz, sz * sx};
  const double total = 2.0 * (face_areas[0] + face_areas[1] + face_areas[2]);
  double pick = rng.next_double() * total;
  int face = 5;  // 0/1: +-z, 2/3: +-x, 4/5: +-y
  for (int f = 0; f < 5; ++f) {
    if (pick < face_areas[f / 2]) {
      face = f;
      break;
    }
    pick -= face_areas[f / 2];
  }
  const double a = rng.next_double() - 0.5;
  const double b = rng.next_double() - 0.5;
  switch (face) {
    case 0: return {a * sx, b * sy, 0.5 * sz};
    case 1: return {a * sx, b * sy, -0.5 * sz};
    case 2: return {0.5 * sx, a * sy, b * sz};
    case 3: return {-0.5 * sx, a * sy, b * sz};
    case 4: return {a * sx, 0.5 * sy, b * sz};
    default: return {a * sx, -0.5 * sy, b * sz};
  }
}

Eigen::Vector3d sample_cylinder(const PrimitiveSpec& p, CounterRng& rng) {
  const double radius = p.size[0], height = p.size[1];
  const double phi = rng.next_double() * 2.0 * kPi;
  const double z = (rng.next_double() - 0.5) * height;
  return {radius * std::cos(phi), radius * std::sin(phi), z};
}

Eigen::Vector3d sample_sphere(const PrimitiveSpec& p, CounterRng& rng) {
  const double radius = p.size[0];
  const double z = 2.0 * rng.next_double() - 1.0;
  const double phi = rng.next_double() * 2.0 * kPi;
  const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {radius * ring * std::cos(phi), radius * ring * std::sin(phi),
          radius * z};
}

}  // namespace

GeneratedScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  GeneratedScene scene;
  scene.views.reserve(spec.cameras.size());
  for (const CameraSpec& camera : spec.cameras) {
    scene.views.push_back(make_look_at_camera(camera.view_id,
                                              camera.image_name,
                                              camera.geometry, camera.position,
                                              camera.target, camera.up));
  }

  std::size_t total = 0;
  for (const PrimitiveSpec& object : spec.objects) total += object.point_count();
  scene.cloud.positions.reserve(total);
  scene.cloud.labels.emplace();
  scene.cloud.labels->reserve(total);

  for (std::size_t object_index = 0; object_index < spec.objects.size();
       ++object_index) {
    const PrimitiveSpec& object = spec.objects[object_index];
    const double cos_yaw = std::cos(object.yaw);
    const double sin_yaw = std::sin(object.yaw);
    const std::size_t count = object.point_count();
    for (std::size_t point_index = 0; point_index < count; ++point_index) {
      CounterRng rng(spec.seed, object_index, point_index);
      Eigen::Vector3d local;
      switch (object.shape) {
        case PrimitiveShape::plane: local = sample_plane(object, rng); break;
        case PrimitiveShape::box: local = sample_box(object, rng); break;
        case PrimitiveShape::cylinder: local = sample_cylinder(object, rng); break;
        case PrimitiveShape::sphere: local = sample_sphere(object, rng); break;
      }
      const Eigen::Vector3d world{
          cos_yaw * local.x() - sin_yaw * local.y() + object.center.x(),
          sin_yaw * local.x() + cos_yaw * local.y() + object.center.y(),
          local.z() + object.center.z()};
      scene.cloud.positions.push_back(world);
      scene.cloud.labels->push_back(object.class_id);
    }
  }
  return scene;
}

double class_fraction(const PointCloud& cloud, const std::set<ClassId>& targets) {
  if (!cloud.labels) {
    raise(Errc::missing_labels, "class_fraction needs a labeled cloud");
  }
  if (cloud.positions.empty()) return 0.0;
  std::size_t hits = 0;
  for (ClassId label : *cloud.labels) {
    if (targets.count(label)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cloud.size());
}

// --- Scene spec text format ----------------------------------------------

namespace {

[[noreturn]] void spec_error(std::size_t line_no, const std::string& what) {
  raise(Errc::truncated_data,
        "scene spec line " + std::to_string(line_no) + ": " + what);
}

double want_double(std::istringstream& ss, std::size_t line_no,
                   const char* what) {
  double value = 0.0;
  if (!(ss >> value)) spec_error(line_no, std::string("expected ") + what);
  return value;
}

PrimitiveSpec parse_object(std::istringstream& ss, std::size_t line_no) {
  PrimitiveSpec object;
  std::string shape;
  if (!(ss >> shape)) spec_error(line_no, "missing primitive shape");
  if (shape == "plane") {
    object.shape = PrimitiveShape::plane;
  } else if (shape == "box") {
    object.shape = PrimitiveShape::box;
  } else if (shape == "cylinder") {
    object.shape = PrimitiveShape::cylinder;
  } else if (shape == "sphere") {
    object.shape = PrimitiveShape::sphere;
  } else {
    spec_error(line_no, "unknown shape '" + shape + "'");
  }

  std::string key;
  while (ss >> key) {
    if (key == "class") {
      object.class_id =
          static_cast<ClassId>(want_double(ss, line_no, "class id"));
    } else if (key == "center") {
      object.center.x() = want_double(ss, line_no, "center x");
      object.center.y() = want_double(ss, line_no, "center y");
      object.center.z() = want_double(ss, line_no, "center z");
    } else if (key == "yaw") {
      object.yaw = want_double(ss, line_no, "yaw");
    } else if (key == "density") {
      object.density = want_double(ss, line_no, "density");
    } else if (key == "size") {
      object.size.clear();
      for (std::size_t i = 0; i < expected_size_params(object.shape); ++i) {
        object.size.push_back(want_double(ss, line_no, "size value"));
      }
    } else if (key == "radius") {
      if (object.size.empty()) object.size.resize(expected_size_params(object.shape));
      object.size[0] = want_double(ss, line_no, "radius");
    } else if (key == "height") {
      if (object.size.size() < 2) object.size.resize(2);
      object.size[1] = want_double(ss, line_no, "height");
    } else {
      spec_error(line_no, "unknown object key '" + key + "'");
    }
  }
  return object;
}

CameraSpec parse_camera(std::istringstream& ss, std::size_t line_no) {
  CameraSpec camera;
  std::uint64_t view_id = 0;
  if (!(ss >> view_id >> camera.image_name >> camera.geometry.height >>
        camera.geometry.width >> camera.geometry.fx >> camera.geometry.fy >>
        camera.geometry.cx >> camera.geometry.cy)) {
    spec_error(line_no, "camera needs id name height width fx fy cx cy");
  }
  camera.view_id = static_cast<ViewId>(view_id);
  bool have_pos = false;
  bool have_target = false;
  std::string key;
  while (ss >> key) {
    if (key == "pos") {
      camera.position.x() = want_double(ss, line_no, "pos x");
      camera.position.y() = want_double(ss, line_no, "pos y");
      camera.position.z() = want_double(ss, line_no, "pos z");
      have_pos = true;
    } else if (key == "look_at") {
      camera.target.x() = want_double(ss, line_no, "look_at x");
      camera.target.y() = want_double(ss, line_no, "look_at y");
      camera.target.z() = want_double(ss, line_no, "look_at z");
      have_target = true;
    } else if (key == "up") {
      camera.up.x() = want_double(ss, line_no, "up x");
      camera.up.y() = want_double(ss, line_no, "up y");
      camera.up.z() = want_double(ss, line_no, "up z");
    } else {
      spec_error(line_no, "unknown camera key '" + key + "'");
    }
  }
  if (!have_pos || !have_target) {
    spec_error(line_no, "camera needs both pos and look_at");
  }
  return camera;
}

}  // namespace

SceneSpec read_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  SceneSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string keyword;
    ss >> keyword;
    if (keyword == "seed") {
      if (!(ss >> spec.seed)) spec_error(line_no, "expected seed value");
    } else if (keyword == "extent") {
      spec.extent.x() = want_double(ss, line_no, "extent x");
      spec.extent.y() = want_double(ss, line_no, "extent y");
      spec.extent.z() = want_double(ss, line_no, "extent z");
    } else if (keyword == "point_cap") {
      if (!(ss >> spec.point_cap)) spec_error(line_no, "expected point cap");
    } else if (keyword == "object") {
      spec.objects.push_back(parse_object(ss, line_no));
    } else if (keyword == "camera") {
      spec.cameras.push_back(parse_camera(ss, line_no));
    } else {
      spec_error(line_no, "unknown keyword '" + keyword + "'");
    }
  }
  spec.validate();
  return spec;
}

void write_scene_spec(const SceneSpec& spec, const std::filesystem::path& path) {
  spec.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  const auto d = [](double v) { return detail::format_double(v); };
  out << "seed " << spec.seed << '\n';
  out << "extent " << d(spec.extent.x()) << ' ' << d(spec.extent.y()) << ' '
      << d(spec.extent.z()) << '\n';
  out << "point_cap " << spec.point_cap << '\n';
  for (const PrimitiveSpec& object : spec.objects) {
    out << "object " << shape_name(object.shape) << " class "
        << static_cast<int>(object.class_id) << " center "
        << d(object.center.x()) << ' ' << d(object.center.y()) << ' '
        << d(object.center.z()) << " yaw " << d(object.yaw);
    if (object.shape == PrimitiveShape::cylinder ||
        object.shape == PrimitiveShape::sphere) {
      out << " radius " << d(object.size[0]);
      if (object.shape == PrimitiveShape::cylinder) {
        out << " height " << d(object.size[1]);
      }
    } else {
      out << " size";
      for (double s : object.size) out << ' ' << d(s);
    }
    out << " density " << d(object.density) << '\n';
  }
  for (const CameraSpec& camera : spec.cameras) {
    out << "camera " << camera.view_id << ' ' << camera.image_name << ' '
        << camera.geometry.height << ' ' << camera.geometry.width << ' '
        << d(camera.geometry.fx) << ' ' << d(camera.geometry.fy) << ' '
        << d(camera.geometry.cx) << ' ' << d(camera.geometry.cy) << " pos "
        << d(camera.position.x()) << ' ' << d(camera.position.y()) << ' '
        << d(camera.position.z()) << " look_at " << d(camera.target.x()) << ' '
        << d(camera.target.y()) << ' ' << d(camera.target.z()) << " up "
        << d(camera.up.x()) << ' ' << d(camera.up.y()) << ' '
        << d(camera.up.z()) << '\n';
  }
  if (!out) raise(Errc::io_failure, "write failed for " + path.string());
}

SceneSpec demo_scene_spec() {
  SceneSpec spec;
  spec.seed = 42;
  spec.extent = {24.0, 24.0, 8.0};

  const auto add = [&spec](PrimitiveShape shape, ClassId class_id,
                           Eigen::Vector3d center, double yaw,
                           std::vector<double> size, double density) {
    PrimitiveSpec object;
    object.shape = shape;
    object.class_id = class_id;
    object.center = std::move(center);
    object.yaw = yaw;
    object.size = std::move(size);
    object.density = density;
    spec.objects.push_back(std::move(object));
  };

  add(PrimitiveShape::plane, 0, {0.0, 0.0, 0.0}, 0.0, {20.0, 12.0}, 220.0);
  add(PrimitiveShape::plane, 1, {0.0, 8.0, 0.05}, 0.0, {20.0, 4.0}, 220.0);
  add(PrimitiveShape::box, 2, {-6.0, 10.0, 3.0}, 0.0, {8.0, 4.0, 6.0}, 60.0);
  add(PrimitiveShape::box, 11, {3.0, 2.0, 0.7}, 0.35, {4.2, 1.8, 1.4}, 260.0);
  add(PrimitiveShape::cylinder, 5, {-4.0, 3.0, 1.6}, 0.0, {0.12, 3.2}, 420.0);
  add(PrimitiveShape::sphere, 8, {6.0, -3.0, 2.2}, 0.0, {1.1}, 180.0);

  ViewGeometry geometry;
  geometry.height = 96;
  geometry.width = 128;
  geometry.fx = 110.0;
  geometry.fy = 110.0;
  geometry.cx = 64.0;
  geometry.cy = 48.0;
  CameraSpec front;
  front.view_id = 0;
  front.image_name = "cam0";
  front.geometry = geometry;
  front.position = {0.0, -10.0, 4.0};
  front.target = {0.0, 0.0, 0.8};
  spec.cameras.push_back(front);
  CameraSpec side;
  side.view_id = 1;
  side.image_name = "cam1";
  side.geometry = geometry;
  side.position = {8.0, -6.0, 3.0};
  side.target = {0.0, 2.0, 0.8};
  spec.cameras.push_back(side);
  return spec;
}

}  // namespace extrude3d
