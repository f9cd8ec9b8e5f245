#pragma once

// Shared scene builders for the microbenchmarks.

#include <map>
#include <set>

#include "extrude3d/extrusion.hpp"
#include "extrude3d/labels.hpp"
#include "extrude3d/mapping.hpp"
#include "extrude3d/scene.hpp"
#include "extrude3d/synth.hpp"

namespace extrude3d::bench {

struct Fixture {
  PointCloud cloud;
  std::vector<CameraView> views;
  PointPixelMap map;
  std::map<ViewId, LabelMap> label_maps;
};

/// Flat two-class scene under one top-down camera; `target_fraction` of the
/// area carries class 0.
inline Fixture make_fixture(std::size_t point_count, double target_fraction,
                            int image_size = 512) {
  SceneSpec spec;
  spec.seed = 7;
  spec.point_cap = point_count + 1000;
  const double side = 20.0;
  const double width_target = side * target_fraction;
  const double density = static_cast<double>(point_count) / (side * side);

  PrimitiveSpec target_plane;
  target_plane.shape = PrimitiveShape::plane;
  target_plane.class_id = 0;
  target_plane.center = {-side / 2.0 + width_target / 2.0, 0.0, 0.0};
  target_plane.size = {width_target, side};
  target_plane.density = density;
  spec.objects.push_back(target_plane);

  PrimitiveSpec rest_plane;
  rest_plane.shape = PrimitiveShape::plane;
  rest_plane.class_id = 1;
  rest_plane.center = {width_target / 2.0, 0.0, 0.0};
  rest_plane.size = {side - width_target, side};
  rest_plane.density = density;
  spec.objects.push_back(rest_plane);

  CameraSpec camera;
  camera.view_id = 0;
  camera.image_name = "top";
  camera.geometry.height = image_size;
  camera.geometry.width = image_size;
  camera.geometry.fx = camera.geometry.fy = image_size * 620.0 / 512.0;
  camera.geometry.cx = camera.geometry.cy = image_size / 2.0;
  camera.position = {0.0, 0.0, 25.0};
  camera.target = {0.0, 0.0, 0.0};
  camera.up = {0.0, 1.0, 0.0};
  spec.cameras.push_back(camera);

  Fixture fixture;
  GeneratedScene generated = generate_scene(spec);
  fixture.cloud = std::move(generated.cloud);
  fixture.views = std::move(generated.views);
  fixture.map = build_point_pixel_map(fixture.cloud, fixture.views);
  for (const CameraView& view : fixture.views) {
    fixture.label_maps.emplace(
        view.view_id,
        render_ground_truth_labels(fixture.cloud, view, fixture.map));
  }
  return fixture;
}

inline std::map<ViewId, ClassPixelIndex> make_indexes(
    const Fixture& fixture, const std::set<ClassId>& targets) {
  std::map<ViewId, ClassPixelIndex> indexes;
  for (const CameraView& view : fixture.views) {
    indexes.emplace(view.view_id,
                    extract_class_pixels(fixture.label_maps.at(view.view_id),
                                         targets, view.image_name));
  }
  return indexes;
}

}  // namespace extrude3d::bench
