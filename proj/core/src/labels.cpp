#include "extrude3d/labels.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "extrude3d/errors.hpp"
#include "extrude3d/rng.hpp"

namespace extrude3d {

LabelMap::LabelMap(int height, int width, ClassId fill)
    : height(height), width(width) {
  if (height < 1 || width < 1) {
    raise(Errc::bad_dimensions, "label map dimensions must be at least 1x1");
  }
  values.assign(static_cast<std::size_t>(height) * width, fill);
}

void LabelMap::validate() const {
  if (height < 1 || width < 1 ||
      values.size() != static_cast<std::size_t>(height) * width) {
    raise(Errc::bad_dimensions, "label map size does not match its dimensions");
  }
  for (ClassId value : values) {
    if (value != kVoidLabel && !is_taxonomy_id(value)) {
      raise(Errc::unknown_class_id,
            "label value " + std::to_string(value) + " is outside the taxonomy");
    }
  }
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  return token;
}

int parse_pgm_int(std::istream& in, const char* what) {
  const std::string token = next_pgm_token(in);
  if (token.empty()) {
    raise(Errc::truncated_data, std::string("missing PGM ") + what);
  }
  try {
    std::size_t pos = 0;
    const int value = std::stoi(token, &pos);
    if (pos != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    raise(Errc::bad_dimensions,
          std::string("invalid PGM ") + what + " '" + token + "'");
  }
}

}  // namespace

LabelMap load_label_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());

  const std::string magic = next_pgm_token(in);
  if (magic != "P5" && magic != "P2") {
    raise(Errc::bad_magic, "unsupported PGM magic '" + magic + "'");
  }
  const int width = parse_pgm_int(in, "width");
  const int height = parse_pgm_int(in, "height");
  const int maxval = parse_pgm_int(in, "maxval");
  if (width < 1 || height < 1) {
    raise(Errc::bad_dimensions, "PGM dimensions must be positive");
  }
  if (maxval != 255) {
    raise(Errc::bad_dimensions, "PGM maxval must be 255, got " +
                                    std::to_string(maxval));
  }

  LabelMap map(height, width);
  const std::size_t count = map.values.size();
  if (magic == "P5") {
    // The maxval token consumed exactly one trailing whitespace byte.
    in.read(reinterpret_cast<char*>(map.values.data()),
            static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
      raise(Errc::truncated_data, "P5 pixel data ends early");
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string token = next_pgm_token(in);
      if (token.empty()) raise(Errc::truncated_data, "P2 pixel data ends early");
      int value = 0;
      try {
        value = std::stoi(token);
      } catch (const std::exception&) {
        raise(Errc::truncated_data, "invalid P2 pixel '" + token + "'");
      }
      if (value < 0 || value > 255) {
        raise(Errc::truncated_data, "P2 pixel out of range: " + token);
      }
      map.values[i] = static_cast<ClassId>(value);
    }
  }
  map.validate();
  return map;
}

void write_label_map(const LabelMap& map, const std::filesystem::path& path,
                     PgmFormat format) {
  map.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  if (format == PgmFormat::binary_p5) {
    out << "P5\n" << map.width << ' ' << map.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(map.values.data()),
              static_cast<std::streamsize>(map.values.size()));
  } else {
    out << "P2\n" << map.width << ' ' << map.height << "\n255\n";
    for (int r = 0; r < map.height; ++r) {
      for (int c = 0; c < map.width; ++c) {
        out << static_cast<int>(map.at(r, c)) << (c + 1 == map.width ? '\n' : ' ');
      }
    }
  }
  if (!out) raise(Errc::io_failure, "write failed for " + path.string());
}

LabelMap render_ground_truth_labels(const PointCloud& cloud,
                                    const CameraView& view,
                                    const PointPixelMap& map) {
  if (!cloud.labels) {
    raise(Errc::missing_labels, "ground-truth rendering needs a labeled cloud");
  }
  LabelMap rendered(view.geometry.height, view.geometry.width, kVoidLabel);
  const auto [begin, end] = map.view_range(view.view_id);
  for (std::size_t i = begin; i < end; ++i) {
    const MapEntry& entry = map.entries[i];
    if (!rendered.in_bounds(entry.pixel)) {
      raise(Errc::geometry_mismatch,
            "map entry pixel lies outside the view geometry");
    }
    if (entry.point_id >= cloud.size()) {
      raise(Errc::geometry_mismatch, "map entry references a missing point");
    }
    rendered.at(entry.pixel.row, entry.pixel.col) =
        (*cloud.labels)[entry.point_id];
  }
  return rendered;
}

LabelMap inject_label_noise(const LabelMap& map, double flip_rate,
                            std::uint64_t seed) {
  if (flip_rate < 0.0 || flip_rate > 1.0) {
    raise(Errc::invalid_argument, "flip_rate must lie in [0, 1]");
  }
  map.validate();
  LabelMap noisy = map;
  for (std::size_t i = 0; i < noisy.values.size(); ++i) {
    const ClassId original = noisy.values[i];
    if (original == kVoidLabel) continue;
    CounterRng rng(seed, /*stream=*/0x6c6162656c6e7aULL, /*counter=*/i);
    if (rng.next_double() >= flip_rate) continue;
    // Uniform over the 14 taxonomy ids other than the original.
    const auto offset = static_cast<ClassId>(rng.next_below(kNumClasses - 1));
    noisy.values[i] =
        offset >= original ? static_cast<ClassId>(offset + 1) : offset;
  }
  return noisy;
}

}  // namespace extrude3d
