#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "pambench/errors.hpp"
#include "pambench/rng.hpp"
#include "pambench/stimuli.hpp"
#include "pambench/util.hpp"

namespace pambench {

using nlohmann::json;
namespace fs = std::filesystem;

ViewCatalog ViewCatalog::uniform(int views_per_object, std::string digest) {
  ViewCatalog c;
  c.views.fill(views_per_object);
  c.digest = std::move(digest);
  return c;
}

std::size_t AssetPack::image_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : sprites_) n += v.size();
  return n;
}

const Sprite& AssetPack::sprite(const StimulusId& id) const {
  const int slot = static_cast<int>(id.category) * kObjectsPerCategory + id.object_index;
  if (id.object_index < 0 || id.object_index >= kObjectsPerCategory || id.view_index < 0 ||
      id.view_index >= static_cast<int>(sprites_[static_cast<std::size_t>(slot)].size())) {
    throw UnknownStimulus("no sprite for " + std::string(to_string(id.category)) + "/" +
                          std::to_string(id.object_index) + "/" + std::to_string(id.view_index));
  }
  return sprites_[static_cast<std::size_t>(slot)][static_cast<std::size_t>(id.view_index)];
}

AssetPack load_asset_pack(const fs::path& path) {
  if (!fs::is_directory(path)) throw IoError("asset pack directory not found: " + path.string());
  AssetPack pack;
  pack.root_ = path;
  for (Category c : kAllCategories) {
    for (int obj = 0; obj < kObjectsPerCategory; ++obj) {
      const fs::path dir = path / std::string(to_string(c)) / std::to_string(obj);
      std::vector<int> views;
      if (fs::is_directory(dir)) {
        for (const auto& e : fs::directory_iterator(dir)) {
          if (!e.is_regular_file() || e.path().extension() != ".png") continue;
          const std::string stem = e.path().stem().string();
          if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            continue;
          }
          views.push_back(std::stoi(stem));
        }
      }
      if (views.empty()) {
        throw MissingObject("asset pack has no views for " + std::string(to_string(c)) + " object " +
                            std::to_string(obj));
      }
      std::sort(views.begin(), views.end());
      auto& slot = pack.sprites_[static_cast<std::size_t>(static_cast<int>(c) * kObjectsPerCategory + obj)];
      for (std::size_t i = 0; i < views.size(); ++i) {
        const fs::path file = dir / (std::to_string(i) + ".png");
        if (views[i] != static_cast<int>(i)) throw DecodeError(file.string() + ": view files are not contiguous");
        Sprite s = decode_png_rgba(read_file_bytes(file), file.string());
        if (s.width <= 0 || s.height <= 0) throw DecodeError(file.string() + ": empty image");
        slot.push_back(std::move(s));
      }
      pack.catalog_.views[static_cast<std::size_t>(static_cast<int>(c) * kObjectsPerCategory + obj)] =
          static_cast<int>(views.size());
    }
  }
  pack.digest_ = tree_digest(path, {"pack.json"});
  pack.catalog_.digest = pack.digest_;

  const fs::path manifest = path / "pack.json";
  if (fs::exists(manifest)) {
    json j;
    try {
      j = json::parse(read_file_text(manifest));
    } catch (const json::exception& e) {
      throw DecodeError(manifest.string() + ": " + e.what());
    }
    if (j.contains("digest") && j["digest"].is_string() && j["digest"].get<std::string>() != pack.digest_) {
      throw DecodeError(manifest.string() + ": recorded digest does not match pack contents");
    }
  }
  return pack;
}

namespace {

constexpr int kGlyph = 96;
constexpr int kSuper = 4;

// Shape membership in unit coordinates (u, v in [-1, 1], v down).
bool in_shape(Category c, double u, double v) {
  const double r = std::hypot(u, v);
  switch (c) {
    case Category::benches:  // wide bar on two legs
      return (std::abs(v + 0.15) < 0.2 && std::abs(u) < 0.85) || (v > 0 && v < 0.7 && std::abs(std::abs(u) - 0.6) < 0.12);
    case Category::boats:  // hull with mast
      return (v > 0.1 && v < 0.55 && std::abs(u) < 0.85 - (v - 0.1)) || (std::abs(u) < 0.07 && v > -0.8 && v <= 0.1) ||
             (u > 0.07 && u < 0.55 && v > -0.7 && v < 0.0 && u - 0.07 < (v + 0.7) * 0.7);
    case Category::cars:  // body plus cabin and wheels
      return (std::abs(v - 0.1) < 0.25 && std::abs(u) < 0.9) || (v < -0.15 && v > -0.5 && std::abs(u + 0.1) < 0.45) ||
             std::hypot(u + 0.5, v - 0.45) < 0.2 || std::hypot(u - 0.5, v - 0.45) < 0.2;
    case Category::chairs:  // seat, back, legs
      return (std::abs(v - 0.05) < 0.12 && std::abs(u) < 0.6) || (u > 0.45 && u < 0.6 && v > -0.85 && v < 0.05) ||
             (v > 0.05 && v < 0.8 && std::abs(std::abs(u) - 0.52) < 0.08);
    case Category::couches:  // broad seat with arms
      return (v > -0.2 && v < 0.45 && std::abs(u) < 0.9) || (v > -0.55 && v < 0.45 && std::abs(std::abs(u) - 0.8) < 0.12) ||
             (v > -0.6 && v <= -0.2 && std::abs(u) < 0.7);
    case Category::lighting:  // bulb on a stem
      return r < 0.5 || (std::abs(u) < 0.18 && v > 0.3 && v < 0.85);
    case Category::planes:  // fuselage, wings, tail
      return (std::abs(v) < 0.12 && std::abs(u) < 0.9) || (std::abs(u + 0.05) < 0.15 && std::abs(v) < 0.8 - std::abs(u)) ||
             (u < -0.65 && u > -0.9 && std::abs(v) < 0.35);
    case Category::tables:  // top and two legs
      return (std::abs(v + 0.35) < 0.12 && std::abs(u) < 0.9) || (v > -0.35 && v < 0.8 && std::abs(std::abs(u) - 0.7) < 0.09);
  }
  return false;
}

// Fill pattern per object index; false leaves a hole.
bool in_pattern(int obj, double u, double v) {
  const double s = 6.0;
  switch (obj) {
    case 0: return true;
    case 1: return static_cast<int>(std::floor((v + 1) * s)) % 2 == 0;
    case 2: return static_cast<int>(std::floor((u + 1) * s)) % 2 == 0;
    case 3: return (static_cast<int>(std::floor((u + 1) * s)) + static_cast<int>(std::floor((v + 1) * s))) % 2 == 0;
    case 4: return static_cast<int>(std::floor((u + v + 2) * s * 0.7)) % 2 == 0;
    case 5: return static_cast<int>(std::floor(std::hypot(u, v) * s * 1.5)) % 2 == 0;
    case 6: {
      const double fu = (u + 1) * s - std::floor((u + 1) * s) - 0.5;
      const double fv = (v + 1) * s - std::floor((v + 1) * s) - 0.5;
      return std::hypot(fu, fv) > 0.3;
    }
    default: return static_cast<int>(std::floor((u - v + 2) * s * 0.7)) % 2 == 0;
  }
}

Rgb object_colour(std::uint64_t seed, Category c, int obj) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<int>(c) * kObjectsPerCategory + obj)));
  // Keep colours saturated and well away from the white background.
  Rgb col;
  std::array<int, 3> ch{rng.uniform(20, 200), rng.uniform(20, 200), rng.uniform(20, 200)};
  ch[rng.index(3)] = rng.uniform(0, 40);
  col.r = static_cast<std::uint8_t>(ch[0]);
  col.g = static_cast<std::uint8_t>(ch[1]);
  col.b = static_cast<std::uint8_t>(ch[2]);
  return col;
}

Sprite make_glyph(std::uint64_t seed, Category c, int obj, int view, int views) {
  const Rgb fill = object_colour(seed, c, obj);
  const Rgb edge{static_cast<std::uint8_t>(fill.r / 3), static_cast<std::uint8_t>(fill.g / 3),
                 static_cast<std::uint8_t>(fill.b / 3)};
  const double angle = 2.0 * std::numbers::pi * view / views;
  const double ca = std::cos(angle), sa = std::sin(angle);
  Sprite s{kGlyph, kGlyph, std::vector<std::uint8_t>(static_cast<std::size_t>(kGlyph) * kGlyph * 4, 0)};
  for (int y = 0; y < kGlyph; ++y) {
    for (int x = 0; x < kGlyph; ++x) {
      double r = 0, g = 0, b = 0, a = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double px = (x + (sx + 0.5) / kSuper) / kGlyph * 2.0 - 1.0;
          const double py = (y + (sy + 0.5) / kSuper) / kGlyph * 2.0 - 1.0;
          // rotate sample point into glyph space
          const double u = (ca * px + sa * py) * 1.05;
          const double v = (-sa * px + ca * py) * 1.05;
          // orientation notch keeps every view distinct, even for symmetric shapes
          const bool notch = std::hypot(u - 0.75, v + 0.75) < 0.14;
          Rgb col;
          if (notch) {
            col = edge;
          } else if (in_shape(c, u, v)) {
            col = in_pattern(obj, u, v) ? fill : edge;
          } else {
            continue;
          }
          r += col.r;
          g += col.g;
          b += col.b;
          a += 1;
        }
      }
      if (a == 0) continue;
      auto* p = &s.rgba[(static_cast<std::size_t>(y) * kGlyph + x) * 4];
      p[0] = static_cast<std::uint8_t>(std::lround(r / a));
      p[1] = static_cast<std::uint8_t>(std::lround(g / a));
      p[2] = static_cast<std::uint8_t>(std::lround(b / a));
      p[3] = static_cast<std::uint8_t>(std::lround(255.0 * a / (kSuper * kSuper)));
    }
  }
  return s;
}

}  // namespace

AssetPack synth_asset_pack(std::uint64_t seed, const fs::path& out_path, int views_per_object) {
  if (views_per_object < 1) throw InvalidParams("views_per_object must be >= 1");
  std::error_code ec;
  fs::create_directories(out_path, ec);
  if (ec) throw IoError("cannot create " + out_path.string() + ": " + ec.message());
  for (Category c : kAllCategories) {
    for (int obj = 0; obj < kObjectsPerCategory; ++obj) {
      const fs::path dir = out_path / std::string(to_string(c)) / std::to_string(obj);
      for (int v = 0; v < views_per_object; ++v) {
        write_file_atomic(dir / (std::to_string(v) + ".png"), encode_png(make_glyph(seed, c, obj, v, views_per_object)));
      }
    }
  }
  json manifest = {
      {"format", "pambench-asset-pack"},
      {"version", 1},
      {"seed", seed},
      {"categories", kAllCategories.size()},
      {"objects_per_category", kObjectsPerCategory},
      {"views_per_object", views_per_object},
      {"image_count", kAllCategories.size() * kObjectsPerCategory * views_per_object},
      {"digest", tree_digest(out_path, {"pack.json"})},
  };
  write_file_atomic(out_path / "pack.json", manifest.dump(2) + "\n");
  return load_asset_pack(out_path);
}

}  // namespace pambench
