#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pambench/task.hpp"

namespace pambench {

struct Rgb {
  std::uint8_t r = 255, g = 255, b = 255;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit RGB, row-major, no padding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgb fill);
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  friend bool operator==(const Image&, const Image&) = default;
};

// 8-bit RGBA sprite, straight (non-premultiplied) alpha.
struct Sprite {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;
};

struct CanvasConfig {
  int width = 256;
  int height = 256;
  Rgb background{255, 255, 255};
  int margin = 8;
  double extent = 0.9;  // sprite max extent, fraction of the quadrant interior

  void validate() const;  // throws InvalidParams
};

// Half-open pixel rectangle.
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

// Quadrant interior (quadrant minus margin) for a location.
Rect quadrant_rect(Location loc, const CanvasConfig& cfg);

// What scene sampling needs to know about a pack: how many views each object
// has, and the pack digest that generated datasets record.
struct ViewCatalog {
  std::array<int, 64> views{};
  std::string digest;

  int views_of(Category c, int object_index) const {
    return views[static_cast<std::size_t>(static_cast<int>(c) * kObjectsPerCategory + object_index)];
  }
  // Every object with the same view count, no files behind it.
  static ViewCatalog uniform(int views_per_object, std::string digest = "synthetic");
};

class AssetPack {
 public:
  const std::filesystem::path& root() const noexcept { return root_; }
  const std::string& digest() const noexcept { return digest_; }
  const ViewCatalog& catalog() const noexcept { return catalog_; }
  std::size_t image_count() const noexcept;

  // Throws UnknownStimulus.
  const Sprite& sprite(const StimulusId& id) const;

 private:
  friend AssetPack load_asset_pack(const std::filesystem::path& path);
  std::filesystem::path root_;
  std::string digest_;
  ViewCatalog catalog_;
  std::array<std::vector<Sprite>, 64> sprites_;
};

// Layout: <root>/<category>/<object_index>/<view_index>.png plus <root>/pack.json.
// Throws MissingObject, DecodeError, IoError.
AssetPack load_asset_pack(const std::filesystem::path& path);

// Deterministic glyph pack: shape per category, fill pattern per object,
// rotation per view, colours from the seed.
AssetPack synth_asset_pack(std::uint64_t seed, const std::filesystem::path& out_path, int views_per_object);

Image compose_frame(const Frame& frame, const AssetPack& pack, const CanvasConfig& cfg);

// Writes epoch{i}.png per frame and returns the paths in frame order.
std::vector<std::filesystem::path> render_trial(const Scene& scene, const AssetPack& pack, const CanvasConfig& cfg,
                                                const std::filesystem::path& out_dir);

std::vector<std::uint8_t> encode_png(const Image& img);
std::vector<std::uint8_t> encode_png(const Sprite& sprite);
Image decode_png_rgb(std::span<const std::uint8_t> bytes, const std::string& what);
Sprite decode_png_rgba(std::span<const std::uint8_t> bytes, const std::string& what);

}  // namespace pambench
