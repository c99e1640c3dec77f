#include <algorithm>
#include <cmath>

#include "pambench/errors.hpp"
#include "pambench/stimuli.hpp"
#include "pambench/util.hpp"

namespace pambench {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

void CanvasConfig::validate() const {
  if (width <= 0 || height <= 0 || width % 2 || height % 2) {
    throw InvalidParams("canvas width and height must be positive and even");
  }
  if (margin < 0) throw InvalidParams("canvas margin must be >= 0");
  if (!(extent > 0.0 && extent <= 1.0)) throw InvalidParams("sprite extent must be in (0, 1]");
  if (2 * margin >= std::min(width, height) / 2) throw InvalidParams("margin leaves no room inside a quadrant");
}

Rect quadrant_rect(Location loc, const CanvasConfig& cfg) {
  const int hw = cfg.width / 2;
  const int hh = cfg.height / 2;
  const int x = is_right(loc) ? hw : 0;
  const int y = is_bottom(loc) ? hh : 0;
  return {x + cfg.margin, y + cfg.margin, x + hw - cfg.margin, y + hh - cfg.margin};
}

namespace {

// Box-filter weights for mapping `src` samples onto `dst` samples: each output
// sample averages the source interval it covers, weighting partial pixels.
struct Tap {
  int index;
  double weight;
};

std::vector<std::vector<Tap>> box_taps(int src, int dst) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    const double lo = d * scale;
    const double hi = (d + 1) * scale;
    for (int s = static_cast<int>(std::floor(lo)); s < std::min(src, static_cast<int>(std::ceil(hi))); ++s) {
      const double w = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (w > 0) taps[static_cast<std::size_t>(d)].push_back({s, w / scale});
    }
  }
  return taps;
}

// Resamples to w x h with premultiplied alpha; returns 4 doubles per pixel.
std::vector<double> resample(const Sprite& sp, int w, int h) {
  const auto xt = box_taps(sp.width, w);
  const auto yt = box_taps(sp.height, h);
  std::vector<double> rows(static_cast<std::size_t>(sp.height) * w * 4, 0.0);
  for (int y = 0; y < sp.height; ++y) {
    for (int x = 0; x < w; ++x) {
      double* out = &rows[(static_cast<std::size_t>(y) * w + x) * 4];
      for (const Tap& t : xt[static_cast<std::size_t>(x)]) {
        const std::uint8_t* p = &sp.rgba[(static_cast<std::size_t>(y) * sp.width + t.index) * 4];
        const double a = p[3] / 255.0;
        out[0] += t.weight * p[0] * a;
        out[1] += t.weight * p[1] * a;
        out[2] += t.weight * p[2] * a;
        out[3] += t.weight * a;
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(w) * h * 4, 0.0);
  for (int y = 0; y < h; ++y) {
    for (const Tap& t : yt[static_cast<std::size_t>(y)]) {
      for (int x = 0; x < w; ++x) {
        const double* src = &rows[(static_cast<std::size_t>(t.index) * w + x) * 4];
        double* dst = &out[(static_cast<std::size_t>(y) * w + x) * 4];
        for (int c = 0; c < 4; ++c) dst[c] += t.weight * src[c];
      }
    }
  }
  return out;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void place(Image& img, const Sprite& sp, const Rect& box, const CanvasConfig& cfg) {
  const int bw = box.x1 - box.x0;
  const int bh = box.y1 - box.y0;
  const double fit = cfg.extent * std::min(static_cast<double>(bw) / sp.width, static_cast<double>(bh) / sp.height);
  const int w = std::clamp(static_cast<int>(std::floor(sp.width * fit)), 1, bw);
  const int h = std::clamp(static_cast<int>(std::floor(sp.height * fit)), 1, bh);
  const int ox = box.x0 + (bw - w) / 2;
  const int oy = box.y0 + (bh - h) / 2;
  const auto px = resample(sp, w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* p = &px[(static_cast<std::size_t>(y) * w + x) * 4];
      const double a = std::min(p[3], 1.0);
      if (a <= 0.0) continue;
      const Rgb bg = img.at(ox + x, oy + y);
      img.set(ox + x, oy + y,
              {to_byte(p[0] + (1.0 - a) * bg.r), to_byte(p[1] + (1.0 - a) * bg.g), to_byte(p[2] + (1.0 - a) * bg.b)});
    }
  }
}

}  // namespace

Image compose_frame(const Frame& frame, const AssetPack& pack, const CanvasConfig& cfg) {
  cfg.validate();
  Image img(cfg.width, cfg.height, cfg.background);
  for (const SceneObject& o : frame.objects) {
    place(img, pack.sprite(o.stimulus), quadrant_rect(o.location, cfg), cfg);
  }
  return img;
}

std::vector<std::filesystem::path> render_trial(const Scene& scene, const AssetPack& pack, const CanvasConfig& cfg,
                                                const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  out.reserve(scene.frames.size());
  for (const Frame& f : scene.frames) {
    auto path = out_dir / ("epoch" + std::to_string(f.index) + ".png");
    write_file_atomic(path, encode_png(compose_frame(f, pack, cfg)));
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace pambench
