#include <fstream>

#include "doctest.h"
#include "pambench/errors.hpp"
#include "pambench/stimuli.hpp"
#include "pambench/util.hpp"
#include "test_support.hpp"

using namespace pambench;
namespace fs = std::filesystem;

namespace {

// Shared pack so the suite synthesises once.
const AssetPack& shared_pack() {
  static TempDir dir;
  static AssetPack pack = synth_asset_pack(7, dir / "pack", 2);
  return pack;
}

SceneObject at(Category c, int idx, Location l) { return SceneObject{StimulusId{c, idx, 0}, l, std::nullopt}; }

}  // namespace

TEST_CASE("synth pack counts and determinism") {
  const AssetPack& pack = shared_pack();
  CHECK(pack.image_count() == 128);
  CHECK(pack.catalog().views_of(Category::tables, 7) == 2);

  TempDir other;
  auto again = synth_asset_pack(7, other / "p", 2);
  CHECK(again.digest() == pack.digest());
  CHECK(tree_digest(other / "p") == tree_digest(pack.root()));

  auto reloaded = load_asset_pack(pack.root());
  CHECK(reloaded.digest() == pack.digest());
  const Sprite& a = reloaded.sprite({Category::boats, 3, 1});
  const Sprite& b = pack.sprite({Category::boats, 3, 1});
  CHECK(a.rgba == b.rgba);

  TempDir third;
  auto seed8 = synth_asset_pack(8, third / "p", 2);
  CHECK(seed8.digest() != pack.digest());
}

TEST_CASE("views of one object differ") {
  const AssetPack& pack = shared_pack();
  for (Category c : kAllCategories) {
    CHECK(pack.sprite({c, 0, 0}).rgba != pack.sprite({c, 0, 1}).rgba);
  }
}

TEST_CASE("missing object and corrupt file") {
  TempDir dir;
  fs::copy(shared_pack().root(), dir / "p", fs::copy_options::recursive);
  fs::remove(dir / "p" / "pack.json");
  SUBCASE("missing") {
    fs::remove_all(dir / "p" / "chairs" / "5");
    try {
      load_asset_pack(dir / "p");
      FAIL("expected MissingObject");
    } catch (const MissingObject& e) {
      CHECK(std::string(e.what()).find("chairs object 5") != std::string::npos);
    }
  }
  SUBCASE("corrupt") {
    std::ofstream(dir / "p" / "cars" / "2" / "1.png", std::ios::trunc) << "not a png";
    try {
      load_asset_pack(dir / "p");
      FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
      CHECK(std::string(e.what()).find("1.png") != std::string::npos);
    }
  }
}

TEST_CASE("unknown stimulus") {
  CHECK_THROWS_AS(shared_pack().sprite({Category::cars, 0, 2}), UnknownStimulus);
  CHECK_THROWS_AS(shared_pack().sprite({Category::cars, 8, 0}), UnknownStimulus);
}

TEST_CASE("empty frame is plain background") {
  CanvasConfig cfg;
  Image img = compose_frame(Frame{0, {}}, shared_pack(), cfg);
  CHECK(img == Image(cfg.width, cfg.height, cfg.background));
}

TEST_CASE("sprite stays inside its quadrant") {
  CanvasConfig cfg;
  for (Location l : kAllLocations) {
    Image img = compose_frame(Frame{0, {at(Category::planes, 4, l)}}, shared_pack(), cfg);
    const Rect r = quadrant_rect(l, cfg);
    int inside = 0, outside = 0;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (img.at(x, y) == cfg.background) continue;
        (r.contains(x, y) ? inside : outside)++;
      }
    }
    CHECK(inside > 0);
    CHECK(outside == 0);
  }
}

TEST_CASE("two objects occupy disjoint quadrants") {
  CanvasConfig cfg;
  Image img = compose_frame(Frame{0, {at(Category::cars, 1, Location::top_left), at(Category::boats, 2, Location::bottom_right)}},
                            shared_pack(), cfg);
  const Rect tl = quadrant_rect(Location::top_left, cfg);
  const Rect br = quadrant_rect(Location::bottom_right, cfg);
  int n_tl = 0, n_br = 0, stray = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y) == cfg.background) continue;
      if (tl.contains(x, y)) ++n_tl;
      else if (br.contains(x, y)) ++n_br;
      else ++stray;
    }
  }
  CHECK(n_tl > 0);
  CHECK(n_br > 0);
  CHECK(stray == 0);
}

TEST_CASE("render_trial names epochs by frame index") {
  TempDir dir;
  Scene s = make_blank_scene(9);
  s.frames[0].objects.push_back(at(Category::chairs, 0, Location::top_left));
  CanvasConfig cfg;
  cfg.width = cfg.height = 64;
  cfg.margin = 2;
  auto files = render_trial(s, shared_pack(), cfg, dir / "frames");
  REQUIRE(files.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(files[static_cast<std::size_t>(i)].filename() == "epoch" + std::to_string(i) + ".png");
  const auto first = read_file_bytes(files[0]);
  render_trial(s, shared_pack(), cfg, dir / "frames");
  CHECK(read_file_bytes(files[0]) == first);
  Image decoded = decode_png_rgb(first, "epoch0");
  CHECK(decoded == compose_frame(s.frames[0], shared_pack(), cfg));

  Scene one = make_blank_scene(1);
  one.frames[0].objects.push_back(at(Category::chairs, 0, Location::top_left));
  TempDir d2;
  render_trial(one, shared_pack(), cfg, d2.path());
  CHECK(std::distance(fs::directory_iterator(d2.path()), fs::directory_iterator()) == 1);
}

TEST_CASE("canvas validation") {
  CanvasConfig cfg;
  cfg.width = 255;
  CHECK_THROWS_AS(cfg.validate(), InvalidParams);
  cfg.width = 256;
  cfg.extent = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParams);
}
