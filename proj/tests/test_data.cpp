// Copyright 2026 The mtseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "mtseg/annotation.hpp"
#include "mtseg/data.hpp"
#include "mtseg/dataset_io.hpp"
#include "mtseg/image_io.hpp"
#include "mtseg/synthetic.hpp"

using namespace mtseg;
namespace fs = std::filesystem;

namespace {

// Crossing-number test of one point against one polygon.
bool point_in_polygon(const std::vector<PolygonShape::Point>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double xi = poly[i].x, yi = poly[i].y, xj = poly[j].x, yj = poly[j].y;
    if (((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi)) inside = !inside;
  }
  return inside;
}

BinaryMask brute_force_mask(const PolygonAnnotation& ann) {
  BinaryMask m(ann.height, ann.width);
  for (std::size_t r = 0; r < ann.height; ++r)
    for (std::size_t c = 0; c < ann.width; ++c)
      for (const auto& s : ann.shapes)
        if (point_in_polygon(s.points, c + 0.5, r + 0.5)) m.at(r, c) = 1;
  return m;
}

ImageSample make_sample(const std::string& id, const std::string& patient, std::size_t h = 4, std::size_t w = 4,
                        float value = 0.5f) {
  ImageSample s;
  s.id = id;
  s.patient_id = patient;
  s.pixels = RgbImage(h, w, value);
  s.mask = BinaryMask(h, w);
  return s;
}

// Image whose every channel value is distinct, plus a random mask.
ImageSample coded_sample(std::size_t h, std::size_t w, Rng& rng) {
  ImageSample s = make_sample("coded", "p", h, w);
  for (std::size_t i = 0; i < s.pixels.values.size(); ++i) {
    s.pixels.values[i] = static_cast<float>(i) / static_cast<float>(s.pixels.values.size());
  }
  for (auto& v : s.mask->values) v = uniform01(rng) < 0.4 ? 1 : 0;
  return s;
}

// Destination of source pixel (r, c) computed with centered coordinates:
// flips negate an axis, each quarter turn maps (x, y) to (y, -x).
std::pair<std::size_t, std::size_t> remap(const GeometricTransform& t, std::size_t r, std::size_t c, std::size_t H,
                                          std::size_t W) {
  double x = c - (W - 1) / 2.0, y = r - (H - 1) / 2.0;
  if (t.flip_horizontal) x = -x;
  if (t.flip_vertical) y = -y;
  std::size_t h = H, w = W;
  for (int k = 0; k < t.quarter_turns; ++k) {
    const double nx = y, ny = -x;
    x = nx;
    y = ny;
    std::swap(h, w);
  }
  return {static_cast<std::size_t>(std::lround(y + (h - 1) / 2.0)),
          static_cast<std::size_t>(std::lround(x + (w - 1) / 2.0))};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::path(MTSEG_TEST_TMP) / "data" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

}  // namespace

TEST_SUITE("rasterize") {
  TEST_CASE("no shapes gives an empty mask") {
    PolygonAnnotation ann{"a", 8, 8, {}};
    CHECK(rasterize_polygons(ann) == BinaryMask(8, 8));
  }

  TEST_CASE("full-frame rectangle fills every pixel") {
    PolygonAnnotation ann{"a", 8, 8, {{"r", {{0, 0}, {8, 0}, {8, 8}, {0, 8}}}}};
    CHECK(rasterize_polygons(ann) == BinaryMask(8, 8, 1));
  }

  TEST_CASE("triangle matches the per-pixel crossing test") {
    PolygonAnnotation ann{"a", 8, 8, {{"t", {{0, 0}, {6, 0}, {0, 6}}}}};
    const BinaryMask m = rasterize_polygons(ann);
    CHECK(m == brute_force_mask(ann));
    // Centers with x + y < 6 are inside: 1+2+3+4+5 pixels on rows 0..4.
    CHECK(m.count() == 15);
  }

  TEST_CASE("random polygons agree exactly with the per-pixel oracle") {
    Rng rng = make_stream({7});
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t H = uniform_int(rng, 1, 16), W = uniform_int(rng, 1, 16);
      PolygonAnnotation ann{"r", H, W, {}};
      const int shapes = uniform_int(rng, 1, 3);
      for (int s = 0; s < shapes; ++s) {
        PolygonShape shape{"x", {}};
        const int n = uniform_int(rng, 3, 9);
        for (int i = 0; i < n; ++i) shape.points.push_back({uniform(rng, 0, W), uniform(rng, 0, H)});
        ann.shapes.push_back(shape);
      }
      REQUIRE(rasterize_polygons(ann) == brute_force_mask(ann));
    }
  }

  TEST_CASE("self-intersecting polygon uses the even-odd rule") {
    // A square traced twice crosses every interior ray an even number of times.
    PolygonAnnotation twice{"a", 8, 8, {{"s", {{1, 1}, {7, 1}, {7, 7}, {1, 7}, {1, 1}, {7, 1}, {7, 7}, {1, 7}}}}};
    CHECK(rasterize_polygons(twice) == brute_force_mask(twice));
    CHECK(rasterize_polygons(twice).count() == 0);
    PolygonAnnotation bow_tie{"b", 8, 8, {{"s", {{0, 0}, {8, 8}, {8, 0}, {0, 8}}}}};
    CHECK(rasterize_polygons(bow_tie) == brute_force_mask(bow_tie));
  }
}

TEST_SUITE("annotation") {
  const std::string triangle = R"({"image_id": "f1", "height": 8, "width": 8,
      "shapes": [{"label": "bleeding", "points": [[0, 0], [6, 0], [0, 6]]}]})";

  TEST_CASE("minimal document parses") {
    const PolygonAnnotation ann = load_annotation(triangle);
    CHECK(ann.image_id == "f1");
    CHECK(ann.height == 8);
    REQUIRE(ann.shapes.size() == 1);
    CHECK(ann.shapes[0].points.size() == 3);
    CHECK(ann.shapes[0].label == "bleeding");
  }

  TEST_CASE("two-vertex shape is rejected with its index") {
    const std::string doc = R"({"image_id": "f", "height": 8, "width": 8,
        "shapes": [{"label": "x", "points": [[0, 0], [6, 0]]}]})";
    CHECK_THROWS_WITH_AS(load_annotation(doc), doctest::Contains("shapes[0]"), std::invalid_argument);
  }

  TEST_CASE("round trip preserves structure") {
    const PolygonAnnotation ann = load_annotation(triangle);
    CHECK(load_annotation(serialize_annotation(ann)) == ann);
  }

  TEST_CASE("errors name the field path") {
    CHECK_THROWS_WITH(load_annotation("{not json"), doctest::Contains("malformed JSON"));
    CHECK_THROWS_WITH(load_annotation(R"({"height": 8, "width": 8, "shapes": []})"), doctest::Contains("image_id"));
    CHECK_THROWS_WITH(load_annotation(R"({"image_id": "a", "height": 0, "width": 8, "shapes": []})"),
                      doctest::Contains("height"));
    const std::string outside = R"({"image_id": "f", "height": 8, "width": 8,
        "shapes": [{"label": "a", "points": [[0, 0], [1, 1], [0, 2]]},
                   {"label": "b", "points": [[0, 0], [9, 0], [0, 6]]}]})";
    CHECK_THROWS_WITH(load_annotation(outside), doctest::Contains("shapes[1].points[1]"));
    const std::string bad_point = R"({"image_id": "f", "height": 8, "width": 8,
        "shapes": [{"label": "a", "points": [[0, 0], [1], [0, 2]]}]})";
    CHECK_THROWS_WITH(load_annotation(bad_point), doctest::Contains("shapes[0].points[1]"));
  }

  TEST_CASE("extra LabelMe keys are ignored") {
    const std::string doc = R"({"version": "5.0", "flags": {}, "imagePath": "x.png", "imageData": null,
        "image_id": "x", "height": 4, "width": 4,
        "shapes": [{"label": "a", "points": [[0, 0], [4, 0], [4, 4]], "shape_type": "polygon", "group_id": null}]})";
    CHECK(load_annotation(doc).shapes.size() == 1);
  }
}

TEST_SUITE("split_by_patient") {
  std::vector<ImageSample> seven_patients() {
    std::vector<ImageSample> out;
    for (int p = 0; p < 7; ++p)
      for (int i = 0; i < 3; ++i) out.push_back(make_sample("p" + std::to_string(p) + "_" + std::to_string(i), "p" + std::to_string(p)));
    return out;
  }

  TEST_CASE("two validation patients out of seven leave five for training") {
    const auto samples = seven_patients();
    const auto split = split_by_patient(samples, {"p5", "p6"});
    std::set<std::string> train_patients;
    for (const auto& s : split.train) train_patients.insert(s.patient_id);
    CHECK(train_patients.size() == 5);
    CHECK(split.val.size() == 6);
  }

  TEST_CASE("empty validation set") {
    const auto samples = seven_patients();
    const auto split = split_by_patient(samples, {});
    CHECK(split.val.empty());
    CHECK(split.train == samples);
  }

  TEST_CASE("counts by enumeration and preserved order") {
    std::vector<ImageSample> s = {make_sample("a", "p1"), make_sample("b", "p2"), make_sample("c", "p3"),
                                  make_sample("d", "p1"), make_sample("e", "p2"), make_sample("f", "p3")};
    const auto split = split_by_patient(s, {"p2"});
    REQUIRE(split.train.size() == 4);
    REQUIRE(split.val.size() == 2);
    CHECK(split.train[0].id == "a");
    CHECK(split.train[1].id == "c");
    CHECK(split.train[2].id == "d");
    CHECK(split.val[0].id == "b");
    CHECK(split.val[1].id == "e");
  }

  TEST_CASE("unknown validation patient only warns") {
    std::vector<ImageSample> s = {make_sample("a", "p1")};
    std::vector<std::string> warnings;
    const auto split = split_by_patient(s, {"ghost"}, &warnings);
    CHECK(split.train.size() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("ghost") != std::string::npos);
  }

  TEST_CASE("missing patient id is rejected") {
    std::vector<ImageSample> s = {make_sample("a", "")};
    CHECK_THROWS_AS(split_by_patient(s, {}), std::invalid_argument);
  }

  TEST_CASE("train and validation patients are disjoint") {
    Rng rng = make_stream({3});
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<ImageSample> s;
      const int n = uniform_int(rng, 1, 30);
      for (int i = 0; i < n; ++i) s.push_back(make_sample(std::to_string(i), "p" + std::to_string(uniform_int(rng, 0, 5))));
      std::set<std::string> val;
      for (int p = 0; p < 6; ++p)
        if (uniform01(rng) < 0.4) val.insert("p" + std::to_string(p));
      std::vector<std::string> warnings;
      const auto split = split_by_patient(s, val, &warnings);
      std::set<std::string> a, b;
      for (const auto& x : split.train) a.insert(x.patient_id);
      for (const auto& x : split.val) b.insert(x.patient_id);
      for (const auto& p : a) CHECK(b.count(p) == 0);
      CHECK(split.train.size() + split.val.size() == s.size());
    }
  }
}

TEST_SUITE("select_label_budget") {
  std::vector<ImageSample> pool(int n) {
    std::vector<ImageSample> out;
    for (int i = 0; i < n; ++i) out.push_back(make_sample("s" + std::to_string(i), "p"));
    return out;
  }

  TEST_CASE("all labels leaves nothing unlabeled") {
    const auto train = pool(10);
    const auto b = select_label_budget(train, 10, 1);
    CHECK(b.labeled.size() == 10);
    CHECK(b.unlabeled.empty());
  }

  TEST_CASE("zero labels") {
    const auto train = pool(10);
    const auto b = select_label_budget(train, 0, 1);
    CHECK(b.labeled.empty());
    CHECK(b.unlabeled.size() == 10);
  }

  TEST_CASE("deterministic for a seed") {
    const auto train = pool(40);
    const auto a = select_label_budget(train, 7, 99);
    const auto b = select_label_budget(train, 7, 99);
    CHECK(a.labeled == b.labeled);
    CHECK(a.unlabeled == b.unlabeled);
  }

  TEST_CASE("budget larger than the pool is rejected") {
    const auto train = pool(3);
    CHECK_THROWS_AS(select_label_budget(train, 4, 0), std::invalid_argument);
  }

  TEST_CASE("partition with masks withheld") {
    Rng rng = make_stream({11});
    for (int trial = 0; trial < 30; ++trial) {
      const int n = uniform_int(rng, 1, 50);
      const auto train = pool(n);
      const std::size_t k = uniform_int(rng, 0, n);
      const auto b = select_label_budget(train, k, trial);
      CHECK(b.labeled.size() == k);
      std::multiset<std::string> ids;
      for (const auto& s : b.labeled) {
        ids.insert(s.id);
        CHECK(s.mask.has_value());
      }
      for (const auto& s : b.unlabeled) {
        ids.insert(s.id);
        CHECK_FALSE(s.mask.has_value());
      }
      std::multiset<std::string> expected;
      for (const auto& s : train) expected.insert(s.id);
      CHECK(ids == expected);
    }
  }

  TEST_CASE("different seeds pick different subsets") {
    const auto train = pool(40);
    CHECK(select_label_budget(train, 10, 1).labeled != select_label_budget(train, 10, 2).labeled);
  }
}

TEST_SUITE("augment") {
  TEST_CASE("identity transform returns the input") {
    Rng rng = make_stream({1});
    const ImageSample s = coded_sample(6, 4, rng);
    const GeometricTransform id;
    CHECK(id.apply(s.pixels) == s.pixels);
    CHECK(id.apply(*s.mask) == *s.mask);
    // A stream whose first draw is the identity.
    for (std::uint64_t seed = 0;; ++seed) {
      Rng probe = make_stream({seed});
      if (!GeometricTransform::draw(probe).is_identity()) continue;
      Rng again = make_stream({seed});
      CHECK(augment(s, again) == s);
      break;
    }
  }

  TEST_CASE("horizontal flip is an involution") {
    Rng rng = make_stream({2});
    const ImageSample s = coded_sample(5, 7, rng);
    GeometricTransform t;
    t.flip_horizontal = true;
    CHECK(t.apply(t.apply(s.pixels)) == s.pixels);
    CHECK(t.apply(t.apply(*s.mask)) == *s.mask);
  }

  TEST_CASE("pixels and mask follow the coordinate remap") {
    Rng data_rng = make_stream({5});
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      const std::size_t H = uniform_int(data_rng, 1, 7), W = uniform_int(data_rng, 1, 7);
      const ImageSample s = coded_sample(H, W, data_rng);
      Rng a = make_stream({seed});
      const GeometricTransform t = GeometricTransform::draw(a);
      Rng b = make_stream({seed});
      const ImageSample out = augment(s, b);
      const bool swapped = t.quarter_turns % 2 == 1;
      REQUIRE(out.pixels.height == (swapped ? W : H));
      REQUIRE(out.mask->height == out.pixels.height);
      REQUIRE(out.mask->width == out.pixels.width);
      for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c) {
          const auto [rr, cc] = remap(t, r, c, H, W);
          for (std::size_t ch = 0; ch < 3; ++ch) REQUIRE(out.pixels.at(rr, cc, ch) == s.pixels.at(r, c, ch));
          REQUIRE(out.mask->at(rr, cc) == s.mask->at(r, c));
        }
    }
  }

  TEST_CASE("every flip and rotation combination is reachable") {
    std::set<std::tuple<bool, bool, int>> seen;
    Rng rng = make_stream({8});
    for (int i = 0; i < 400; ++i) {
      const auto t = GeometricTransform::draw(rng);
      seen.insert({t.flip_horizontal, t.flip_vertical, t.quarter_turns});
    }
    CHECK(seen.size() == 16);
  }
}

TEST_SUITE("make_batch") {
  // Each sample is a constant image, so its identity survives flips and rotations.
  std::vector<ImageSample> constant_pool(int n, bool masks, float offset) {
    std::vector<ImageSample> out;
    for (int i = 0; i < n; ++i) {
      ImageSample s = make_sample("s" + std::to_string(i), "p", 4, 4, offset + 0.01f * i);
      if (!masks) s.mask.reset();
      out.push_back(s);
    }
    return out;
  }

  TEST_CASE("semi batch of 16 is 8 labeled and 8 unlabeled") {
    const auto l = constant_pool(20, true, 0.0f), u = constant_pool(30, false, 0.5f);
    SamplerState st(1);
    const Batch b = make_batch(l, u, 16, TrainMode::semi, st);
    CHECK(b.labeled.size() == 8);
    CHECK(b.unlabeled.size() == 8);
  }

  TEST_CASE("fully supervised batch is all labeled") {
    const auto l = constant_pool(20, true, 0.0f);
    SamplerState st(1);
    const Batch b = make_batch(l, {}, 16, TrainMode::fully, st);
    CHECK(b.labeled.size() == 16);
    CHECK(b.unlabeled.empty());
  }

  TEST_CASE("identical sampler states give identical batches") {
    const auto l = constant_pool(5, true, 0.0f), u = constant_pool(9, false, 0.5f);
    Rng rng = make_stream({4});
    std::vector<ImageSample> coded;
    for (int i = 0; i < 5; ++i) coded.push_back(coded_sample(4, 4, rng));
    SamplerState a(3);
    make_batch(coded, u, 4, TrainMode::semi, a);
    SamplerState b = a;
    const Batch x = make_batch(coded, u, 4, TrainMode::semi, a);
    const Batch y = make_batch(coded, u, 4, TrainMode::semi, b);
    REQUIRE(x.labeled.size() == y.labeled.size());
    for (std::size_t i = 0; i < x.labeled.size(); ++i) {
      CHECK(x.labeled[i].pixels == y.labeled[i].pixels);
      CHECK(x.labeled[i].mask == y.labeled[i].mask);
    }
    CHECK(x.unlabeled == y.unlabeled);
  }

  TEST_CASE("odd batch size in semi mode is rejected") {
    const auto l = constant_pool(4, true, 0.0f), u = constant_pool(4, false, 0.5f);
    SamplerState st(0);
    CHECK_THROWS_AS(make_batch(l, u, 15, TrainMode::semi, st), std::invalid_argument);
    CHECK_THROWS_AS(make_batch(l, {}, 16, TrainMode::semi, st), std::invalid_argument);
  }

  TEST_CASE("each epoch visits every sample once") {
    const auto l = constant_pool(6, true, 0.0f);
    SamplerState st(12);
    for (int epoch = 0; epoch < 4; ++epoch) {
      std::multiset<float> seen;
      for (int b = 0; b < 3; ++b) {
        const Batch batch = make_batch(l, {}, 2, TrainMode::fully, st);
        for (const auto& p : batch.labeled) seen.insert(p.pixels.values[0]);
      }
      std::multiset<float> expected;
      for (const auto& s : l) expected.insert(s.pixels.values[0]);
      CHECK(seen == expected);
    }
  }

  TEST_CASE("labeled stream does not depend on the unlabeled draws") {
    Rng rng = make_stream({21});
    std::vector<ImageSample> coded;
    for (int i = 0; i < 7; ++i) coded.push_back(coded_sample(4, 4, rng));
    const auto u = constant_pool(5, false, 0.5f);
    SamplerState semi(4), fully(4);
    for (int step = 0; step < 6; ++step) {
      const Batch a = make_batch(coded, u, 8, TrainMode::semi, semi);
      const Batch b = make_batch(coded, {}, 4, TrainMode::fully, fully);
      for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(a.labeled[i].pixels == b.labeled[i].pixels);
        REQUIRE(a.labeled[i].mask == b.labeled[i].mask);
      }
    }
  }
}

TEST_SUITE("generate_synthetic") {
  TEST_CASE("same seed gives a bit-identical dataset") {
    CHECK(generate_synthetic(5, 2, 4, 32) == generate_synthetic(5, 2, 4, 32));
    CHECK(generate_synthetic(5, 2, 4, 32) != generate_synthetic(6, 2, 4, 32));
  }

  TEST_CASE("five patients of forty images") {
    const auto data = generate_synthetic(0, 5, 40, 64);
    CHECK(data.size() == 200);
    std::set<std::string> patients, ids;
    for (const auto& s : data) {
      patients.insert(s.patient_id);
      ids.insert(s.id);
      validate_sample(s);
    }
    CHECK(patients.size() == 5);
    CHECK(ids.size() == 200);
  }

  TEST_CASE("foreground fraction and nonempty share over 500 images") {
    const auto data = generate_synthetic(1, 10, 50, 64);
    REQUIRE(data.size() == 500);
    std::size_t nonempty = 0;
    for (const auto& s : data) {
      const double frac = static_cast<double>(s.mask->count()) / static_cast<double>(s.mask->values.size());
      CHECK(frac >= 0.0);
      CHECK(frac <= 0.5);
      if (frac > 0.0) ++nonempty;
    }
    CHECK(static_cast<double>(nonempty) / 500.0 >= 0.6);
  }

  TEST_CASE("patients keep their images when generated separately") {
    const auto all = generate_synthetic(3, 4, 3, 32);
    const auto tail = generate_synthetic(3, 2, 3, 32, 2);
    CHECK(std::equal(tail.begin(), tail.end(), all.begin() + 6));
  }

  TEST_CASE("side below 32 is rejected") { CHECK_THROWS_AS(generate_synthetic(0, 1, 1, 16), std::invalid_argument); }

  TEST_CASE("lesions are redder than the background on average") {
    const auto data = generate_synthetic(2, 3, 10, 64);
    double fg = 0, bg = 0;
    std::size_t nf = 0, nb = 0;
    for (const auto& s : data)
      for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 64; ++c) {
          const double redness = s.pixels.at(r, c, 0) - s.pixels.at(r, c, 1);
          if (s.mask->at(r, c)) {
            fg += redness;
            ++nf;
          } else {
            bg += redness;
            ++nb;
          }
        }
    CHECK(fg / nf > bg / nb);
  }
}

TEST_SUITE("image files") {
  TEST_CASE("RGB round trip at 8 bits") {
    const fs::path dir = scratch_dir("rgb");
    fs::create_directories(dir);
    RgbImage img(3, 5);
    for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = static_cast<float>(i * 7 % 256) / 255.0f;
    write_png_rgb(dir / "a.png", img);
    CHECK(read_png_rgb(dir / "a.png") == img);
  }

  TEST_CASE("masks are stored as 0/255 and thresholded at 127") {
    const fs::path dir = scratch_dir("mask");
    fs::create_directories(dir);
    BinaryMask m(2, 3);
    m.at(0, 1) = 1;
    m.at(1, 2) = 1;
    write_png_mask(dir / "m.png", m);
    const RgbImage raw = read_png_rgb(dir / "m.png");
    for (float v : raw.values) CHECK((v == 0.0f || v == 1.0f));
    CHECK(read_png_mask(dir / "m.png") == m);

    RgbImage gray(1, 2);
    for (int ch = 0; ch < 3; ++ch) {
      gray.at(0, 0, ch) = 127.0f / 255.0f;
      gray.at(0, 1, ch) = 128.0f / 255.0f;
    }
    write_png_rgb(dir / "g.png", gray);
    const BinaryMask g = read_png_mask(dir / "g.png");
    CHECK(g.at(0, 0) == 0);
    CHECK(g.at(0, 1) == 1);
  }

  TEST_CASE("missing file reports its path") {
    CHECK_THROWS_WITH(read_png_rgb("/nonexistent/x.png"), doctest::Contains("/nonexistent/x.png"));
  }
}

TEST_SUITE("dataset directory") {
  TEST_CASE("write then read returns the same samples") {
    const fs::path dir = scratch_dir("ds");
    SyntheticSource src;
    src.train_patients = 2;
    src.val_patients = 1;
    src.images_per_patient = 3;
    src.val_images_per_patient = 2;
    src.side = 32;
    const DatasetSplit split = generate_synthetic_split(src);
    write_dataset(dir, split, to_json(DataSource{src}), false);
    const DatasetSplit back = read_dataset(dir);
    CHECK(back.train == split.train);
    CHECK(back.val == split.val);
    CHECK_THROWS_AS(write_dataset(dir, split, nullptr, false), std::invalid_argument);
    CHECK_NOTHROW(write_dataset(dir, split, nullptr, true));
  }

  TEST_CASE("external images with annotations") {
    const fs::path dir = scratch_dir("ext");
    fs::create_directories(dir / "img");
    fs::create_directories(dir / "ann");
    for (const std::string id : {"pa_0", "pa_1", "pb_0"}) {
      write_png_rgb(dir / "img" / (id + ".png"), RgbImage(8, 8, 0.25f));
      PolygonAnnotation ann{id, 8, 8, {{"x", {{0, 0}, {4, 0}, {4, 4}, {0, 4}}}}};
      std::ofstream(dir / "ann" / (id + ".json")) << serialize_annotation(ann);
    }
    ExternalSource src;
    src.images = dir / "img";
    src.annotations = dir / "ann";
    src.val_patients = {"pb"};
    const DatasetSplit split = load_external(src);
    REQUIRE(split.train.size() == 2);
    REQUIRE(split.val.size() == 1);
    CHECK(split.train[0].patient_id == "pa");
    CHECK(split.train[0].mask->count() == 16);

    ExternalSource missing = src;
    missing.annotations.clear();
    missing.masks = dir / "no_masks_here";
    CHECK_THROWS_WITH(load_external(missing), doctest::Contains("no_masks_here"));
  }
}
