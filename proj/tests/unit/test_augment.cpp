#include "flare/augment.hpp"
#include "flare/error.hpp"
#include "flare/taxonomy.hpp"

#include "oracle_values.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>

using namespace flare;
using testing_support::TempDir;

namespace {

ImageBuffer jitter_fixture() {
  ImageBuffer img(4, 4, 3);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(16 * x + 8);
      img.at(x, y, 1) = static_cast<std::uint8_t>(16 * y + 40);
      img.at(x, y, 2) = static_cast<std::uint8_t>((13 * x * y + 7) % 256);
    }
  return img;
}

void check_against(const ImageBuffer& out, const std::array<std::array<std::uint8_t, 3>, 16>& expected) {
  for (int i = 0; i < 16; ++i)
    for (int c = 0; c < 3; ++c) {
      CAPTURE(i);
      CAPTURE(c);
      CHECK(out.at(i % 4, i / 4, c) == expected[i][c]);
    }
}

DatasetManifest hr_fixture(const ContentStore& store, int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const auto classes = ClassTaxonomy::default_taxonomy().fine_classes();
  DatasetManifest m;
  m.stage = StageTag::Raw_HR;
  for (int i = 0; i < n; ++i)
    m.records.push_back(testing_support::store_raw(store, testing_support::random_image(rng, 8, 8, 3),
                                                   classes[i % classes.size()], Tier::HR));
  m.normalize();
  return m;
}

}  // namespace

TEST_SUITE("augment") {
  TEST_CASE("flips") {
    const ImageBuffer pair(2, 1, 1, std::vector<std::uint8_t>{10, 20});
    CHECK(hflip(pair) == ImageBuffer(2, 1, 1, std::vector<std::uint8_t>{20, 10}));
    const ImageBuffer column(1, 2, 1, std::vector<std::uint8_t>{10, 20});
    CHECK(vflip(column) == ImageBuffer(1, 2, 1, std::vector<std::uint8_t>{20, 10}));
    const ImageBuffer symmetric(3, 1, 3, std::vector<std::uint8_t>{1, 2, 3, 9, 9, 9, 1, 2, 3});
    CHECK(hflip(symmetric) == symmetric);

    SplitMix64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
      const ImageBuffer img = testing_support::random_image(rng, 1 + static_cast<int>(rng.below(9)),
                                                            1 + static_cast<int>(rng.below(9)),
                                                            rng.below(2) ? 3 : 1);
      REQUIRE(hflip(hflip(img)) == img);
      REQUIRE(vflip(vflip(img)) == img);
    }
  }

  TEST_CASE("color_jitter against the scalar oracle") {
    const ImageBuffer img = jitter_fixture();
    check_against(color_jitter(img, {0.4, 0.0, 0.0, 0.0}, 7), oracle::kJitterBrightnessSeed7);
    check_against(color_jitter(img, {0.4, 0.4, 0.4, 0.1}, 7), oracle::kJitterAllSeed7);
  }

  TEST_CASE("color_jitter identity, determinism and validation") {
    SplitMix64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      const ImageBuffer img = testing_support::random_image(rng, 5, 4, 3);
      REQUIRE(color_jitter(img, {}, rng.next()) == img);
    }
    const ImageBuffer img = jitter_fixture();
    const ColorJitter p{0.4, 0.4, 0.4, 0.1};
    CHECK(color_jitter(img, p, 99) == color_jitter(img, p, 99));
    CHECK(color_jitter(img, p, 99) != color_jitter(img, p, 100));
    CHECK_THROWS_AS(color_jitter(img, {1.5, 0, 0, 0}, 1), Error);
    CHECK_THROWS_AS(color_jitter(img, {0, 0, 0, 0.6}, 1), Error);
    CHECK_THROWS_AS(color_jitter(ImageBuffer(2, 2, 1), p, 1), Error);
    CHECK(apply(ColorJitter{}, ImageBuffer(2, 2, 1, 40), 1) == ImageBuffer(2, 2, 3, 40));
  }

  TEST_CASE("kind names and JSON round-trip") {
    const auto plan = AugmentationPlan::default_plan(5);
    REQUIRE(plan.k() == 5);
    CHECK(name_of(plan.kinds()[0]) == "ColorJitter(0.4,0.4,0.4,0.1)");
    CHECK(name_of(plan.kinds()[1]) == "HorizontalFlip");
    CHECK(name_of(plan.kinds()[2]) == "VerticalFlip");
    CHECK(name_of(plan.kinds()[3]) == "Compose(HorizontalFlip,ColorJitter(0.4,0.4,0.4,0.1))");
    const auto back = AugmentationPlan::from_json(plan.to_json(), 5);
    CHECK(back.kinds() == plan.kinds());
    CHECK_THROWS_AS(AugmentationPlan({}, 5), Error);
    CHECK_THROWS_AS(augmentation_from_json({{"type", "Rotate"}}), Error);
  }

  TEST_CASE("augment_dataset count law and seeds") {
    TempDir dir;
    const ContentStore store(dir / "store");
    const DatasetManifest m = hr_fixture(store, 10, 3);
    const auto plan = AugmentationPlan::default_plan(42);
    const auto r = augment_dataset(m, plan, store, 3);
    CHECK(r.manifest.stage == StageTag::Raw_Aug_HR);
    CHECK(r.manifest.records.size() == 50);
    std::map<std::string, int> in_hist, out_hist;
    for (const auto& rec : m.records) ++in_hist[rec.fine_label];
    for (const auto& rec : r.manifest.records) ++out_hist[rec.fine_label];
    for (const auto& [label, n] : in_hist) CHECK(out_hist[label] == 5 * n);
    for (const auto& rec : r.manifest.records) {
      if (rec.variant == 0) continue;
      const auto& prov = std::get<provenance::Augmented>(rec.provenance);
      CHECK(prov.seed == derive_seed(42, prov.parent_id.str(), "aug", rec.variant));
      CHECK(prov.kind == name_of(plan.kinds()[rec.variant - 1]));
    }
    CHECK(validate_manifest(r.manifest, store.root()).valid());
    CHECK(serialize_manifest(augment_dataset(m, plan, store, 1).manifest) == serialize_manifest(r.manifest));
    CHECK(plan_augment(m, plan).manifest.records.size() == 50);
  }

  TEST_CASE("collisions are flagged, not dropped") {
    TempDir dir;
    const ContentStore store(dir / "store");
    DatasetManifest m;
    m.stage = StageTag::Raw_HR;
    m.records.push_back(testing_support::store_raw(store, ImageBuffer(4, 4, 3, 9), "star", Tier::HR));
    const auto r = augment_dataset(m, AugmentationPlan({HorizontalFlip{}, VerticalFlip{}}, 1), store);
    CHECK(r.manifest.records.size() == 3);
    CHECK(r.report.collisions.size() == 1);
    int flagged = 0;
    for (const auto& rec : r.manifest.records) flagged += rec.collision;
    CHECK(flagged == 2);
    CHECK(validate_manifest(r.manifest, store.root()).valid());
  }

  TEST_CASE("only raw manifests can be augmented") {
    DatasetManifest m;
    m.stage = StageTag::Combined;
    TempDir dir;
    CHECK_THROWS_AS(augment_dataset(m, AugmentationPlan::default_plan(1), ContentStore(dir.path())), Error);
  }
}
