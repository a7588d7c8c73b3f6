#include "flare/error.hpp"
#include "flare/ingest.hpp"
#include "flare/resample.hpp"

#include "oracle_values.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace flare;
using testing_support::TempDir;
using testing_support::write_png;

namespace {

const ClassTaxonomy& two_classes() {
  static const ClassTaxonomy t({"comet", "star"}, {"Sky"}, {{"comet", "Sky"}, {"star", "Sky"}});
  return t;
}

void populate(const std::filesystem::path& root, std::uint64_t seed, int per_class) {
  SplitMix64 rng(seed);
  for (const char* label : {"comet", "star"})
    for (int i = 0; i < per_class; ++i)
      write_png(root / label / ("img" + std::to_string(i) + ".png"),
                testing_support::random_image(rng, 64, 64, 3));
}

// 8 x 9 cell pattern blown up to 72 x 64 so that the 9 x 8 box resize recovers it exactly.
ImageBuffer from_cells(const std::array<std::array<std::uint8_t, 9>, 8>& cells) {
  ImageBuffer img(72, 64, 1);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 72; ++x) img.at(x, y, 0) = cells[y / 8][x / 8];
  return img;
}

// Independent dhash: explicit area-weighted cell means of a gray image.
std::uint64_t dhash_oracle(const ImageBuffer& gray) {
  const double sy = gray.height() / 8.0, sx = gray.width() / 9.0;
  double cell[8][9] = {};
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 9; ++c) {
      double acc = 0.0;
      for (int y = 0; y < gray.height(); ++y) {
        const double oy = std::min(sy * (r + 1), y + 1.0) - std::max(sy * r, double(y));
        if (oy <= 0) continue;
        for (int x = 0; x < gray.width(); ++x) {
          const double ox = std::min(sx * (c + 1), x + 1.0) - std::max(sx * c, double(x));
          if (ox > 0) acc += oy * ox * gray.at(x, y, 0);
        }
      }
      cell[r][c] = acc / (sx * sy);
    }
  std::uint64_t bits = 0;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) bits = (bits << 1) | (cell[r][c] < cell[r][c + 1] ? 1u : 0u);
  return bits;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("scan_directory") {
    TempDir dir;
    populate(dir.path(), 1, 3);
    CHECK(scan_directory(dir.path(), two_classes()).entries.size() == 6);

    const std::string text = "notes";
    write_file(dir / "star/readme.txt",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    const auto scan = scan_directory(dir.path(), two_classes());
    CHECK(scan.entries.size() == 6);
    CHECK(scan.skipped == 1);

    CHECK_THROWS_AS(scan_directory(dir.path(), ClassTaxonomy::default_taxonomy()), Error);
    try {
      (void)scan_directory(dir.path(), ClassTaxonomy::default_taxonomy());
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::LayoutError);
    }
    CHECK(scan_directory(dir.path(), ClassTaxonomy::default_taxonomy(), false).entries.size() == 6);
  }

  TEST_CASE("empty tree is an EmptyDataset error") {
    TempDir dir;
    std::filesystem::create_directories(dir / "comet");
    std::filesystem::create_directories(dir / "star");
    try {
      (void)scan_directory(dir.path(), two_classes());
      FAIL("expected EmptyDataset");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EmptyDataset);
    }
  }

  TEST_CASE("dhash examples") {
    CHECK(dhash(ImageBuffer(64, 64, 3, 128)) == 0);
    ImageBuffer ramp(64, 64, 1);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) ramp.at(x, y, 0) = static_cast<std::uint8_t>(4 * x);
    CHECK(dhash(ramp) == ~std::uint64_t{0});

    ImageBuffer board(16, 16, 1);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) board.at(x, y, 0) = ((x / 2 + y / 2) % 2) ? 255 : 0;
    CHECK(dhash(board) == oracle::kDhashCheckerboard2);
    CHECK(dhash(board) == dhash_oracle(board));
  }

  TEST_CASE("dhash agrees with the oracle on random gray images") {
    SplitMix64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const ImageBuffer img = testing_support::random_image(rng, 18 + 9 * static_cast<int>(rng.below(3)),
                                                            16 + 8 * static_cast<int>(rng.below(3)), 1);
      CHECK(dhash(img) == dhash_oracle(img));
    }
  }

  TEST_CASE("ingest drops exact duplicates and small images") {
    TempDir dir;
    populate(dir / "corpus", 2, 3);
    std::filesystem::copy_file(dir / "corpus/star/img0.png", dir / "corpus/star/copy.png");
    write_png(dir / "corpus/comet/thin.png", ImageBuffer(32, 900, 3, 10));
    const ContentStore store(dir / "store");
    const auto r = ingest(dir / "corpus", two_classes(), IngestPolicy{}, store);
    CHECK(r.manifest.records.size() == 6);
    CHECK(r.report.exact_duplicates == 1);
    CHECK(r.report.dropped_by_policy == 1);
    CHECK(r.manifest.stage == StageTag::Raw_LR);
    CHECK(validate_manifest(r.manifest, store.root()).valid());
    for (const auto& rec : r.manifest.records) {
      CHECK(rec.tier == Tier::LR);
      CHECK(std::get<provenance::RawIngested>(rec.provenance).source_path.starts_with(rec.fine_label + "/"));
    }
  }

  TEST_CASE("near-duplicates within the threshold collapse") {
    std::array<std::array<std::uint8_t, 9>, 8> cells{};
    SplitMix64 rng(4);
    for (auto& row : cells)
      for (auto& v : row) v = static_cast<std::uint8_t>(40 + 20 * rng.below(9));
    for (auto& row : cells) row[1] = 120;
    auto other = cells;
    other[0][0] = 200;  // flips only comparison (0, 0)
    other[1][0] = 10;   // flips only comparison (1, 0)
    cells[0][0] = 10;
    cells[1][0] = 200;
    const ImageBuffer a = from_cells(cells), b = from_cells(other);
    REQUIRE(hamming(dhash_oracle(a), dhash_oracle(b)) == 2);
    CHECK(hamming(dhash(a), dhash(b)) == 2);

    TempDir dir;
    write_png(dir / "corpus/comet/a.png", a);
    write_png(dir / "corpus/comet/b.png", b);
    write_png(dir / "corpus/star/c.png", ImageBuffer(64, 64, 3, 3));
    const ContentStore store(dir / "store");
    const auto both = ingest(dir / "corpus", two_classes(), IngestPolicy{}, store);
    CHECK(both.manifest.records.size() == 2);
    CHECK(both.report.near_duplicates == 1);

    IngestPolicy exact;
    exact.dedup_mode = DedupMode::Exact;
    CHECK(ingest(dir / "corpus", two_classes(), exact, store).manifest.records.size() == 3);
  }

  TEST_CASE("cross-class duplicates keep the earlier taxonomy class") {
    TempDir dir;
    SplitMix64 rng(6);
    const ImageBuffer img = testing_support::random_image(rng, 64, 64, 3);
    write_png(dir / "corpus/comet/x.png", img);
    write_png(dir / "corpus/star/x.png", img);
    const ContentStore store(dir / "store");
    const auto r = ingest(dir / "corpus", two_classes(), IngestPolicy{}, store);
    REQUIRE(r.manifest.records.size() == 1);
    CHECK(r.manifest.records[0].fine_label == "comet");
    CHECK(r.report.label_conflicts.size() == 1);
  }

  TEST_CASE("truncated images count as undecodable") {
    TempDir dir;
    populate(dir / "corpus", 3, 1);
    const auto bytes = read_file(dir / "corpus/star/img0.png");
    write_file(dir / "corpus/star/broken.png", std::span(bytes.data(), 40));
    const ContentStore store(dir / "store");
    const auto r = ingest(dir / "corpus", two_classes(), IngestPolicy{}, store);
    CHECK(r.report.undecodable == 1);
    CHECK(r.manifest.records.size() == 2);
  }

  TEST_CASE("ingest is idempotent and worker-count independent") {
    TempDir dir;
    populate(dir / "corpus", 9, 5);
    const ContentStore store(dir / "store");
    const auto first = serialize_manifest(ingest(dir / "corpus", two_classes(), IngestPolicy{}, store).manifest);
    const auto second = serialize_manifest(ingest(dir / "corpus", two_classes(), IngestPolicy{}, store).manifest);
    const auto wide = serialize_manifest(ingest(dir / "corpus", two_classes(), IngestPolicy{}, store, {8, true}).manifest);
    CHECK(first == second);
    CHECK(first == wide);
  }

  TEST_CASE("policy validation") {
    IngestPolicy p;
    p.min_side = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = IngestPolicy{};
    p.allowed_channels = {2};
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK(IngestPolicy::from_json(IngestPolicy{}.to_json()).to_json() == IngestPolicy{}.to_json());
  }
}
