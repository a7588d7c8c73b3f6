#include "flare/core.hpp"
#include "flare/error.hpp"
#include "flare/manifest.hpp"
#include "flare/taxonomy.hpp"

#include "oracle_values.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace flare;
using testing_support::TempDir;

namespace {

std::string hex(const std::array<std::uint8_t, 32>& d) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : d) {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

DatasetManifest small_manifest(const ContentStore& store) {
  SplitMix64 rng(5);
  DatasetManifest m;
  m.stage = StageTag::Raw_LR;
  for (const char* label : {"planet", "comet", "star"})
    m.records.push_back(testing_support::store_raw(store, testing_support::random_image(rng, 8, 8, 3), label));
  m.created_at = manifest_timestamp();
  m.normalize();
  return m;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("sha256 reference vector and content_hash") {
    const std::uint8_t zero = 0;
    CHECK(hex(sha256(std::span(&zero, 1))) ==
          "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");
    CHECK(content_hash(std::span(&zero, 1)).str() ==
          "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");
    CHECK(hex(sha256({})) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK_THROWS_AS(content_hash({}), Error);
  }

  TEST_CASE("one-pixel difference changes the id") {
    ImageBuffer a(4, 4, 3, 100), b = a;
    b.at(2, 1, 0) = 101;
    const auto ha = content_hash(encode_png(a));
    CHECK(ha == content_hash(encode_png(a)));
    CHECK(ha != content_hash(encode_png(b)));
  }

  TEST_CASE("SampleId accepts only 64 lowercase hex characters") {
    CHECK_NOTHROW(SampleId(std::string(64, 'a')));
    CHECK_THROWS_AS(SampleId(std::string(63, 'a')), Error);
    CHECK_THROWS_AS(SampleId(std::string(64, 'A')), Error);
    CHECK_THROWS_AS(SampleId(std::string(64, 'g')), Error);
    CHECK(SampleId(std::string(62, '0') + "ff").shard() == "00");
  }

  TEST_CASE("splitmix64 and derive_seed") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == oracle::kSplitMixFirst);
    CHECK(SplitMix64(0).next() == oracle::kSplitMixFirst);
    static_assert([] {
      std::uint64_t s = 0;
      return splitmix64(s);
    }() == 0xE220A8397B1DCDAFull);

    CHECK(derive_seed(42, "planet/0", "t2i", 0) == oracle::kDeriveSeed42Planet0T2I0);
    CHECK(derive_seed(42, "planet/0", "t2i", 1) == oracle::kDeriveSeed42Planet0T2I1);
    CHECK(derive_seed(42, "planet/0", "t2i", 0) == derive_seed(42, "planet/0", "t2i", 0));
    CHECK(derive_seed(42, "planet/0", "t2i", 0) != derive_seed(43, "planet/0", "t2i", 0));
    CHECK(derive_seed(42, "planet/0", "aug", 0) != derive_seed(42, "planet/0", "t2i", 0));
  }

  TEST_CASE("SplitMix64 uniform stays in range") {
    SplitMix64 rng(9);
    for (int i = 0; i < 1000; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(rng.below(7) < 7);
    }
  }

  TEST_CASE("stage tags round-trip") {
    for (auto t : {StageTag::Raw_LR, StageTag::Raw_Aug_LR, StageTag::Raw_HR, StageTag::Raw_Aug_HR,
                   StageTag::T2I, StageTag::I2I, StageTag::T2I_Aug_HR, StageTag::Combined})
      CHECK(parse_stage_tag(to_string(t)) == t);
    CHECK_THROWS_AS(parse_stage_tag("Bogus"), Error);
  }

  TEST_CASE("taxonomy") {
    const auto t = ClassTaxonomy::default_taxonomy();
    CHECK(t.fine_classes().size() == 8);
    CHECK(t.macro_classes().size() == 4);
    CHECK(macro_of("planet", t) == "Celestial Bodies");
    CHECK(macro_of("black hole", t) == "Cosmic Phenomena");
    CHECK(macro_of("constellation", t) == "Astronomical Patterns");
    for (const auto& fine : t.fine_classes()) CHECK_NOTHROW(t.macro_of(fine));
    try {
      (void)t.macro_of("quasar");
      FAIL("expected UnknownClass");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnknownClass);
    }
    CHECK(ClassTaxonomy::from_json(t.to_json()) == t);
    CHECK(ClassTaxonomy::load(FLARE_DATA_DIR "/taxonomy.json") == t);
    CHECK_THROWS_AS(ClassTaxonomy({"a"}, {"M"}, {{"a", "N"}}), Error);
    CHECK_THROWS_AS(ClassTaxonomy({"a", "b"}, {"M"}, {{"a", "M"}}), Error);
  }

  TEST_CASE("manifest serialization round-trips byte-identically") {
    TempDir dir;
    const ContentStore store(dir / "store");
    DatasetManifest m = small_manifest(store);
    m.config_snapshot = {{"global_seed", 7}, {"taxonomy", ClassTaxonomy::default_taxonomy().to_json()}};
    SampleRecord aug = m.records[0];
    aug.provenance = provenance::Augmented{"HorizontalFlip", 12345678901234567890ull, m.records[0].id};
    aug.variant = 1;
    aug.collision = true;
    m.records.push_back(aug);
    m.normalize();

    const std::string text = serialize_manifest(m);
    CHECK(serialize_manifest(parse_manifest(text)) == text);
    write_manifest(m, dir / "m.jsonl");
    const DatasetManifest back = read_manifest(dir / "m.jsonl");
    CHECK(back.records == m.records);
    CHECK(serialize_manifest(back) == text);
    CHECK(text.back() == '\n');
  }

  TEST_CASE("parse_manifest rejects a wrong record_count") {
    TempDir dir;
    const ContentStore store(dir / "store");
    std::string text = serialize_manifest(small_manifest(store));
    text = text.substr(0, text.rfind('{'));
    CHECK_THROWS_AS(parse_manifest(text), Error);
  }

  TEST_CASE("validate_manifest") {
    TempDir dir;
    const ContentStore store(dir / "store");
    DatasetManifest m = small_manifest(store);

    SUBCASE("fresh manifest is valid") {
      const auto r = validate_manifest(m, store.root());
      CHECK(r.valid());
      CHECK(r.records_checked == 3);
    }
    SUBCASE("truncated file gives exactly one hash mismatch") {
      const auto path = store.path_of(m.records[1]);
      const auto bytes = read_file(path);
      std::filesystem::resize_file(path, bytes.size() / 2);
      const auto r = validate_manifest(m, store.root());
      REQUIRE(r.violations.size() == 1);
      CHECK(r.violations[0].kind == Violation::Kind::HashMismatch);
      CHECK(r.violations[0].record_id == m.records[1].id.str());
    }
    SUBCASE("missing file") {
      std::filesystem::remove(store.path_of(m.records[0]));
      const auto r = validate_manifest(m, store.root());
      REQUIRE(r.violations.size() == 1);
      CHECK(r.violations[0].kind == Violation::Kind::MissingFile);
    }
    SUBCASE("dangling parent") {
      m.records[0].provenance = provenance::Restored{"lanczos3", 4, testing_support::fake_id("nowhere")};
      const auto r = validate_manifest(m, store.root());
      REQUIRE(r.violations.size() == 1);
      CHECK(r.violations[0].kind == Violation::Kind::DanglingParent);
    }
    SUBCASE("unknown label") {
      m.records[2].fine_label = "quasar";
      const auto r = validate_manifest(m, store.root());
      REQUIRE(r.violations.size() == 1);
      CHECK(r.violations[0].kind == Violation::Kind::UnknownLabel);
    }
    SUBCASE("unflagged duplicate id") {
      m.records.push_back(m.records[0]);
      m.records.back().variant = 1;
      m.normalize();
      const auto r = validate_manifest(m, store.root());
      CHECK_FALSE(r.valid());
    }
    SUBCASE("missing store root is an IO error") {
      try {
        (void)validate_manifest(m, dir / "absent");
        FAIL("expected IoError");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IoError);
      }
    }
  }

  TEST_CASE("manifest timestamp honours SOURCE_DATE_EPOCH") {
    CHECK(format_utc(0) == "1970-01-01T00:00:00Z");
    CHECK(format_utc(1700000000) == "2023-11-14T22:13:20Z");
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    CHECK(manifest_timestamp() == "2023-11-14T22:13:20Z");
    ::unsetenv("SOURCE_DATE_EPOCH");
    CHECK(manifest_timestamp() == "1970-01-01T00:00:00Z");
  }

  TEST_CASE("FailureLog aborts with every failed key") {
    FailureLog log(4);
    for (std::size_t i = 0; i < 4; ++i)
      log.capture(i, [i] {
        if (i % 2 == 1) throw Error(ErrorKind::ProtocolViolation, "bad " + std::to_string(i));
      });
    try {
      log.raise_if_failed([](std::size_t i) { return "k" + std::to_string(i); });
      FAIL("expected StageAborted");
    } catch (const StageAborted& e) {
      CHECK(e.kind() == ErrorKind::StageError);
      CHECK(e.failed_ids() == std::vector<std::string>{"k1", "k3"});
    }
  }
}
