#include "flare/color.hpp"
#include "flare/error.hpp"
#include "flare/services.hpp"
#include "flare/synth.hpp"

#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace flare;
using testing_support::TempDir;

namespace {

struct WrongSize final : DiffusionService {
  ImageBuffer t2i(const std::string&, std::uint64_t, int w, int h) override { return ImageBuffer(w / 2, h / 2, 3); }
  ImageBuffer i2i(const ImageBuffer&, std::uint64_t, int w, int h) override { return ImageBuffer(w, h, 1); }
};

std::string id_of(const ImageBuffer& img) { return content_hash(encode_png(img)).str(); }

const ClassTaxonomy& two_classes() {
  static const ClassTaxonomy t({"comet", "star"}, {"Sky"}, {{"comet", "Sky"}, {"star", "Sky"}});
  return t;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("prompt templates") {
    CHECK(build_prompt("comet", PromptTemplate()) == "A realistic image of comet in space");
    CHECK(build_prompt("comet", PromptTemplate("{CLS}")) == "comet");
    CHECK_THROWS_AS(PromptTemplate("{CLS} and {CLS}"), Error);
    CHECK_THROWS_AS(PromptTemplate("no placeholder"), Error);
  }

  TEST_CASE("mock T2I is deterministic and seed-sensitive") {
    MockDiffusion mock(ClassTaxonomy::default_taxonomy(), std::string(PromptTemplate::kDefault));
    const std::string prompt = "A realistic image of star in space";
    const ImageBuffer a = t2i_generate(mock, prompt, 7, 64);
    CHECK(id_of(a) == id_of(t2i_generate(mock, prompt, 7, 64)));
    CHECK(id_of(a) != id_of(t2i_generate(mock, prompt, 8, 64)));
    CHECK(a.width() == 64);
    CHECK(a.channels() == 3);
  }

  TEST_CASE("mock class hues are evenly spaced") {
    const auto t = ClassTaxonomy::default_taxonomy();
    MockDiffusion mock(t, std::string(PromptTemplate::kDefault));
    for (std::size_t i = 0; i < t.fine_classes().size(); ++i)
      CHECK(mock.hue_for(build_prompt(t.fine_classes()[i], PromptTemplate())) ==
            doctest::Approx(360.0 * i / t.fine_classes().size()));
    const double other = mock.hue_for("something else");
    CHECK(other >= 0.0);
    CHECK(other < 360.0);
  }

  TEST_CASE("mock I2I variations") {
    MockDiffusion mock(ClassTaxonomy::default_taxonomy(), std::string(PromptTemplate::kDefault));
    const ImageBuffer base = t2i_generate(mock, "A realistic image of comet in space", 3, 64);
    std::set<std::string> ids;
    for (std::uint64_t v = 1; v <= 4; ++v) {
      const ImageBuffer var = i2i_variation(mock, base, v, 64);
      CHECK(var.width() == base.width());
      CHECK(var.height() == base.height());
      CHECK(id_of(var) == id_of(i2i_variation(mock, base, v, 64)));
      ids.insert(id_of(var));
    }
    CHECK(ids.size() == 4);
  }

  TEST_CASE("wrong-sized service responses are protocol violations") {
    WrongSize bad;
    try {
      (void)t2i_generate(bad, "x", 1, 256);
      FAIL("expected ProtocolViolation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ProtocolViolation);
    }
    CHECK_THROWS_AS(i2i_variation(bad, ImageBuffer(64, 64, 3), 1, 64), Error);
  }

  TEST_CASE("HTTP diffusion through the mock server equals the in-process mock") {
    const auto t = ClassTaxonomy::default_taxonomy();
    MockServiceServer server(t, std::string(PromptTemplate::kDefault));
    server.start();
    HttpDiffusion http({server.endpoint(), 10.0, 1});
    MockDiffusion local(t, std::string(PromptTemplate::kDefault));
    const std::string prompt = "A realistic image of nebula in space";
    const ImageBuffer remote = t2i_generate(http, prompt, 11, 64);
    CHECK(remote == t2i_generate(local, prompt, 11, 64));
    CHECK(i2i_variation(http, remote, 2, 64) == i2i_variation(local, remote, 2, 64));
  }

  TEST_CASE("synth_dataset count law") {
    TempDir dir;
    const ContentStore store(dir / "store");
    SynthConfig cfg;
    cfg.per_class_count = 1;
    cfg.variations_k = 3;
    cfg.output_size = 64;
    cfg.global_seed = 5;
    RestoreConfig rc;
    rc.scale = 2;
    const SynthResult r = synth_dataset(two_classes(), cfg, rc, store, {4, nullptr, nullptr});
    CHECK(r.t2i.records.size() == 2);
    CHECK(r.i2i.records.size() == 6);
    CHECK(r.hr.records.size() == 6);
    CHECK(r.hr.stage == StageTag::T2I_Aug_HR);
    for (const auto& rec : r.hr.records) {
      CHECK(rec.tier == Tier::HR);
      CHECK(store.load(rec).width() == 128);
    }
    for (const auto& rec : r.t2i.records) {
      const auto& p = std::get<provenance::SyntheticT2I>(rec.provenance);
      const int index = 0;
      CHECK(p.seed == derive_seed(5, synth_key(rec.fine_label, index), "t2i", 0));
    }
    std::map<std::uint32_t, int> variants;
    for (const auto& rec : r.hr.records) ++variants[rec.variant];
    CHECK(variants == std::map<std::uint32_t, int>{{0, 2}, {1, 2}, {2, 2}});
    CHECK(validate_manifest(r.hr, store.root()).valid());
    CHECK(validate_manifest(r.i2i, store.root()).valid());

    const SynthResult again = synth_dataset(two_classes(), cfg, rc, store, {1, nullptr, nullptr});
    CHECK(serialize_manifest(again.hr) == serialize_manifest(r.hr));
  }

  TEST_CASE("config validation") {
    SynthConfig c;
    c.output_size = 32;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SynthConfig();
    c.per_class_count = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK(SynthConfig::from_json(SynthConfig().to_json(), 0).to_json() == SynthConfig().to_json());
  }
}
