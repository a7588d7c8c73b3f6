#include "flare/error.hpp"
#include "flare/resample.hpp"
#include "flare/restore.hpp"
#include "flare/services.hpp"
#include "flare/synth.hpp"

#include "support.hpp"

#include <doctest.h>

#include <functional>
#include <set>

using namespace flare;
using testing_support::TempDir;

namespace {

DatasetManifest lr_fixture(const ContentStore& store, int n, int side = 16) {
  SplitMix64 rng(31);
  const std::vector<std::string> labels{"planet", "star", "comet"};
  DatasetManifest m;
  for (int i = 0; i < n; ++i)
    m.records.push_back(testing_support::store_raw(store, testing_support::random_image(rng, side, side, 3),
                                                   labels[i % labels.size()]));
  m.normalize();
  return m;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST_SUITE("restore") {
  TEST_CASE("config validation") {
    RestoreConfig c;
    CHECK_NOTHROW(c.validate());
    c.scale = 5;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::ConfigError);
    c = RestoreConfig{};
    c.method = RestoreMethod::Remote;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::ConfigError);
    c.remote_endpoint = "http://127.0.0.1:9";
    CHECK_NOTHROW(c.validate());
    CHECK(RestoreConfig::from_json(c.to_json()).to_json() == c.to_json());
  }

  TEST_CASE("restore_dataset preserves cardinality, labels and dims") {
    TempDir dir;
    const ContentStore store(dir / "store");
    const DatasetManifest lr = lr_fixture(store, 5);
    const DatasetManifest hr = restore_dataset(lr, RestoreConfig{}, store);
    CHECK(hr.stage == StageTag::Raw_HR);
    REQUIRE(hr.records.size() == 5);
    std::multiset<std::string> in_labels, out_labels;
    for (const auto& r : lr.records) in_labels.insert(r.fine_label);
    for (const auto& r : hr.records) {
      out_labels.insert(r.fine_label);
      CHECK(r.tier == Tier::HR);
      const ImageBuffer img = store.load(r);
      CHECK(img.width() == 64);
      CHECK(img.height() == 64);
      const auto& prov = std::get<provenance::Restored>(r.provenance);
      CHECK(prov.scale == 4);
      CHECK(prov.method == "lanczos3");
    }
    CHECK(in_labels == out_labels);
    CHECK(validate_manifest(hr, store.root()).valid());
    CHECK(serialize_manifest(restore_dataset(lr, RestoreConfig{}, store, {6, nullptr})) ==
          serialize_manifest(hr));
  }

  TEST_CASE("64x64 inputs become 256x256") {
    TempDir dir;
    const ContentStore store(dir / "store");
    const DatasetManifest hr = restore_dataset(lr_fixture(store, 2, 64), RestoreConfig{}, store);
    for (const auto& r : hr.records) CHECK(store.load(r).width() == 256);
  }

  TEST_CASE("stage mapping") {
    CHECK(restored_stage(StageTag::Raw_LR) == StageTag::Raw_HR);
    CHECK(restored_stage(StageTag::Raw_Aug_LR) == StageTag::Raw_Aug_HR);
    CHECK(restored_stage(StageTag::I2I) == StageTag::T2I_Aug_HR);
    CHECK(kind_of([] { (void)restored_stage(StageTag::Combined); }) == ErrorKind::StageError);
  }

  TEST_CASE("mock server matches native bicubic byte for byte") {
    MockServiceServer server(ClassTaxonomy::default_taxonomy(), std::string(PromptTemplate::kDefault));
    server.start();
    HttpSuperResolution client({server.endpoint(), 10.0, 2});
    SplitMix64 rng(2);
    const ImageBuffer img = testing_support::random_image(rng, 12, 10, 3);
    const ImageBuffer remote = upscale_remote(client, img, 4);
    CHECK(encode_png(remote) == encode_png(upscale_native(img, 4, Kernel::Bicubic)));
    CHECK(client.attempts() == 1);

    TempDir dir;
    const ContentStore store(dir / "store");
    RestoreConfig cfg;
    cfg.method = RestoreMethod::Remote;
    cfg.remote_endpoint = server.endpoint();
    const DatasetManifest lr = lr_fixture(store, 3);
    const DatasetManifest hr = restore_dataset(lr, cfg, store, {4, nullptr});
    CHECK(hr.records.size() == 3);
    server.stop();
  }

  TEST_CASE("wrong dimensions from the service are a protocol violation") {
    MockServiceServer server(ClassTaxonomy::default_taxonomy(), std::string(PromptTemplate::kDefault),
                             {2, false, 0});
    server.start();
    HttpSuperResolution client({server.endpoint(), 10.0, 2});
    const ImageBuffer img(8, 8, 3, 50);
    CHECK(kind_of([&] { (void)upscale_remote(client, img, 4); }) == ErrorKind::ProtocolViolation);
  }

  TEST_CASE("non-image body is a protocol violation") {
    MockServiceServer server(ClassTaxonomy::default_taxonomy(), std::string(PromptTemplate::kDefault),
                             {0, true, 0});
    server.start();
    HttpSuperResolution client({server.endpoint(), 10.0, 2});
    CHECK(kind_of([&] { (void)upscale_remote(client, ImageBuffer(8, 8, 3), 2); }) ==
          ErrorKind::ProtocolViolation);
  }

  TEST_CASE("server errors are retried, then reported as unavailable") {
    MockServiceServer server(ClassTaxonomy::default_taxonomy(), std::string(PromptTemplate::kDefault),
                             {0, false, 503});
    server.start();
    HttpSuperResolution client({server.endpoint(), 10.0, 2});
    CHECK(kind_of([&] { (void)upscale_remote(client, ImageBuffer(8, 8, 3), 2); }) ==
          ErrorKind::ServiceUnavailable);
    CHECK(client.attempts() == 3);
  }

  TEST_CASE("client errors are not retried") {
    MockServiceServer server(ClassTaxonomy::default_taxonomy(), std::string(PromptTemplate::kDefault),
                             {0, false, 400});
    server.start();
    HttpSuperResolution client({server.endpoint(), 10.0, 2});
    CHECK(kind_of([&] { (void)upscale_remote(client, ImageBuffer(8, 8, 3), 2); }) ==
          ErrorKind::ProtocolViolation);
    CHECK(client.attempts() == 1);
  }

  TEST_CASE("unreachable endpoint gives ServiceUnavailable after 2 retries") {
    HttpSuperResolution client({"http://127.0.0.1:1", 2.0, 2});
    CHECK(kind_of([&] { (void)upscale_remote(client, ImageBuffer(8, 8, 3), 2); }) ==
          ErrorKind::ServiceUnavailable);
    CHECK(client.attempts() == 3);
  }

  TEST_CASE("a failing stage names every failed sample and maps to exit code 2") {
    TempDir dir;
    const ContentStore store(dir / "store");
    const DatasetManifest lr = lr_fixture(store, 3);
    HttpSuperResolution client({"http://127.0.0.1:1", 2.0, 0});
    try {
      (void)restore_dataset(lr, RestoreConfig{}, store, {2, &client});
      FAIL("expected StageAborted");
    } catch (const StageAborted& e) {
      CHECK(e.failed_ids().size() == 3);
      CHECK(e.is_environmental());
    }
  }
}
