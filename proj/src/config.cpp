#include "flare/config.hpp"

#include "flare/codec.hpp"
#include "flare/error.hpp"

#include <set>

namespace flare {

namespace {

using nlohmann::json;

template <typename Fn>
auto section(const char* field, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    // Section parsers that already name their field keep their message.
    if (e.message().starts_with(std::string(field) + ".")) throw Error(ErrorKind::ConfigError, e.message());
    throw Error(ErrorKind::ConfigError, std::string(field) + ": " + e.message());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string(field) + ": " + e.what());
  }
}

const json& object_at(const json& j, const char* field) {
  const json& v = j.at(field);
  if (!v.is_object()) throw Error(ErrorKind::ConfigError, std::string(field) + ": must be an object");
  return v;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config: top level must be an object");
  static const std::set<std::string> known{"global_seed", "taxonomy", "store",  "workers", "ingest",
                                           "restore",     "augment",  "synth",  "mix"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Error(ErrorKind::ConfigError, key + ": unknown field");

  PipelineConfig c;
  if (j.contains("global_seed")) {
    c.global_seed = section("global_seed", [&] {
      const json& v = j.at("global_seed");
      if (!v.is_number_unsigned())
        throw Error(ErrorKind::ConfigError, "global_seed: must be a non-negative integer");
      return v.get<std::uint64_t>();
    });
  }
  if (j.contains("taxonomy")) {
    c.taxonomy = section("taxonomy", [&] {
      const json& v = j.at("taxonomy");
      if (v.is_string()) {
        const std::filesystem::path p = base_dir / v.get<std::string>();
        if (!std::filesystem::exists(p))
          throw Error(ErrorKind::ConfigError, "taxonomy: file not found: " + p.string());
        return ClassTaxonomy::load(p);
      }
      return ClassTaxonomy::from_json(v);
    });
  }
  if (j.contains("store"))
    c.store_root = section("store", [&] { return base_dir / j.at("store").get<std::string>(); });
  if (j.contains("workers")) {
    c.workers = section("workers", [&] {
      const int w = j.at("workers").get<int>();
      if (w < 1) throw Error(ErrorKind::ConfigError, "workers: must be >= 1");
      return w;
    });
  }
  if (j.contains("ingest")) {
    section("ingest", [&] {
      const json& s = object_at(j, "ingest");
      json policy = s;
      policy.erase("strict_layout");
      c.ingest = IngestPolicy::from_json(policy);
      c.strict_layout = s.value("strict_layout", true);
      c.ingest.validate();
      return 0;
    });
  }
  if (j.contains("restore")) {
    c.restore = section("restore", [&] {
      auto r = RestoreConfig::from_json(object_at(j, "restore"));
      r.validate();
      return r;
    });
  }
  if (j.contains("augment")) c.augment = section("augment", [&] { return object_at(j, "augment"); });
  const std::uint64_t seed = c.global_seed.value_or(0);
  if (j.contains("synth")) {
    c.synth = section("synth", [&] {
      auto s = SynthConfig::from_json(object_at(j, "synth"), seed);
      s.validate();
      return s;
    });
  }
  c.synth.global_seed = seed;
  if (j.contains("mix")) {
    c.mix = section("mix", [&] {
      auto m = MixParams::from_json(object_at(j, "mix"));
      m.validate();
      return m;
    });
  }
  section("augment", [&] { return c.plan().k(); });
  return c;
}

json PipelineConfig::load_json(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
}

std::uint64_t PipelineConfig::seed() const {
  if (!global_seed)
    throw Error(ErrorKind::ConfigError, "global_seed: required (set it in the config or pass --seed)");
  return *global_seed;
}

AugmentationPlan PipelineConfig::plan() const {
  return AugmentationPlan::from_json(augment, global_seed.value_or(0));
}

json PipelineConfig::snapshot() const {
  json ingest_json = ingest.to_json();
  ingest_json["strict_layout"] = strict_layout;
  return {{"global_seed", seed()},
          {"taxonomy", taxonomy.to_json()},
          {"ingest", ingest_json},
          {"restore", restore.to_json()},
          {"augment", plan().to_json()},
          {"synth", synth.to_json()},
          {"mix", mix.to_json()}};
}

}  // namespace flare
