#include "flare/synth.hpp"

#include "flare/error.hpp"
#include "flare/parallel.hpp"

#include <map>

namespace flare {

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  const auto first = text_.find(kPlaceholder);
  if (first == std::string::npos)
    throw Error(ErrorKind::ConfigError, "synth.prompt_template: missing {CLS} placeholder");
  if (text_.find(kPlaceholder, first + 1) != std::string::npos)
    throw Error(ErrorKind::ConfigError, "synth.prompt_template: more than one {CLS} placeholder");
}

std::string PromptTemplate::render(const std::string& fine_class) const {
  std::string out = text_;
  out.replace(out.find(kPlaceholder), kPlaceholder.size(), fine_class);
  if (out.empty()) throw Error(ErrorKind::InvalidInput, "rendered prompt is empty");
  return out;
}

std::string build_prompt(const std::string& fine_class, const PromptTemplate& prompt_template) {
  return prompt_template.render(fine_class);
}

void SynthConfig::validate() const {
  if (per_class_count < 1) throw Error(ErrorKind::ConfigError, "synth.per_class_count: must be >= 1");
  if (variations_k < 1) throw Error(ErrorKind::ConfigError, "synth.variations_k: must be >= 1");
  if (output_size < 64) throw Error(ErrorKind::ConfigError, "synth.output_size: must be >= 64");
  if (endpoint.empty()) throw Error(ErrorKind::ConfigError, "synth.endpoint: must be a URL or \"mock\"");
  if (max_in_flight < 1) throw Error(ErrorKind::ConfigError, "synth.max_in_flight: must be >= 1");
}

nlohmann::json SynthConfig::to_json() const {
  return {{"per_class_count", per_class_count},
          {"variations_k", variations_k},
          {"output_size", output_size},
          {"endpoint", endpoint},
          {"prompt_template", prompt.text()},
          {"timeout", timeout_seconds},
          {"retries", retries},
          {"max_in_flight", max_in_flight}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j, std::uint64_t global_seed) {
  SynthConfig c;
  c.per_class_count = j.value("per_class_count", c.per_class_count);
  c.variations_k = j.value("variations_k", c.variations_k);
  c.output_size = j.value("output_size", c.output_size);
  c.endpoint = j.value("endpoint", c.endpoint);
  if (j.contains("prompt_template")) c.prompt = PromptTemplate(j.at("prompt_template").get<std::string>());
  c.timeout_seconds = j.value("timeout", c.timeout_seconds);
  c.retries = j.value("retries", c.retries);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.global_seed = global_seed;
  return c;
}

namespace {

ImageBuffer checked(ImageBuffer image, int size, const char* what) {
  if (image.width() != size || image.height() != size || image.channels() != 3)
    throw Error(ErrorKind::ProtocolViolation,
                std::string(what) + " produced " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + "x" + std::to_string(image.channels()) +
                    ", expected " + std::to_string(size) + "x" + std::to_string(size) + "x3");
  return image;
}

void flag_collisions(std::vector<SampleRecord>& records) {
  std::map<SampleId, int> count;
  for (const auto& r : records) ++count[r.id];
  for (auto& r : records) r.collision = count[r.id] > 1;
}

}  // namespace

ImageBuffer t2i_generate(DiffusionService& client, const std::string& prompt, std::uint64_t seed,
                         int size) {
  return checked(client.t2i(prompt, seed, size, size), size, "t2i");
}

ImageBuffer i2i_variation(DiffusionService& client, const ImageBuffer& base,
                          std::uint64_t variation_seed, int size) {
  return checked(client.i2i(base, variation_seed, size, size), size, "i2i");
}

std::string synth_key(const std::string& fine_class, int index) {
  return fine_class + "/" + std::to_string(index);
}

SynthResult synth_dataset(const ClassTaxonomy& taxonomy, const SynthConfig& config,
                          const RestoreConfig& restore_config, const ContentStore& store,
                          const SynthOptions& options) {
  config.validate();
  restore_config.validate();

  std::unique_ptr<DiffusionService> owned;
  DiffusionService* diffusion = options.diffusion;
  if (!diffusion) {
    owned = make_diffusion_service(config.endpoint, taxonomy, config.prompt.text(),
                                   config.timeout_seconds, config.retries);
    diffusion = owned.get();
  }
  const int workers =
      config.endpoint == "mock" ? options.workers : std::min(options.workers, config.max_in_flight);

  nlohmann::json snapshot = {{"taxonomy", taxonomy.to_json()},
                             {"synth", config.to_json()},
                             {"global_seed", config.global_seed}};

  // Bases, in taxonomy order then index.
  const auto& classes = taxonomy.fine_classes();
  const std::size_t n = classes.size() * static_cast<std::size_t>(config.per_class_count);
  std::vector<SampleRecord> bases(n);
  std::vector<ImageBuffer> base_images(n);
  FailureLog base_failures(n);
  auto key_of = [&](std::size_t i) {
    return synth_key(classes[i / config.per_class_count], static_cast<int>(i % config.per_class_count));
  };
  parallel_for(n, workers, [&](std::size_t i) {
    base_failures.capture(i, [&] {
      const auto& cls = classes[i / config.per_class_count];
      const std::uint64_t seed = derive_seed(config.global_seed, key_of(i), "t2i", 0);
      const std::string prompt = build_prompt(cls, config.prompt);
      base_images[i] = t2i_generate(*diffusion, prompt, seed, config.output_size);
      const auto stored = store.put(base_images[i]);
      SampleRecord& r = bases[i];
      r.id = stored.id;
      r.fine_label = cls;
      r.tier = Tier::LR;
      r.provenance = provenance::SyntheticT2I{prompt, seed};
      r.image_path = stored.relative_path;
    });
  });
  base_failures.raise_if_failed(key_of);

  // Variations: seed v for v = 1 .. k - 1 of every base.
  const std::size_t per_base = static_cast<std::size_t>(config.variations_k - 1);
  std::vector<SampleRecord> variations(n * per_base);
  FailureLog variation_failures(variations.size());
  parallel_for(variations.size(), workers, [&](std::size_t t) {
    variation_failures.capture(t, [&] {
      const std::size_t b = t / per_base;
      const auto v = static_cast<std::uint32_t>(t % per_base + 1);
      const auto stored = store.put(i2i_variation(*diffusion, base_images[b], v, config.output_size));
      SampleRecord& r = variations[t];
      r.id = stored.id;
      r.fine_label = bases[b].fine_label;
      r.tier = Tier::LR;
      r.provenance = provenance::SyntheticI2I{v, bases[b].id};
      r.image_path = stored.relative_path;
      r.variant = v;
    });
  });
  variation_failures.raise_if_failed([&](std::size_t t) {
    return bases[t / per_base].id.str() + "#" + std::to_string(t % per_base + 1);
  });

  SynthResult result;
  result.t2i.stage = StageTag::T2I;
  result.t2i.records = bases;
  flag_collisions(result.t2i.records);
  result.t2i.config_snapshot = snapshot;
  result.t2i.created_at = manifest_timestamp();
  result.t2i.normalize();

  result.i2i.stage = StageTag::I2I;
  result.i2i.records = std::move(bases);
  result.i2i.records.insert(result.i2i.records.end(), variations.begin(), variations.end());
  flag_collisions(result.i2i.records);
  result.i2i.config_snapshot = snapshot;
  result.i2i.created_at = result.t2i.created_at;
  result.i2i.normalize();

  RestoreOptions restore_options;
  restore_options.workers = options.workers;
  restore_options.service = options.sr;
  result.hr = restore_dataset(result.i2i, restore_config, store, restore_options);
  return result;
}

}  // namespace flare
