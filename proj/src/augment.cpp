#include "flare/augment.hpp"

#include "flare/color.hpp"
#include "flare/core.hpp"
#include "flare/error.hpp"
#include "flare/parallel.hpp"

#include <map>
#include <sstream>

namespace flare {

void ColorJitter::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(brightness) || !in01(contrast) || !in01(saturation))
    throw Error(ErrorKind::ConfigError, "ColorJitter: brightness/contrast/saturation must be in [0, 1]");
  if (!(hue >= 0.0 && hue <= 0.5))
    throw Error(ErrorKind::ConfigError, "ColorJitter: hue must be in [0, 0.5]");
}

namespace {

std::string step_name(const AugmentationStep& step) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HorizontalFlip>) {
          return "HorizontalFlip";
        } else if constexpr (std::is_same_v<T, VerticalFlip>) {
          return "VerticalFlip";
        } else {
          std::ostringstream os;
          os << "ColorJitter(" << s.brightness << "," << s.contrast << "," << s.saturation << ","
             << s.hue << ")";
          return os.str();
        }
      },
      step);
}

nlohmann::json step_json(const AugmentationStep& step) {
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HorizontalFlip>)
          return {{"type", "HorizontalFlip"}};
        else if constexpr (std::is_same_v<T, VerticalFlip>)
          return {{"type", "VerticalFlip"}};
        else
          return {{"type", "ColorJitter"},
                  {"brightness", s.brightness},
                  {"contrast", s.contrast},
                  {"saturation", s.saturation},
                  {"hue", s.hue}};
      },
      step);
}

AugmentationStep step_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "HorizontalFlip") return HorizontalFlip{};
  if (type == "VerticalFlip") return VerticalFlip{};
  if (type == "ColorJitter")
    return ColorJitter{j.value("brightness", 0.0), j.value("contrast", 0.0),
                       j.value("saturation", 0.0), j.value("hue", 0.0)};
  if (type == "Compose") throw Error(ErrorKind::ConfigError, "Compose cannot be nested");
  throw Error(ErrorKind::ConfigError, "unknown augmentation type '" + type + "'");
}

AugmentationKind as_kind(const AugmentationStep& step) {
  return std::visit([](const auto& s) -> AugmentationKind { return s; }, step);
}

ImageBuffer apply_step(const AugmentationStep& step, const ImageBuffer& image, std::uint64_t seed) {
  return std::visit(
      [&](const auto& s) -> ImageBuffer {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HorizontalFlip>)
          return hflip(image);
        else if constexpr (std::is_same_v<T, VerticalFlip>)
          return vflip(image);
        else
          return color_jitter(to_rgb(image), s, seed);
      },
      step);
}

}  // namespace

std::string name_of(const AugmentationKind& kind) {
  if (const auto* c = std::get_if<Compose>(&kind)) {
    std::string name = "Compose(";
    for (std::size_t i = 0; i < c->steps.size(); ++i)
      name += (i ? "," : "") + step_name(c->steps[i]);
    return name + ")";
  }
  return std::visit(
      [](const auto& s) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Compose>)
          return {};
        else
          return step_name(s);
      },
      kind);
}

nlohmann::json to_json(const AugmentationKind& kind) {
  if (const auto* c = std::get_if<Compose>(&kind)) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : c->steps) steps.push_back(step_json(s));
    return {{"type", "Compose"}, {"steps", steps}};
  }
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Compose>)
          return {};
        else
          return step_json(s);
      },
      kind);
}

AugmentationKind augmentation_from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() == "Compose") {
    Compose c;
    for (const auto& s : j.at("steps")) c.steps.push_back(step_from_json(s));
    validate(c);
    return c;
  }
  auto kind = as_kind(step_from_json(j));
  validate(kind);
  return kind;
}

void validate(const AugmentationKind& kind) {
  if (const auto* jitter = std::get_if<ColorJitter>(&kind)) jitter->validate();
  if (const auto* c = std::get_if<Compose>(&kind)) {
    if (c->steps.empty()) throw Error(ErrorKind::ConfigError, "Compose must not be empty");
    for (const auto& s : c->steps)
      if (const auto* jitter = std::get_if<ColorJitter>(&s)) jitter->validate();
  }
}

AugmentationPlan::AugmentationPlan(std::vector<AugmentationKind> kinds, std::uint64_t global_seed)
    : kinds_(std::move(kinds)), global_seed_(global_seed) {
  if (kinds_.empty())
    throw Error(ErrorKind::ConfigError, "augment.kinds: at least one kind is required (k >= 2)");
  for (const auto& k : kinds_) validate(k);
}

AugmentationPlan AugmentationPlan::default_plan(std::uint64_t global_seed) {
  const ColorJitter jitter{0.4, 0.4, 0.4, 0.1};
  return AugmentationPlan({jitter, HorizontalFlip{}, VerticalFlip{}, Compose{{HorizontalFlip{}, jitter}}},
                          global_seed);
}

AugmentationPlan AugmentationPlan::from_json(const nlohmann::json& j, std::uint64_t global_seed) {
  if (!j.contains("kinds")) return default_plan(global_seed);
  std::vector<AugmentationKind> kinds;
  for (const auto& k : j.at("kinds")) kinds.push_back(augmentation_from_json(k));
  return AugmentationPlan(std::move(kinds), global_seed);
}

nlohmann::json AugmentationPlan::to_json() const {
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& k : kinds_) kinds.push_back(flare::to_json(k));
  return {{"kinds", kinds}, {"k", k()}};
}

ImageBuffer hflip(const ImageBuffer& image) {
  ImageBuffer out(image.width(), image.height(), image.channels());
  for (int c = 0; c < image.channels(); ++c) out.plane(c) = image.plane(c).rowwise().reverse();
  return out;
}

ImageBuffer vflip(const ImageBuffer& image) {
  ImageBuffer out(image.width(), image.height(), image.channels());
  for (int c = 0; c < image.channels(); ++c) out.plane(c) = image.plane(c).colwise().reverse();
  return out;
}

ImageBuffer color_jitter(const ImageBuffer& image, const ColorJitter& params, std::uint64_t seed) {
  if (image.channels() != 3)
    throw Error(ErrorKind::ChannelError, "color_jitter requires a 3-channel image");
  params.validate();

  SplitMix64 rng(seed);
  const double b = rng.uniform(1.0 - params.brightness, 1.0 + params.brightness);
  const double c = rng.uniform(1.0 - params.contrast, 1.0 + params.contrast);
  const double s = rng.uniform(1.0 - params.saturation, 1.0 + params.saturation);
  const double h = rng.uniform(-params.hue, params.hue);

  using Plane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  std::array<Plane, 3> rgb;
  for (int ch = 0; ch < 3; ++ch) rgb[ch] = plane_as<double>(image, ch).array();
  auto clamp = [](const Plane& p) -> Plane { return p.max(0.0).min(255.0); };
  auto luma_of = [&rgb] { return Plane(kLumaR * rgb[0] + kLumaG * rgb[1] + kLumaB * rgb[2]); };

  for (auto& p : rgb) p = clamp(p * b);

  const double mean_gray = luma_of().mean();
  for (auto& p : rgb) p = clamp(mean_gray + c * (p - mean_gray));

  const Plane gray = luma_of();
  for (auto& p : rgb) p = clamp(gray + s * (p - gray));

  const double degrees = h * 360.0;
  for (Eigen::Index y = 0; y < rgb[0].rows(); ++y)
    for (Eigen::Index x = 0; x < rgb[0].cols(); ++x) {
      const Rgb rotated = rotate_hue({rgb[0](y, x), rgb[1](y, x), rgb[2](y, x)}, degrees);
      for (int ch = 0; ch < 3; ++ch) rgb[ch](y, x) = std::clamp(rotated[ch], 0.0, 255.0);
    }

  ImageBuffer out(image.width(), image.height(), 3);
  for (int ch = 0; ch < 3; ++ch) store_plane(rgb[ch].matrix(), out, ch);
  return out;
}

ImageBuffer apply(const AugmentationKind& kind, const ImageBuffer& image, std::uint64_t seed) {
  if (const auto* c = std::get_if<Compose>(&kind)) {
    ImageBuffer current = image;
    for (const auto& step : c->steps) current = apply_step(step, current, seed);
    return current;
  }
  return std::visit(
      [&](const auto& s) -> ImageBuffer {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Compose>)
          return image;
        else
          return apply_step(s, image, seed);
      },
      kind);
}

StageTag augmented_stage(StageTag input) {
  if (input == StageTag::Raw_LR) return StageTag::Raw_Aug_LR;
  if (input == StageTag::Raw_HR) return StageTag::Raw_Aug_HR;
  throw Error(ErrorKind::StageError,
              "cannot augment a " + std::string(to_string(input)) + " manifest");
}

namespace {

SampleRecord augmented_record(const SampleRecord& parent, const AugmentationKind& kind,
                              std::uint32_t variant, std::uint64_t seed, ContentStore::Stored stored) {
  SampleRecord rec;
  rec.id = std::move(stored.id);
  rec.fine_label = parent.fine_label;
  rec.tier = parent.tier;
  rec.provenance = provenance::Augmented{name_of(kind), seed, parent.id};
  rec.image_path = std::move(stored.relative_path);
  rec.variant = variant;
  return rec;
}

AugmentResult assemble(const DatasetManifest& manifest, const AugmentationPlan& plan, StageTag stage,
                       std::vector<SampleRecord> produced) {
  const auto& in = manifest.records;
  AugmentResult result;
  std::map<SampleId, int> occurrences;
  for (const auto& r : in) ++occurrences[r.id];
  for (const auto& r : produced) ++occurrences[r.id];
  for (auto& r : produced)
    if (occurrences[r.id] > 1) r.collision = true;
  for (const auto& [id, n] : occurrences)
    if (n > 1) result.report.collisions.push_back(id.str());

  auto& out = result.manifest;
  out.stage = stage;
  out.records = in;
  out.records.insert(out.records.end(), std::make_move_iterator(produced.begin()),
                     std::make_move_iterator(produced.end()));
  out.config_snapshot = manifest.config_snapshot;
  out.config_snapshot["augment"] = plan.to_json();
  out.config_snapshot["global_seed"] = plan.global_seed();
  out.created_at = manifest_timestamp();
  out.normalize();
  return result;
}

}  // namespace

AugmentResult augment_dataset(const DatasetManifest& manifest, const AugmentationPlan& plan,
                              const ContentStore& store, int workers) {
  const StageTag stage = augmented_stage(manifest.stage);
  const auto& in = manifest.records;
  const std::size_t kinds = plan.kinds().size();

  std::vector<SampleRecord> produced(in.size() * kinds);
  parallel_for(in.size(), workers, [&](std::size_t r) {
    const ImageBuffer source = store.load(in[r]);
    for (std::size_t k = 0; k < kinds; ++k) {
      const auto variant = static_cast<std::uint32_t>(k + 1);
      const std::uint64_t seed = derive_seed(plan.global_seed(), in[r].id.str(), "aug", variant);
      const auto& kind = plan.kinds()[k];
      produced[r * kinds + k] = augmented_record(in[r], kind, variant, seed, store.put(apply(kind, source, seed)));
    }
  });
  return assemble(manifest, plan, stage, std::move(produced));
}

AugmentResult plan_augment(const DatasetManifest& manifest, const AugmentationPlan& plan) {
  const StageTag stage = augmented_stage(manifest.stage);
  std::vector<SampleRecord> produced;
  produced.reserve(manifest.records.size() * plan.kinds().size());
  for (const auto& parent : manifest.records) {
    for (std::size_t k = 0; k < plan.kinds().size(); ++k) {
      const auto variant = static_cast<std::uint32_t>(k + 1);
      const std::uint64_t seed = derive_seed(plan.global_seed(), parent.id.str(), "aug", variant);
      const std::string key = parent.id.str() + "/" + std::to_string(variant);
      const SampleId id = content_hash(std::span(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()));
      produced.push_back(augmented_record(parent, plan.kinds()[k], variant, seed,
                                          {id, ContentStore::relative_path(id)}));
    }
  }
  return assemble(manifest, plan, stage, std::move(produced));
}

}  // namespace flare
