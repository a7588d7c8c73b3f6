#include "flare/mix.hpp"

#include "flare/error.hpp"
#include "flare/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace flare {

namespace {

// Guards floor/round against products such as 0.29 * 100 = 28.999999999999996.
constexpr double kRoundingSlack = 1e-9;

void check_weight(double w, const char* name) {
  if (!(w > 0.0 && w <= 1.0))
    throw Error(ErrorKind::InvalidWeight,
                std::string(name) + " must be in (0, 1], got " + std::to_string(w));
}

}  // namespace

std::string_view to_string(CountRule rule) {
  return rule == CountRule::StrictEq7 ? "strict_eq7" : "original_plus_floor";
}

CountRule parse_count_rule(std::string_view text) {
  if (text == "original_plus_floor") return CountRule::OriginalPlusFloor;
  if (text == "strict_eq7") return CountRule::StrictEq7;
  throw Error(ErrorKind::ConfigError, "mix.count_rule: unknown rule '" + std::string(text) + "'");
}

void MixParams::validate() const {
  check_weight(alpha, "alpha");
  check_weight(beta, "beta");
}

nlohmann::json MixParams::to_json() const {
  return {{"alpha", alpha}, {"beta", beta}, {"count_rule", to_string(count_rule)},
          {"kind_priority", kind_priority}};
}

MixParams MixParams::from_json(const nlohmann::json& j) {
  MixParams p;
  p.alpha = j.value("alpha", p.alpha);
  p.beta = j.value("beta", p.beta);
  if (j.contains("count_rule")) p.count_rule = parse_count_rule(j.at("count_rule").get<std::string>());
  if (j.contains("kind_priority"))
    p.kind_priority = j.at("kind_priority").get<std::vector<std::string>>();
  return p;
}

std::size_t records_kept(double weight, int k, std::size_t n, CountRule rule) {
  check_weight(weight, "weight");
  if (k < 1) throw Error(ErrorKind::StageError, "k must be >= 1");
  if (rule == CountRule::OriginalPlusFloor)
    return n * (1 + static_cast<std::size_t>(std::floor(weight * (k - 1) + kRoundingSlack)));
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * weight * k + 0.5 + kRoundingSlack));
}

DatasetManifest select(double weight, int k, const DatasetManifest& manifest, CountRule rule,
                       const std::vector<std::string>& kind_priority) {
  check_weight(weight, "weight");
  if (manifest.stage != StageTag::Raw_Aug_HR && manifest.stage != StageTag::T2I_Aug_HR)
    throw Error(ErrorKind::StageError,
                "select needs a Raw_Aug_HR or T2I_Aug_HR manifest, got " +
                    std::string(to_string(manifest.stage)));
  if (k < 1) throw Error(ErrorKind::StageError, "k must be >= 1");

  std::vector<std::vector<const SampleRecord*>> groups(static_cast<std::size_t>(k));
  std::map<std::uint32_t, std::string> kind_of_variant;
  for (const auto& r : manifest.records) {
    if (r.variant >= static_cast<std::uint32_t>(k))
      throw Error(ErrorKind::StageError, "record " + r.id.str() + " has variant " +
                                             std::to_string(r.variant) + " >= k = " + std::to_string(k));
    groups[r.variant].push_back(&r);
    if (const auto* aug = std::get_if<provenance::Augmented>(&r.provenance))
      kind_of_variant.emplace(r.variant, aug->kind);
  }
  const std::size_t n = groups[0].size();
  if (std::any_of(groups.begin(), groups.end(), [n](const auto& g) { return g.size() != n; }))
    throw Error(ErrorKind::StageError,
                "manifest records are not indexed into " + std::to_string(k) + " equal copy-groups");

  // Group order: base first, then augmentation groups by priority (variant index by default).
  std::vector<std::uint32_t> order(static_cast<std::size_t>(k - 1));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i + 1);
  if (!kind_priority.empty() && !kind_of_variant.empty()) {
    auto rank = [&](std::uint32_t v) {
      const auto it = std::find(kind_priority.begin(), kind_priority.end(), kind_of_variant.at(v));
      if (it == kind_priority.end())
        throw Error(ErrorKind::StageError,
                    "augmentation kind '" + kind_of_variant.at(v) + "' missing from kind_priority");
      return it - kind_priority.begin();
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return rank(a) < rank(b); });
  }
  order.insert(order.begin(), 0);

  std::size_t budget = records_kept(weight, k, n, rule);
  std::set<const SampleRecord*> chosen;
  for (std::uint32_t v : order) {
    for (const SampleRecord* r : groups[v]) {
      if (budget == 0) break;
      chosen.insert(r);
      --budget;
    }
  }

  DatasetManifest out;
  out.stage = manifest.stage;
  out.config_snapshot = manifest.config_snapshot;
  out.created_at = manifest.created_at;
  for (const auto& r : manifest.records)
    if (chosen.contains(&r)) out.records.push_back(r);
  return out;
}

namespace {

ClassTaxonomy taxonomy_of(const DatasetManifest& m) {
  if (m.config_snapshot.contains("taxonomy"))
    return ClassTaxonomy::from_json(m.config_snapshot.at("taxonomy"));
  return ClassTaxonomy::default_taxonomy();
}

void require_hr(const DatasetManifest& m, const char* which) {
  for (const auto& r : m.records)
    if (r.tier != Tier::HR)
      throw Error(ErrorKind::StageError,
                  std::string(which) + " input contains LR record " + r.id.str());
}

}  // namespace

CombineResult combine(const DatasetManifest& selected_aug, const DatasetManifest& selected_synth,
                      const MixParams& params, int k) {
  params.validate();
  require_hr(selected_aug, "augmented");
  require_hr(selected_synth, "synthetic");
  if (taxonomy_of(selected_aug) != taxonomy_of(selected_synth))
    throw Error(ErrorKind::TaxonomyError, "augmented and synthetic manifests use different taxonomies");

  CombineResult result;
  auto& out = result.manifest;
  out.stage = StageTag::Combined;
  out.records = selected_aug.records;
  std::set<SampleId> present;
  for (const auto& r : out.records) present.insert(r.id);
  for (const auto& r : selected_synth.records) {
    if (present.contains(r.id)) {
      result.collisions.push_back(r.id.str());
      continue;
    }
    out.records.push_back(r);
  }

  out.config_snapshot = selected_aug.config_snapshot;
  for (const auto& [key, value] : selected_synth.config_snapshot.items())
    if (!out.config_snapshot.contains(key)) out.config_snapshot[key] = value;
  out.config_snapshot["mix"] = params.to_json();
  out.config_snapshot["mix"]["k"] = k;
  out.created_at = manifest_timestamp();
  out.normalize();
  return result;
}

}  // namespace flare
