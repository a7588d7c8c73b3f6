#include "flare/report.hpp"

#include "flare/error.hpp"
#include "flare/parallel.hpp"
#include "flare/resample.hpp"
#include "flare/taxonomy.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace flare {

namespace {

struct PairScore {
  bool evaluated = false;
  double psnr = 0.0;
  double ms_ssim = 0.0;
  int scales = 0;
  std::string warning;
};

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

QualityReport build_report(const DatasetManifest& manifest, const std::filesystem::path& store_root,
                           const ReportInputs& inputs) {
  const ClassTaxonomy taxonomy = manifest.config_snapshot.contains("taxonomy")
                                     ? ClassTaxonomy::from_json(manifest.config_snapshot.at("taxonomy"))
                                     : ClassTaxonomy::default_taxonomy();
  const ContentStore store(store_root);

  QualityReport report;
  report.stage = manifest.stage;
  const ClassDistribution dist = class_distribution(manifest, inputs.baseline);
  report.per_provenance = dist.per_provenance;
  report.expansion_ratio = dist.expansion_ratio;
  const auto stddev = class_pixel_stddev(manifest, store_root, inputs.workers);

  std::vector<PairScore> scores(manifest.records.size());
  if (inputs.pairs != nullptr) {
    std::map<SampleId, const SampleRecord*> parents;
    for (const auto& r : inputs.pairs->records) parents.emplace(r.id, &r);
    parallel_for(scores.size(), inputs.workers, [&](std::size_t i) {
      const SampleRecord& r = manifest.records[i];
      const auto* restored = std::get_if<provenance::Restored>(&r.provenance);
      if (restored == nullptr) return;
      const auto it = parents.find(restored->parent_id);
      if (it == parents.end()) return;
      const ImageBuffer reference = store.load(*it->second);
      ImageBuffer candidate = store.load(r);
      if (candidate.width() != reference.width() || candidate.height() != reference.height())
        candidate = degrade(candidate, restored->scale);
      PairScore& s = scores[i];
      s.psnr = psnr(candidate, reference);
      try {
        s.ms_ssim = ms_ssim(candidate, reference);
        s.scales = ms_ssim_scales(std::min(candidate.width(), candidate.height()));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TooSmall) throw;
        s.warning = r.id.str() + ": " + e.what();
        s.scales = -1;
      }
      s.evaluated = true;
    });
  }

  std::map<std::string, std::vector<double>> psnrs, ssims;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const PairScore& s = scores[i];
    if (!s.evaluated) continue;
    ++report.pairs_evaluated;
    const std::string& label = manifest.records[i].fine_label;
    psnrs[label].push_back(s.psnr);
    if (s.scales > 0) {
      ssims[label].push_back(s.ms_ssim);
      report.ms_ssim_scales = std::min(report.ms_ssim_scales.value_or(s.scales), s.scales);
    } else {
      report.warnings.push_back(s.warning);
    }
  }
  if (inputs.pairs != nullptr && report.pairs_evaluated == 0)
    report.warnings.push_back("no record of the manifest is restored from a record of the pairs manifest");

  std::vector<std::string> order = taxonomy.fine_classes();
  for (const auto& [label, n] : dist.per_class)
    if (!taxonomy.contains(label)) order.push_back(label);
  std::vector<double> avg_psnr, avg_ssim, avg_std;
  for (const auto& label : order) {
    const auto n = dist.per_class.find(label);
    if (n == dist.per_class.end()) continue;
    ReportRow row{label, std::nullopt, std::nullopt, stddev.at(label), n->second};
    if (inputs.pairs != nullptr) {
      row.mean_psnr = mean_of(psnrs[label]);
      row.mean_ms_ssim = mean_of(ssims[label]);
      if (row.mean_psnr) avg_psnr.push_back(*row.mean_psnr);
      if (row.mean_ms_ssim) avg_ssim.push_back(*row.mean_ms_ssim);
    }
    avg_std.push_back(row.pixel_stddev);
    report.rows.push_back(row);
  }
  report.average = {"AVG", mean_of(avg_psnr), mean_of(avg_ssim), mean_of(avg_std).value_or(0.0),
                    dist.total};

  try {
    const Separation sep = separation_ratio(manifest, store_root, inputs.workers);
    report.separation_ratio = sep.ratio;
    if (!sep.warning.empty()) report.warnings.push_back(sep.warning);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidInput) throw;
    report.warnings.push_back(std::string("separation ratio unavailable: ") + e.what());
  }
  return report;
}

std::string report_csv(const QualityReport& report) {
  std::ostringstream out;
  out << "# stage: " << to_string(report.stage) << '\n';
  out << "# psnr_cap_db: " << fixed(kPsnrCap, 1) << '\n';
  out << "# pixel_stddev: population standard deviation of pixel bytes (pixel space)\n";
  if (report.ms_ssim_scales)
    out << "# ms_ssim_mode: " << (*report.ms_ssim_scales == 5 ? "full" : "reduced") << " ("
        << *report.ms_ssim_scales << " scales)\n";
  out << "# pairs_evaluated: " << report.pairs_evaluated << '\n';
  out << "# separation_ratio: " << (report.separation_ratio ? fixed(*report.separation_ratio) : "n/a")
      << '\n';
  out << "# expansion_ratio: " << (report.expansion_ratio ? fixed(*report.expansion_ratio) : "n/a")
      << '\n';
  for (const auto& [kind, n] : report.per_provenance) out << "# provenance " << kind << ": " << n << '\n';
  for (const auto& w : report.warnings) out << "# warning: " << w << '\n';

  const bool paired = report.pairs_evaluated > 0;
  out << "class,count,pixel_stddev";
  if (paired) out << ",mean_psnr,mean_ms_ssim";
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v) : std::string(); };
  auto row = [&](const ReportRow& r) {
    out << r.label << ',' << r.count << ',' << fixed(r.pixel_stddev);
    if (paired) out << ',' << opt(r.mean_psnr) << ',' << opt(r.mean_ms_ssim);
    out << '\n';
  };
  for (const auto& r : report.rows) row(r);
  row(report.average);
  return out.str();
}

nlohmann::json report_json(const QualityReport& report) {
  using nlohmann::json;
  const bool paired = report.pairs_evaluated > 0;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  auto row = [&](const ReportRow& r) {
    json j{{"class", r.label}, {"count", r.count}, {"pixel_stddev", r.pixel_stddev}};
    if (paired) {
      j["mean_psnr"] = opt(r.mean_psnr);
      j["mean_ms_ssim"] = opt(r.mean_ms_ssim);
    }
    return j;
  };
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(row(r));
  return {{"stage", to_string(report.stage)},
          {"psnr_cap_db", kPsnrCap},
          {"pixel_stddev_space", "pixel"},
          {"ms_ssim_scales", report.ms_ssim_scales ? json(*report.ms_ssim_scales) : json(nullptr)},
          {"pairs_evaluated", report.pairs_evaluated},
          {"separation_ratio", opt(report.separation_ratio)},
          {"expansion_ratio", opt(report.expansion_ratio)},
          {"per_provenance", report.per_provenance},
          {"rows", rows},
          {"average", row(report.average)},
          {"warnings", report.warnings}};
}

}  // namespace flare
