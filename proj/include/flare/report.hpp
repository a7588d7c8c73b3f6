#pragma once

#include "flare/manifest.hpp"
#include "flare/metrics.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flare {

struct ReportRow {
  std::string label;
  std::optional<double> mean_psnr;
  std::optional<double> mean_ms_ssim;
  double pixel_stddev = 0.0;
  std::size_t count = 0;
};

struct QualityReport {
  StageTag stage = StageTag::Raw_LR;
  std::vector<ReportRow> rows;  // taxonomy order, classes present in the manifest
  ReportRow average;            // label "AVG": means over rows, count = total
  std::map<std::string, std::size_t> per_provenance;
  std::optional<double> expansion_ratio;
  std::optional<double> separation_ratio;
  std::size_t pairs_evaluated = 0;
  std::optional<int> ms_ssim_scales;  // smallest scale count used across pairs
  std::vector<std::string> warnings;
};

struct ReportInputs {
  const DatasetManifest* baseline = nullptr;
  // Manifest holding the parents of restored records. A parent of the record's own size is
  // compared directly; a smaller one is compared against degrade(record, scale).
  const DatasetManifest* pairs = nullptr;
  int workers = 1;
};

QualityReport build_report(const DatasetManifest& manifest, const std::filesystem::path& store_root,
                           const ReportInputs& inputs = {});

/// `#`-prefixed header lines, then class,count,pixel_stddev[,mean_psnr,mean_ms_ssim] rows and AVG.
std::string report_csv(const QualityReport& report);
nlohmann::json report_json(const QualityReport& report);

}  // namespace flare
