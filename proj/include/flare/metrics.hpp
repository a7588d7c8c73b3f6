#pragma once

#include "flare/image.hpp"
#include "flare/manifest.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flare {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(255^2 / MSE) over all channels; kPsnrCap when MSE is zero.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = (0.01 * 255) * (0.01 * 255);
inline constexpr double kSsimC2 = (0.03 * 255) * (0.03 * 255);
inline constexpr std::array<double, 5> kMsSsimWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

/// Scales whose side still fits the window after repeated floor-halving (at most 5).
int ms_ssim_scales(int min_side);

/// Normalized 1-D Gaussian taps of length kSsimWindow.
Eigen::VectorXd ssim_gaussian();

struct SsimTerms {
  double luminance;
  double contrast_structure;
};

/// Mean luminance and contrast-structure terms of one plane pair over all valid windows.
SsimTerms ssim_terms(const PlaneMatrix<double>& x, const PlaneMatrix<double>& y);

/// 2x2 box average; odd trailing rows/columns are dropped.
PlaneMatrix<double> halve(const PlaneMatrix<double>& plane);

/// Multi-scale SSIM averaged over channels. Scales that the image cannot reach are dropped and the
/// remaining weights renormalized. Negative cs/l means are clamped to 0.
double ms_ssim(const ImageBuffer& a, const ImageBuffer& b);

/// Population standard deviation of every byte of every image of each class.
std::map<std::string, double> class_pixel_stddev(const DatasetManifest& manifest,
                                                 const std::filesystem::path& store_root,
                                                 int workers = 1);

struct ClassDistribution {
  std::map<std::string, std::size_t> per_class;
  std::map<std::string, std::size_t> per_provenance;
  std::size_t total = 0;
  std::optional<double> expansion_ratio;  // total / |baseline|
};

ClassDistribution class_distribution(const DatasetManifest& manifest,
                                     const DatasetManifest* baseline = nullptr);

inline constexpr int kEmbeddingGrid = 8;
inline constexpr double kSeparationCap = 1e6;

/// 8x8 per-channel box means of the RGB image, channel-major (192 values).
Eigen::VectorXd embed(const ImageBuffer& image);

struct Separation {
  double ratio = 0.0;
  std::string warning;  // non-empty for the degenerate cases
};

/// Mean pairwise centroid distance over mean distance of samples to their own centroid.
/// Needs at least two labels, each with at least two samples.
Separation separation_ratio(const std::vector<Eigen::VectorXd>& embeddings,
                            const std::vector<std::string>& labels);
Separation separation_ratio(const DatasetManifest& manifest, const std::filesystem::path& store_root,
                            int workers = 1);

}  // namespace flare
