#include "flare/metrics.hpp"

#include "flare/error.hpp"
#include "flare/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace flare {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    throw Error(ErrorKind::DimensionError,
                "image shapes differ: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    "x" + std::to_string(a.channels()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + "x" + std::to_string(b.channels()));
}

// (in - window + 1) x in matrix applying the Gaussian to every valid window position.
Eigen::MatrixXd valid_filter(Eigen::Index in) {
  static const Eigen::VectorXd g = ssim_gaussian();
  const Eigen::Index out = in - kSsimWindow + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out, in);
  for (Eigen::Index o = 0; o < out; ++o) m.block(o, o, 1, kSsimWindow) = g.transpose();
  return m;
}

}  // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  if (pa.empty()) throw Error(ErrorKind::DimensionError, "psnr of empty images");
  double sse = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    sse += d * d;
  }
  if (sse == 0.0) return kPsnrCap;
  const double mse = sse / static_cast<double>(pa.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

int ms_ssim_scales(int min_side) {
  int scales = 0;
  for (int side = min_side; side >= kSsimWindow && scales < static_cast<int>(kMsSsimWeights.size());
       side /= 2)
    ++scales;
  return scales;
}

Eigen::VectorXd ssim_gaussian() {
  Eigen::VectorXd g(kSsimWindow);
  const int half = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    g(i) = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
  }
  return g / g.sum();
}

SsimTerms ssim_terms(const PlaneMatrix<double>& x, const PlaneMatrix<double>& y) {
  const Eigen::MatrixXd r = valid_filter(x.rows());
  const Eigen::MatrixXd c = valid_filter(x.cols()).transpose();
  auto blur = [&](const PlaneMatrix<double>& p) -> Eigen::ArrayXXd { return (r * p * c).array(); };

  const Eigen::ArrayXXd mx = blur(x);
  const Eigen::ArrayXXd my = blur(y);
  const Eigen::ArrayXXd sxx = blur(x.cwiseProduct(x)) - mx * mx;
  const Eigen::ArrayXXd syy = blur(y.cwiseProduct(y)) - my * my;
  const Eigen::ArrayXXd sxy = blur(x.cwiseProduct(y)) - mx * my;

  const Eigen::ArrayXXd l = (2.0 * mx * my + kSsimC1) / (mx * mx + my * my + kSsimC1);
  const Eigen::ArrayXXd cs = (2.0 * sxy + kSsimC2) / (sxx + syy + kSsimC2);
  return {l.mean(), cs.mean()};
}

PlaneMatrix<double> halve(const PlaneMatrix<double>& plane) {
  const Eigen::Index rows = plane.rows() / 2;
  const Eigen::Index cols = plane.cols() / 2;
  PlaneMatrix<double> out(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y)
    for (Eigen::Index x = 0; x < cols; ++x)
      out(y, x) = 0.25 * (plane(2 * y, 2 * x) + plane(2 * y, 2 * x + 1) + plane(2 * y + 1, 2 * x) +
                          plane(2 * y + 1, 2 * x + 1));
  return out;
}

double ms_ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  const int min_side = std::min(a.width(), a.height());
  if (min_side < kSsimWindow)
    throw Error(ErrorKind::TooSmall, "ms_ssim needs a side of at least " + std::to_string(kSsimWindow) +
                                         ", got " + std::to_string(min_side));
  const int scales = ms_ssim_scales(min_side);
  const double total =
      std::accumulate(kMsSsimWeights.begin(), kMsSsimWeights.begin() + scales, 0.0);

  double sum = 0.0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    PlaneMatrix<double> x = plane_as<double>(a, ch);
    PlaneMatrix<double> y = plane_as<double>(b, ch);
    double value = 1.0;
    for (int s = 0; s < scales; ++s) {
      const double w = kMsSsimWeights[s] / total;
      const SsimTerms t = ssim_terms(x, y);
      value *= std::pow(std::max(t.contrast_structure, 0.0), w);
      if (s + 1 == scales) {
        value *= std::pow(std::max(t.luminance, 0.0), w);
      } else {
        x = halve(x);
        y = halve(y);
      }
    }
    sum += value;
  }
  return sum / a.channels();
}

std::map<std::string, double> class_pixel_stddev(const DatasetManifest& manifest,
                                                 const std::filesystem::path& store_root,
                                                 int workers) {
  struct Moments {
    std::uint64_t n = 0, sum = 0, sum_sq = 0;
  };
  const ContentStore store(store_root);
  std::vector<Moments> per_record(manifest.records.size());
  parallel_for(per_record.size(), workers, [&](std::size_t i) {
    const ImageBuffer image = store.load(manifest.records[i]);
    Moments m;
    for (std::uint8_t v : image.pixels()) {
      m.sum += v;
      m.sum_sq += static_cast<std::uint64_t>(v) * v;
    }
    m.n = image.pixels().size();
    per_record[i] = m;
  });

  std::map<std::string, Moments> per_class;
  for (std::size_t i = 0; i < per_record.size(); ++i) {
    Moments& m = per_class[manifest.records[i].fine_label];
    m.n += per_record[i].n;
    m.sum += per_record[i].sum;
    m.sum_sq += per_record[i].sum_sq;
  }
  std::map<std::string, double> out;
  for (const auto& [label, m] : per_class) {
    if (m.n == 0) {
      out[label] = 0.0;
      continue;
    }
    // n^2 var = n * sum_sq - sum^2, exact in 128 bits.
    const unsigned __int128 scaled = static_cast<unsigned __int128>(m.n) * m.sum_sq -
                                     static_cast<unsigned __int128>(m.sum) * m.sum;
    out[label] = std::sqrt(static_cast<double>(scaled)) / static_cast<double>(m.n);
  }
  return out;
}

ClassDistribution class_distribution(const DatasetManifest& manifest,
                                     const DatasetManifest* baseline) {
  ClassDistribution d;
  for (const auto& r : manifest.records) {
    ++d.per_class[r.fine_label];
    ++d.per_provenance[std::string(provenance_type(r.provenance))];
  }
  d.total = manifest.records.size();
  if (baseline != nullptr && !baseline->records.empty())
    d.expansion_ratio = static_cast<double>(d.total) / static_cast<double>(baseline->records.size());
  return d;
}

Eigen::VectorXd embed(const ImageBuffer& image) {
  const ImageBuffer rgb = to_rgb(image);
  Eigen::VectorXd e(3 * kEmbeddingGrid * kEmbeddingGrid);
  for (int c = 0; c < 3; ++c) {
    const PlaneMatrix<double> cells = box_resize<double>(plane_as<double>(rgb, c), kEmbeddingGrid, kEmbeddingGrid);
    e.segment(c * kEmbeddingGrid * kEmbeddingGrid, kEmbeddingGrid * kEmbeddingGrid) =
        Eigen::Map<const Eigen::VectorXd>(cells.data(), cells.size());
  }
  return e;
}

Separation separation_ratio(const std::vector<Eigen::VectorXd>& embeddings,
                            const std::vector<std::string>& labels) {
  if (embeddings.size() != labels.size())
    throw Error(ErrorKind::InvalidInput, "separation_ratio: embeddings and labels differ in length");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  if (members.size() < 2)
    throw Error(ErrorKind::InvalidInput, "separation_ratio needs at least two classes");
  for (const auto& [label, idx] : members)
    if (idx.size() < 2)
      throw Error(ErrorKind::InvalidInput,
                  "separation_ratio needs two samples per class; '" + label + "' has " +
                      std::to_string(idx.size()));

  if (std::all_of(embeddings.begin(), embeddings.end(),
                  [&](const Eigen::VectorXd& e) { return e == embeddings.front(); }))
    return {0.0, "all embeddings identical; separation ratio set to 0"};

  std::vector<Eigen::VectorXd> centroids;
  double within = 0.0;
  for (const auto& [label, idx] : members) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(embeddings.front().size());
    for (std::size_t i : idx) c += embeddings[i];
    c /= static_cast<double>(idx.size());
    for (std::size_t i : idx) within += (embeddings[i] - c).norm();
    centroids.push_back(std::move(c));
  }
  within /= static_cast<double>(embeddings.size());

  double between = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i)
    for (std::size_t j = i + 1; j < centroids.size(); ++j, ++pairs)
      between += (centroids[i] - centroids[j]).norm();
  between /= static_cast<double>(pairs);

  if (within == 0.0) return {kSeparationCap, "within-class spread is zero; ratio capped"};
  return {std::min(between / within, kSeparationCap), {}};
}

Separation separation_ratio(const DatasetManifest& manifest, const std::filesystem::path& store_root,
                            int workers) {
  const ContentStore store(store_root);
  std::vector<Eigen::VectorXd> embeddings(manifest.records.size());
  std::vector<std::string> labels(manifest.records.size());
  parallel_for(embeddings.size(), workers, [&](std::size_t i) {
    embeddings[i] = embed(store.load(manifest.records[i]));
    labels[i] = manifest.records[i].fine_label;
  });
  return separation_ratio(embeddings, labels);
}

}  // namespace flare
