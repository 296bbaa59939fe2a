#include "tglo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

namespace tglo {

void Dataset::validate() const {
  if (labels.empty()) throw std::invalid_argument("dataset is empty");
  if (features.cols() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("feature and label counts differ");
  if (n_classes < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw std::invalid_argument("label out of range: " + std::to_string(y));
}

std::pair<double, double> Dataset::feature_range() const {
  return {features.minCoeff(), features.maxCoeff()};
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
  Dataset out;
  out.n_classes = n_classes;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.features.col(static_cast<Eigen::Index>(i)) = features.col(indices[i]);
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

DatasetSplit split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed) {
  data.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::ptrdiff_t>(std::lround(train_fraction * data.size()));
  if (cut <= 0 || cut >= data.size()) throw std::invalid_argument("dataset too small to split");
  return {data.subset({order.begin(), order.begin() + cut}), data.subset({order.begin() + cut, order.end()})};
}

Dataset make_blobs(int n_classes, int samples_per_class, int dim, double spread, std::uint64_t seed) {
  if (n_classes < 2 || samples_per_class <= 0 || dim <= 0 || spread < 0.0)
    throw std::invalid_argument("make_blobs: invalid arguments");

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(dim, n_classes);
  if (dim >= n_classes) {
    means.topLeftCorner(n_classes, n_classes).setIdentity();
  } else if (dim >= 2) {
    // Regular polygon with circumradius 1/sqrt(2).
    for (int c = 0; c < n_classes; ++c) {
      const double angle = 2.0 * std::numbers::pi * c / n_classes;
      means(0, c) = std::cos(angle) / std::numbers::sqrt2;
      means(1, c) = std::sin(angle) / std::numbers::sqrt2;
    }
  } else {
    for (int c = 0; c < n_classes; ++c) means(0, c) = std::numbers::sqrt2 * c;
  }

  Dataset data;
  data.n_classes = n_classes;
  data.features.resize(dim, static_cast<Eigen::Index>(n_classes) * samples_per_class);
  data.labels.reserve(static_cast<std::size_t>(n_classes) * samples_per_class);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::Index col = 0;
  for (int i = 0; i < samples_per_class; ++i) {
    for (int c = 0; c < n_classes; ++c, ++col) {
      for (int d = 0; d < dim; ++d) data.features(d, col) = means(d, c) + spread * noise(rng);
      data.labels.push_back(c);
    }
  }
  return data;
}

namespace {

class IdxReader {
 public:
  explicit IdxReader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw IdxFormatError("cannot open " + path_, 0);
  }

  std::uint32_t read_u32() {
    unsigned char b[4];
    read(b, 4);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
  }

  void read(unsigned char* dst, std::size_t count) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
    const auto got = static_cast<std::uint64_t>(in_.gcount());
    if (got != count) throw IdxFormatError(path_ + ": truncated file", offset_ + got);
    offset_ += count;
  }

  std::uint64_t offset() const { return offset_; }
  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::uint64_t offset_ = 0;
};

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int limit) {
  IdxReader img(images);
  IdxReader lab(labels);

  if (const auto magic = img.read_u32(); magic != kIdxImageMagic)
    throw IdxFormatError(img.path() + ": bad image magic " + std::to_string(magic), 0);
  if (const auto magic = lab.read_u32(); magic != kIdxLabelMagic)
    throw IdxFormatError(lab.path() + ": bad label magic " + std::to_string(magic), 0);

  const std::uint32_t image_count = img.read_u32();
  const std::uint32_t rows = img.read_u32();
  const std::uint32_t cols = img.read_u32();
  const std::uint32_t label_count = lab.read_u32();
  if (image_count != label_count)
    throw IdxFormatError("image count " + std::to_string(image_count) + " differs from label count " +
                             std::to_string(label_count),
                         lab.offset() - 4);

  std::uint32_t count = image_count;
  if (limit > 0) count = std::min<std::uint32_t>(count, static_cast<std::uint32_t>(limit));
  const std::size_t pixels = std::size_t(rows) * cols;
  if (count > 0 && pixels == 0) throw IdxFormatError(img.path() + ": zero-sized images", 8);

  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(pixels), count);
  data.labels.resize(count);
  std::vector<unsigned char> buffer(pixels);
  int max_label = 1;
  for (std::uint32_t i = 0; i < count; ++i) {
    img.read(buffer.data(), pixels);
    for (std::size_t p = 0; p < pixels; ++p) data.features(static_cast<Eigen::Index>(p), i) = buffer[p] / 255.0;
    unsigned char y;
    lab.read(&y, 1);
    data.labels[i] = y;
    max_label = std::max<int>(max_label, y);
  }
  data.n_classes = max_label + 1;
  return data;
}

}  // namespace tglo
