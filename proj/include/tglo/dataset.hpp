#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tglo {

/// Labelled samples stored column-wise: features.col(i) belongs to labels[i].
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int n_classes = 2;

  int size() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(features.rows()); }
  auto sample(int i) const { return features.col(i); }

  /// Throws std::invalid_argument unless nonempty, consistently shaped and
  /// labelled within [0, n_classes).
  void validate() const;

  /// (min, max) over every feature value.
  std::pair<double, double> feature_range() const;

  Dataset subset(const std::vector<int>& indices) const;
};

struct DatasetSplit {
  Dataset train;
  Dataset validation;
};

/// Seeded shuffle followed by a train/validation cut.
DatasetSplit split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed);

/// Isotropic Gaussian clusters, `spread` standard deviation, around fixed
/// means: unit basis vectors when dim >= n_classes, otherwise vertices of a
/// regular polygon (in the first two coordinates) with the same edge length
/// for n_classes == 2.
Dataset make_blobs(int n_classes, int samples_per_class, int dim, double spread, std::uint64_t seed);

/// Malformed IDX input; offset() is the byte position where parsing failed.
class IdxFormatError : public std::runtime_error {
 public:
  IdxFormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image/label pair. Pixels are scaled to [0, 1]; at most
/// `limit` samples are kept (limit <= 0 keeps all). n_classes is max label + 1
/// (at least 2).
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int limit = 0);

}  // namespace tglo
