#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zonn/types.hpp"

namespace zonn {

enum class Split { train, test };

/// n inputs in [0,1]^d stored as the columns of a d x n matrix, with
/// integer labels in [0, num_classes).
struct LabeledDataset {
  Matrix inputs;
  std::vector<int> labels;
  int num_classes = 0;
  Split split = Split::train;

  Eigen::Index size() const { return inputs.cols(); }
  Eigen::Index dim() const { return inputs.rows(); }
  auto input(Eigen::Index i) const { return inputs.col(i); }

  /// Throws a data error unless every invariant holds.
  void validate() const;

  /// Dataset made of the given columns, in order.
  LabeledDataset subset(const std::vector<Eigen::Index>& indices) const;
};

/// Reads an IDX image/label pair (MNIST layout). Pixels are scaled by 1/255
/// and each image is flattened row-major. `limit` keeps the first n items.
LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::optional<std::size_t> limit = std::nullopt, int num_classes = 10,
                        Split split = Split::train);

/// Writes a dataset as an IDX pair with rows x cols images. Pixels are
/// rounded to the nearest multiple of 1/255.
void write_idx(const LabeledDataset& data, std::uint32_t rows, std::uint32_t cols,
               const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Reads rows of d feature columns followed by an integer label. Features
/// must already lie in [0, 1].
LabeledDataset load_csv(const std::filesystem::path& path, int num_classes, Split split = Split::train);

void write_csv(const LabeledDataset& data, const std::filesystem::path& path);

struct BlobsRecipe {
  std::size_t n = 2000;
  std::vector<std::array<double, 2>> centers{{0.3, 0.3}, {0.7, 0.7}};
  double spread = 0.05;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian clouds in [0,1]^2, point i drawn around center
/// i mod m with label i mod m, clipped to the unit square.
LabeledDataset make_blobs(const BlobsRecipe& recipe, Split split = Split::train);

}  // namespace zonn
