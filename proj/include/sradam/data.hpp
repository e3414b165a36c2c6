#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sradam/model.hpp"
#include "sradam/rng.hpp"

namespace sradam {

/// Per-channel statistics used to standardize CIFAR pixels after the /255
/// scaling. The usual values for this corpus.
inline constexpr std::array<double, 3> kCifarMean{0.4914, 0.4822, 0.4465};
inline constexpr std::array<double, 3> kCifarStd{0.2470, 0.2435, 0.2616};

template <class T>
struct Dataset {
  Tensor<T> inputs;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
};

template <class T>
struct Batch {
  Tensor<T> inputs;
  std::vector<int> labels;
};

/// Additive pixel/feature noise level (standard deviation in normalized
/// units). 0 means clean.
struct NoiseSpec {
  double std = 0.0;
};

/// Label-consistent random feature vectors: class centers drawn once from
/// N(0, I), samples are center + N(0, 0.5^2 I). Labels cycle 0..K-1, so
/// class counts differ by at most one. Deterministic in seed.
template <class T>
Dataset<T> synth_vector_dataset(std::size_t n, int dim, int num_classes,
                                std::uint64_t seed);

/// Image-shaped analogue: per-class mean images built from a coarse 4x4
/// random pattern per channel, bilinearly upsampled, plus N(0, 0.5^2) pixel
/// noise. Statistics sit near zero mean / unit-ish scale, like standardized
/// camera data. Deterministic in seed.
template <class T>
Dataset<T> synth_image_dataset(std::size_t n, int channels, int h, int w,
                               int num_classes, std::uint64_t seed);

/// Reads the binary-batch layout: 10k records per file, each 1 label byte +
/// 3072 channel-major pixel bytes. Returns standardized (train, test).
/// Expects data_batch_{1..5}.bin and test_batch.bin under dir.
template <class T>
std::pair<Dataset<T>, Dataset<T>> load_cifar10(const std::filesystem::path& dir);

/// Same layout with 3074-byte records (coarse + fine label); keeps the fine
/// label. Expects train.bin and test.bin under dir.
template <class T>
std::pair<Dataset<T>, Dataset<T>> load_cifar100(const std::filesystem::path& dir);

/// First n_train rows become the train split, the rest the test split.
/// Label cycling keeps both splits balanced to within one sample per class.
template <class T>
std::pair<Dataset<T>, Dataset<T>> split_dataset(const Dataset<T>& all,
                                                std::size_t n_train);

/// Copies the batch with N(0, spec.std^2) added to every input value, drawn
/// in index order. std = 0 returns a bit-identical copy without consuming
/// randomness. Labels are never touched.
template <class T>
Batch<T> inject_noise(const Batch<T>& batch, const NoiseSpec& spec, Rng& rng);

/// Gathers rows by index (bounds-checked).
template <class T>
Batch<T> take_batch(const Dataset<T>& data, std::span<const std::size_t> idx);

/// Fisher-Yates permutation of [0, n) driven by rng.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace sradam
