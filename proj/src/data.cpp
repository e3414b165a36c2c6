#include "sradam/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sradam {

namespace {

constexpr int kCifarSide = 32;
constexpr int kCifarChannels = 3;
constexpr std::size_t kCifarPixels = kCifarChannels * kCifarSide * kCifarSide;

template <class T>
void read_cifar_file(const std::filesystem::path& path, int label_bytes,
                     int keep_label_at, int num_classes, Dataset<T>& out,
                     std::size_t& cursor) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const std::size_t record = static_cast<std::size_t>(label_bytes) + kCifarPixels;
  std::vector<unsigned char> buf(record);
  while (in.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(record))) {
    if (cursor >= out.size()) {
      throw std::runtime_error("unexpected extra records in " + path.string());
    }
    const int label = buf[static_cast<std::size_t>(keep_label_at)];
    if (label < 0 || label >= num_classes) {
      throw std::runtime_error("label out of range in " + path.string());
    }
    out.labels[cursor] = label;
    T* dst = out.inputs.row(static_cast<int>(cursor));
    for (int c = 0; c < kCifarChannels; ++c) {
      const double mu = kCifarMean[static_cast<std::size_t>(c)];
      const double sd = kCifarStd[static_cast<std::size_t>(c)];
      const std::size_t plane = static_cast<std::size_t>(c) * kCifarSide * kCifarSide;
      for (std::size_t j = 0; j < static_cast<std::size_t>(kCifarSide) * kCifarSide;
           ++j) {
        const double px =
            buf[static_cast<std::size_t>(label_bytes) + plane + j] / 255.0;
        dst[plane + j] = static_cast<T>((px - mu) / sd);
      }
    }
    ++cursor;
  }
  if (in.gcount() != 0) {
    throw std::runtime_error("truncated record in " + path.string());
  }
}

template <class T>
Dataset<T> make_image_dataset(std::size_t n, int c, int h, int w, int classes) {
  Dataset<T> d;
  d.inputs = Tensor<T>::image(static_cast<int>(n), c, h, w);
  d.labels.assign(n, 0);
  d.num_classes = classes;
  return d;
}

}  // namespace

template <class T>
Dataset<T> synth_vector_dataset(std::size_t n, int dim, int num_classes,
                                std::uint64_t seed) {
  if (n == 0 || dim < 1 || num_classes < 2) {
    throw std::invalid_argument("synth_vector_dataset: bad arguments");
  }
  Rng root(seed);
  Rng center_rng = root.child("centers");
  Rng noise_rng = root.child("noise");

  std::vector<double> centers(static_cast<std::size_t>(num_classes) * dim);
  for (auto& x : centers) x = center_rng.normal();

  Dataset<T> d;
  d.inputs = Tensor<T>::matrix(static_cast<int>(n), dim);
  d.labels.resize(n);
  d.num_classes = num_classes;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(num_classes));
    d.labels[i] = y;
    const double* mu = centers.data() + static_cast<std::size_t>(y) * dim;
    T* row = d.inputs.row(static_cast<int>(i));
    for (int j = 0; j < dim; ++j) {
      row[j] = static_cast<T>(mu[j] + 0.5 * noise_rng.normal());
    }
  }
  return d;
}

template <class T>
Dataset<T> synth_image_dataset(std::size_t n, int channels, int h, int w,
                               int num_classes, std::uint64_t seed) {
  if (n == 0 || channels < 1 || h < 2 || w < 2 || num_classes < 2) {
    throw std::invalid_argument("synth_image_dataset: bad arguments");
  }
  Rng root(seed);
  Rng pattern_rng = root.child("patterns");
  Rng noise_rng = root.child("noise");

  // Class templates: coarse 4x4 per-channel patterns, bilinearly upsampled.
  constexpr int kCoarse = 4;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<double> templates(static_cast<std::size_t>(num_classes) * channels *
                                plane);
  std::vector<double> coarse(kCoarse * kCoarse);
  for (int cls = 0; cls < num_classes; ++cls) {
    for (int c = 0; c < channels; ++c) {
      for (auto& x : coarse) x = pattern_rng.normal();
      double* tpl = templates.data() +
                    (static_cast<std::size_t>(cls) * channels + c) * plane;
      for (int y = 0; y < h; ++y) {
        const double fy = static_cast<double>(y) / (h - 1) * (kCoarse - 1);
        const int y0 = std::min(static_cast<int>(fy), kCoarse - 2);
        const double ty = fy - y0;
        for (int x = 0; x < w; ++x) {
          const double fx = static_cast<double>(x) / (w - 1) * (kCoarse - 1);
          const int x0 = std::min(static_cast<int>(fx), kCoarse - 2);
          const double tx = fx - x0;
          const double v00 = coarse[static_cast<std::size_t>(y0) * kCoarse + x0];
          const double v01 = coarse[static_cast<std::size_t>(y0) * kCoarse + x0 + 1];
          const double v10 = coarse[static_cast<std::size_t>(y0 + 1) * kCoarse + x0];
          const double v11 =
              coarse[static_cast<std::size_t>(y0 + 1) * kCoarse + x0 + 1];
          tpl[static_cast<std::size_t>(y) * w + x] =
              (1 - ty) * ((1 - tx) * v00 + tx * v01) +
              ty * ((1 - tx) * v10 + tx * v11);
        }
      }
    }
  }

  Dataset<T> d = make_image_dataset<T>(n, channels, h, w, num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(num_classes));
    d.labels[i] = y;
    const double* tpl =
        templates.data() + static_cast<std::size_t>(y) * channels * plane;
    T* row = d.inputs.row(static_cast<int>(i));
    for (std::size_t j = 0; j < static_cast<std::size_t>(channels) * plane; ++j) {
      row[j] = static_cast<T>(tpl[j] + 0.5 * noise_rng.normal());
    }
  }
  return d;
}

template <class T>
std::pair<Dataset<T>, Dataset<T>> load_cifar10(const std::filesystem::path& dir) {
  Dataset<T> train = make_image_dataset<T>(50000, 3, kCifarSide, kCifarSide, 10);
  Dataset<T> test = make_image_dataset<T>(10000, 3, kCifarSide, kCifarSide, 10);
  std::size_t cursor = 0;
  for (int b = 1; b <= 5; ++b) {
    read_cifar_file(dir / ("data_batch_" + std::to_string(b) + ".bin"), 1, 0, 10,
                    train, cursor);
  }
  if (cursor != train.size()) {
    throw std::runtime_error("cifar10: expected 50000 training records, got " +
                             std::to_string(cursor));
  }
  cursor = 0;
  read_cifar_file(dir / "test_batch.bin", 1, 0, 10, test, cursor);
  if (cursor != test.size()) {
    throw std::runtime_error("cifar10: expected 10000 test records, got " +
                             std::to_string(cursor));
  }
  return {std::move(train), std::move(test)};
}

template <class T>
std::pair<Dataset<T>, Dataset<T>> load_cifar100(const std::filesystem::path& dir) {
  Dataset<T> train = make_image_dataset<T>(50000, 3, kCifarSide, kCifarSide, 100);
  Dataset<T> test = make_image_dataset<T>(10000, 3, kCifarSide, kCifarSide, 100);
  std::size_t cursor = 0;
  // Record layout: coarse label, fine label, pixels. Keep the fine label.
  read_cifar_file(dir / "train.bin", 2, 1, 100, train, cursor);
  if (cursor != train.size()) {
    throw std::runtime_error("cifar100: expected 50000 training records, got " +
                             std::to_string(cursor));
  }
  cursor = 0;
  read_cifar_file(dir / "test.bin", 2, 1, 100, test, cursor);
  if (cursor != test.size()) {
    throw std::runtime_error("cifar100: expected 10000 test records, got " +
                             std::to_string(cursor));
  }
  return {std::move(train), std::move(test)};
}

template <class T>
std::pair<Dataset<T>, Dataset<T>> split_dataset(const Dataset<T>& all,
                                                std::size_t n_train) {
  if (n_train == 0 || n_train >= all.size()) {
    throw std::invalid_argument("split_dataset: n_train must leave both splits non-empty");
  }
  auto slice = [&](std::size_t begin, std::size_t count) {
    Dataset<T> d;
    d.inputs = Tensor<T>::image(static_cast<int>(count), all.inputs.c,
                                all.inputs.h, all.inputs.w);
    d.labels.assign(all.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    all.labels.begin() + static_cast<std::ptrdiff_t>(begin + count));
    d.num_classes = all.num_classes;
    const std::size_t row_len = static_cast<std::size_t>(all.inputs.features());
    std::copy_n(all.inputs.row(static_cast<int>(begin)), count * row_len,
                d.inputs.data.data());
    return d;
  };
  return {slice(0, n_train), slice(n_train, all.size() - n_train)};
}

template <class T>
Batch<T> inject_noise(const Batch<T>& batch, const NoiseSpec& spec, Rng& rng) {
  if (!(spec.std >= 0.0) || !std::isfinite(spec.std)) {
    throw std::invalid_argument("inject_noise: std must be finite and >= 0");
  }
  Batch<T> out = batch;
  if (spec.std == 0.0) {
    return out;
  }
  for (auto& x : out.inputs.data) {
    x = static_cast<T>(static_cast<double>(x) + spec.std * rng.normal());
  }
  return out;
}

template <class T>
Batch<T> take_batch(const Dataset<T>& data, std::span<const std::size_t> idx) {
  if (idx.empty()) {
    throw std::invalid_argument("take_batch: empty index set");
  }
  Batch<T> b;
  b.inputs = Tensor<T>::image(static_cast<int>(idx.size()), data.inputs.c,
                              data.inputs.h, data.inputs.w);
  b.labels.resize(idx.size());
  const std::size_t row_len = static_cast<std::size_t>(data.inputs.features());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= data.size()) {
      throw std::out_of_range("take_batch: index out of range");
    }
    std::copy_n(data.inputs.row(static_cast<int>(idx[i])), row_len,
                b.inputs.row(static_cast<int>(i)));
    b.labels[i] = data.labels[idx[i]];
  }
  return b;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    // uniform draw in [0, i): rejection-free via 53-bit uniform * i
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(idx[i - 1], idx[j < i ? j : i - 1]);
  }
  return idx;
}

template Dataset<float> synth_vector_dataset<float>(std::size_t, int, int,
                                                    std::uint64_t);
template Dataset<double> synth_vector_dataset<double>(std::size_t, int, int,
                                                      std::uint64_t);
template Dataset<float> synth_image_dataset<float>(std::size_t, int, int, int,
                                                   int, std::uint64_t);
template Dataset<double> synth_image_dataset<double>(std::size_t, int, int, int,
                                                     int, std::uint64_t);
template std::pair<Dataset<float>, Dataset<float>> load_cifar10<float>(
    const std::filesystem::path&);
template std::pair<Dataset<double>, Dataset<double>> load_cifar10<double>(
    const std::filesystem::path&);
template std::pair<Dataset<float>, Dataset<float>> load_cifar100<float>(
    const std::filesystem::path&);
template std::pair<Dataset<double>, Dataset<double>> load_cifar100<double>(
    const std::filesystem::path&);
template std::pair<Dataset<float>, Dataset<float>> split_dataset<float>(
    const Dataset<float>&, std::size_t);
template std::pair<Dataset<double>, Dataset<double>> split_dataset<double>(
    const Dataset<double>&, std::size_t);
template Batch<float> inject_noise<float>(const Batch<float>&, const NoiseSpec&,
                                          Rng&);
template Batch<double> inject_noise<double>(const Batch<double>&,
                                            const NoiseSpec&, Rng&);
template Batch<float> take_batch<float>(const Dataset<float>&,
                                        std::span<const std::size_t>);
template Batch<double> take_batch<double>(const Dataset<double>&,
                                          std::span<const std::size_t>);

}  // namespace sradam
