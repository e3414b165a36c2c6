#include "sradam/model.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace sradam {

namespace {

template <class T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapRM = Eigen::Map<MatRM<T>>;
template <class T>
using CMapRM = Eigen::Map<const MatRM<T>>;

struct CHW {
  int c = 0, h = 1, w = 1;
  int features() const { return c * h * w; }
};

int conv_out(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Walks one layer's output shape, throwing on any mismatch.
CHW layer_out_shape(const LayerSpec& layer, CHW in, const std::string& model_id) {
  auto bad = [&](const std::string& why) {
    throw std::invalid_argument("ModelSpec " + model_id + ": " + why);
  };
  CHW out = in;
  if (const auto* cs = std::get_if<ConvSpec>(&layer)) {
    if (cs->in_ch != in.c) bad("conv in_ch mismatch");
    if (cs->k < 1 || cs->stride < 1 || cs->pad < 0 || cs->out_ch < 1)
      bad("bad conv geometry");
    out.c = cs->out_ch;
    out.h = conv_out(in.h, cs->k, cs->stride, cs->pad);
    out.w = conv_out(in.w, cs->k, cs->stride, cs->pad);
    if (out.h < 1 || out.w < 1) bad("conv output collapsed");
  } else if (std::holds_alternative<MaxPoolSpec>(layer)) {
    const auto& ps = std::get<MaxPoolSpec>(layer);
    if (ps.k < 1 || ps.stride < 1) bad("bad pool geometry");
    out.h = (in.h - ps.k) / ps.stride + 1;
    out.w = (in.w - ps.k) / ps.stride + 1;
    if (in.h < ps.k || in.w < ps.k) bad("pool window larger than input");
  } else if (std::holds_alternative<FlattenSpec>(layer)) {
    out = CHW{in.features(), 1, 1};
  } else if (const auto* ds = std::get_if<DenseSpec>(&layer)) {
    if (in.h != 1 || in.w != 1) bad("dense needs flattened input");
    if (ds->in != in.c) bad("dense in mismatch");
    if (ds->out < 1) bad("dense out must be positive");
    out = CHW{ds->out, 1, 1};
  } else if (const auto* dr = std::get_if<DropoutSpec>(&layer)) {
    if (!(dr->rate >= 0.0 && dr->rate < 1.0)) bad("dropout rate outside [0, 1)");
  }
  return out;
}

}  // namespace

ModelSpec ModelSpec::simple_cnn(int in_ch, int hw, int classes) {
  if (hw % 4 != 0) {
    throw std::invalid_argument("simple_cnn: input side must be divisible by 4");
  }
  ModelSpec spec;
  spec.id = "simple_cnn";
  spec.in_ch = in_ch;
  spec.in_h = hw;
  spec.in_w = hw;
  spec.num_classes = classes;
  const int flat = 64 * (hw / 4) * (hw / 4);
  spec.layers = {
      ConvSpec{in_ch, 32, 3, 1, 1}, ReluSpec{}, MaxPoolSpec{2, 2},
      ConvSpec{32, 64, 3, 1, 1},    ReluSpec{}, MaxPoolSpec{2, 2},
      FlattenSpec{},
      DenseSpec{flat, 128},         ReluSpec{}, DropoutSpec{0.2},
      DenseSpec{128, classes},
  };
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::mlp(int in_dim, int hidden, int classes) {
  ModelSpec spec;
  spec.id = "mlp";
  spec.in_ch = in_dim;
  spec.num_classes = classes;
  spec.layers = {DenseSpec{in_dim, hidden}, ReluSpec{},
                 DenseSpec{hidden, classes}};
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::logistic(int in_dim, int classes) {
  ModelSpec spec;
  spec.id = "logistic";
  spec.in_ch = in_dim;
  spec.num_classes = classes;
  spec.layers = {DenseSpec{in_dim, classes}};
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  if (in_ch < 1 || in_h < 1 || in_w < 1) {
    throw std::invalid_argument("ModelSpec " + id + ": bad input shape");
  }
  if (num_classes < 2) {
    throw std::invalid_argument("ModelSpec " + id + ": need >= 2 classes");
  }
  if (layers.empty()) {
    throw std::invalid_argument("ModelSpec " + id + ": no layers");
  }
  CHW shape{in_ch, in_h, in_w};
  for (const auto& layer : layers) {
    shape = layer_out_shape(layer, shape, id);
  }
  if (shape.c != num_classes || shape.h != 1 || shape.w != 1) {
    throw std::invalid_argument("ModelSpec " + id +
                                ": head does not emit num_classes logits");
  }
}

std::vector<ParamGroup> ModelSpec::param_groups() const {
  std::vector<ParamGroup> groups;
  int conv_idx = 0, fc_idx = 0;
  for (const auto& layer : layers) {
    if (const auto* cs = std::get_if<ConvSpec>(&layer)) {
      ++conv_idx;
      const std::string base = "conv" + std::to_string(conv_idx);
      groups.emplace_back(base + ".weight",
                          static_cast<std::size_t>(cs->out_ch) * cs->in_ch *
                              cs->k * cs->k,
                          GroupKind::ConvWeight);
      groups.emplace_back(base + ".bias", static_cast<std::size_t>(cs->out_ch),
                          GroupKind::Bias);
    } else if (const auto* ds = std::get_if<DenseSpec>(&layer)) {
      ++fc_idx;
      const std::string base = "fc" + std::to_string(fc_idx);
      groups.emplace_back(base + ".weight",
                          static_cast<std::size_t>(ds->out) * ds->in,
                          GroupKind::DenseWeight);
      groups.emplace_back(base + ".bias", static_cast<std::size_t>(ds->out),
                          GroupKind::Bias);
    }
  }
  return groups;
}

std::size_t ModelSpec::param_count() const {
  std::size_t total = 0;
  for (const auto& g : param_groups()) total += g.dim;
  return total;
}

std::vector<ParamVector> init_params(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<ParamVector> params;
  for (const auto& layer : spec.layers) {
    int fan_in = 0, weight_n = 0, bias_n = 0;
    if (const auto* cs = std::get_if<ConvSpec>(&layer)) {
      fan_in = cs->in_ch * cs->k * cs->k;
      weight_n = cs->out_ch * fan_in;
      bias_n = cs->out_ch;
    } else if (const auto* ds = std::get_if<DenseSpec>(&layer)) {
      fan_in = ds->in;
      weight_n = ds->out * ds->in;
      bias_n = ds->out;
    } else {
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> w(weight_n);
    for (auto& x : w) x = bound * (2.0 * rng.uniform() - 1.0);
    params.emplace_back(std::move(w));
    params.push_back(ParamVector::zeros(static_cast<std::size_t>(bias_n)));
  }
  return params;
}

template <class T>
Params<T> cast_params(std::span<const ParamVector> params) {
  Params<T> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out[i].resize(params[i].size());
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      out[i][j] = static_cast<T>(params[i][j]);
    }
  }
  return out;
}

namespace {

// ---- conv kernels -------------------------------------------------------

// Column block layout: row r = (ci * k + kh) * k + kw, column
// j = (local_img * OH + oh) * OW + ow. Stride-1 rows reduce to shifted
// contiguous copies of the input rows.
template <class T>
void im2col(const Tensor<T>& x, int img0, int m_imgs, const ConvSpec& cs,
            int OH, int OW, std::vector<T>& cols) {
  const int K2 = cs.in_ch * cs.k * cs.k;
  const std::size_t M = static_cast<std::size_t>(m_imgs) * OH * OW;
  cols.assign(static_cast<std::size_t>(K2) * M, T(0));

  for (int ci = 0; ci < cs.in_ch; ++ci) {
    for (int kh = 0; kh < cs.k; ++kh) {
      for (int kw = 0; kw < cs.k; ++kw) {
        const int r = (ci * cs.k + kh) * cs.k + kw;
        T* crow = cols.data() + static_cast<std::size_t>(r) * M;
        for (int li = 0; li < m_imgs; ++li) {
          const T* xi = x.row(img0 + li) +
                        static_cast<std::size_t>(ci) * x.h * x.w;
          for (int oh = 0; oh < OH; ++oh) {
            const int ih = oh * cs.stride - cs.pad + kh;
            if (ih < 0 || ih >= x.h) continue;
            T* dst = crow + (static_cast<std::size_t>(li) * OH + oh) * OW;
            const T* src = xi + static_cast<std::size_t>(ih) * x.w;
            if (cs.stride == 1) {
              const int shift = kw - cs.pad;  // iw = ow + shift
              const int ow_lo = std::max(0, -shift);
              const int ow_hi = std::min(OW, x.w - shift);
              if (ow_lo < ow_hi) {
                std::copy(src + ow_lo + shift, src + ow_hi + shift, dst + ow_lo);
              }
            } else {
              for (int ow = 0; ow < OW; ++ow) {
                const int iw = ow * cs.stride - cs.pad + kw;
                if (iw >= 0 && iw < x.w) dst[ow] = src[iw];
              }
            }
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-add column gradients back onto the image.
template <class T>
void col2im_add(const std::vector<T>& cols, int img0, int m_imgs,
                const ConvSpec& cs, int OH, int OW, Tensor<T>& dx) {
  const std::size_t M = static_cast<std::size_t>(m_imgs) * OH * OW;
  for (int ci = 0; ci < cs.in_ch; ++ci) {
    for (int kh = 0; kh < cs.k; ++kh) {
      for (int kw = 0; kw < cs.k; ++kw) {
        const int r = (ci * cs.k + kh) * cs.k + kw;
        const T* crow = cols.data() + static_cast<std::size_t>(r) * M;
        for (int li = 0; li < m_imgs; ++li) {
          T* xi = dx.row(img0 + li) + static_cast<std::size_t>(ci) * dx.h * dx.w;
          for (int oh = 0; oh < OH; ++oh) {
            const int ih = oh * cs.stride - cs.pad + kh;
            if (ih < 0 || ih >= dx.h) continue;
            const T* src = crow + (static_cast<std::size_t>(li) * OH + oh) * OW;
            T* dst = xi + static_cast<std::size_t>(ih) * dx.w;
            if (cs.stride == 1) {
              const int shift = kw - cs.pad;
              const int ow_lo = std::max(0, -shift);
              const int ow_hi = std::min(OW, dx.w - shift);
              for (int ow = ow_lo; ow < ow_hi; ++ow) dst[ow + shift] += src[ow];
            } else {
              for (int ow = 0; ow < OW; ++ow) {
                const int iw = ow * cs.stride - cs.pad + kw;
                if (iw >= 0 && iw < dx.w) dst[iw] += src[ow];
              }
            }
          }
        }
      }
    }
  }
}

int conv_chunk_images(int OH, int OW) {
  return std::max(1, 16384 / std::max(1, OH * OW));
}

template <class T>
void conv_forward(const ConvSpec& cs, const std::vector<T>& weight,
                  const std::vector<T>& bias, const Tensor<T>& x,
                  Tensor<T>& y) {
  const int OH = y.h, OW = y.w;
  const int K2 = cs.in_ch * cs.k * cs.k;
  const int chunk = conv_chunk_images(OH, OW);
  std::vector<T> cols;
  std::vector<T> ybuf;

  CMapRM<T> W(weight.data(), cs.out_ch, K2);
  for (int img0 = 0; img0 < x.n; img0 += chunk) {
    const int m_imgs = std::min(chunk, x.n - img0);
    const std::size_t M = static_cast<std::size_t>(m_imgs) * OH * OW;
    im2col(x, img0, m_imgs, cs, OH, OW, cols);
    ybuf.resize(static_cast<std::size_t>(cs.out_ch) * M);
    MapRM<T> Y(ybuf.data(), cs.out_ch, static_cast<Eigen::Index>(M));
    CMapRM<T> C(cols.data(), K2, static_cast<Eigen::Index>(M));
    Y.noalias() = W * C;
    const std::size_t plane = static_cast<std::size_t>(OH) * OW;
    for (int li = 0; li < m_imgs; ++li) {
      for (int oc = 0; oc < cs.out_ch; ++oc) {
        const T* src = ybuf.data() + static_cast<std::size_t>(oc) * M +
                       static_cast<std::size_t>(li) * plane;
        T* dst = y.row(img0 + li) + static_cast<std::size_t>(oc) * plane;
        const T b = bias[static_cast<std::size_t>(oc)];
        for (std::size_t j = 0; j < plane; ++j) dst[j] = src[j] + b;
      }
    }
  }
}

template <class T>
void conv_backward(const ConvSpec& cs, const std::vector<T>& weight,
                   const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx,
                   std::vector<T>& dweight, std::vector<T>& dbias) {
  const int OH = dy.h, OW = dy.w;
  const int K2 = cs.in_ch * cs.k * cs.k;
  const int chunk = conv_chunk_images(OH, OW);
  std::vector<T> cols, dybuf, dcols;

  dweight.assign(weight.size(), T(0));
  dbias.assign(static_cast<std::size_t>(cs.out_ch), T(0));
  dx.data.assign(dx.size(), T(0));

  CMapRM<T> W(weight.data(), cs.out_ch, K2);
  MapRM<T> dW(dweight.data(), cs.out_ch, K2);

  const std::size_t plane = static_cast<std::size_t>(OH) * OW;
  for (int img0 = 0; img0 < x.n; img0 += chunk) {
    const int m_imgs = std::min(chunk, x.n - img0);
    const std::size_t M = static_cast<std::size_t>(m_imgs) * OH * OW;

    // Gather dY into (out_ch x M) to match the column block.
    dybuf.resize(static_cast<std::size_t>(cs.out_ch) * M);
    for (int li = 0; li < m_imgs; ++li) {
      for (int oc = 0; oc < cs.out_ch; ++oc) {
        const T* src = dy.row(img0 + li) + static_cast<std::size_t>(oc) * plane;
        T* dst = dybuf.data() + static_cast<std::size_t>(oc) * M +
                 static_cast<std::size_t>(li) * plane;
        std::memcpy(dst, src, plane * sizeof(T));
      }
    }
    MapRM<T> dY(dybuf.data(), cs.out_ch, static_cast<Eigen::Index>(M));

    im2col(x, img0, m_imgs, cs, OH, OW, cols);
    CMapRM<T> C(cols.data(), K2, static_cast<Eigen::Index>(M));
    dW.noalias() += dY * C.transpose();

    for (int oc = 0; oc < cs.out_ch; ++oc) {
      T acc = T(0);
      const T* row = dybuf.data() + static_cast<std::size_t>(oc) * M;
      for (std::size_t j = 0; j < M; ++j) acc += row[j];
      dbias[static_cast<std::size_t>(oc)] += acc;
    }

    dcols.resize(static_cast<std::size_t>(K2) * M);
    MapRM<T> dC(dcols.data(), K2, static_cast<Eigen::Index>(M));
    dC.noalias() = W.transpose() * dY;
    col2im_add(dcols, img0, m_imgs, cs, OH, OW, dx);
  }
}

// ---- dense kernels ------------------------------------------------------

template <class T>
void dense_forward(const DenseSpec& ds, const std::vector<T>& weight,
                   const std::vector<T>& bias, const Tensor<T>& x,
                   Tensor<T>& y) {
  CMapRM<T> X(x.data.data(), x.n, ds.in);
  CMapRM<T> W(weight.data(), ds.out, ds.in);
  MapRM<T> Y(y.data.data(), y.n, ds.out);
  Y.noalias() = X * W.transpose();
  for (int i = 0; i < y.n; ++i) {
    T* row = y.row(i);
    for (int j = 0; j < ds.out; ++j) row[j] += bias[static_cast<std::size_t>(j)];
  }
}

template <class T>
void dense_backward(const DenseSpec& ds, const std::vector<T>& weight,
                    const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx,
                    std::vector<T>& dweight, std::vector<T>& dbias) {
  dweight.assign(weight.size(), T(0));
  dbias.assign(static_cast<std::size_t>(ds.out), T(0));
  CMapRM<T> X(x.data.data(), x.n, ds.in);
  CMapRM<T> W(weight.data(), ds.out, ds.in);
  CMapRM<T> dY(dy.data.data(), dy.n, ds.out);
  MapRM<T> dW(dweight.data(), ds.out, ds.in);
  MapRM<T> dX(dx.data.data(), dx.n, ds.in);
  dW.noalias() = dY.transpose() * X;
  dX.noalias() = dY * W;
  for (int i = 0; i < dy.n; ++i) {
    const T* row = dy.row(i);
    for (int j = 0; j < ds.out; ++j) dbias[static_cast<std::size_t>(j)] += row[j];
  }
}

// ---- pooling / relu / dropout -------------------------------------------

template <class T>
void maxpool_forward(const MaxPoolSpec& ps, const Tensor<T>& x, Tensor<T>& y,
                     std::vector<std::int32_t>& argmax) {
  if (x.size() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw std::invalid_argument("maxpool: tensor too large for 32-bit argmax");
  }
  argmax.resize(y.size());
  std::size_t oi = 0;
  for (int img = 0; img < x.n; ++img) {
    for (int ci = 0; ci < x.c; ++ci) {
      const T* xp = x.row(img) + static_cast<std::size_t>(ci) * x.h * x.w;
      const std::size_t base =
          (static_cast<std::size_t>(img) * x.c + ci) * x.h * x.w;
      for (int oh = 0; oh < y.h; ++oh) {
        for (int ow = 0; ow < y.w; ++ow) {
          const int h0 = oh * ps.stride;
          const int w0 = ow * ps.stride;
          T best = xp[static_cast<std::size_t>(h0) * x.w + w0];
          int best_off = h0 * x.w + w0;
          for (int dh = 0; dh < ps.k; ++dh) {
            for (int dw = 0; dw < ps.k; ++dw) {
              const int off = (h0 + dh) * x.w + (w0 + dw);
              const T val = xp[static_cast<std::size_t>(off)];
              if (val > best) {
                best = val;
                best_off = off;
              }
            }
          }
          y.data[oi] = best;
          argmax[oi] = static_cast<std::int32_t>(base + best_off);
          ++oi;
        }
      }
    }
  }
}

template <class T>
void maxpool_backward(const std::vector<std::int32_t>& argmax,
                      const Tensor<T>& dy, Tensor<T>& dx) {
  dx.data.assign(dx.size(), T(0));
  for (std::size_t i = 0; i < dy.size(); ++i) {
    dx.data[static_cast<std::size_t>(argmax[i])] += dy.data[i];
  }
}

template <class T>
void relu_forward(const Tensor<T>& x, Tensor<T>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
  }
}

template <class T>
void relu_backward(const Tensor<T>& y, const Tensor<T>& dy, Tensor<T>& dx) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    dx.data[i] = y.data[i] > T(0) ? dy.data[i] : T(0);
  }
}

template <class T>
void dropout_forward(const DropoutSpec& dr, Mode mode, Rng* rng,
                     const Tensor<T>& x, Tensor<T>& y, std::vector<T>& mask) {
  if (mode == Mode::Eval || dr.rate == 0.0) {
    y.data = x.data;
    return;
  }
  if (rng == nullptr) {
    throw std::invalid_argument("dropout: train mode needs an rng");
  }
  const T inv_keep = static_cast<T>(1.0 / (1.0 - dr.rate));
  mask.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = rng->uniform() < dr.rate ? T(0) : inv_keep;
    y.data[i] = x.data[i] * mask[i];
  }
}

}  // namespace

template <class T>
ForwardCache<T> forward(const ModelSpec& spec, const Params<T>& params,
                        const Tensor<T>& input, Mode mode, Rng* dropout_rng) {
  spec.validate();
  if (input.c != spec.in_ch || input.h != spec.in_h || input.w != spec.in_w) {
    throw std::invalid_argument("forward: input shape mismatch for " + spec.id);
  }
  if (input.n < 1) {
    throw std::invalid_argument("forward: empty batch");
  }
  const auto groups = spec.param_groups();
  if (params.size() != groups.size()) {
    throw std::invalid_argument("forward: wrong number of parameter groups");
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (params[i].size() != groups[i].dim) {
      throw std::invalid_argument("forward: wrong size for group " + groups[i].id);
    }
  }

  ForwardCache<T> cache;
  cache.layers.resize(spec.layers.size());
  const Tensor<T>* cur = &input;
  CHW shape{spec.in_ch, spec.in_h, spec.in_w};
  std::size_t pi = 0;

  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const LayerSpec& layer = spec.layers[li];
    LayerCache<T>& lc = cache.layers[li];
    const CHW out_shape = layer_out_shape(layer, shape, spec.id);

    if (const auto* cs = std::get_if<ConvSpec>(&layer)) {
      lc.output = Tensor<T>::image(cur->n, out_shape.c, out_shape.h, out_shape.w);
      conv_forward(*cs, params[pi], params[pi + 1], *cur, lc.output);
      pi += 2;
    } else if (std::holds_alternative<ReluSpec>(layer)) {
      lc.output = Tensor<T>::image(cur->n, shape.c, shape.h, shape.w);
      relu_forward(*cur, lc.output);
    } else if (const auto* ps = std::get_if<MaxPoolSpec>(&layer)) {
      lc.output = Tensor<T>::image(cur->n, out_shape.c, out_shape.h, out_shape.w);
      maxpool_forward(*ps, *cur, lc.output, lc.argmax);
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      lc.output = Tensor<T>::matrix(cur->n, out_shape.c);
      lc.output.data = cur->data;
    } else if (const auto* ds = std::get_if<DenseSpec>(&layer)) {
      lc.output = Tensor<T>::matrix(cur->n, ds->out);
      dense_forward(*ds, params[pi], params[pi + 1], *cur, lc.output);
      pi += 2;
    } else if (const auto* dr = std::get_if<DropoutSpec>(&layer)) {
      lc.output = Tensor<T>::image(cur->n, shape.c, shape.h, shape.w);
      dropout_forward(*dr, mode, dropout_rng, *cur, lc.output, lc.mask);
    }

    shape = out_shape;
    cur = &lc.output;
  }
  return cache;
}

template <class T>
double cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.n) != labels.size()) {
    throw std::invalid_argument("cross_entropy: label count mismatch");
  }
  const int K = logits.features();
  double total = 0.0;
  for (int i = 0; i < logits.n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= K) {
      throw std::invalid_argument("cross_entropy: label out of range");
    }
    const T* row = logits.row(i);
    double mx = static_cast<double>(row[0]);
    for (int k = 1; k < K; ++k) mx = std::max(mx, static_cast<double>(row[k]));
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += std::exp(static_cast<double>(row[k]) - mx);
    total += -(static_cast<double>(row[y]) - mx - std::log(denom));
  }
  const double loss = total / static_cast<double>(logits.n);
  if (!std::isfinite(loss)) {
    throw std::runtime_error("cross_entropy: loss is non-finite (diverged?)");
  }
  return loss;
}

template <class T>
double accuracy(const Tensor<T>& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.n) != labels.size()) {
    throw std::invalid_argument("accuracy: label count mismatch");
  }
  const int K = logits.features();
  std::size_t hits = 0;
  for (int i = 0; i < logits.n; ++i) {
    const T* row = logits.row(i);
    int best = 0;
    for (int k = 1; k < K; ++k) {
      if (row[k] > row[best]) best = k;
    }
    if (best == labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.n);
}

template <class T>
LossGrad loss_and_grad(const ModelSpec& spec, const Params<T>& params,
                       const Tensor<T>& inputs, std::span<const int> labels,
                       Rng* dropout_rng) {
  ForwardCache<T> cache = forward(spec, params, inputs, Mode::Train, dropout_rng);
  const Tensor<T>& logits = cache.logits();

  LossGrad out;
  out.loss = cross_entropy(logits, labels);

  const int B = inputs.n;
  const int K = logits.features();

  // Seed of the backward pass: mean-reduced softmax-CE gradient.
  Tensor<T> d = Tensor<T>::matrix(B, K);
  for (int i = 0; i < B; ++i) {
    const T* row = logits.row(i);
    double mx = static_cast<double>(row[0]);
    for (int k = 1; k < K; ++k) mx = std::max(mx, static_cast<double>(row[k]));
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += std::exp(static_cast<double>(row[k]) - mx);
    T* drow = d.row(i);
    const int y = labels[static_cast<std::size_t>(i)];
    for (int k = 0; k < K; ++k) {
      const double p = std::exp(static_cast<double>(row[k]) - mx) / denom;
      const double indicator = k == y ? 1.0 : 0.0;
      drow[k] = static_cast<T>((p - indicator) / static_cast<double>(B));
    }
  }

  // Parameter group index of each layer's first group.
  const auto groups = spec.param_groups();
  std::vector<std::size_t> first_group(spec.layers.size(),
                                       std::numeric_limits<std::size_t>::max());
  {
    std::size_t pi = 0;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
      if (std::holds_alternative<ConvSpec>(spec.layers[li]) ||
          std::holds_alternative<DenseSpec>(spec.layers[li])) {
        first_group[li] = pi;
        pi += 2;
      }
    }
  }

  std::vector<std::vector<T>> grad_bufs(groups.size());

  CHW shape{spec.in_ch, spec.in_h, spec.in_w};
  std::vector<CHW> in_shapes(spec.layers.size());
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    in_shapes[li] = shape;
    shape = layer_out_shape(spec.layers[li], shape, spec.id);
  }

  for (std::size_t liu = spec.layers.size(); liu-- > 0;) {
    const LayerSpec& layer = spec.layers[liu];
    const Tensor<T>& lin = liu == 0 ? inputs : cache.layers[liu - 1].output;
    const CHW is = in_shapes[liu];
    Tensor<T> dprev = Tensor<T>::image(B, is.c, is.h, is.w);

    if (const auto* cs = std::get_if<ConvSpec>(&layer)) {
      conv_backward(*cs, params[first_group[liu]], lin, d, dprev,
                    grad_bufs[first_group[liu]], grad_bufs[first_group[liu] + 1]);
    } else if (std::holds_alternative<ReluSpec>(layer)) {
      relu_backward(cache.layers[liu].output, d, dprev);
    } else if (std::holds_alternative<MaxPoolSpec>(layer)) {
      maxpool_backward(cache.layers[liu].argmax, d, dprev);
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      dprev.data = d.data;
    } else if (const auto* ds = std::get_if<DenseSpec>(&layer)) {
      dense_backward(*ds, params[first_group[liu]], lin, d, dprev,
                     grad_bufs[first_group[liu]], grad_bufs[first_group[liu] + 1]);
    } else if (std::holds_alternative<DropoutSpec>(layer)) {
      const auto& mask = cache.layers[liu].mask;
      if (mask.empty()) {
        dprev.data = d.data;
      } else {
        for (std::size_t i = 0; i < d.size(); ++i) {
          dprev.data[i] = d.data[i] * mask[i];
        }
      }
    }

    d = std::move(dprev);
  }

  out.grads.reserve(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    std::vector<double> g(groups[gi].dim);
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[j] = static_cast<double>(grad_bufs[gi][j]);
    }
    out.grads.emplace_back(std::move(g));
  }
  return out;
}

template Params<float> cast_params<float>(std::span<const ParamVector>);
template Params<double> cast_params<double>(std::span<const ParamVector>);
template ForwardCache<float> forward<float>(const ModelSpec&, const Params<float>&,
                                            const Tensor<float>&, Mode, Rng*);
template ForwardCache<double> forward<double>(const ModelSpec&,
                                              const Params<double>&,
                                              const Tensor<double>&, Mode, Rng*);
template double cross_entropy<float>(const Tensor<float>&, std::span<const int>);
template double cross_entropy<double>(const Tensor<double>&, std::span<const int>);
template double accuracy<float>(const Tensor<float>&, std::span<const int>);
template double accuracy<double>(const Tensor<double>&, std::span<const int>);
template LossGrad loss_and_grad<float>(const ModelSpec&, const Params<float>&,
                                       const Tensor<float>&,
                                       std::span<const int>, Rng*);
template LossGrad loss_and_grad<double>(const ModelSpec&, const Params<double>&,
                                        const Tensor<double>&,
                                        std::span<const int>, Rng*);

}  // namespace sradam
