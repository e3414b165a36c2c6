#include "sradam/vec.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace sradam {

namespace detail {

void require_same_size(const ParamVector& a, const ParamVector& b,
                       const char* op) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": size mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite value at index " +
                                  std::to_string(i));
    }
  }
}

}  // namespace detail

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("ParamVector: empty");
  }
  detail::require_finite(values_, "ParamVector");
}

ParamVector ParamVector::zeros(std::size_t n) {
  return ParamVector(std::vector<double>(n, 0.0));
}

ParamVector ParamVector::constant(std::size_t n, double value) {
  return ParamVector(std::vector<double>(n, value));
}

const char* to_string(GroupKind kind) noexcept {
  switch (kind) {
    case GroupKind::ConvWeight: return "conv_weight";
    case GroupKind::DenseWeight: return "dense_weight";
    case GroupKind::Bias: return "bias";
    case GroupKind::Other: return "other";
  }
  return "other";
}

ParamGroup::ParamGroup(std::string id_, std::size_t dim_, GroupKind kind_)
    : id(std::move(id_)),
      dim(dim_),
      kind(kind_),
      shrinkage_enabled(kind_ == GroupKind::ConvWeight) {
  if (dim == 0) {
    throw std::invalid_argument("ParamGroup: zero dim for group " + id);
  }
}

ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
  detail::require_same_size(x, y, "axpy");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = a * x[i] + y[i];
  }
  return ParamVector(std::move(out));
}

double sq_norm(const ParamVector& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * x[i];
  }
  return acc;
}

double dot(const ParamVector& x, const ParamVector& y) {
  detail::require_same_size(x, y, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * y[i];
  }
  return acc;
}

}  // namespace sradam
