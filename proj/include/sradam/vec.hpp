#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sradam {

/// Flat dense vector holding one parameter group's values (or its gradient).
/// Invariant: non-empty and every element is finite. Construction rejects
/// anything else, so downstream math never has to re-check.
class ParamVector {
 public:
  explicit ParamVector(std::vector<double> values);

  static ParamVector zeros(std::size_t n);
  static ParamVector constant(std::size_t n, double value);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }

  bool operator==(const ParamVector& other) const = default;

 private:
  std::vector<double> values_;
};

/// What a parameter group holds; decides the default shrinkage scope.
enum class GroupKind { ConvWeight, DenseWeight, Bias, Other };

const char* to_string(GroupKind kind) noexcept;

/// Bookkeeping for one named parameter group. `shrinkage_enabled` defaults to
/// conv weights only; apply_scope() rewrites it for other policies.
struct ParamGroup {
  std::string id;
  std::size_t dim = 0;
  GroupKind kind = GroupKind::Other;
  bool shrinkage_enabled = false;

  ParamGroup() = default;
  ParamGroup(std::string id_, std::size_t dim_, GroupKind kind_);
};

/// a*x + y, left to right per element. Sizes must match.
ParamVector axpy(double a, const ParamVector& x, const ParamVector& y);

/// Squared Euclidean norm, accumulated in index order (bit-reproducible).
double sq_norm(const ParamVector& x);

/// Inner product, accumulated in index order.
double dot(const ParamVector& x, const ParamVector& y);

namespace detail {
void require_same_size(const ParamVector& a, const ParamVector& b,
                       const char* op);
void require_finite(std::span<const double> values, const char* what);
}  // namespace detail

}  // namespace sradam
