#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace splitfun {

enum class SpaceKind { euclidean, product, sym_matrix };

/// Parameter space E: Euclidean R^d, an l2-product of Euclidean blocks, or the
/// space of symmetric side x side matrices with the operator norm.
///
/// Symmetric matrices are stored as packed upper-triangular coordinates in
/// row-major order (i <= j), with off-diagonal entries scaled by sqrt(2) so
/// the packed dot product equals the Frobenius pairing tr(A B).
class SpaceDescriptor {
 public:
  static SpaceDescriptor euclidean(std::size_t dim);
  static SpaceDescriptor product(std::vector<std::size_t> block_dims);
  /// side == 1 collapses to euclidean(1).
  static SpaceDescriptor sym_matrix(std::size_t side);

  SpaceKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::size_t side() const { return side_; }
  const std::vector<std::size_t>& blocks() const { return blocks_; }

  friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;

 private:
  SpaceDescriptor() = default;

  SpaceKind kind_ = SpaceKind::euclidean;
  std::size_t dim_ = 0;
  std::size_t side_ = 0;
  std::vector<std::size_t> blocks_;
};

/// Packed index of entry (i, j) of a symmetric matrix, i <= j.
std::size_t packed_index(std::size_t side, std::size_t i, std::size_t j);

namespace detail {

template <class Tag>
class Element {
 public:
  Element(SpaceDescriptor space, std::vector<double> coords);

  static Element zeros(const SpaceDescriptor& space) {
    return Element(space, std::vector<double>(space.dim(), 0.0));
  }

  const SpaceDescriptor& space() const { return space_; }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::size_t size() const { return coords_.size(); }

  Element& operator+=(const Element& other);
  Element& operator-=(const Element& other);
  Element& operator*=(double s);

  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator*(double s, Element a) { return a *= s; }
  friend Element operator*(Element a, double s) { return a *= s; }

  friend bool operator==(const Element&, const Element&) = default;

 private:
  SpaceDescriptor space_;
  std::vector<double> coords_;
};

struct PointTag {};
struct DualTag {};

}  // namespace detail

/// Element theta, t, Sigma of E.
using Point = detail::Element<detail::PointTag>;
/// Linear functional u in E*, represented by coordinates in the same packing.
using DualElement = detail::Element<detail::DualTag>;

extern template class detail::Element<detail::PointTag>;
extern template class detail::Element<detail::DualTag>;

/// Points of sym_matrix spaces built from / expanded to full row-major storage.
Point point_from_matrix(std::size_t side, std::span<const double> full);
DualElement dual_from_matrix(std::size_t side, std::span<const double> full);
std::vector<double> to_full_matrix(const SpaceDescriptor& space,
                                   std::span<const double> coords);

/// Reinterpret coordinates as the other side of the pairing (Riesz map in the
/// packed coordinates).
DualElement as_dual(const Point& p);
Point as_point(const DualElement& u);

double norm(const Point& p);
double dual_norm(const DualElement& u);
double pairing(const Point& p, const DualElement& u);

/// Coordinate inner product of two points of the same space (Frobenius for
/// matrices).
double inner(const Point& a, const Point& b);

}  // namespace splitfun
