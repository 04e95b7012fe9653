#include "splitfun/space.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "splitfun/errors.hpp"
#include "splitfun/linalg.hpp"

namespace splitfun {

SpaceDescriptor SpaceDescriptor::euclidean(std::size_t dim) {
  if (dim == 0) throw ContractError("euclidean space needs dim >= 1");
  SpaceDescriptor s;
  s.kind_ = SpaceKind::euclidean;
  s.dim_ = dim;
  return s;
}

SpaceDescriptor SpaceDescriptor::product(std::vector<std::size_t> block_dims) {
  if (block_dims.empty()) throw ContractError("product space needs >= 1 block");
  for (std::size_t b : block_dims)
    if (b == 0) throw ContractError("product space blocks need dim >= 1");
  SpaceDescriptor s;
  s.kind_ = SpaceKind::product;
  s.dim_ = std::accumulate(block_dims.begin(), block_dims.end(), std::size_t{0});
  s.blocks_ = std::move(block_dims);
  return s;
}

SpaceDescriptor SpaceDescriptor::sym_matrix(std::size_t side) {
  if (side == 0) throw ContractError("matrix space needs side >= 1");
  if (side == 1) return euclidean(1);
  SpaceDescriptor s;
  s.kind_ = SpaceKind::sym_matrix;
  s.side_ = side;
  s.dim_ = side * (side + 1) / 2;
  return s;
}

std::size_t packed_index(std::size_t side, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  // rows 0..i-1 hold side, side-1, ..., side-i+1 entries
  return i * side - i * (i - 1) / 2 + (j - i);
}

namespace detail {

template <class Tag>
Element<Tag>::Element(SpaceDescriptor space, std::vector<double> coords)
    : space_(std::move(space)), coords_(std::move(coords)) {
  if (coords_.size() != space_.dim())
    throw ContractError("coordinate count " + std::to_string(coords_.size()) +
                        " does not match space dimension " +
                        std::to_string(space_.dim()));
  for (double c : coords_)
    if (!std::isfinite(c)) throw DomainError("non-finite coordinate");
}

template <class Tag>
Element<Tag>& Element<Tag>::operator+=(const Element& other) {
  if (!(space_ == other.space_)) throw ContractError("space mismatch in +");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

template <class Tag>
Element<Tag>& Element<Tag>::operator-=(const Element& other) {
  if (!(space_ == other.space_)) throw ContractError("space mismatch in -");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

template <class Tag>
Element<Tag>& Element<Tag>::operator*=(double s) {
  for (double& c : coords_) c *= s;
  return *this;
}

template class Element<PointTag>;
template class Element<DualTag>;

}  // namespace detail

namespace {

std::vector<double> pack(std::size_t side, std::span<const double> full) {
  if (full.size() != side * side) throw ContractError("matrix size mismatch");
  std::vector<double> packed;
  packed.reserve(side * (side + 1) / 2);
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = i; j < side; ++j) {
      if (i == j) {
        packed.push_back(full[i * side + i]);
      } else {
        const double a = full[i * side + j];
        const double b = full[j * side + i];
        if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)))
          throw ContractError("matrix is not symmetric");
        packed.push_back(std::numbers::sqrt2 * 0.5 * (a + b));
      }
    }
  return packed;
}

void require_finite(std::span<const double> c) {
  for (double x : c)
    if (!std::isfinite(x)) throw DomainError("non-finite coordinate");
}

double l2(std::span<const double> c) {
  double s = 0.0;
  for (double x : c) s += x * x;
  return std::sqrt(s);
}

double block_l2(const SpaceDescriptor& space, std::span<const double> c) {
  // l2 of per-block l2 norms equals the flat l2 norm; computed per block
  // so the product structure is explicit.
  double s = 0.0;
  std::size_t offset = 0;
  for (std::size_t b : space.blocks()) {
    const double nb = l2(c.subspan(offset, b));
    s += nb * nb;
    offset += b;
  }
  return std::sqrt(s);
}

}  // namespace

Point point_from_matrix(std::size_t side, std::span<const double> full) {
  return Point(SpaceDescriptor::sym_matrix(side), pack(side, full));
}

DualElement dual_from_matrix(std::size_t side, std::span<const double> full) {
  return DualElement(SpaceDescriptor::sym_matrix(side), pack(side, full));
}

std::vector<double> to_full_matrix(const SpaceDescriptor& space,
                                   std::span<const double> coords) {
  if (space.kind() != SpaceKind::sym_matrix) {
    if (space.dim() == 1) return {coords[0]};
    throw ContractError("to_full_matrix: not a matrix space");
  }
  const std::size_t n = space.side();
  std::vector<double> full(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double c = coords[packed_index(n, i, j)];
      if (i == j) {
        full[i * n + i] = c;
      } else {
        full[i * n + j] = c / std::numbers::sqrt2;
        full[j * n + i] = c / std::numbers::sqrt2;
      }
    }
  return full;
}

DualElement as_dual(const Point& p) {
  return DualElement(p.space(), {p.coords().begin(), p.coords().end()});
}

Point as_point(const DualElement& u) {
  return Point(u.space(), {u.coords().begin(), u.coords().end()});
}

double norm(const Point& p) {
  require_finite(p.coords());
  switch (p.space().kind()) {
    case SpaceKind::euclidean:
      return l2(p.coords());
    case SpaceKind::product:
      return block_l2(p.space(), p.coords());
    case SpaceKind::sym_matrix: {
      const auto full = to_full_matrix(p.space(), p.coords());
      return linalg::sym_operator_norm(full, p.space().side());
    }
  }
  return 0.0;
}

double dual_norm(const DualElement& u) {
  require_finite(u.coords());
  switch (u.space().kind()) {
    case SpaceKind::euclidean:
      return l2(u.coords());
    case SpaceKind::product:
      return block_l2(u.space(), u.coords());
    case SpaceKind::sym_matrix: {
      const auto full = to_full_matrix(u.space(), u.coords());
      return linalg::sym_nuclear_norm(full, u.space().side());
    }
  }
  return 0.0;
}

double pairing(const Point& p, const DualElement& u) {
  if (!(p.space() == u.space())) throw ContractError("pairing: space mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * u[i];
  return s;
}

double inner(const Point& a, const Point& b) {
  if (!(a.space() == b.space())) throw ContractError("inner: space mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace splitfun
