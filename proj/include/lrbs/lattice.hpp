#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace lrbs {

inline constexpr int kMaxDim = 3;

/// Integer displacement on Z^d. Coordinates beyond the lattice dimension are zero.
using Offset = std::array<int, kMaxDim>;

int sup_norm(const Offset& o);
Offset operator+(const Offset& a, const Offset& b);
Offset operator-(const Offset& a, const Offset& b);
Offset operator-(const Offset& a);
std::string to_string(const Offset& o, int dim);

enum class Boundary { periodic, zero };

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A finite rectangular window of Z^d, either closed into a torus or padded
/// with an absorbing zero exterior. Sites are numbered row-major with the last
/// coordinate running fastest.
class Lattice {
 public:
  Lattice() = default;
  Lattice(int dim, std::vector<int> extents, Boundary boundary = Boundary::periodic);

  int dim() const { return dim_; }
  std::span<const int> extents() const { return extents_; }
  int extent(int axis) const { return extents_[static_cast<std::size_t>(axis)]; }
  Boundary boundary() const { return boundary_; }
  std::size_t size() const { return size_; }

  Offset coords(std::size_t site) const;
  /// Index of a coordinate vector; wraps on the torus, throws outside a zero-boundary window.
  std::size_t index(const Offset& c) const;
  /// Site reached from `site` by `shift`; empty when the move leaves a zero-boundary window.
  std::optional<std::size_t> shifted(std::size_t site, const Offset& shift) const;
  /// Sup-norm distance, measured along the shortest wrap on the torus.
  int distance(std::size_t a, std::size_t b) const;
  /// Distinct sites within sup-norm `radius` of `center`, in increasing index order.
  std::vector<std::size_t> ball(const Offset& center, int radius) const;
  /// Largest radius r such that a sup-norm ball of radius r has no self-overlap.
  int max_ball_radius() const;

  bool operator==(const Lattice&) const = default;

 private:
  int dim_ = 0;
  std::vector<int> extents_;
  Boundary boundary_ = Boundary::periodic;
  std::size_t size_ = 0;
};

/// Neighbour table for a fixed list of offsets: entry (site, k) is the site
/// reached by offsets[k], or kNone when it lies outside a zero-boundary window.
class Stencil {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  Stencil() = default;
  Stencil(const Lattice& lattice, std::span<const Offset> offsets);

  std::size_t width() const { return width_; }
  std::size_t operator()(std::size_t site, std::size_t k) const { return table_[site * width_ + k]; }
  std::span<const std::size_t> row(std::size_t site) const {
    return {table_.data() + site * width_, width_};
  }

 private:
  std::size_t width_ = 0;
  std::vector<std::size_t> table_;
};

enum class FieldKind { integer, real };

using Count = std::int64_t;

/// Per-site masses over a lattice window. Count fields hold the stochastic
/// configurations, double fields the deterministic ones.
template <class T>
class Field {
 public:
  static constexpr FieldKind kind = std::is_integral_v<T> ? FieldKind::integer : FieldKind::real;

  Field() = default;
  explicit Field(Lattice lattice, T fill = T{})
      : lattice_(std::move(lattice)), values_(lattice_.size(), fill) {}
  Field(Lattice lattice, std::vector<T> values) : lattice_(std::move(lattice)), values_(std::move(values)) {
    if (values_.size() != lattice_.size()) throw GeometryError("field value count does not match lattice size");
  }

  const Lattice& lattice() const { return lattice_; }
  std::size_t size() const { return values_.size(); }

  T& operator[](std::size_t site) { return values_[site]; }
  const T& operator[](std::size_t site) const { return values_[site]; }
  T& at(const Offset& c) { return values_[lattice_.index(c)]; }
  const T& at(const Offset& c) const { return values_[lattice_.index(c)]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool operator==(const Field&) const = default;

 private:
  Lattice lattice_;
  std::vector<T> values_;
};

using CountField = Field<Count>;
using RealField = Field<double>;

template <class T>
double total_mass(const Field<T>& field) {
  double sum = 0.0;
  for (T v : field.values()) sum += static_cast<double>(v);
  return sum;
}

/// Translate a field by `shift` on the torus: result(x + shift) = field(x).
template <class T>
Field<T> translated(const Field<T>& field, const Offset& shift) {
  Field<T> out(field.lattice());
  for (std::size_t s = 0; s < field.size(); ++s) out[field.lattice().index(field.lattice().coords(s) + shift)] = field[s];
  return out;
}

}  // namespace lrbs
