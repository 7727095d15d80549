#include "lrbs/lattice.hpp"

#include <algorithm>
#include <cstdlib>

namespace lrbs {

int sup_norm(const Offset& o) {
  int r = 0;
  for (int c : o) r = std::max(r, std::abs(c));
  return r;
}

Offset operator+(const Offset& a, const Offset& b) {
  Offset r{};
  for (int i = 0; i < kMaxDim; ++i) r[i] = a[i] + b[i];
  return r;
}

Offset operator-(const Offset& a, const Offset& b) {
  Offset r{};
  for (int i = 0; i < kMaxDim; ++i) r[i] = a[i] - b[i];
  return r;
}

Offset operator-(const Offset& a) { return Offset{} - a; }

std::string to_string(const Offset& o, int dim) {
  std::string s;
  for (int i = 0; i < dim; ++i) {
    if (i) s += ',';
    s += std::to_string(o[i]);
  }
  return s;
}

namespace {

int wrap(int v, int n) {
  int r = v % n;
  return r < 0 ? r + n : r;
}

}  // namespace

Lattice::Lattice(int dim, std::vector<int> extents, Boundary boundary)
    : dim_(dim), extents_(std::move(extents)), boundary_(boundary) {
  if (dim_ < 1 || dim_ > kMaxDim) throw GeometryError("dimension must be between 1 and " + std::to_string(kMaxDim));
  if (static_cast<int>(extents_.size()) != dim_) throw GeometryError("need one extent per dimension");
  size_ = 1;
  for (int e : extents_) {
    if (e < 1) throw GeometryError("extents must be positive");
    size_ *= static_cast<std::size_t>(e);
  }
}

Offset Lattice::coords(std::size_t site) const {
  Offset c{};
  for (int i = dim_ - 1; i >= 0; --i) {
    auto e = static_cast<std::size_t>(extents_[i]);
    c[i] = static_cast<int>(site % e);
    site /= e;
  }
  return c;
}

std::size_t Lattice::index(const Offset& c) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) {
    int v = c[i];
    if (boundary_ == Boundary::periodic) {
      v = wrap(v, extents_[i]);
    } else if (v < 0 || v >= extents_[i]) {
      throw GeometryError("coordinate outside the window");
    }
    idx = idx * static_cast<std::size_t>(extents_[i]) + static_cast<std::size_t>(v);
  }
  return idx;
}

std::optional<std::size_t> Lattice::shifted(std::size_t site, const Offset& shift) const {
  Offset c = coords(site) + shift;
  if (boundary_ == Boundary::zero) {
    for (int i = 0; i < dim_; ++i)
      if (c[i] < 0 || c[i] >= extents_[i]) return std::nullopt;
  }
  return index(c);
}

int Lattice::distance(std::size_t a, std::size_t b) const {
  Offset ca = coords(a), cb = coords(b);
  int r = 0;
  for (int i = 0; i < dim_; ++i) {
    int d = std::abs(ca[i] - cb[i]);
    if (boundary_ == Boundary::periodic) d = std::min(d, extents_[i] - d);
    r = std::max(r, d);
  }
  return r;
}

std::vector<std::size_t> Lattice::ball(const Offset& center, int radius) const {
  std::vector<std::size_t> out;
  Offset lo{}, hi{};
  for (int i = 0; i < dim_; ++i) {
    lo[i] = center[i] - radius;
    hi[i] = center[i] + radius;
  }
  Offset c = lo;
  while (true) {
    bool inside = true;
    if (boundary_ == Boundary::zero) {
      for (int i = 0; i < dim_; ++i) inside = inside && c[i] >= 0 && c[i] < extents_[i];
    }
    if (inside) out.push_back(index(c));
    int axis = dim_ - 1;
    while (axis >= 0 && c[axis] == hi[axis]) {
      c[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
    ++c[axis];
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int Lattice::max_ball_radius() const {
  int e = *std::min_element(extents_.begin(), extents_.end());
  return (e - 1) / 2;
}

Stencil::Stencil(const Lattice& lattice, std::span<const Offset> offsets)
    : width_(offsets.size()), table_(lattice.size() * offsets.size()) {
  for (std::size_t s = 0; s < lattice.size(); ++s) {
    for (std::size_t k = 0; k < width_; ++k) {
      auto t = lattice.shifted(s, offsets[k]);
      table_[s * width_ + k] = t ? *t : kNone;
    }
  }
}

}  // namespace lrbs
