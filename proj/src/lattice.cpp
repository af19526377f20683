#include "tohm/lattice.hpp"

#include <cmath>
#include <string>

#include "tohm/errors.hpp"

namespace tohm {

namespace {

void check_axes(const std::vector<std::vector<double>>& axes) {
  if (axes.empty()) throw ValidationError("lattice: need at least one axis");
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& ax = axes[d];
    if (ax.empty())
      throw ValidationError("lattice: axis " + std::to_string(d + 1) + " is empty");
    for (std::size_t i = 0; i < ax.size(); ++i) {
      if (!std::isfinite(ax[i]))
        throw ValidationError("lattice: axis " + std::to_string(d + 1) +
                              " has a non-finite coordinate");
      if (i > 0 && !(ax[i] > ax[i - 1]))
        throw ValidationError("lattice: axis " + std::to_string(d + 1) +
                              " is not strictly increasing at position " +
                              std::to_string(i + 1));
    }
  }
}

}  // namespace

Lattice::Lattice(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
  check_axes(axes_);
  finish_build();
}

Lattice::Lattice(std::vector<std::vector<double>> axes, std::vector<std::uint8_t> mask)
    : axes_(std::move(axes)), mask_(std::move(mask)) {
  check_axes(axes_);
  std::int64_t cells = 1;
  for (const auto& ax : axes_) cells *= (std::int64_t)ax.size();
  if ((std::int64_t)mask_.size() != cells)
    throw ValidationError("lattice: mask has " + std::to_string(mask_.size()) +
                          " entries, expected " + std::to_string(cells));
  finish_build();
}

Lattice Lattice::with_predicate(
    std::vector<std::vector<double>> axes,
    const std::function<bool(const std::vector<double>&)>& keep) {
  check_axes(axes);
  std::int64_t cells = 1;
  for (const auto& ax : axes) cells *= (std::int64_t)ax.size();
  const int dims = (int)axes.size();
  std::vector<std::uint8_t> mask(cells);
  std::vector<std::int64_t> idx(dims, 0);
  std::vector<double> point(dims);
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    for (int d = 0; d < dims; ++d) point[d] = axes[d][idx[d]];
    mask[cell] = keep(point) ? 1 : 0;
    for (int d = dims - 1; d >= 0; --d) {
      if (++idx[d] < (std::int64_t)axes[d].size()) break;
      idx[d] = 0;
    }
  }
  return Lattice(std::move(axes), std::move(mask));
}

void Lattice::finish_build() {
  const int dims = (int)axes_.size();
  strides_.assign(dims, 1);
  cell_count_ = 1;
  for (int d = dims - 1; d >= 0; --d) {
    strides_[d] = cell_count_;
    cell_count_ *= (std::int64_t)axes_[d].size();
  }
  cell_to_included_.assign(cell_count_, -1);
  included_to_cell_.clear();
  for (std::int64_t cell = 0; cell < cell_count_; ++cell) {
    if (!mask_.empty() && mask_[cell] == 0) continue;
    cell_to_included_[cell] = (std::int64_t)included_to_cell_.size();
    included_to_cell_.push_back(cell);
  }
  if (included_to_cell_.empty())
    throw ValidationError("lattice: mask excludes every point");
}

void Lattice::index_vector(std::int64_t r, std::int32_t* out) const {
  std::int64_t cell = cell_of(r);
  for (int d = 0, n = dims(); d < n; ++d) {
    out[d] = (std::int32_t)(cell / strides_[d]);
    cell %= strides_[d];
  }
}

std::vector<std::int32_t> Lattice::index_vector(std::int64_t r) const {
  std::vector<std::int32_t> out(dims());
  index_vector(r, out.data());
  return out;
}

std::int64_t Lattice::index_distance2(std::int64_t r, std::int64_t s) const {
  const int n = dims();
  if (n > 64) throw ValidationError("lattice: more than 64 dimensions");
  std::int32_t a[64], b[64];
  index_vector(r, a);
  index_vector(s, b);
  std::int64_t acc = 0;
  for (int d = 0; d < n; ++d) {
    std::int64_t diff = (std::int64_t)a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

double Lattice::index_distance(std::int64_t r, std::int64_t s) const {
  return std::sqrt((double)index_distance2(r, s));
}

std::vector<double> Lattice::coords(std::int64_t r) const {
  std::vector<std::int32_t> idx = index_vector(r);
  std::vector<double> out(dims());
  for (int d = 0, n = dims(); d < n; ++d) out[d] = axes_[d][idx[d]];
  return out;
}

}  // namespace tohm
