#ifndef TOHM_LATTICE_HPP
#define TOHM_LATTICE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace tohm {

/// A D-dimensional search grid: the cross product of strictly increasing
/// coordinate axes, optionally restricted by a boolean mask (irregular
/// regions such as discs).  Included points carry two identities:
///   - the flat index r in [0, R), row-major over mask-true points, and
///   - the grid-index vector (phi_1, ..., phi_D) into the full cross product.
/// All neighborhood structure downstream is defined through grid indexes,
/// never through physical coordinates, so axis units are irrelevant there.
/// Immutable after construction; safe to share across threads.
class Lattice {
 public:
  /// Full cross product of the given axes.
  explicit Lattice(std::vector<std::vector<double>> axes);

  /// Cross product restricted by `mask` (size = product of axis sizes,
  /// row-major over grid indexes, last axis fastest).  At least one point
  /// must survive.
  Lattice(std::vector<std::vector<double>> axes, std::vector<std::uint8_t> mask);

  /// Convenience: mask given as a predicate on physical coordinates.
  static Lattice with_predicate(
      std::vector<std::vector<double>> axes,
      const std::function<bool(const std::vector<double>&)>& keep);

  int dims() const { return static_cast<int>(axes_.size()); }
  std::int64_t axis_size(int d) const { return static_cast<std::int64_t>(axes_[d].size()); }
  const std::vector<double>& axis(int d) const { return axes_[static_cast<std::size_t>(d)]; }
  const std::vector<std::vector<double>>& axes() const { return axes_; }

  /// Number of cells in the unmasked cross product.
  std::int64_t cell_count() const { return cell_count_; }

  /// R: number of included points.
  std::int64_t size() const { return static_cast<std::int64_t>(included_to_cell_.size()); }

  bool has_mask() const { return !mask_.empty(); }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  /// Row-major strides of the full cross product (last axis has stride 1).
  const std::vector<std::int64_t>& strides() const { return strides_; }

  /// Cell index of included point r.
  std::int64_t cell_of(std::int64_t r) const { return included_to_cell_[static_cast<std::size_t>(r)]; }

  /// Included index of a cell, or -1 if the cell is masked out.
  std::int64_t included_of_cell(std::int64_t cell) const {
    return cell_to_included_[static_cast<std::size_t>(cell)];
  }

  /// Grid-index vector of included point r, written into out[0..D).
  void index_vector(std::int64_t r, std::int32_t* out) const;
  std::vector<std::int32_t> index_vector(std::int64_t r) const;

  /// Euclidean distance between the grid-index vectors of two included
  /// points.  Depends only on indexes, not on coordinates.
  double index_distance(std::int64_t r, std::int64_t s) const;

  /// Squared index distance as an integer (exact).
  std::int64_t index_distance2(std::int64_t r, std::int64_t s) const;

  /// Physical coordinates of included point r.
  std::vector<double> coords(std::int64_t r) const;

 private:
  void finish_build();

  std::vector<std::vector<double>> axes_;
  std::vector<std::uint8_t> mask_;  // empty means "all included"
  std::vector<std::int64_t> strides_;
  std::int64_t cell_count_ = 0;
  std::vector<std::int64_t> included_to_cell_;
  std::vector<std::int64_t> cell_to_included_;
};

using LatticePtr = std::shared_ptr<const Lattice>;

/// Field values observed on a lattice, one value per included point in
/// flat (row-major) order.
struct FieldSample {
  LatticePtr lattice;
  std::vector<double> values;
};

}  // namespace tohm

#endif
