#ifndef TOHM_EULER_HPP
#define TOHM_EULER_HPP

#include <cstdint>
#include <vector>

#include "tohm/lattice.hpp"

namespace tohm {

/// Points of a field at or above a threshold (non-strict, >=), as flat
/// included-point indexes in ascending order.
struct ExcursionSet {
  LatticePtr lattice;
  double threshold = 0.0;
  std::vector<std::int64_t> members;
};

ExcursionSet excursion_set(const FieldSample& field, double c);

/// Graph on an excursion set.  Vertices are excursion points; at level d
/// two vertices are adjacent iff their grid-index distance d_phi satisfies
/// 1 <= d_phi <= sqrt(d) — equivalently, integer squared distance in [1, d].
/// Built from a bounded integer-offset stencil (all offsets o with
/// 1 <= sum o_k^2 <= d), so construction is O(V * stencil) not O(V^2).
/// Edges carry their squared distance, which makes the level-(d-1) graph a
/// plain filter of the level-d graph (edge sets are nested in d).
class ExcursionGraph {
 public:
  ExcursionGraph(const ExcursionSet& exc, int d);

  int level() const { return level_; }
  const LatticePtr& lattice() const { return lattice_; }
  std::int64_t vertex_count() const { return (std::int64_t)members_.size(); }

  /// Number of edges with squared distance <= max_dist2 (counted once).
  std::int64_t edge_count(int max_dist2) const;
  std::int64_t edge_count() const { return edge_count(level_); }

  /// Flat included-point index of vertex v.
  std::int64_t member(std::int64_t v) const { return members_[v]; }

  // CSR adjacency; parallel arrays of neighbor vertex id and squared
  // index distance.
  const std::vector<std::int64_t>& offsets() const { return offsets_; }
  const std::vector<std::int32_t>& neighbors() const { return neighbors_; }
  const std::vector<std::int8_t>& dist2() const { return dist2_; }

 private:
  int level_;
  LatticePtr lattice_;
  std::vector<std::int64_t> members_;
  std::vector<std::int64_t> offsets_;
  std::vector<std::int32_t> neighbors_;
  std::vector<std::int8_t> dist2_;
};

/// Number of complete subgraphs on exactly q vertices, counting non-maximal
/// cliques too, restricted to edges with squared distance <= max_dist2
/// (pass the graph's own level for the unrestricted count).  Degeneracy-
/// ordered recursive enumeration; branches that cannot reach q are cut.
std::uint64_t count_cliques(const ExcursionGraph& graph, std::int64_t q, int max_dist2);
std::uint64_t count_cliques(const ExcursionGraph& graph, std::int64_t q);

/// Number of size-2^d cliques of the level-d filtered graph whose vertices
/// are the corners of an axis-aligned unit d-hypercube (extent exactly 1 on
/// d axes, 0 on the rest).  These are the d-cells of the excursion mesh.
///
/// On lattices of dimension <= 2, and at d = 1 in any dimension, every
/// size-2^d clique at squared distance <= d already spans such a hypercube:
/// two points differing by >= 2 on an axis are at squared distance >= 4, so
/// the clique fits in a {0,1}^dims box, which for 2^d distinct points forces
/// the full corner set.  From dimension 3 up the geometric restriction is
/// real: e.g. a point and its three axis neighbors in 3-D are pairwise
/// within sqrt(2) — a 4-clique of the level-2 graph that is no square.
std::uint64_t count_hypercube_cliques(const ExcursionGraph& graph, int d);

struct EulerResult {
  /// clique_counts[d] = |C^d|: vertices for d = 0, then hypercube-spanning
  /// size-2^d cliques of the level-d graph for d = 1..D.
  std::vector<std::uint64_t> clique_counts;
  long long ec = 0;
};

/// Euler characteristic of the excursion set via the graph/clique route:
/// EC = sum_d (-1)^d |C^d|.  Builds the level-D graph once and peels it
/// down one level at a time.  Empty excursion set gives EC = 0.
EulerResult euler_characteristic(const FieldSample& field, double c);

/// Independent check: direct cubical-mesh enumeration.  Counts, for every
/// subset of d axes, the axis-aligned unit hypercubes whose 2^d corners are
/// all included lattice points at or above the threshold, and returns the
/// alternating sum.  Shares no code with the graph route.
long long euler_characteristic_oracle(const FieldSample& field, double c);

}  // namespace tohm

#endif
