#include "tohm/euler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "tohm/errors.hpp"

namespace tohm {

ExcursionSet excursion_set(const FieldSample& field, double c) {
  if (!field.lattice) throw ValidationError("excursion_set: field has no lattice");
  if ((std::int64_t)field.values.size() != field.lattice->size())
    throw ValidationError("excursion_set: value count does not match lattice size");
  ExcursionSet out;
  out.lattice = field.lattice;
  out.threshold = c;
  for (std::int64_t r = 0; r < (std::int64_t)field.values.size(); ++r)
    if (field.values[r] >= c) out.members.push_back(r);
  return out;
}

namespace {

// All nonzero integer offsets o with sum o_k^2 <= d.  For d <= 3 this is the
// {-1,0,1}^D stencil with at most d nonzero entries; for d >= 4 entries up
// to floor(sqrt(d)) appear (e.g. (2,0,0,0) at d = 4), as the distance rule
// requires.
std::vector<std::vector<int>> offset_stencil(int dims, int d) {
  const int reach = (int)std::floor(std::sqrt((double)d));
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dims, 0);
  // Odometer over {-reach..reach}^dims with early budget pruning.
  std::function<void(int, int)> walk = [&](int axis, int budget) {
    if (axis == dims) {
      if (budget < d) out.push_back(cur);  // budget = d - sum o^2 remaining
      return;
    }
    for (int o = -reach; o <= reach; ++o) {
      int cost = o * o;
      if (cost > budget) continue;
      cur[axis] = o;
      walk(axis + 1, budget - cost);
    }
    cur[axis] = 0;
  };
  walk(0, d);
  // walk() flags "some nonzero" via budget < d: the all-zero path keeps
  // budget == d and is skipped.
  return out;
}

}  // namespace

ExcursionGraph::ExcursionGraph(const ExcursionSet& exc, int d)
    : level_(d), lattice_(exc.lattice) {
  if (!exc.lattice) throw ValidationError("excursion graph: missing lattice");
  if (d < 1) throw ValidationError("excursion graph: level must be >= 1");
  const Lattice& lat = *exc.lattice;
  const int dims = lat.dims();
  members_ = exc.members;

  const std::int64_t nv = (std::int64_t)members_.size();
  std::vector<std::int32_t> vertex_of(lat.size(), -1);
  for (std::int64_t v = 0; v < nv; ++v) {
    if (v > 0 && members_[v] <= members_[v - 1])
      throw ValidationError("excursion graph: member list must be ascending");
    if (members_[v] < 0 || members_[v] >= lat.size())
      throw ValidationError("excursion graph: member index out of range");
    vertex_of[members_[v]] = (std::int32_t)v;
  }

  const auto stencil = offset_stencil(dims, d);
  const auto& strides = lat.strides();

  offsets_.assign(nv + 1, 0);
  std::vector<std::int32_t> idx(dims);
  std::vector<std::pair<std::int32_t, std::int8_t>> row;
  for (std::int64_t v = 0; v < nv; ++v) {
    lat.index_vector(members_[v], idx.data());
    row.clear();
    for (const auto& off : stencil) {
      std::int64_t cell = 0;
      int dist2 = 0;
      bool ok = true;
      for (int k = 0; k < dims; ++k) {
        int j = idx[k] + off[k];
        if (j < 0 || j >= lat.axis_size(k)) { ok = false; break; }
        cell += strides[k] * j;
        dist2 += off[k] * off[k];
      }
      if (!ok) continue;
      std::int64_t inc = lat.included_of_cell(cell);
      if (inc < 0) continue;
      std::int32_t u = vertex_of[inc];
      if (u < 0) continue;
      row.emplace_back(u, (std::int8_t)dist2);
    }
    std::sort(row.begin(), row.end());
    offsets_[v + 1] = offsets_[v] + (std::int64_t)row.size();
    for (const auto& e : row) {
      neighbors_.push_back(e.first);
      dist2_.push_back(e.second);
    }
  }
}

std::int64_t ExcursionGraph::edge_count(int max_dist2) const {
  std::int64_t twice = 0;
  for (std::size_t i = 0; i < neighbors_.size(); ++i)
    if (dist2_[i] <= max_dist2) ++twice;
  return twice / 2;
}

namespace {

// Degeneracy ordering by repeated minimum-degree removal (bucket queue).
// Returns rank[v]; low rank = removed early.
std::vector<std::int32_t> degeneracy_rank(std::int64_t nv,
                                          const std::vector<std::vector<std::int32_t>>& adj) {
  std::vector<std::int32_t> degree(nv), rank(nv, -1);
  std::int32_t maxdeg = 0;
  for (std::int64_t v = 0; v < nv; ++v) {
    degree[v] = (std::int32_t)adj[v].size();
    maxdeg = std::max(maxdeg, degree[v]);
  }
  std::vector<std::vector<std::int32_t>> bucket(maxdeg + 1);
  std::vector<std::int32_t> where(nv);
  for (std::int64_t v = 0; v < nv; ++v) {
    where[v] = (std::int32_t)bucket[degree[v]].size();
    bucket[degree[v]].push_back((std::int32_t)v);
  }
  std::int32_t cursor = 0;
  for (std::int64_t step = 0; step < nv; ++step) {
    // One removal lowers each remaining degree by at most 1, so the minimum
    // occupied bucket moves down by at most one step between iterations.
    if (cursor > 0) --cursor;
    while (bucket[cursor].empty()) ++cursor;
    std::int32_t v = bucket[cursor].back();
    bucket[cursor].pop_back();
    rank[v] = (std::int32_t)step;
    for (std::int32_t u : adj[v]) {
      if (rank[u] >= 0) continue;
      std::int32_t dg = degree[u];
      auto& b = bucket[dg];
      std::int32_t pos = where[u];
      where[b.back()] = pos;
      std::swap(b[pos], b.back());
      b.pop_back();
      degree[u] = dg - 1;
      where[u] = (std::int32_t)bucket[dg - 1].size();
      bucket[dg - 1].push_back(u);
    }
  }
  return rank;
}

// Counts cliques of exactly `need` more vertices inside candidate set P,
// where "later" adjacency lists are sorted by rank.
void count_rec(const std::vector<std::vector<std::int32_t>>& later,
               const std::vector<std::int32_t>& P, std::int64_t need,
               std::uint64_t& count) {
  if (need == 1) {
    count += P.size();
    return;
  }
  const std::int64_t n = (std::int64_t)P.size();
  if (n < need) return;
  std::vector<std::int32_t> next;
  for (std::int64_t i = 0; i + need <= n; ++i) {
    const auto& lu = later[P[i]];
    next.clear();
    // Intersect P[i+1..] with later[P[i]]; both sorted by rank.
    std::size_t a = i + 1, b = 0;
    while (a < P.size() && b < lu.size()) {
      if (P[a] < lu[b]) ++a;
      else if (lu[b] < P[a]) ++b;
      else { next.push_back(P[a]); ++a; ++b; }
    }
    count_rec(later, next, need - 1, count);
  }
}

// Clique counting restricted to vertex sets spanning unit d-hypercubes.
// box_lo/box_hi hold per-axis extremes of the vertices picked so far; a
// branch dies as soon as some axis extent exceeds 1 or more than d axes
// are stretched, since extents only grow.  ivec is the rank-indexed table
// of grid-index vectors.
void boxed_rec(const std::vector<std::vector<std::int32_t>>& later,
               const std::vector<std::int32_t>& P, std::int64_t need,
               const std::vector<std::int32_t>& ivec, int dims, int d,
               std::vector<std::int32_t>& box_lo, std::vector<std::int32_t>& box_hi,
               std::uint64_t& count) {
  const std::int64_t n = (std::int64_t)P.size();
  if (n < need) return;
  if (need == 1) {
    for (std::int32_t u : P) {
      const std::int32_t* iu = &ivec[(std::size_t)u * dims];
      int stretched = 0;
      bool ok = true;
      for (int k = 0; k < dims; ++k) {
        std::int32_t lo = std::min(box_lo[k], iu[k]);
        std::int32_t hi = std::max(box_hi[k], iu[k]);
        if (hi - lo > 1) { ok = false; break; }
        stretched += hi - lo;
      }
      if (ok && stretched == d) ++count;
    }
    return;
  }
  std::vector<std::int32_t> next;
  std::vector<std::int32_t> lo(dims), hi(dims);
  for (std::int64_t i = 0; i + need <= n; ++i) {
    const std::int32_t* iu = &ivec[(std::size_t)P[i] * dims];
    int stretched = 0;
    bool ok = true;
    for (int k = 0; k < dims; ++k) {
      lo[k] = std::min(box_lo[k], iu[k]);
      hi[k] = std::max(box_hi[k], iu[k]);
      if (hi[k] - lo[k] > 1) { ok = false; break; }
      stretched += hi[k] - lo[k];
    }
    if (!ok || stretched > d) continue;
    const auto& lu = later[P[i]];
    next.clear();
    std::size_t a = i + 1, b = 0;
    while (a < P.size() && b < lu.size()) {
      if (P[a] < lu[b]) ++a;
      else if (lu[b] < P[a]) ++b;
      else { next.push_back(P[a]); ++a; ++b; }
    }
    std::swap(box_lo, lo);
    std::swap(box_hi, hi);
    boxed_rec(later, next, need - 1, ivec, dims, d, box_lo, box_hi, count);
    std::swap(box_lo, lo);
    std::swap(box_hi, hi);
  }
}

}  // namespace

std::uint64_t count_cliques(const ExcursionGraph& graph, std::int64_t q, int max_dist2) {
  if (q < 1) throw ValidationError("count_cliques: q must be >= 1");
  const std::int64_t nv = graph.vertex_count();
  if (q == 1) return (std::uint64_t)nv;
  if (q == 2) return (std::uint64_t)graph.edge_count(max_dist2);
  if (nv < q) return 0;

  const auto& offsets = graph.offsets();
  const auto& nbr = graph.neighbors();
  const auto& d2 = graph.dist2();

  std::vector<std::vector<std::int32_t>> adj(nv);
  for (std::int64_t v = 0; v < nv; ++v)
    for (std::int64_t i = offsets[v]; i < offsets[v + 1]; ++i)
      if (d2[i] <= max_dist2) adj[v].push_back(nbr[i]);

  std::vector<std::int32_t> rank = degeneracy_rank(nv, adj);

  // Re-index vertices by rank; keep only rank-increasing ("later") edges.
  std::vector<std::vector<std::int32_t>> later(nv);
  for (std::int64_t v = 0; v < nv; ++v)
    for (std::int32_t u : adj[v])
      if (rank[u] > rank[v]) later[rank[v]].push_back(rank[u]);
  for (auto& lst : later) std::sort(lst.begin(), lst.end());

  std::uint64_t count = 0;
  for (std::int64_t v = 0; v < nv; ++v) {
    if ((std::int64_t)later[v].size() < q - 1) continue;
    count_rec(later, later[v], q - 1, count);
  }
  return count;
}

std::uint64_t count_cliques(const ExcursionGraph& graph, std::int64_t q) {
  return count_cliques(graph, q, graph.level());
}

std::uint64_t count_hypercube_cliques(const ExcursionGraph& graph, int d) {
  if (d < 1 || d > graph.level())
    throw ValidationError("count_hypercube_cliques: level d must be in 1.." +
                          std::to_string(graph.level()));
  const Lattice& lat = *graph.lattice();
  const int dims = lat.dims();
  const std::int64_t q = (std::int64_t)1 << d;

  // Where cliques and hypercubes provably coincide, skip the geometry.
  if (dims <= 2 || d == 1) return count_cliques(graph, q, d);

  const std::int64_t nv = graph.vertex_count();
  if (nv < q) return 0;

  const auto& offsets = graph.offsets();
  const auto& nbr = graph.neighbors();
  const auto& d2 = graph.dist2();

  std::vector<std::vector<std::int32_t>> adj(nv);
  for (std::int64_t v = 0; v < nv; ++v)
    for (std::int64_t i = offsets[v]; i < offsets[v + 1]; ++i)
      if (d2[i] <= d) adj[v].push_back(nbr[i]);

  std::vector<std::int32_t> rank = degeneracy_rank(nv, adj);

  std::vector<std::vector<std::int32_t>> later(nv);
  for (std::int64_t v = 0; v < nv; ++v)
    for (std::int32_t u : adj[v])
      if (rank[u] > rank[v]) later[rank[v]].push_back(rank[u]);
  for (auto& lst : later) std::sort(lst.begin(), lst.end());

  // Grid-index vectors in rank order, for the bounding-box tests.
  std::vector<std::int32_t> ivec((std::size_t)nv * dims);
  for (std::int64_t v = 0; v < nv; ++v)
    lat.index_vector(graph.member(v), &ivec[(std::size_t)rank[v] * dims]);

  std::uint64_t count = 0;
  std::vector<std::int32_t> box_lo(dims), box_hi(dims);
  for (std::int64_t v = 0; v < nv; ++v) {
    if ((std::int64_t)later[v].size() < q - 1) continue;
    for (int k = 0; k < dims; ++k)
      box_lo[k] = box_hi[k] = ivec[(std::size_t)v * dims + k];
    boxed_rec(later, later[v], q - 1, ivec, dims, d, box_lo, box_hi, count);
  }
  return count;
}

EulerResult euler_characteristic(const FieldSample& field, double c) {
  if (!field.lattice) throw ValidationError("euler_characteristic: field has no lattice");
  const int D = field.lattice->dims();
  EulerResult out;
  out.clique_counts.assign(D + 1, 0);

  ExcursionSet exc = excursion_set(field, c);
  if (exc.members.empty()) {
    out.ec = 0;
    return out;
  }
  out.clique_counts[0] = (std::uint64_t)exc.members.size();

  // One level-D graph; lower levels are distance filters of it.
  ExcursionGraph graph(exc, D);
  for (int d = D; d >= 1; --d)
    out.clique_counts[d] = count_hypercube_cliques(graph, d);

  long long ec = 0;
  for (int d = 0; d <= D; ++d) {
    long long term = (long long)out.clique_counts[d];
    ec += (d % 2 == 0) ? term : -term;
  }
  out.ec = ec;
  return out;
}

long long euler_characteristic_oracle(const FieldSample& field, double c) {
  if (!field.lattice) throw ValidationError("euler oracle: field has no lattice");
  const Lattice& lat = *field.lattice;
  const int D = lat.dims();

  // Cell-indexed membership bitmap: included and at-or-above threshold.
  std::vector<std::uint8_t> in(lat.cell_count(), 0);
  for (std::int64_t r = 0; r < lat.size(); ++r)
    if (field.values[r] >= c) in[lat.cell_of(r)] = 1;

  const auto& strides = lat.strides();
  std::vector<std::int32_t> idx(D);

  long long ec = 0;
  for (int d = 0; d <= D; ++d) {
    // Every d-subset of axes, as a bitmask over axes.
    for (unsigned subset = 0; subset < (1u << D); ++subset) {
      if (__builtin_popcount(subset) != d) continue;
      long long hits = 0;
      for (std::int64_t cell = 0; cell < lat.cell_count(); ++cell) {
        if (!in[cell]) continue;
        // Decode the grid indexes of this cell.
        std::int64_t rest = cell;
        bool fits = true;
        for (int k = 0; k < D; ++k) {
          idx[k] = (std::int32_t)(rest / strides[k]);
          rest %= strides[k];
          if ((subset >> k) & 1u)
            if (idx[k] + 1 >= lat.axis_size(k)) { fits = false; break; }
        }
        if (!fits) continue;
        // All 2^d corners of the hypercube spanned along the subset axes.
        bool all_in = true;
        for (unsigned corner = 1; corner < (1u << d) && all_in; ++corner) {
          std::int64_t cc = cell;
          unsigned bit = 0;
          for (int k = 0; k < D; ++k) {
            if (!((subset >> k) & 1u)) continue;
            if ((corner >> bit) & 1u) cc += strides[k];
            ++bit;
          }
          all_in = in[cc] != 0;
        }
        if (all_in) ++hits;
      }
      ec += (d % 2 == 0) ? hits : -hits;
    }
  }
  return ec;
}

}  // namespace tohm
