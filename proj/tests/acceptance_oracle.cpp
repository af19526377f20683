#include "acceptance_oracle.hpp"

#include <algorithm>

namespace {

// Row-major flat index, last axis fastest.
long long flat_index(const std::vector<int>& shape, const std::vector<int>& idx) {
  long long f = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) f = f * shape[k] + idx[k];
  return f;
}

int popcount(unsigned v) {
  int n = 0;
  for (; v; v >>= 1) n += (int)(v & 1u);
  return n;
}

}  // namespace

long long mesh_euler_characteristic(const std::vector<int>& shape,
                                    const std::vector<std::uint8_t>& marked) {
  const int D = (int)shape.size();
  long long ec = 0;
  std::vector<int> idx(D), corner_idx(D);

  for (unsigned subset = 0; subset < (1u << D); ++subset) {
    const int d = popcount(subset);
    long long count = 0;

    // Odometer over every base cell of the grid.
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      bool fits = true;
      for (int k = 0; k < D && fits; ++k)
        if (((subset >> k) & 1u) && idx[k] + 1 >= shape[k]) fits = false;

      if (fits) {
        bool all_marked = true;
        for (unsigned corner = 0; corner < (1u << d) && all_marked; ++corner) {
          corner_idx = idx;
          int bit = 0;
          for (int k = 0; k < D; ++k) {
            if (!((subset >> k) & 1u)) continue;
            if ((corner >> bit) & 1u) ++corner_idx[k];
            ++bit;
          }
          all_marked = marked[flat_index(shape, corner_idx)] != 0;
        }
        if (all_marked) ++count;
      }

      int k = D - 1;
      while (k >= 0 && ++idx[k] == shape[k]) {
        idx[k] = 0;
        --k;
      }
      if (k < 0) break;
    }

    ec += (d % 2 == 0) ? count : -count;
  }
  return ec;
}
