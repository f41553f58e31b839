#pragma once
#include <cstdint>

namespace fsuc {

// Counter-seeded stream: draw i of run `seed` is reproducible regardless of
// how draws are distributed over threads.
class RngStream {
public:
  RngStream(uint64_t seed, uint64_t index) : state_(mix(seed ^ mix(index + 0x9e3779b97f4a7c15ull))) {
    if (state_ == 0) state_ = 0x106689d45497fdb5ull;
  }

  uint64_t next_u64() {
    state_ = mix(state_ + 0x9e3779b97f4a7c15ull);
    return state_;
  }

  // uniform on [0,1)
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  uint64_t state_;
};

}  // namespace fsuc
