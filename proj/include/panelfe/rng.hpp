#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace panelfe {

/* Purpose tags keep independent random streams from colliding when they
 * share a base seed. */
enum class RngPurpose : std::uint32_t {
  Panel = 1,     /* one stream per simulated replication */
  LsSeed = 2,    /* derives the per-replication LS seed */
  LsStart = 3,   /* one stream per LS starting value */
  Bootstrap = 4, /* one stream per bootstrap resample */
};

/* Counter-based stream: (seed, purpose, stream) fully determines the draw
 * sequence, independent of call order elsewhere. Normals use Box-Muller so
 * the output does not depend on the standard library's distribution choice. */
class RngStream {
public:
  RngStream(std::uint64_t seed, RngPurpose purpose, std::uint64_t stream) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(purpose),
        static_cast<std::uint32_t>(stream),
        static_cast<std::uint32_t>(stream >> 32),
    };
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /* uniform on [0, 1) */
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /* uniform on (0, 1], used where log(u) must stay finite */
  double uniform_pos() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /* integer uniform on [0, n), n >= 1; rejection keeps it unbiased */
  int uniform_int(int n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<int>(v % bound);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace panelfe
