#ifndef CUTS_RNG_HPP_
#define CUTS_RNG_HPP_

#include <cstdint>
#include <random>

namespace cuts {

// splitmix64 finalizer; used to decorrelate (seed, stream) pairs.
std::uint64_t mix64(std::uint64_t x) noexcept;

// A reproducible random stream identified by (seed, stream id).
//
// Identical (seed, stream id) pairs produce identical draw sequences on every
// platform: the engine is std::mt19937_64 (whose output is fully specified by
// the standard) and uniform doubles are built from the top 53 bits by hand
// rather than through std::uniform_real_distribution.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  // Number of draws taken from this stream so far.
  std::uint64_t draws() const noexcept { return draws_; }

  // Uniform on [0, 1).
  double uniform();
  // Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Child stream. Depends only on (seed, stream id, child), never on how many
  // draws the parent has consumed.
  RngStream derive(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace cuts

#endif  // CUTS_RNG_HPP_
