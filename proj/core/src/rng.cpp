#include "wfldp/rng.hpp"

namespace wfldp {

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& s : s_) {
    x = splitmix64(x);
    s = x;
  }
}

Xoshiro256pp stream_engine(std::uint64_t seed, std::uint64_t index) noexcept {
  return Xoshiro256pp(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return splitmix64(splitmix64(seed) + 0xd1b54a32d192ed03ULL * (tag + 1));
}

}  // namespace wfldp
