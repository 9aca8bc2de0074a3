#include "mmc/rng.hpp"

namespace mmc {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

__extension__ typedef unsigned __int128 u128;

inline void mul_hilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) noexcept {
    const u128 p = static_cast<u128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> c,
                                        std::array<std::uint64_t, 2> k) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint64_t hi0, lo0, hi1, lo1;
        mul_hilo(kMul0, c[0], hi0, lo0);
        mul_hilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

std::uint64_t RngStream::bits_at(std::uint64_t index) const noexcept {
    return philox4x64({index >> 2, 0, 0, 0}, {seed_, stream_id_})[index & 3];
}

std::uint64_t RngStream::next_bits() noexcept {
    const std::uint64_t block = position_ >> 2;
    if (block != cached_block_) {
        cache_ = philox4x64({block, 0, 0, 0}, {seed_, stream_id_});
        cached_block_ = block;
    }
    return cache_[position_++ & 3];
}

double RngStream::next_uniform() noexcept { return bits_to_open_uniform(next_bits()); }

}  // namespace mmc
