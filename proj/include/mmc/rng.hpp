#pragma once

#include <array>
#include <cstdint>

namespace mmc {

/// Philox4x64-10 block function: counter-based, so any draw index can be computed
/// directly without advancing state.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) noexcept;

/// A reproducible uniform stream keyed by (seed, stream_id). The position counter is the
/// only mutable state; a single stream must not be shared between concurrent consumers.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t position() const noexcept { return position_; }

    /// Raw 64-bit draw at an absolute index; does not move the stream.
    std::uint64_t bits_at(std::uint64_t index) const noexcept;

    std::uint64_t next_bits() noexcept;

    /// Uniform on the open interval (0, 1): (k + 0.5)·2⁻⁵² for the top 52 bits k. With 53
    /// bits the largest value would round to 1.
    double next_uniform() noexcept;

    void skip(std::uint64_t count) noexcept { position_ += count; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t position_ = 0;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<std::uint64_t, 4> cache_{};
};

inline double bits_to_open_uniform(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace mmc
