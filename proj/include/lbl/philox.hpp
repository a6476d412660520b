#ifndef LBL_PHILOX_HPP
#define LBL_PHILOX_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace lbl {

/// Philox4x32-10 block cipher used as a counter-based generator.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u, W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
               std::uint32_t(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/**
 * \brief Independent stream for one Monte Carlo path.
 *
 * The key is the seed and the counter's upper half is the path index, so the
 * draws of a path do not depend on how paths are scheduled.
 */
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, path_(path)
    {
    }

    std::uint32_t next_u32()
    {
        if (pos_ == 4) {
            buf_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(path_),
                               std::uint32_t(path_ >> 32)},
                              key_);
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform on the open interval (0,1) with 53 random bits.
    double uniform()
    {
        std::uint64_t a = next_u32() >> 5, b = next_u32() >> 6;
        return (double(a * 67108864u + b) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = uniform(), v = uniform();
        double rad = std::sqrt(-2.0 * std::log(u)), ang = 6.283185307179586 * v;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t path_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lbl

#endif
