#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapcause {

// Widest feature count a Coalition bitmask can hold. Exact enumeration has
// its own, tighter cap (ExactOptions::enumeration_cap).
inline constexpr int kMaxFeatures = 30;

/// A subset of feature indices 0..m-1, stored as a bitmask.
class Coalition {
public:
    Coalition(std::uint32_t bits, int m) : bits_(bits), m_(m) {
        if (m < 1 || m > kMaxFeatures)
            throw std::invalid_argument("Coalition: feature count must be in [1, " +
                                        std::to_string(kMaxFeatures) + "], got " +
                                        std::to_string(m));
        if (m < 32 && (bits >> m) != 0)
            throw std::invalid_argument("Coalition: bitmask has bits >= m set");
    }

    static Coalition empty(int m) { return Coalition(0u, m); }
    static Coalition full(int m) { return Coalition(mask_all(m), m); }

    static Coalition of(std::initializer_list<int> indices, int m) {
        std::uint32_t bits = 0;
        for (int j : indices) bits |= bit_for(j, m);
        return Coalition(bits, m);
    }

    static Coalition from_indices(std::span<const int> indices, int m) {
        std::uint32_t bits = 0;
        for (int j : indices) bits |= bit_for(j, m);
        return Coalition(bits, m);
    }

    int dim() const { return m_; }
    int size() const { return std::popcount(bits_); }
    std::uint32_t bits() const { return bits_; }

    bool is_empty() const { return bits_ == 0; }
    bool is_full() const { return bits_ == mask_all(m_); }
    bool contains(int j) const { return (bits_ & bit_for(j, m_)) != 0; }

    Coalition with(int j) const { return Coalition(bits_ | bit_for(j, m_), m_); }
    Coalition without(int j) const { return Coalition(bits_ & ~bit_for(j, m_), m_); }
    Coalition complement() const { return Coalition(mask_all(m_) & ~bits_, m_); }

    /// Member indices in ascending order. This is also the coordinate order
    /// expected for any x_s vector passed alongside a coalition.
    std::vector<int> indices() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (int j = 0; j < m_; ++j)
            if (contains(j)) out.push_back(j);
        return out;
    }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (int j = 0; j < m_; ++j) {
            if (!contains(j)) continue;
            if (!first) s += ",";
            s += std::to_string(j);
            first = false;
        }
        s += "}";
        return s;
    }

    friend bool operator==(const Coalition&, const Coalition&) = default;

private:
    static std::uint32_t mask_all(int m) {
        return m >= 32 ? ~0u : (1u << m) - 1u;
    }

    static std::uint32_t bit_for(int j, int m) {
        if (j < 0 || j >= m)
            throw std::invalid_argument("Coalition: feature index " +
                                        std::to_string(j) + " out of range for m=" +
                                        std::to_string(m));
        return 1u << j;
    }

    std::uint32_t bits_;
    int m_;
};

}  // namespace shapcause
