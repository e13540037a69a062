#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapcause/coalition.hpp"
#include "shapcause/rng.hpp"

namespace shapcause {

/// The coalition payoff contract v(S). Implementations must be deterministic
/// (sampling backends derive their randomness from a fixed per-coalition
/// stream) and safe to call from multiple threads.
class ValueFunction {
public:
    virtual ~ValueFunction() = default;

    virtual int dim() const = 0;
    virtual double value(const Coalition& s) const = 0;
};

/// A game given as an explicit table of 2^m payoffs, indexed by coalition
/// bitmask. Independent of any model or dataset; the axiom and estimator
/// tests run on these.
class TableValueFunction final : public ValueFunction {
public:
    TableValueFunction(int m, std::vector<double> values)
        : m_(m), values_(std::move(values)) {
        if (m < 1 || m > kMaxFeatures)
            throw std::invalid_argument("TableValueFunction: bad feature count");
        if (values_.size() != (std::size_t{1} << m))
            throw std::invalid_argument(
                "TableValueFunction: table must have exactly 2^m entries, got " +
                std::to_string(values_.size()));
        for (double v : values_)
            if (!std::isfinite(v))
                throw std::invalid_argument("TableValueFunction: non-finite payoff");
    }

    /// Uniform random payoffs in [lo, hi).
    static TableValueFunction random(int m, std::uint64_t seed, double lo = -1.0,
                                     double hi = 1.0) {
        Rng rng(seed);
        std::vector<double> values(std::size_t{1} << m);
        for (auto& v : values) v = rng.uniform(lo, hi);
        return TableValueFunction(m, std::move(values));
    }

    int dim() const override { return m_; }

    double value(const Coalition& s) const override { return values_[s.bits()]; }
    double value_at(std::uint32_t bits) const { return values_[bits]; }

    const std::vector<double>& values() const { return values_; }

    TableValueFunction scaled(double a) const {
        std::vector<double> v = values_;
        for (auto& x : v) x *= a;
        return TableValueFunction(m_, std::move(v));
    }

    friend TableValueFunction operator+(const TableValueFunction& a,
                                        const TableValueFunction& b) {
        if (a.m_ != b.m_)
            throw std::invalid_argument("TableValueFunction: mismatched feature counts");
        std::vector<double> v(a.values_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] + b.values_[i];
        return TableValueFunction(a.m_, std::move(v));
    }

private:
    int m_;
    std::vector<double> values_;
};

}  // namespace shapcause
