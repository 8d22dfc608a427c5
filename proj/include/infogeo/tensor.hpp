#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace infogeo {

/// Dense tensor of fixed rank with every index running over 0..n-1.
/// Row-major storage: the last index is contiguous.
template <std::size_t Rank>
class CubeTensor
{
public:
    CubeTensor() = default;
    explicit CubeTensor(std::size_t n, double fill = 0.0) : n_(n), data_(power(n), fill) {}

    std::size_t extent() const noexcept { return n_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    template <class... Index>
    double& operator()(Index... idx) noexcept
    {
        static_assert(sizeof...(Index) == Rank);
        return data_[offset(static_cast<std::size_t>(idx)...)];
    }

    template <class... Index>
    double operator()(Index... idx) const noexcept
    {
        static_assert(sizeof...(Index) == Rank);
        return data_[offset(static_cast<std::size_t>(idx)...)];
    }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    double max_abs() const noexcept
    {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

    CubeTensor& operator+=(const CubeTensor& rhs)
    {
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] += rhs.data_[k];
        return *this;
    }

    CubeTensor& operator*=(double s)
    {
        for (auto& v : data_)
            v *= s;
        return *this;
    }

    friend CubeTensor operator+(CubeTensor lhs, const CubeTensor& rhs) { return lhs += rhs; }
    friend CubeTensor operator*(double s, CubeTensor t) { return t *= s; }

    friend double max_abs_difference(const CubeTensor& a, const CubeTensor& b)
    {
        double m = 0.0;
        for (std::size_t k = 0; k < a.data_.size(); ++k)
            m = std::max(m, std::abs(a.data_[k] - b.data_[k]));
        return m;
    }

    bool operator==(const CubeTensor&) const = default;

private:
    static std::size_t power(std::size_t n)
    {
        std::size_t s = 1;
        for (std::size_t r = 0; r < Rank; ++r)
            s *= n;
        return s;
    }

    template <class... Index>
    std::size_t offset(Index... idx) const noexcept
    {
        std::size_t o = 0;
        ((o = o * n_ + idx), ...);
        return o;
    }

    std::size_t n_ = 0;
    std::vector<double> data_;
};

using Tensor3 = CubeTensor<3>;
using Tensor4 = CubeTensor<4>;

} // namespace infogeo
