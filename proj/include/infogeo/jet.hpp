#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet holds the Taylor coefficients c_a of a scalar function around a point,
// one per monomial x^a with |a| <= order.  Arithmetic propagates them exactly,
// so partial derivatives come out as a! * c_a with no step-size error and with
// Schwarz symmetry built in (a derivative is read from a single coefficient).

#include "infogeo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace infogeo {

/// Monomial bookkeeping shared by every Jet of the same (variables, order).
class JetLayout
{
public:
    struct ProductTerm
    {
        std::uint32_t lhs;
        std::uint32_t rhs;
        std::uint32_t out;
    };

    static constexpr int max_order = 4;

    /// Cached, thread-safe access. Layouts are immutable once built.
    static std::shared_ptr<const JetLayout> get(std::size_t variables, int order)
    {
        if (variables == 0)
            throw InvalidArgument("jet layout needs at least one variable");
        if (order < 0 || order > max_order)
            throw InvalidArgument("jet order must lie in 0..4");

        static std::mutex mutex;
        static std::map<std::pair<std::size_t, int>, std::shared_ptr<const JetLayout>> cache;
        std::lock_guard lock(mutex);
        auto& slot = cache[{variables, order}];
        if (!slot)
            slot = std::shared_ptr<const JetLayout>(new JetLayout(variables, order));
        return slot;
    }

    std::size_t variables() const noexcept { return n_; }
    int order() const noexcept { return order_; }
    std::size_t size() const noexcept { return monomials_.size(); }

    int degree(std::size_t monomial) const { return static_cast<int>(monomials_[monomial].size()); }

    /// Index tuple (sorted) of a monomial: {0,0,2} is x0^2 x2.
    std::span<const std::uint8_t> indices(std::size_t monomial) const { return monomials_[monomial]; }

    /// Monomial index for an index tuple in any order.
    std::size_t index(std::span<const std::size_t> tuple) const
    {
        std::uint8_t sorted[max_order] = {};
        const std::size_t k = tuple.size();
        for (std::size_t t = 0; t < k; ++t)
            sorted[t] = static_cast<std::uint8_t>(tuple[t]);
        std::sort(sorted, sorted + k);
        return lookup_.at(key(std::span<const std::uint8_t>(sorted, k)));
    }

    /// a! for the monomial, i.e. the factor turning c_a into the partial derivative.
    double derivative_weight(std::size_t monomial) const { return weights_[monomial]; }

    std::span<const ProductTerm> products() const { return products_; }

private:
    JetLayout(std::size_t n, int order) : n_(n), order_(order)
    {
        if (n > 255)
            throw InvalidArgument("jet layout supports at most 255 variables");

        std::vector<std::uint8_t> current;
        monomials_.push_back({});
        for (int d = 1; d <= order; ++d)
            enumerate(d, 0, current);

        for (std::size_t m = 0; m < monomials_.size(); ++m) {
            lookup_.emplace(key(monomials_[m]), m);
            double w = 1.0;
            const auto& mono = monomials_[m];
            for (std::size_t s = 0; s < mono.size();) {
                std::size_t run = 1;
                while (s + run < mono.size() && mono[s + run] == mono[s])
                    ++run;
                for (std::size_t f = 2; f <= run; ++f)
                    w *= static_cast<double>(f);
                s += run;
            }
            weights_.push_back(w);
        }

        std::vector<std::uint8_t> merged;
        for (std::size_t a = 0; a < monomials_.size(); ++a) {
            for (std::size_t b = 0; b < monomials_.size(); ++b) {
                if (monomials_[a].size() + monomials_[b].size() > static_cast<std::size_t>(order))
                    continue;
                merged.clear();
                std::merge(monomials_[a].begin(), monomials_[a].end(), monomials_[b].begin(),
                           monomials_[b].end(), std::back_inserter(merged));
                products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                                     static_cast<std::uint32_t>(lookup_.at(key(merged)))});
            }
        }
    }

    void enumerate(int remaining, std::size_t start, std::vector<std::uint8_t>& current)
    {
        if (remaining == 0) {
            monomials_.push_back(current);
            return;
        }
        for (std::size_t i = start; i < n_; ++i) {
            current.push_back(static_cast<std::uint8_t>(i));
            enumerate(remaining - 1, i, current);
            current.pop_back();
        }
    }

    std::uint64_t key(std::span<const std::uint8_t> sorted) const
    {
        std::uint64_t k = 0;
        for (auto i : sorted)
            k = k * (n_ + 1) + (i + 1);
        return k;
    }

    std::size_t n_;
    int order_;
    std::vector<std::vector<std::uint8_t>> monomials_;
    std::vector<double> weights_;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
    std::vector<ProductTerm> products_;
};

using JetLayoutPtr = std::shared_ptr<const JetLayout>;

/// Truncated Taylor polynomial. A Jet without a layout is a plain constant,
/// which lets generic code write `T acc = 0.0;`.
class Jet
{
public:
    Jet() : coeffs_{0.0} {}
    Jet(double constant) : coeffs_{constant} {} // NOLINT(google-explicit-constructor)
    Jet(JetLayoutPtr layout, double constant) : layout_(std::move(layout))
    {
        coeffs_.assign(layout_->size(), 0.0);
        coeffs_[0] = constant;
    }

    /// The independent variable x_i evaluated at `value`.
    static Jet variable(const JetLayoutPtr& layout, std::size_t i, double value)
    {
        if (i >= layout->variables())
            throw InvalidArgument("jet variable index out of range");
        Jet j(layout, value);
        if (layout->order() >= 1)
            j.coeffs_[1 + i] = 1.0;
        return j;
    }

    double value() const noexcept { return coeffs_[0]; }
    const JetLayoutPtr& layout() const noexcept { return layout_; }
    std::span<const double> coefficients() const noexcept { return coeffs_; }
    bool is_constant() const noexcept { return !layout_; }

    Jet operator-() const
    {
        Jet r = *this;
        for (auto& c : r.coeffs_)
            c = -c;
        return r;
    }

    Jet& operator+=(const Jet& rhs)
    {
        if (rhs.is_constant()) {
            coeffs_[0] += rhs.coeffs_[0];
            return *this;
        }
        if (is_constant()) {
            const double c = coeffs_[0];
            *this = rhs;
            coeffs_[0] += c;
            return *this;
        }
        for (std::size_t k = 0; k < coeffs_.size(); ++k)
            coeffs_[k] += rhs.coeffs_[k];
        return *this;
    }

    Jet& operator-=(const Jet& rhs) { return *this += -rhs; }

    Jet& operator*=(const Jet& rhs)
    {
        *this = *this * rhs;
        return *this;
    }

    Jet& operator/=(const Jet& rhs)
    {
        *this = *this / rhs;
        return *this;
    }

    friend Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
    friend Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }

    friend Jet operator*(const Jet& lhs, const Jet& rhs)
    {
        if (lhs.is_constant())
            return rhs.scaled(lhs.coeffs_[0]);
        if (rhs.is_constant())
            return lhs.scaled(rhs.coeffs_[0]);
        Jet r(lhs.layout_, 0.0);
        const double* a = lhs.coeffs_.data();
        const double* b = rhs.coeffs_.data();
        double* c = r.coeffs_.data();
        for (const auto& t : lhs.layout_->products())
            c[t.out] += a[t.lhs] * b[t.rhs];
        return r;
    }

    friend Jet operator/(const Jet& lhs, const Jet& rhs)
    {
        if (rhs.is_constant()) {
            if (rhs.coeffs_[0] == 0.0)
                throw NonFiniteError("division by zero");
            return lhs.scaled(1.0 / rhs.coeffs_[0]);
        }
        return lhs * reciprocal(rhs);
    }

    friend Jet reciprocal(const Jet& u)
    {
        const double u0 = u.value();
        if (u0 == 0.0)
            throw NonFiniteError("division by zero");
        return u.compose([u0](int k) {
            const double s = (k % 2 == 0) ? 1.0 : -1.0;
            return s / std::pow(u0, k + 1);
        });
    }

    friend Jet exp(const Jet& u)
    {
        const double e = std::exp(u.value());
        if (!std::isfinite(e))
            throw NonFiniteError("exp overflow");
        return u.compose([e](int k) { return e / factorial(k); });
    }

    friend Jet log(const Jet& u)
    {
        const double u0 = u.value();
        if (!(u0 > 0.0))
            throw NonFiniteError("log of a non-positive value");
        return u.compose([u0](int k) {
            if (k == 0)
                return std::log(u0);
            const double s = (k % 2 == 1) ? 1.0 : -1.0;
            return s / (k * std::pow(u0, k));
        });
    }

    friend Jet pow(const Jet& u, double p)
    {
        const double u0 = u.value();
        const bool integral = p == std::floor(p);
        if (!integral && !(u0 > 0.0))
            throw NonFiniteError("non-integer power of a non-positive value");
        if (integral && p < 0.0 && u0 == 0.0)
            throw NonFiniteError("negative power of zero");
        return u.compose([u0, p, integral](int k) {
            double binom = 1.0;
            for (int t = 0; t < k; ++t)
                binom *= (p - t) / (t + 1);
            if (binom == 0.0)
                return 0.0;
            if (integral && u0 == 0.0)
                return (p - k == 0.0) ? binom : 0.0;
            return binom * std::pow(u0, p - k);
        });
    }

    friend Jet pow(const Jet& u, const Jet& p)
    {
        if (p.is_constant())
            return pow(u, p.value());
        return exp(p * log(u));
    }

    friend Jet pow(double u, const Jet& p) { return pow(Jet(u), p); }

    friend Jet sqrt(const Jet& u) { return pow(u, 0.5); }

private:
    static double factorial(int k)
    {
        double f = 1.0;
        for (int t = 2; t <= k; ++t)
            f *= t;
        return f;
    }

    Jet scaled(double s) const
    {
        Jet r = *this;
        for (auto& c : r.coeffs_)
            c *= s;
        return r;
    }

    // f(u0 + h) = sum_k f_k h^k with h nilpotent of order `order + 1`; Horner in h.
    template <class Coefficient>
    Jet compose(Coefficient coefficient) const
    {
        if (is_constant())
            return Jet(coefficient(0));
        const int order = layout_->order();
        Jet h = *this;
        h.coeffs_[0] = 0.0;
        Jet r(layout_, coefficient(order));
        for (int k = order - 1; k >= 0; --k) {
            r = r * h;
            r.coeffs_[0] += coefficient(k);
        }
        return r;
    }

    JetLayoutPtr layout_;
    std::vector<double> coeffs_;
};

} // namespace infogeo
