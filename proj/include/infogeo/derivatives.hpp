#pragma once

#include "infogeo/errors.hpp"
#include "infogeo/jet.hpp"
#include "infogeo/scalar_field.hpp"
#include "infogeo/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace infogeo {

/// Value and partial derivatives of a scalar field at one point.
/// Orders above `max_order` are left empty.
struct DerivativeStack
{
    int max_order = 0;
    double order0 = 0.0;
    Eigen::VectorXd order1;
    Eigen::MatrixXd order2;
    Tensor3 order3;
    Tensor4 order4;

    std::size_t variables() const noexcept { return static_cast<std::size_t>(order1.size()); }
};

namespace detail {

inline void fill_symmetric(DerivativeStack& s, std::span<const std::uint8_t> idx, double v)
{
    std::array<std::uint8_t, 4> p{};
    std::copy(idx.begin(), idx.end(), p.begin());
    const auto k = idx.size();
    do {
        switch (k) {
        case 1: s.order1(p[0]) = v; break;
        case 2: s.order2(p[0], p[1]) = v; break;
        case 3: s.order3(p[0], p[1], p[2]) = v; break;
        case 4: s.order4(p[0], p[1], p[2], p[3]) = v; break;
        default: break;
        }
    } while (std::next_permutation(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(k)));
}

inline DerivativeStack allocate_stack(std::size_t n, int max_order)
{
    DerivativeStack s;
    s.max_order = max_order;
    s.order1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    s.order2 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (max_order >= 3)
        s.order3 = Tensor3(n);
    if (max_order >= 4)
        s.order4 = Tensor4(n);
    return s;
}

} // namespace detail

/// Exact derivatives up to `max_order` (0..4) by Taylor propagation through the field's evaluator.
inline DerivativeStack evaluate_stack(const ScalarField& field, std::span<const double> point, int max_order = 4)
{
    if (max_order < 0 || max_order > JetLayout::max_order)
        throw InvalidArgument("max_order must lie in 0..4");
    field.domain().check(point);

    const std::size_t n = field.arity();
    const auto layout = JetLayout::get(n, max_order);
    std::vector<Jet> vars;
    vars.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        vars.push_back(Jet::variable(layout, i, point[i]));

    Jet result = field(std::span<const Jet>(vars));
    if (result.is_constant())
        result = Jet(layout, result.value());

    const auto c = result.coefficients();
    for (double v : c)
        if (!std::isfinite(v))
            throw NonFiniteError("non-finite Taylor coefficient");

    auto s = detail::allocate_stack(n, std::max(max_order, 0));
    s.max_order = max_order;
    s.order0 = c[0];
    for (std::size_t m = 1; m < layout->size(); ++m)
        detail::fill_symmetric(s, layout->indices(m), layout->derivative_weight(m) * c[m]);
    if (max_order < 2)
        s.order2.resize(0, 0);
    if (max_order < 1)
        s.order1.resize(0);
    return s;
}

/// Central-difference estimate of all derivatives up to order 4.
///
/// Each 1-D stencil is fourth-order accurate (truncation O(step^4)); mixed
/// partials use the tensor product of the per-variable stencils, so every
/// order carries O(step^4) truncation error plus roughly eps * |f| / step^k
/// rounding. Stencils reach 3 steps; the point needs a margin of 4 steps
/// from the box boundary.
inline DerivativeStack finite_difference_stack(const ScalarField& field, std::span<const double> point, double step)
{
    if (!(step > 0.0))
        throw InvalidArgument("finite difference step must be positive");
    field.domain().check(point);
    const std::size_t n = field.arity();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& iv = field.domain().box()[i];
        if (point[i] - 4.0 * step <= iv.lower || point[i] + 4.0 * step >= iv.upper)
            throw DomainError("finite difference stencil leaves the domain box in coordinate " + std::to_string(i));
    }

    // Stencils indexed by derivative count; offsets run over -3..3.
    static constexpr std::array<std::array<double, 7>, 5> stencil = {{
        {0, 0, 0, 1, 0, 0, 0},
        {0, 1.0 / 12, -2.0 / 3, 0, 2.0 / 3, -1.0 / 12, 0},
        {0, -1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12, 0},
        {1.0 / 8, -1.0, 13.0 / 8, 0, -13.0 / 8, 1.0, -1.0 / 8},
        {-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6},
    }};

    std::map<std::vector<std::int8_t>, double> cache;
    std::vector<double> x(point.begin(), point.end());
    auto eval = [&](const std::vector<std::int8_t>& off) {
        auto it = cache.find(off);
        if (it != cache.end())
            return it->second;
        for (std::size_t i = 0; i < n; ++i)
            x[i] = point[i] + off[i] * step;
        if (auto why = field.domain().violation(x))
            throw DomainError("finite difference stencil leaves the domain: " + *why);
        const double v = field(std::span<const double>(x));
        if (!std::isfinite(v))
            throw NonFiniteError("non-finite field value inside the stencil");
        cache.emplace(off, v);
        return v;
    };

    // Derivative for a multiset given by per-variable counts.
    auto mixed = [&](const std::vector<int>& counts) {
        std::vector<std::size_t> active;
        int order = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (counts[i] > 0) {
                active.push_back(i);
                order += counts[i];
            }
        std::vector<std::int8_t> off(n, 0);
        double acc = 0.0;
        // Odometer over the 7^|active| stencil grid, skipping zero weights.
        std::vector<int> pos(active.size(), 0);
        while (true) {
            double w = 1.0;
            for (std::size_t a = 0; a < active.size(); ++a) {
                w *= stencil[static_cast<std::size_t>(counts[active[a]])][static_cast<std::size_t>(pos[a])];
                off[active[a]] = static_cast<std::int8_t>(pos[a] - 3);
            }
            if (w != 0.0)
                acc += w * eval(off);
            std::size_t a = 0;
            while (a < active.size() && ++pos[a] == 7)
                pos[a++] = 0;
            if (a == active.size())
                break;
        }
        return acc / std::pow(step, order);
    };

    const auto layout = JetLayout::get(n, 4);
    auto s = detail::allocate_stack(n, 4);
    s.order0 = eval(std::vector<std::int8_t>(n, 0));
    std::vector<int> counts(n);
    for (std::size_t m = 1; m < layout->size(); ++m) {
        std::fill(counts.begin(), counts.end(), 0);
        for (auto i : layout->indices(m))
            ++counts[i];
        detail::fill_symmetric(s, layout->indices(m), mixed(counts));
    }
    return s;
}

} // namespace infogeo
