#pragma once

#include "infogeo/errors.hpp"
#include "infogeo/jet.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace infogeo {

/// Open interval (lower, upper); infinite ends mean unbounded.
struct Interval
{
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool contains(double x) const noexcept { return x > lower && x < upper; }
};

/// Nonlinear domain constraint: `value(x) > 0` must hold.
struct NamedConstraint
{
    std::string name;
    std::function<double(std::span<const double>)> value;
};

/// Open domain: a coordinate box intersected with named strict inequalities.
class Domain
{
public:
    Domain() = default;

    explicit Domain(std::vector<Interval> box, std::vector<NamedConstraint> constraints = {})
        : box_(std::move(box)), constraints_(std::move(constraints))
    {
    }

    static Domain unbounded(std::size_t n) { return Domain(std::vector<Interval>(n)); }

    const std::vector<Interval>& box() const noexcept { return box_; }
    const std::vector<NamedConstraint>& constraints() const noexcept { return constraints_; }

    /// Description of the first violated condition, if any.
    std::optional<std::string> violation(std::span<const double> x) const
    {
        if (x.size() != box_.size()) {
            std::ostringstream os;
            os << "point has " << x.size() << " coordinates, domain expects " << box_.size();
            return os.str();
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x[i]) || !box_[i].contains(x[i])) {
                std::ostringstream os;
                os << "coordinate " << i << " = " << x[i] << " outside (" << box_[i].lower << ", "
                   << box_[i].upper << ")";
                return os.str();
            }
        }
        for (const auto& c : constraints_) {
            const double v = c.value(x);
            if (!(v > 0.0))
                return "constraint '" + c.name + "' violated (value " + std::to_string(v) + ")";
        }
        return std::nullopt;
    }

    bool contains(std::span<const double> x) const { return !violation(x).has_value(); }

    void check(std::span<const double> x) const
    {
        if (auto why = violation(x))
            throw DomainError(*why);
    }

    friend Domain intersect(const Domain& a, const Domain& b)
    {
        if (a.box_.size() != b.box_.size())
            throw InvalidArgument("cannot intersect domains of different dimension");
        std::vector<Interval> box(a.box_.size());
        for (std::size_t i = 0; i < box.size(); ++i)
            box[i] = {std::max(a.box_[i].lower, b.box_[i].lower), std::min(a.box_[i].upper, b.box_[i].upper)};
        auto constraints = a.constraints_;
        constraints.insert(constraints.end(), b.constraints_.begin(), b.constraints_.end());
        return Domain(std::move(box), std::move(constraints));
    }

private:
    std::vector<Interval> box_;
    std::vector<NamedConstraint> constraints_;
};

/// Element type of the span handed to a generic evaluator.
template <class Span>
using scalar_of = std::remove_cv_t<typename Span::element_type>;

/// Smooth scalar field on an open domain. The evaluator is instantiated for
/// plain doubles (fast value path) and for Jets (exact derivatives).
class ScalarField
{
public:
    using DoubleFn = std::function<double(std::span<const double>)>;
    using JetFn = std::function<Jet(std::span<const Jet>)>;

    ScalarField() = default;

    ScalarField(std::size_t arity, Domain domain, DoubleFn on_double, JetFn on_jet)
        : arity_(arity), domain_(std::move(domain)), on_double_(std::move(on_double)), on_jet_(std::move(on_jet))
    {
        if (arity_ == 0)
            throw InvalidArgument("scalar field needs at least one variable");
        if (domain_.box().size() != arity_)
            throw InvalidArgument("domain dimension does not match field arity");
    }

    /// Build from a callable usable as both `f(std::span<const double>)` and `f(std::span<const Jet>)`.
    template <class F>
    static ScalarField from_generic(std::size_t arity, Domain domain, F f)
    {
        return ScalarField(
            arity, std::move(domain), [f](std::span<const double> x) { return static_cast<double>(f(x)); },
            [f](std::span<const Jet> x) { return Jet(f(x)); });
    }

    std::size_t arity() const noexcept { return arity_; }
    const Domain& domain() const noexcept { return domain_; }

    double operator()(std::span<const double> x) const { return on_double_(x); }
    Jet operator()(std::span<const Jet> x) const { return on_jet_(x); }

    friend ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g)
    {
        if (f.arity_ != g.arity_)
            throw InvalidArgument("linear combination of fields with different arity");
        return ScalarField(
            f.arity_, intersect(f.domain_, g.domain_),
            [a, b, f, g](std::span<const double> x) { return a * f(x) + b * g(x); },
            [a, b, f, g](std::span<const Jet> x) { return Jet(a) * f(x) + Jet(b) * g(x); });
    }

private:
    std::size_t arity_ = 0;
    Domain domain_;
    DoubleFn on_double_;
    JetFn on_jet_;
};

} // namespace infogeo
