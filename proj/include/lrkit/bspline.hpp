#pragma once

#include "lrkit/mesh.hpp"
#include "lrkit/param.hpp"

#include <array>
#include <compare>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

namespace lrkit {

/// The p+2 knots (with repetitions) of one univariate B-spline factor.
class LocalKnotVector {
public:
    LocalKnotVector() = default;
    explicit LocalKnotVector(std::vector<Param> knots);

    int degree() const { return static_cast<int>(knots_.size()) - 2; }
    std::size_t size() const { return knots_.size(); }
    const Param& front() const { return knots_.front(); }
    const Param& back() const { return knots_.back(); }
    const Param& operator[](std::size_t i) const { return knots_[i]; }
    const std::vector<Param>& knots() const { return knots_; }
    int count(const Param& t) const;

    /// Knots as doubles, for evaluation.
    std::vector<double> as_double() const;

    friend auto operator<=>(const LocalKnotVector& a, const LocalKnotVector& b)
    {
        return a.knots_ <=> b.knots_;
    }
    friend bool operator==(const LocalKnotVector&, const LocalKnotVector&) = default;

private:
    std::vector<Param> knots_;
};

/// Value of the univariate B-spline on `knots` at x. The support is treated
/// as half-open [t_0, t_last) unless closed_right is set.
double bspline_value(std::span<const double> knots, double x, bool closed_right);

/// Value and first derivative.
std::pair<double, double> bspline_value_deriv(std::span<const double> knots, double x,
                                              bool closed_right);

class TensorBSpline {
public:
    TensorBSpline() = default;
    TensorBSpline(LocalKnotVector kx, LocalKnotVector ky);

    const LocalKnotVector& kx() const { return kx_; }
    const LocalKnotVector& ky() const { return ky_; }
    const LocalKnotVector& knots(Direction dir) const
    {
        return dir == Direction::Vertical ? kx_ : ky_;
    }
    int degree() const { return kx_.degree(); }
    Rect support() const { return {kx_.front(), ky_.front(), kx_.back(), ky_.back()}; }

    /// Product of the univariate factors. Zero outside the half-open support;
    /// when `domain` is given its right/top edges count as closed.
    double evaluate(const Point& x, const Rect* domain = nullptr) const;

    /// Value and gradient (value, d/dx, d/dy) under the same conventions.
    std::array<double, 3> evaluate_with_gradient(const Point& x, const Rect* domain = nullptr) const;

    friend auto operator<=>(const TensorBSpline&, const TensorBSpline&) = default;
    friend bool operator==(const TensorBSpline&, const TensorBSpline&) = default;

private:
    LocalKnotVector kx_, ky_;
};

/// B-splines deduplicated by their local knot vectors.
using SplineSet = std::set<TensorBSpline>;

struct SplitResult {
    TensorBSpline first;
    Param alpha1;
    TensorBSpline second;
    Param alpha2;
};

/// Knot insertion of t into the local knot vector in direction dir:
/// B = alpha1 * first + alpha2 * second.
SplitResult split(const TensorBSpline& b, Direction dir, const Param& t);

/// Univariate counterpart on a bare knot vector.
std::pair<LocalKnotVector, LocalKnotVector> split_knots(const LocalKnotVector& kv,
                                                        const Param& t, Param* alpha1 = nullptr,
                                                        Param* alpha2 = nullptr);

struct SupportViolation {
    enum class Kind {
        Missing,  ///< a meshline crossing the support is absent from the knots
        Excess    ///< a knot repeats more often than the meshline allows
    };
    Direction dir;
    Param value;
    Kind kind;
};

struct SupportCheck {
    bool minimal = true;
    std::optional<SupportViolation> violation;
};

/// Checks that every meshline traversing supp B appears in B's local knot
/// vectors with its full multiplicity. Reports the first violation in
/// (vertical before horizontal, ascending coordinate) order.
SupportCheck minimal_support(const TensorBSpline& b, const LRMesh& mesh);

/// Splits non-minimal members until all have minimal support on mesh.
/// When `shuffle` is given, the worklist is popped in random order.
SplineSet restore_minimal_support(const SplineSet& set, const LRMesh& mesh,
                                  std::mt19937_64* shuffle = nullptr);

int supports_over_cell(const SplineSet& set, const Cell& cell);

struct OverloadReport {
    std::vector<Cell> overloaded;
    /// Cells covered by fewer than (p+1)^2 supports; never expected on
    /// meshes grown from open tensor meshes.
    std::vector<Cell> underloaded;
};

OverloadReport overloaded_cells(const SplineSet& set, const LRMesh& mesh);

/// Tensor-product B-splines of an open tensor mesh (every line full-span).
SplineSet tensor_basis(const LRMesh& mesh);

/// LR B-splines of mesh, rebuilt by inserting its internal segments into
/// the boundary-only mesh in any order in which each insertion traverses a
/// support. Throws InvalidArgument if no such order is found.
SplineSet lr_basis(const LRMesh& mesh);

}  // namespace lrkit
