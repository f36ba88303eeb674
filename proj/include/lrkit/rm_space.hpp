#pragma once

#include "lrkit/bspline.hpp"
#include "lrkit/mesh.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace lrkit {

/// B-splines sharing one support. For an RM space of smoothness s a system
/// holds (s+1)^2 members of degree 2s+1, ordered x-member major.
struct BSplineSystem {
    Rect support;
    std::vector<TensorBSpline> members;
};

/// An RM spline space, stored as its bilinear skeleton: the bilinear LR
/// B-splines on a mesh with simple internal lines, plus the smoothness s.
/// The degree 2s+1 functions are only built when needed.
struct RMSpace {
    int s = 0;
    LRMesh skeleton_mesh{Rect{0, 0, 1, 1}, 1};
    SplineSet skeleton;

    int degree() const { return 2 * s + 1; }
    const Rect& domain() const { return skeleton_mesh.domain(); }
    /// The skeleton mesh with RM multiplicities (s+1 inside, 2s+2 boundary).
    LRMesh mesh() const;
};

/// Uniform m x n skeleton.
RMSpace tensor_space(int m, int n, const Rect& domain, int s);

/// Space on a given mesh, which may be bilinear or in RM shape for s. The
/// skeleton is rebuilt with lr_basis(); throws InvariantError if it is
/// overloaded.
RMSpace space_from_mesh(const LRMesh& mesh, int s);

/// Partition of a set by support rectangle.
std::vector<BSplineSystem> group_systems(const SplineSet& set);

/// The system of degree 2s+1 generated by one bilinear function: every knot
/// repetition of its local knot vectors is multiplied by s+1 and the
/// (s+1) consecutive windows of 2s+3 knots are taken in each direction.
BSplineSystem lift_function(const TensorBSpline& bilinear, int s);

/// Univariate counterpart of lift_function on one local knot vector.
std::vector<LocalKnotVector> lift_knots(const LocalKnotVector& bilinear, int s);

std::vector<BSplineSystem> lift_space(const SplineSet& skeleton, const LRMesh& mesh, int s);

struct InsertResult {
    RMSpace space;
    /// The segment actually inserted, after extensions.
    MeshSegment inserted;
    int extensions = 0;
};

/// Inserts a multiplicity-1 segment into the skeleton and extends it until
/// no cell is overloaded.
InsertResult rm_insert(const RMSpace& space, const MeshSegment& seg);

/// Midpoint bisection segments for the marked cells: through each cell a
/// vertical and a horizontal line spanning the supports of the skeleton
/// functions covering it. Collinear overlapping segments are merged.
std::vector<MeshSegment> refinement_segments(const RMSpace& space,
                                             const std::vector<Cell>& marked);

struct RefineOptions {
    /// Called after every accepted insertion with the inserted segment and
    /// the current skeleton mesh/set; used by tests to check invariants.
    std::function<void(const MeshSegment&, const LRMesh&, const SplineSet&)> on_insert;
};

RMSpace rm_refine_marked(const RMSpace& space, const std::vector<Cell>& marked,
                         const RefineOptions& options = {});

/// All RM functions nonzero on the cell containing x, with their values at x
/// (zeros included). Four systems are returned for every x in the domain.
std::vector<std::pair<TensorBSpline, double>> basis_at(const RMSpace& space, const Point& x);

/// Skeleton functions whose support contains the half-open cell at x.
std::vector<TensorBSpline> active_skeleton(const RMSpace& space, const Point& x);

bool admissible_check(const LRMesh& mesh, int s);

std::size_t cardinality(const RMSpace& space);

}  // namespace lrkit
