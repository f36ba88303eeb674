#pragma once

#include "lrkit/param.hpp"

#include <map>
#include <vector>

namespace lrkit {

/// Axis-aligned meshline piece with a multiplicity. Vertical segments sit at
/// x = fixed and run over y in [lo, hi]; horizontal ones the other way round.
struct MeshSegment {
    Direction dir = Direction::Vertical;
    Param fixed;
    Param lo, hi;
    int mult = 1;

    friend bool operator==(const MeshSegment&, const MeshSegment&) = default;
};

bool operator<(const MeshSegment& a, const MeshSegment& b);

/// Cells are the rectangles of the box partition induced by the segments.
using Cell = Rect;

/// Open bivariate LR mesh. The segment set is kept normalized: each
/// meshline (direction + fixed coordinate) is a sorted list of maximal,
/// non-overlapping pieces of constant multiplicity.
///
/// Both bidegree components share the same degree; the boundary lines carry
/// multiplicity degree + 1 and every stored multiplicity is capped there.
class LRMesh {
public:
    struct Piece {
        Param lo, hi;
        int mult;
        friend bool operator==(const Piece&, const Piece&) = default;
    };
    using Line = std::vector<Piece>;
    using LineMap = std::map<Param, Line>;

    /// Open mesh made of the four boundary lines only.
    LRMesh(const Rect& domain, int degree);

    /// Builds a mesh from an unordered segment list, as read from a file.
    /// Boundary lines are added if absent; the result is validated.
    static LRMesh from_segments(const Rect& domain, int degree,
                                const std::vector<MeshSegment>& segments);

    const Rect& domain() const { return domain_; }
    int degree() const { return degree_; }
    int max_multiplicity() const { return degree_ + 1; }

    /// Sets every point of seg to max(current, seg.mult). Endpoints of the
    /// segment must lie on perpendicular meshlines so that the partition
    /// stays a box partition.
    void insert(const MeshSegment& seg);

    /// Adds seg.mult to the multiplicity along seg (uncovered parts count as 0).
    void raise(const MeshSegment& seg);

    /// Minimum multiplicity over [lo, hi] of the line (dir, fixed); 0 when
    /// some part of the interval is not covered.
    int multiplicity_along(Direction dir, const Param& fixed, const Param& lo,
                           const Param& hi) const;

    /// Multiplicity at the single point `at` of line (dir, fixed), taking the
    /// larger of the two sides at piece boundaries.
    int multiplicity_at(Direction dir, const Param& fixed, const Param& at) const;

    /// True if (dir, fixed) has a piece with lo <= at < hi.
    bool covers_right_of(Direction dir, const Param& fixed, const Param& at) const;

    const LineMap& lines(Direction dir) const { return lines_[axis(dir)]; }

    bool is_boundary(Direction dir, const Param& fixed) const;

    /// Normalized segment list: verticals first, ascending (fixed, lo).
    std::vector<MeshSegment> segments() const;

    std::vector<Cell> cells() const;

    /// Cells lying entirely inside region.
    std::vector<Cell> cells_within(const Rect& region) const;

    /// The cell containing (x, y) under the half-open convention, closed at
    /// the right/top domain boundary.
    Cell cell_at(const Param& x, const Param& y) const;

    /// Same geometry, multiplicities mapped through fn(is_boundary, mult).
    template <typename Fn>
    LRMesh remapped(int new_degree, Fn fn) const
    {
        LRMesh out(domain_, degree_);
        out.degree_ = new_degree;
        for (int ax = 0; ax < 2; ++ax) {
            out.lines_[ax] = lines_[ax];
            for (auto& [fixed, line] : out.lines_[ax]) {
                const bool bnd = fixed == domain_.lo(ax) || fixed == domain_.hi(ax);
                for (auto& piece : line) piece.mult = fn(bnd, piece.mult);
            }
        }
        return out;
    }

    friend bool operator==(const LRMesh& a, const LRMesh& b)
    {
        return a.domain_ == b.domain_ && a.degree_ == b.degree_ &&
               a.lines_[0] == b.lines_[0] && a.lines_[1] == b.lines_[1];
    }

private:
    friend class LrBuilder;

    enum class Merge { Max, Add };

    void apply(const MeshSegment& seg, Merge merge, bool check_endpoints);
    void check_inside(const MeshSegment& seg) const;
    bool point_on_line(Direction dir, const Param& fixed, const Param& at) const;
    void validate() const;
    std::vector<Cell> collect_cells(const Rect& region) const;

    Rect domain_;
    int degree_;
    LineMap lines_[2];
};

/// Uniform open tensor mesh with m x n cells.
LRMesh tensor_mesh(int m, int n, const Rect& domain, int degree, int internal_mult);

LRMesh insert_segment(const LRMesh& mesh, const MeshSegment& seg);

/// Adds seg.mult to the multiplicity along seg ("raise by k").
LRMesh raise_segment(const LRMesh& mesh, const MeshSegment& seg);

std::vector<Cell> cells(const LRMesh& mesh);

int multiplicity_along(const LRMesh& mesh, Direction dir, const Param& fixed,
                       const Param& lo, const Param& hi);

/// Internal multiplicity 1 and boundary multiplicity 2 at degree 1.
bool is_bilinear_shape(const LRMesh& mesh);

/// Internal multiplicity s+1, boundary 2s+2, degree 2s+1.
bool is_rm_shape(const LRMesh& mesh, int s);

/// Bilinear mesh -> RM shape for smoothness s.
LRMesh lift_multiplicities(const LRMesh& mesh, int s);

/// RM shape for s -> RM shape for s_new.
LRMesh adjust_multiplicities(const LRMesh& mesh, int s, int s_new);

}  // namespace lrkit
