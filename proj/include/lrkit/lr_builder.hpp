#pragma once

#include "lrkit/bspline.hpp"
#include "lrkit/mesh.hpp"

#include <map>
#include <optional>
#include <vector>

namespace lrkit {

/// Mutable LR mesh + LR B-spline set with a bucket index over supports.
/// This is the working state behind lr_basis() and the RM refinement loop;
/// the public value types are produced with mesh() and set().
class LrBuilder {
public:
    using Id = int;

    LrBuilder(LRMesh mesh, const SplineSet& set);

    const LRMesh& mesh() const { return mesh_; }
    SplineSet set() const;
    std::size_t size() const { return ids_.size(); }
    const TensorBSpline& function(Id id) const { return *slots_[id]; }
    bool alive(Id id) const
    {
        return id >= 0 && static_cast<std::size_t>(id) < slots_.size() && slots_[id].has_value();
    }

    /// Inserts seg (max-merge) and restores minimal support locally.
    /// Returns the ids of the functions created; empty if no function was
    /// split.
    std::vector<Id> insert(const MeshSegment& seg);

    /// True if inserting seg would split at least one function. Segments
    /// that cannot be inserted (cap, dangling endpoint) report false.
    bool traverses_support(const MeshSegment& seg);

    /// Functions whose support contains the cell.
    std::vector<Id> covering(const Cell& cell) const;

    /// Functions whose support interior is crossed by the segment's line.
    std::vector<Id> crossed_by(const MeshSegment& seg) const;

    /// Cells inside the supports of `ids` covered by more than (p+1)^2
    /// supports.
    std::vector<Cell> overloaded_near(const std::vector<Id>& ids) const;

private:
    void build_grid(std::size_t expected);
    std::pair<int, int> bucket_range(const Param& lo, const Param& hi, int ax) const;
    Id add(const TensorBSpline& b);
    void remove(Id id);
    std::vector<Id> candidates(const Rect& region) const;

    LRMesh mesh_;
    std::vector<std::optional<TensorBSpline>> slots_;
    std::vector<Id> free_;
    std::map<TensorBSpline, Id> ids_;
    int grid_ = 1;
    double origin_[2] = {0, 0};
    double extent_[2] = {1, 1};
    std::vector<std::vector<Id>> buckets_;
    mutable std::vector<unsigned> stamp_;
    mutable unsigned epoch_ = 0;
};

}  // namespace lrkit
