#include "lrkit/lr_builder.hpp"

#include "lrkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace lrkit {

LrBuilder::LrBuilder(LRMesh mesh, const SplineSet& set) : mesh_(std::move(mesh))
{
    build_grid(set.size());
    for (const auto& b : set) add(b);
}

void LrBuilder::build_grid(std::size_t expected)
{
    // Roughly one bucket per expected function, between 8x8 and 256x256.
    const double side = std::sqrt(static_cast<double>(std::max<std::size_t>(expected, 1)));
    grid_ = std::clamp(static_cast<int>(2.0 * side), 8, 256);
    const Rect& dom = mesh_.domain();
    origin_[0] = to_double(dom.x0);
    origin_[1] = to_double(dom.y0);
    extent_[0] = to_double(dom.width());
    extent_[1] = to_double(dom.height());
    buckets_.assign(static_cast<std::size_t>(grid_) * grid_, {});
}

std::pair<int, int> LrBuilder::bucket_range(const Param& lo, const Param& hi, int ax) const
{
    const auto index = [&](const Param& v) {
        const double t = (to_double(v) - origin_[ax]) / extent_[ax] * grid_;
        return std::clamp(static_cast<int>(std::floor(t)), 0, grid_ - 1);
    };
    return {index(lo), index(hi)};
}

SplineSet LrBuilder::set() const
{
    SplineSet out;
    for (const auto& [b, id] : ids_) out.insert(b);
    return out;
}

LrBuilder::Id LrBuilder::add(const TensorBSpline& b)
{
    if (auto it = ids_.find(b); it != ids_.end()) return it->second;
    Id id;
    if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
        slots_[id] = b;
    } else {
        id = static_cast<Id>(slots_.size());
        slots_.push_back(b);
        stamp_.push_back(0);
    }
    ids_.emplace(b, id);
    const Rect supp = b.support();
    const auto [i0, i1] = bucket_range(supp.x0, supp.x1, 0);
    const auto [j0, j1] = bucket_range(supp.y0, supp.y1, 1);
    for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(i) * grid_ + j].push_back(id);
    return id;
}

void LrBuilder::remove(Id id)
{
    const TensorBSpline& b = *slots_[id];
    const Rect supp = b.support();
    const auto [i0, i1] = bucket_range(supp.x0, supp.x1, 0);
    const auto [j0, j1] = bucket_range(supp.y0, supp.y1, 1);
    for (int i = i0; i <= i1; ++i) {
        for (int j = j0; j <= j1; ++j) {
            auto& bucket = buckets_[static_cast<std::size_t>(i) * grid_ + j];
            bucket.erase(std::find(bucket.begin(), bucket.end(), id));
        }
    }
    ids_.erase(b);
    slots_[id].reset();
    free_.push_back(id);
}

std::vector<LrBuilder::Id> LrBuilder::candidates(const Rect& region) const
{
    ++epoch_;
    if (epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0u);
        epoch_ = 1;
    }
    const auto [i0, i1] = bucket_range(region.x0, region.x1, 0);
    const auto [j0, j1] = bucket_range(region.y0, region.y1, 1);
    std::vector<Id> out;
    for (int i = i0; i <= i1; ++i) {
        for (int j = j0; j <= j1; ++j) {
            for (Id id : buckets_[static_cast<std::size_t>(i) * grid_ + j]) {
                if (stamp_[id] == epoch_) continue;
                stamp_[id] = epoch_;
                out.push_back(id);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<LrBuilder::Id> LrBuilder::covering(const Cell& cell) const
{
    std::vector<Id> out;
    for (Id id : candidates(cell))
        if (slots_[id]->support().contains(cell)) out.push_back(id);
    return out;
}

std::vector<LrBuilder::Id> LrBuilder::crossed_by(const MeshSegment& seg) const
{
    const int ax = axis(seg.dir);
    const Rect region = ax == 0 ? Rect{seg.fixed, seg.lo, seg.fixed, seg.hi}
                                : Rect{seg.lo, seg.fixed, seg.hi, seg.fixed};
    std::vector<Id> out;
    for (Id id : candidates(region)) {
        const Rect supp = slots_[id]->support();
        if (!(supp.lo(ax) < seg.fixed && seg.fixed < supp.hi(ax))) continue;
        if (std::max(supp.lo(1 - ax), seg.lo) < std::min(supp.hi(1 - ax), seg.hi)) out.push_back(id);
    }
    return out;
}

bool LrBuilder::traverses_support(const MeshSegment& seg)
{
    auto& lines = mesh_.lines_[axis(seg.dir)];
    const auto existing = lines.find(seg.fixed);
    const bool had_line = existing != lines.end();
    const LRMesh::Line saved = had_line ? existing->second : LRMesh::Line{};
    try {
        mesh_.insert(seg);
    } catch (const InvalidArgument&) {
        return false;
    }
    bool splits = false;
    for (Id id : crossed_by(seg)) {
        const auto check = minimal_support(*slots_[id], mesh_);
        if (!check.minimal && check.violation->kind == SupportViolation::Kind::Missing) {
            splits = true;
            break;
        }
    }
    if (had_line)
        lines[seg.fixed] = saved;
    else
        lines.erase(seg.fixed);
    return splits;
}

std::vector<LrBuilder::Id> LrBuilder::insert(const MeshSegment& seg)
{
    mesh_.insert(seg);
    std::deque<Id> work;
    for (Id id : crossed_by(seg)) work.push_back(id);

    std::set<Id> created;
    while (!work.empty()) {
        const Id id = work.front();
        work.pop_front();
        if (!slots_[id]) continue;
        const auto check = minimal_support(*slots_[id], mesh_);
        if (check.minimal) continue;
        const auto& v = *check.violation;
        if (v.kind == SupportViolation::Kind::Excess)
            throw InvariantError("B-spline knot exceeds the mesh multiplicity at " +
                                 to_string(v.value));
        const TensorBSpline b = *slots_[id];
        remove(id);
        created.erase(id);
        auto children = split(b, v.dir, v.value);
        for (const auto* child : {&children.first, &children.second}) {
            if (ids_.count(*child)) continue;
            const Id cid = add(*child);
            created.insert(cid);
            work.push_back(cid);
        }
    }
    return {created.begin(), created.end()};
}

std::vector<Cell> LrBuilder::overloaded_near(const std::vector<Id>& ids) const
{
    std::set<Cell> region;
    for (Id id : ids) {
        if (!slots_[id]) continue;
        for (const auto& c : mesh_.cells_within(slots_[id]->support())) region.insert(c);
    }
    const int p = mesh_.degree();
    const std::size_t expected = static_cast<std::size_t>((p + 1) * (p + 1));
    std::vector<Cell> out;
    for (const auto& c : region)
        if (covering(c).size() > expected) out.push_back(c);
    return out;
}

}  // namespace lrkit
