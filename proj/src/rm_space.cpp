#include "lrkit/rm_space.hpp"

#include "lrkit/errors.hpp"
#include "lrkit/lr_builder.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lrkit {

LRMesh RMSpace::mesh() const
{
    return lift_multiplicities(skeleton_mesh, s);
}

RMSpace tensor_space(int m, int n, const Rect& domain, int s)
{
    if (s < 0) throw InvalidArgument("smoothness must be non-negative");
    RMSpace space{s, tensor_mesh(m, n, domain, 1, 1), {}};
    space.skeleton = tensor_basis(space.skeleton_mesh);
    return space;
}

RMSpace space_from_mesh(const LRMesh& mesh, int s)
{
    if (s < 0) throw InvalidArgument("smoothness must be non-negative");
    LRMesh bilinear = mesh;
    if (!is_bilinear_shape(mesh)) {
        if (mesh.degree() % 2 == 0 || !is_rm_shape(mesh, (mesh.degree() - 1) / 2))
            throw InvalidArgument("mesh is neither bilinear nor in RM shape");
        bilinear = adjust_multiplicities(mesh, (mesh.degree() - 1) / 2, 0);
    }
    RMSpace space{s, bilinear, lr_basis(bilinear)};
    const auto report = overloaded_cells(space.skeleton, space.skeleton_mesh);
    if (!report.overloaded.empty())
        throw InvariantError("skeleton is overloaded on " +
                             std::to_string(report.overloaded.size()) + " cells");
    return space;
}

std::vector<BSplineSystem> group_systems(const SplineSet& set)
{
    std::map<Rect, std::vector<TensorBSpline>> bySupport;
    for (const auto& b : set) bySupport[b.support()].push_back(b);
    std::vector<BSplineSystem> out;
    out.reserve(bySupport.size());
    for (auto& [supp, members] : bySupport) out.push_back({supp, std::move(members)});
    return out;
}

std::vector<LocalKnotVector> lift_knots(const LocalKnotVector& bilinear, int s)
{
    if (bilinear.degree() != 1) throw InvalidArgument("lift_knots expects a bilinear knot vector");
    std::vector<Param> expanded;
    for (const auto& k : bilinear.knots())
        for (int r = 0; r <= s; ++r) expanded.push_back(k);
    const std::size_t width = static_cast<std::size_t>(2 * s + 3);
    std::vector<LocalKnotVector> out;
    for (std::size_t i = 0; i + width <= expanded.size(); ++i)
        out.emplace_back(std::vector<Param>(expanded.begin() + i, expanded.begin() + i + width));
    return out;
}

BSplineSystem lift_function(const TensorBSpline& bilinear, int s)
{
    if (s < 0) throw InvalidArgument("smoothness must be non-negative");
    const auto xs = lift_knots(bilinear.kx(), s);
    const auto ys = lift_knots(bilinear.ky(), s);
    BSplineSystem sys{bilinear.support(), {}};
    sys.members.reserve(xs.size() * ys.size());
    for (const auto& kx : xs)
        for (const auto& ky : ys) sys.members.emplace_back(kx, ky);
    return sys;
}

std::vector<BSplineSystem> lift_space(const SplineSet& skeleton, const LRMesh& mesh, int s)
{
    if (!is_bilinear_shape(mesh)) throw InvalidArgument("lift_space expects a bilinear mesh");
    if (!overloaded_cells(skeleton, mesh).overloaded.empty())
        throw InvalidArgument("skeleton is overloaded, mesh not admissible");
    std::vector<BSplineSystem> out;
    out.reserve(skeleton.size());
    for (const auto& b : skeleton) out.push_back(lift_function(b, s));
    return out;
}

namespace {

bool fully_present(const LRMesh& mesh, const MeshSegment& seg)
{
    return mesh.multiplicity_along(seg.dir, seg.fixed, seg.lo, seg.hi) >= seg.mult;
}

std::size_t distinct_coordinates(const LRMesh& mesh)
{
    return mesh.lines(Direction::Vertical).size() + mesh.lines(Direction::Horizontal).size();
}

// Inserts seg and grows it through every support containing an overloaded
// cell until none is left. Returns the final segment.
MeshSegment insert_with_extension(LrBuilder& builder, MeshSegment seg, int& extensions)
{
    const int ax = axis(seg.dir);
    const int along = 1 - ax;
    std::vector<LrBuilder::Id> created = builder.insert(seg);
    const std::size_t cap = distinct_coordinates(builder.mesh()) + 1;
    for (std::size_t iter = 0;; ++iter) {
        const auto overloaded = builder.overloaded_near(created);
        if (overloaded.empty()) return seg;
        if (iter >= cap)
            throw InvariantError("meshline extension did not terminate after " +
                                 std::to_string(cap) + " steps");
        Param lo = seg.lo;
        Param hi = seg.hi;
        for (const auto& cell : overloaded) {
            for (auto id : builder.covering(cell)) {
                const Rect supp = builder.function(id).support();
                if (!(supp.lo(ax) < seg.fixed && seg.fixed < supp.hi(ax))) continue;
                lo = std::min(lo, supp.lo(along));
                hi = std::max(hi, supp.hi(along));
            }
        }
        if (lo == seg.lo && hi == seg.hi)
            throw InvariantError("overloaded cell cannot be reached by extending the meshline at " +
                                 to_string(seg.fixed));
        seg.lo = lo;
        seg.hi = hi;
        ++extensions;
        for (auto id : builder.insert(seg)) created.push_back(id);
        // Drop ids of functions split away in the meantime.
        std::erase_if(created, [&](LrBuilder::Id id) { return !builder.alive(id); });
        std::sort(created.begin(), created.end());
        created.erase(std::unique(created.begin(), created.end()), created.end());
    }
}

}  // namespace

InsertResult rm_insert(const RMSpace& space, const MeshSegment& seg)
{
    if (seg.mult != 1) throw InvalidArgument("skeleton segments must have multiplicity 1");
    if (fully_present(space.skeleton_mesh, seg)) return {space, seg, 0};
    LrBuilder builder(space.skeleton_mesh, space.skeleton);
    if (!builder.traverses_support(seg))
        throw InvalidArgument("segment does not traverse any B-spline support");
    InsertResult out{space, seg, 0};
    out.inserted = insert_with_extension(builder, seg, out.extensions);
    out.space.skeleton_mesh = builder.mesh();
    out.space.skeleton = builder.set();
    return out;
}

std::vector<MeshSegment> refinement_segments(const RMSpace& space,
                                             const std::vector<Cell>& marked)
{
    LrBuilder builder(space.skeleton_mesh, space.skeleton);
    std::map<std::pair<Direction, Param>, std::vector<std::pair<Param, Param>>> spans;
    for (const auto& cell : marked) {
        const auto cover = builder.covering(cell);
        if (cover.empty()) throw InvalidArgument("marked cell is not covered by the skeleton");
        Rect hull = builder.function(cover.front()).support();
        for (auto id : cover) {
            const Rect r = builder.function(id).support();
            hull = {std::min(hull.x0, r.x0), std::min(hull.y0, r.y0), std::max(hull.x1, r.x1),
                    std::max(hull.y1, r.y1)};
        }
        spans[{Direction::Vertical, midpoint(cell.x0, cell.x1)}].push_back({hull.y0, hull.y1});
        spans[{Direction::Horizontal, midpoint(cell.y0, cell.y1)}].push_back({hull.x0, hull.x1});
    }
    std::vector<MeshSegment> out;
    for (auto& [key, intervals] : spans) {
        std::sort(intervals.begin(), intervals.end());
        std::vector<std::pair<Param, Param>> merged;
        for (const auto& iv : intervals) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        for (const auto& [lo, hi] : merged) out.push_back({key.first, key.second, lo, hi, 1});
    }
    return out;
}

RMSpace rm_refine_marked(const RMSpace& space, const std::vector<Cell>& marked,
                         const RefineOptions& options)
{
    const auto all = space.skeleton_mesh.cells();
    for (const auto& c : marked)
        if (!std::binary_search(all.begin(), all.end(), c))
            throw InvalidArgument("marked rectangle is not a cell of the skeleton mesh");
    const auto segments = refinement_segments(space, marked);
    LrBuilder builder(space.skeleton_mesh, space.skeleton);
    for (const auto& seg : segments) {
        if (fully_present(builder.mesh(), seg)) continue;
        if (!builder.traverses_support(seg)) continue;
        int extensions = 0;
        const MeshSegment done = insert_with_extension(builder, seg, extensions);
        if (options.on_insert) options.on_insert(done, builder.mesh(), builder.set());
    }
    return RMSpace{space.s, builder.mesh(), builder.set()};
}

std::vector<TensorBSpline> active_skeleton(const RMSpace& space, const Point& x)
{
    const Rect& dom = space.domain();
    const double dx1 = to_double(dom.x1);
    const double dy1 = to_double(dom.y1);
    if (x.x < to_double(dom.x0) || x.x > dx1 || x.y < to_double(dom.y0) || x.y > dy1)
        throw InvalidArgument("evaluation point outside the domain");
    const auto inside = [](double v, double lo, double hi, double closed_at) {
        return lo <= v && (v < hi || (v == hi && hi == closed_at));
    };
    std::vector<TensorBSpline> out;
    for (const auto& b : space.skeleton) {
        const Rect r = b.support();
        if (inside(x.x, to_double(r.x0), to_double(r.x1), dx1) &&
            inside(x.y, to_double(r.y0), to_double(r.y1), dy1))
            out.push_back(b);
    }
    return out;
}

std::vector<std::pair<TensorBSpline, double>> basis_at(const RMSpace& space, const Point& x)
{
    std::vector<std::pair<TensorBSpline, double>> out;
    const Rect& dom = space.domain();
    for (const auto& b : active_skeleton(space, x)) {
        auto sys = lift_function(b, space.s);
        for (auto& member : sys.members) {
            const double v = member.evaluate(x, &dom);
            out.emplace_back(std::move(member), v);
        }
    }
    return out;
}

bool admissible_check(const LRMesh& mesh, int s)
{
    if (!is_rm_shape(mesh, s)) return false;
    const LRMesh bilinear = adjust_multiplicities(mesh, s, 0);
    SplineSet set;
    try {
        set = lr_basis(bilinear);
    } catch (const InvalidArgument&) {
        return false;
    }
    const auto report = overloaded_cells(set, bilinear);
    return report.overloaded.empty() && report.underloaded.empty();
}

std::size_t cardinality(const RMSpace& space)
{
    const std::size_t per = static_cast<std::size_t>((space.s + 1) * (space.s + 1));
    return per * space.skeleton.size();
}

}  // namespace lrkit
