#include "lrkit/mesh.hpp"

#include "lrkit/errors.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace lrkit {

bool operator<(const MeshSegment& a, const MeshSegment& b)
{
    return std::tie(a.dir, a.fixed, a.lo, a.hi, a.mult) <
           std::tie(b.dir, b.fixed, b.lo, b.hi, b.mult);
}

namespace {

std::string describe(const MeshSegment& seg)
{
    return std::string(seg.dir == Direction::Vertical ? "vertical x=" : "horizontal y=") +
           to_string(seg.fixed) + " over [" + to_string(seg.lo) + ", " + to_string(seg.hi) +
           "] mult " + std::to_string(seg.mult);
}

// First piece with lo <= at < hi, or end().
LRMesh::Line::const_iterator piece_right_of(const LRMesh::Line& line, const Param& at)
{
    auto it = std::upper_bound(line.begin(), line.end(), at,
                               [](const Param& v, const LRMesh::Piece& p) { return v < p.lo; });
    if (it == line.begin()) return line.end();
    --it;
    return (it->lo <= at && at < it->hi) ? it : line.end();
}

// Piece with lo < at <= hi, or end().
LRMesh::Line::const_iterator piece_left_of(const LRMesh::Line& line, const Param& at)
{
    auto it = std::lower_bound(line.begin(), line.end(), at,
                               [](const LRMesh::Piece& p, const Param& v) { return p.lo < v; });
    if (it == line.begin()) return line.end();
    --it;
    return (it->lo < at && at <= it->hi) ? it : line.end();
}

}  // namespace

LRMesh::LRMesh(const Rect& domain, int degree) : domain_(domain), degree_(degree)
{
    if (!(domain.x0 < domain.x1) || !(domain.y0 < domain.y1))
        throw InvalidArgument("degenerate domain");
    if (degree < 0) throw InvalidArgument("negative degree");
    const int cap = degree + 1;
    lines_[0][domain.x0] = {{domain.y0, domain.y1, cap}};
    lines_[0][domain.x1] = {{domain.y0, domain.y1, cap}};
    lines_[1][domain.y0] = {{domain.x0, domain.x1, cap}};
    lines_[1][domain.y1] = {{domain.x0, domain.x1, cap}};
}

LRMesh LRMesh::from_segments(const Rect& domain, int degree,
                             const std::vector<MeshSegment>& segments)
{
    LRMesh mesh(domain, degree);
    for (const auto& seg : segments) mesh.apply(seg, Merge::Max, false);
    mesh.validate();
    return mesh;
}

void LRMesh::check_inside(const MeshSegment& seg) const
{
    if (!(seg.lo < seg.hi)) throw InvalidArgument("zero-length segment: " + describe(seg));
    if (seg.mult < 1) throw InvalidArgument("non-positive multiplicity: " + describe(seg));
    const int ax = axis(seg.dir);
    const int along = 1 - ax;
    if (seg.fixed < domain_.lo(ax) || seg.fixed > domain_.hi(ax) || seg.lo < domain_.lo(along) ||
        seg.hi > domain_.hi(along))
        throw InvalidArgument("segment outside domain: " + describe(seg));
}

bool LRMesh::point_on_line(Direction dir, const Param& fixed, const Param& at) const
{
    return multiplicity_at(dir, fixed, at) > 0;
}

void LRMesh::apply(const MeshSegment& seg, Merge merge, bool check_endpoints)
{
    check_inside(seg);
    if (check_endpoints) {
        const Direction perp = other(seg.dir);
        if (!point_on_line(perp, seg.lo, seg.fixed) || !point_on_line(perp, seg.hi, seg.fixed))
            throw InvalidArgument("segment endpoint not on a perpendicular meshline: " +
                                  describe(seg));
    }

    Line& line = lines_[axis(seg.dir)][seg.fixed];
    std::vector<Param> breaks{seg.lo, seg.hi};
    for (const auto& p : line) {
        breaks.push_back(p.lo);
        breaks.push_back(p.hi);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    Line out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const Param& a = breaks[i];
        const Param& b = breaks[i + 1];
        auto it = piece_right_of(line, a);
        int value = it == line.end() ? 0 : it->mult;
        if (seg.lo <= a && b <= seg.hi) {
            value = merge == Merge::Max ? std::max(value, seg.mult) : value + seg.mult;
            if (value > max_multiplicity())
                throw InvalidArgument("multiplicity cap " + std::to_string(max_multiplicity()) +
                                      " exceeded: " + describe(seg));
        }
        if (value == 0) continue;
        if (!out.empty() && out.back().hi == a && out.back().mult == value)
            out.back().hi = b;
        else
            out.push_back({a, b, value});
    }
    line = std::move(out);
}

void LRMesh::insert(const MeshSegment& seg)
{
    if (seg.mult > max_multiplicity())
        throw InvalidArgument("multiplicity cap " + std::to_string(max_multiplicity()) +
                              " exceeded: " + describe(seg));
    apply(seg, Merge::Max, true);
}

void LRMesh::raise(const MeshSegment& seg)
{
    apply(seg, Merge::Add, true);
}

void LRMesh::validate() const
{
    for (int ax = 0; ax < 2; ++ax) {
        const Direction dir = ax == 0 ? Direction::Vertical : Direction::Horizontal;
        for (const auto& [fixed, line] : lines_[ax]) {
            for (const auto& p : line) {
                const MeshSegment seg{dir, fixed, p.lo, p.hi, p.mult};
                check_inside(seg);
                if (p.mult > max_multiplicity())
                    throw InvalidArgument("multiplicity cap exceeded: " + describe(seg));
                if (!point_on_line(other(dir), p.lo, fixed) ||
                    !point_on_line(other(dir), p.hi, fixed))
                    throw InvalidArgument("segment endpoint not on a perpendicular meshline: " +
                                          describe(seg));
            }
        }
        const int cap = max_multiplicity();
        for (const Param& b : {domain_.lo(ax), domain_.hi(ax)}) {
            const Direction dir = ax == 0 ? Direction::Vertical : Direction::Horizontal;
            if (multiplicity_along(dir, b, domain_.lo(1 - ax), domain_.hi(1 - ax)) != cap)
                throw InvalidArgument("boundary line " + to_string(b) +
                                      " must have multiplicity " + std::to_string(cap));
        }
    }
}

int LRMesh::multiplicity_along(Direction dir, const Param& fixed, const Param& lo,
                               const Param& hi) const
{
    const auto& map = lines_[axis(dir)];
    auto found = map.find(fixed);
    if (found == map.end()) return 0;
    const Line& line = found->second;
    auto it = piece_right_of(line, lo);
    if (it == line.end()) {
        // lo may coincide with the right end of the only covering piece
        return 0;
    }
    int result = it->mult;
    Param reached = it->hi;
    while (reached < hi) {
        ++it;
        if (it == line.end() || it->lo != reached) return 0;
        result = std::min(result, it->mult);
        reached = it->hi;
    }
    return result;
}

int LRMesh::multiplicity_at(Direction dir, const Param& fixed, const Param& at) const
{
    const auto& map = lines_[axis(dir)];
    auto found = map.find(fixed);
    if (found == map.end()) return 0;
    int result = 0;
    if (auto it = piece_right_of(found->second, at); it != found->second.end())
        result = it->mult;
    if (auto it = piece_left_of(found->second, at); it != found->second.end())
        result = std::max(result, it->mult);
    return result;
}

bool LRMesh::covers_right_of(Direction dir, const Param& fixed, const Param& at) const
{
    const auto& map = lines_[axis(dir)];
    auto found = map.find(fixed);
    return found != map.end() && piece_right_of(found->second, at) != found->second.end();
}

bool LRMesh::is_boundary(Direction dir, const Param& fixed) const
{
    const int ax = axis(dir);
    return fixed == domain_.lo(ax) || fixed == domain_.hi(ax);
}

std::vector<MeshSegment> LRMesh::segments() const
{
    std::vector<MeshSegment> out;
    for (int ax = 0; ax < 2; ++ax) {
        const Direction dir = ax == 0 ? Direction::Vertical : Direction::Horizontal;
        for (const auto& [fixed, line] : lines_[ax])
            for (const auto& p : line) out.push_back({dir, fixed, p.lo, p.hi, p.mult});
    }
    return out;
}

std::vector<Cell> LRMesh::collect_cells(const Rect& region) const
{
    // A lower-left cell corner is a point where a horizontal line continues to
    // the right and a vertical line continues upwards.
    const auto& verticals = lines_[0];
    const auto& horizontals = lines_[1];
    std::vector<Cell> out;
    for (auto h = horizontals.lower_bound(region.y0);
         h != horizontals.end() && h->first < region.y1; ++h) {
        const Param& y = h->first;
        for (const auto& piece : h->second) {
            const Param from = std::max(piece.lo, region.x0);
            const Param to = std::min(piece.hi, region.x1);
            for (auto v = verticals.lower_bound(from); v != verticals.end() && v->first < to; ++v) {
                const Param& x = v->first;
                if (piece_right_of(v->second, y) == v->second.end()) continue;
                auto right = std::next(v);
                while (right != verticals.end() &&
                       piece_right_of(right->second, y) == right->second.end())
                    ++right;
                auto top = std::next(h);
                while (top != horizontals.end() &&
                       piece_right_of(top->second, x) == top->second.end())
                    ++top;
                if (right == verticals.end() || top == horizontals.end())
                    throw InvariantError("mesh is not a box partition near (" + to_string(x) +
                                         ", " + to_string(y) + ")");
                Cell cell{x, y, right->first, top->first};
                if (region.contains(cell)) out.push_back(cell);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Cell> LRMesh::cells() const
{
    return collect_cells(domain_);
}

std::vector<Cell> LRMesh::cells_within(const Rect& region) const
{
    return collect_cells(region);
}

Cell LRMesh::cell_at(const Param& x, const Param& y) const
{
    if (x < domain_.x0 || x > domain_.x1 || y < domain_.y0 || y > domain_.y1)
        throw InvalidArgument("point outside domain");
    // Closed top/right boundary: step back into the last row/column.
    const bool at_right = x == domain_.x1;
    const bool at_top = y == domain_.y1;
    const auto covers = [](const Line& line, const Param& t, bool left_side) {
        return left_side ? piece_left_of(line, t) != line.end()
                         : piece_right_of(line, t) != line.end();
    };

    const auto& verticals = lines_[0];
    const auto& horizontals = lines_[1];
    // Bottom edge: nearest horizontal line at or below y covering x.
    auto h = at_top ? horizontals.lower_bound(y) : horizontals.upper_bound(y);
    do {
        --h;
    } while (!covers(h->second, x, at_right));
    // Left edge: nearest vertical line at or left of x covering the row.
    auto v = at_right ? verticals.lower_bound(x) : verticals.upper_bound(x);
    do {
        --v;
    } while (piece_right_of(v->second, h->first) == v->second.end());

    auto right = std::next(v);
    while (piece_right_of(right->second, h->first) == right->second.end()) ++right;
    auto top = std::next(h);
    while (piece_right_of(top->second, v->first) == top->second.end()) ++top;
    return Cell{v->first, h->first, right->first, top->first};
}

LRMesh tensor_mesh(int m, int n, const Rect& domain, int degree, int internal_mult)
{
    if (m < 1 || n < 1) throw InvalidArgument("cell counts must be positive");
    if (internal_mult < 1 || internal_mult > degree + 1)
        throw InvalidArgument("internal multiplicity must lie in [1, degree+1]");
    LRMesh mesh(domain, degree);
    for (int i = 1; i < m; ++i)
        mesh.insert({Direction::Vertical, domain.x0 + domain.width() * Param(i, m), domain.y0,
                     domain.y1, internal_mult});
    for (int j = 1; j < n; ++j)
        mesh.insert({Direction::Horizontal, domain.y0 + domain.height() * Param(j, n), domain.x0,
                     domain.x1, internal_mult});
    return mesh;
}

LRMesh insert_segment(const LRMesh& mesh, const MeshSegment& seg)
{
    LRMesh out = mesh;
    out.insert(seg);
    return out;
}

LRMesh raise_segment(const LRMesh& mesh, const MeshSegment& seg)
{
    LRMesh out = mesh;
    out.raise(seg);
    return out;
}

std::vector<Cell> cells(const LRMesh& mesh)
{
    return mesh.cells();
}

int multiplicity_along(const LRMesh& mesh, Direction dir, const Param& fixed, const Param& lo,
                       const Param& hi)
{
    if (!(lo < hi)) throw InvalidArgument("interval must have positive length");
    return mesh.multiplicity_along(dir, fixed, lo, hi);
}

namespace {

bool has_shape(const LRMesh& mesh, int internal, int boundary)
{
    for (const auto& seg : mesh.segments()) {
        const int want = mesh.is_boundary(seg.dir, seg.fixed) ? boundary : internal;
        if (seg.mult != want) return false;
    }
    return true;
}

}  // namespace

bool is_bilinear_shape(const LRMesh& mesh)
{
    return mesh.degree() == 1 && has_shape(mesh, 1, 2);
}

bool is_rm_shape(const LRMesh& mesh, int s)
{
    return s >= 0 && mesh.degree() == 2 * s + 1 && has_shape(mesh, s + 1, 2 * s + 2);
}

LRMesh lift_multiplicities(const LRMesh& mesh, int s)
{
    if (s < 0) throw InvalidArgument("smoothness must be non-negative");
    if (!is_bilinear_shape(mesh))
        throw InvalidArgument("lift requires a bilinear mesh (internal 1, boundary 2)");
    return mesh.remapped(2 * s + 1,
                         [s](bool boundary, int m) { return boundary ? m + 2 * s : m + s; });
}

LRMesh adjust_multiplicities(const LRMesh& mesh, int s, int s_new)
{
    if (s_new < 0) throw InvalidArgument("smoothness must be non-negative");
    if (!is_rm_shape(mesh, s))
        throw InvalidArgument("mesh is not in RM shape for s=" + std::to_string(s));
    return mesh.remapped(2 * s_new + 1, [s_new](bool boundary, int) {
        return boundary ? 2 * s_new + 2 : s_new + 1;
    });
}

}  // namespace lrkit
