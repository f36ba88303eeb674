#include "lrkit/bspline.hpp"

#include "lrkit/errors.hpp"
#include "lrkit/lr_builder.hpp"

#include <algorithm>
#include <deque>

namespace lrkit {

LocalKnotVector::LocalKnotVector(std::vector<Param> knots) : knots_(std::move(knots))
{
    if (knots_.size() < 2) throw InvalidArgument("a local knot vector needs at least 2 knots");
    if (!std::is_sorted(knots_.begin(), knots_.end()))
        throw InvalidArgument("local knot vector must be nondecreasing");
    if (!(knots_.front() < knots_.back()))
        throw InvalidArgument("local knot vector has an empty support");
    // Every value may repeat at most p+1 = size-1 times, which the strict
    // front < back check already enforces.
}

int LocalKnotVector::count(const Param& t) const
{
    auto [lo, hi] = std::equal_range(knots_.begin(), knots_.end(), t);
    return static_cast<int>(hi - lo);
}

std::vector<double> LocalKnotVector::as_double() const
{
    std::vector<double> out;
    out.reserve(knots_.size());
    for (const auto& k : knots_) out.push_back(to_double(k));
    return out;
}

namespace {

// Fills n[0..p] with the degree-0 indicator functions of the p+1 knot spans.
void degree_zero(std::span<const double> t, double x, bool closed_right, double* n)
{
    const std::size_t spans = t.size() - 1;
    for (std::size_t i = 0; i < spans; ++i) n[i] = (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
    if (closed_right && x == t.back()) {
        for (std::size_t i = spans; i-- > 0;) {
            if (t[i] < t[i + 1]) {
                n[i] = 1.0;
                break;
            }
        }
    }
}

// Raises n from degree k-1 to degree k in place (Cox-de Boor).
void raise_degree(std::span<const double> t, double x, int k, int count, double* n)
{
    for (int i = 0; i < count; ++i) {
        double v = 0.0;
        const double dl = t[i + k] - t[i];
        if (dl > 0.0 && n[i] != 0.0) v += (x - t[i]) / dl * n[i];
        const double dr = t[i + k + 1] - t[i + 1];
        if (dr > 0.0 && n[i + 1] != 0.0) v += (t[i + k + 1] - x) / dr * n[i + 1];
        n[i] = v;
    }
}

constexpr int kMaxKnots = 64;

}  // namespace

double bspline_value(std::span<const double> t, double x, bool closed_right)
{
    const int p = static_cast<int>(t.size()) - 2;
    if (x < t.front() || x > t.back() || (x == t.back() && !closed_right)) return 0.0;
    if (t.size() > kMaxKnots) throw InvalidArgument("degree too large");
    double n[kMaxKnots];
    degree_zero(t, x, closed_right, n);
    for (int k = 1; k <= p; ++k) raise_degree(t, x, k, p + 1 - k, n);
    return n[0];
}

std::pair<double, double> bspline_value_deriv(std::span<const double> t, double x,
                                              bool closed_right)
{
    const int p = static_cast<int>(t.size()) - 2;
    if (x < t.front() || x > t.back() || (x == t.back() && !closed_right)) return {0.0, 0.0};
    if (t.size() > kMaxKnots) throw InvalidArgument("degree too large");
    double n[kMaxKnots];
    degree_zero(t, x, closed_right, n);
    for (int k = 1; k < p; ++k) raise_degree(t, x, k, p + 1 - k, n);
    if (p == 0) return {n[0], 0.0};
    // n[0], n[1] now hold the two degree p-1 B-splines on t[0..p], t[1..p+1].
    double deriv = 0.0;
    const double dl = t[p] - t[0];
    const double dr = t[p + 1] - t[1];
    if (dl > 0.0) deriv += p / dl * n[0];
    if (dr > 0.0) deriv -= p / dr * n[1];
    raise_degree(t, x, p, 1, n);
    return {n[0], deriv};
}

TensorBSpline::TensorBSpline(LocalKnotVector kx, LocalKnotVector ky)
    : kx_(std::move(kx)), ky_(std::move(ky))
{
    if (kx_.degree() != ky_.degree())
        throw InvalidArgument("only equal bidegrees are supported");
}

double TensorBSpline::evaluate(const Point& x, const Rect* domain) const
{
    const bool cx = domain && kx_.back() == domain->x1;
    const bool cy = domain && ky_.back() == domain->y1;
    const auto tx = kx_.as_double();
    const double vx = bspline_value(tx, x.x, cx);
    if (vx == 0.0) return 0.0;
    const auto ty = ky_.as_double();
    return vx * bspline_value(ty, x.y, cy);
}

std::array<double, 3> TensorBSpline::evaluate_with_gradient(const Point& x,
                                                            const Rect* domain) const
{
    const bool cx = domain && kx_.back() == domain->x1;
    const bool cy = domain && ky_.back() == domain->y1;
    const auto tx = kx_.as_double();
    const auto ty = ky_.as_double();
    const auto [vx, dx] = bspline_value_deriv(tx, x.x, cx);
    const auto [vy, dy] = bspline_value_deriv(ty, x.y, cy);
    return {vx * vy, dx * vy, vx * dy};
}

std::pair<LocalKnotVector, LocalKnotVector> split_knots(const LocalKnotVector& kv,
                                                        const Param& t, Param* alpha1,
                                                        Param* alpha2)
{
    const int p = kv.degree();
    if (!(kv.front() < t && t < kv.back()))
        throw InvalidArgument("split parameter " + to_string(t) + " outside the open knot range");
    if (kv.count(t) + 1 > p + 1)
        throw InvalidArgument("split at " + to_string(t) + " would exceed multiplicity " +
                              std::to_string(p + 1));
    std::vector<Param> ext = kv.knots();
    ext.insert(std::upper_bound(ext.begin(), ext.end(), t), t);
    std::vector<Param> first(ext.begin(), ext.begin() + p + 2);
    std::vector<Param> second(ext.begin() + 1, ext.end());

    const auto& k = kv.knots();
    // k[0] = t_1, ..., k[p+1] = t_{p+2}
    if (alpha1) *alpha1 = (t < k[p]) ? (t - k[0]) / (k[p] - k[0]) : Param(1);
    if (alpha2) *alpha2 = (t > k[1]) ? (k[p + 1] - t) / (k[p + 1] - k[1]) : Param(1);
    return {LocalKnotVector(std::move(first)), LocalKnotVector(std::move(second))};
}

SplitResult split(const TensorBSpline& b, Direction dir, const Param& t)
{
    SplitResult out;
    auto [lo, hi] = split_knots(b.knots(dir), t, &out.alpha1, &out.alpha2);
    if (dir == Direction::Vertical) {
        out.first = TensorBSpline(std::move(lo), b.ky());
        out.second = TensorBSpline(std::move(hi), b.ky());
    } else {
        out.first = TensorBSpline(b.kx(), std::move(lo));
        out.second = TensorBSpline(b.kx(), std::move(hi));
    }
    return out;
}

namespace {

std::optional<SupportViolation> check_direction(const TensorBSpline& b, const LRMesh& mesh,
                                                Direction dir)
{
    const auto& kv = b.knots(dir);
    const Rect supp = b.support();
    const int along = 1 - axis(dir);
    const Param lo = supp.lo(along);
    const Param hi = supp.hi(along);
    const auto& lines = mesh.lines(dir);

    // Candidate coordinates: knot values and meshlines strictly inside.
    std::vector<Param> coords(kv.knots());
    for (auto it = lines.upper_bound(kv.front()); it != lines.end() && it->first < kv.back(); ++it)
        coords.push_back(it->first);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    for (const auto& c : coords) {
        const int global = mesh.multiplicity_along(dir, c, lo, hi);
        const int local = kv.count(c);
        if (local > global) return SupportViolation{dir, c, SupportViolation::Kind::Excess};
        const bool interior = kv.front() < c && c < kv.back();
        if (interior && local < global)
            return SupportViolation{dir, c, SupportViolation::Kind::Missing};
    }
    return std::nullopt;
}

}  // namespace

SupportCheck minimal_support(const TensorBSpline& b, const LRMesh& mesh)
{
    for (Direction dir : {Direction::Vertical, Direction::Horizontal}) {
        if (auto v = check_direction(b, mesh, dir)) return {false, v};
    }
    return {true, std::nullopt};
}

SplineSet restore_minimal_support(const SplineSet& set, const LRMesh& mesh,
                                  std::mt19937_64* shuffle)
{
    std::deque<TensorBSpline> work(set.begin(), set.end());
    SplineSet seen(set.begin(), set.end());
    SplineSet out;
    while (!work.empty()) {
        if (shuffle) {
            std::uniform_int_distribution<std::size_t> pick(0, work.size() - 1);
            std::swap(work.front(), work[pick(*shuffle)]);
        }
        TensorBSpline b = std::move(work.front());
        work.pop_front();
        const auto check = minimal_support(b, mesh);
        if (check.minimal) {
            out.insert(std::move(b));
            continue;
        }
        const auto& v = *check.violation;
        if (v.kind == SupportViolation::Kind::Excess)
            throw InvariantError("B-spline knot exceeds the mesh multiplicity at " +
                                 to_string(v.value));
        auto children = split(b, v.dir, v.value);
        for (auto* child : {&children.first, &children.second}) {
            if (seen.insert(*child).second) work.push_back(std::move(*child));
        }
    }
    return out;
}

int supports_over_cell(const SplineSet& set, const Cell& cell)
{
    int count = 0;
    for (const auto& b : set)
        if (b.support().contains(cell)) ++count;
    return count;
}

OverloadReport overloaded_cells(const SplineSet& set, const LRMesh& mesh)
{
    const auto all = mesh.cells();
    std::vector<int> counts(all.size(), 0);
    for (const auto& b : set) {
        const Rect supp = b.support();
        auto it = std::lower_bound(all.begin(), all.end(), supp.x0,
                                   [](const Cell& c, const Param& v) { return c.x0 < v; });
        for (; it != all.end() && it->x0 < supp.x1; ++it)
            if (supp.contains(*it)) ++counts[it - all.begin()];
    }
    const int p = mesh.degree();
    const int expected = (p + 1) * (p + 1);
    OverloadReport report;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (counts[i] > expected) report.overloaded.push_back(all[i]);
        if (counts[i] < expected) report.underloaded.push_back(all[i]);
    }
    return report;
}

namespace {

std::vector<Param> global_knots(const LRMesh& mesh, Direction dir)
{
    const Rect& dom = mesh.domain();
    const int along = 1 - axis(dir);
    std::vector<Param> knots;
    for (const auto& [fixed, line] : mesh.lines(dir)) {
        if (line.size() != 1 || line[0].lo != dom.lo(along) || line[0].hi != dom.hi(along))
            throw InvalidArgument("mesh is not a tensor mesh");
        for (int k = 0; k < line[0].mult; ++k) knots.push_back(fixed);
    }
    return knots;
}

}  // namespace

SplineSet tensor_basis(const LRMesh& mesh)
{
    const int p = mesh.degree();
    const auto gx = global_knots(mesh, Direction::Vertical);
    const auto gy = global_knots(mesh, Direction::Horizontal);
    SplineSet out;
    for (std::size_t i = 0; i + p + 2 <= gx.size(); ++i) {
        LocalKnotVector kx(std::vector<Param>(gx.begin() + i, gx.begin() + i + p + 2));
        for (std::size_t j = 0; j + p + 2 <= gy.size(); ++j) {
            LocalKnotVector ky(std::vector<Param>(gy.begin() + j, gy.begin() + j + p + 2));
            out.emplace(kx, ky);
        }
    }
    return out;
}

SplineSet lr_basis(const LRMesh& mesh)
{
    LRMesh start(mesh.domain(), mesh.degree());
    LrBuilder builder(start, tensor_basis(start));

    std::vector<MeshSegment> pending;
    for (const auto& seg : mesh.segments())
        if (!mesh.is_boundary(seg.dir, seg.fixed)) pending.push_back(seg);
    // Long lines first: coarse lines usually have to exist before the short
    // ones ending on them.
    std::stable_sort(pending.begin(), pending.end(), [](const MeshSegment& a, const MeshSegment& b) {
        return (a.hi - a.lo) > (b.hi - b.lo);
    });

    while (!pending.empty()) {
        std::vector<MeshSegment> stuck;
        for (const auto& seg : pending) {
            if (builder.traverses_support(seg))
                builder.insert(seg);
            else
                stuck.push_back(seg);
        }
        if (stuck.size() == pending.size())
            throw InvalidArgument("mesh is not an LR mesh: " + std::to_string(stuck.size()) +
                                  " segments never traverse a B-spline support");
        pending = std::move(stuck);
    }
    if (!(builder.mesh() == mesh)) throw InvariantError("LR reconstruction changed the mesh");
    return builder.set();
}

}  // namespace lrkit
