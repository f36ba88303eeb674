#pragma once

#include "lrkit/rm_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

namespace lrkit::testing {

/// Seed for randomized tests; LRKIT_SEED overrides the default.
inline std::uint64_t seed()
{
    if (const char* env = std::getenv("LRKIT_SEED")) return std::stoull(env);
    return 20240611u;
}

inline Param Q(std::int64_t n, std::int64_t d = 1)
{
    return Param(n, d);
}

inline MeshSegment V(Param x, Param lo, Param hi, int mult = 1)
{
    return {Direction::Vertical, x, lo, hi, mult};
}

inline MeshSegment H(Param y, Param lo, Param hi, int mult = 1)
{
    return {Direction::Horizontal, y, lo, hi, mult};
}

/// 3x2 bilinear mesh on [0,3]x[0,2] with the horizontal line y = 3/2 over
/// x in [0,2], before the vertical line x = 3/2 is added.
inline LRMesh fig2_before()
{
    LRMesh m = tensor_mesh(3, 2, {0, 0, 3, 2}, 1, 1);
    m.insert(H(Q(3, 2), 0, 2));
    return m;
}

inline LRMesh fig2_after()
{
    LRMesh m = fig2_before();
    m.insert(V(Q(3, 2), 0, 2));
    return m;
}

inline TensorBSpline bspline(std::vector<Param> kx, std::vector<Param> ky)
{
    return TensorBSpline(LocalKnotVector(std::move(kx)), LocalKnotVector(std::move(ky)));
}

/// Cells from a fine grid of all breakpoints, merging neighbours not
/// separated by a segment (union-find), read off as bounding boxes.
inline std::vector<Cell> cells_oracle(const LRMesh& mesh)
{
    const auto segs = mesh.segments();
    std::vector<Param> xs, ys;
    for (const auto& s : segs) {
        (s.dir == Direction::Vertical ? xs : ys).push_back(s.fixed);
        (s.dir == Direction::Vertical ? ys : xs).push_back(s.lo);
        (s.dir == Direction::Vertical ? ys : xs).push_back(s.hi);
    }
    for (auto* v : {&xs, &ys}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    const auto covered = [&](Direction d, const Param& at, const Param& lo, const Param& hi) {
        for (const auto& s : segs)
            if (s.dir == d && s.fixed == at && s.lo <= lo && hi <= s.hi) return true;
        return false;
    };
    const std::size_t nx = xs.size() - 1, ny = ys.size() - 1;
    std::vector<std::size_t> parent(nx * ny);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            if (i + 1 < nx && !covered(Direction::Vertical, xs[i + 1], ys[j], ys[j + 1]))
                parent[find(i * ny + j)] = find((i + 1) * ny + j);
            if (j + 1 < ny && !covered(Direction::Horizontal, ys[j + 1], xs[i], xs[i + 1]))
                parent[find(i * ny + j)] = find(i * ny + j + 1);
        }
    }
    std::map<std::size_t, Rect> boxes;
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const Rect r{xs[i], ys[j], xs[i + 1], ys[j + 1]};
            auto [it, fresh] = boxes.emplace(find(i * ny + j), r);
            if (!fresh) {
                Rect& b = it->second;
                b = {std::min(b.x0, r.x0), std::min(b.y0, r.y0), std::max(b.x1, r.x1),
                     std::max(b.y1, r.y1)};
            }
        }
    }
    std::vector<Cell> out;
    for (const auto& [root, r] : boxes) out.push_back(r);
    std::sort(out.begin(), out.end());
    return out;
}

/// Number of supports containing the cell, by brute force.
inline int coverage_oracle(const SplineSet& set, const Cell& cell)
{
    int n = 0;
    for (const auto& b : set)
        if (b.support().contains(cell)) ++n;
    return n;
}

/// Textbook recursive Cox-de Boor on a knot sequence; support half-open,
/// closed at the right end when closed_right is set.
inline double cox_de_boor(const std::vector<double>& t, int i, int p, double x, bool closed_right)
{
    if (p == 0) {
        if (t[i] < x && x < t[i + 1]) return 1.0;
        if (x == t[i] && t[i] < t[i + 1]) return 1.0;
        if (closed_right && x == t[i + 1] && t[i] < t[i + 1] && x == t.back()) return 1.0;
        return 0.0;
    }
    double v = 0.0;
    if (t[i + p] > t[i]) v += (x - t[i]) / (t[i + p] - t[i]) * cox_de_boor(t, i, p - 1, x, closed_right);
    if (t[i + p + 1] > t[i + 1])
        v += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) *
             cox_de_boor(t, i + 1, p - 1, x, closed_right);
    return v;
}

/// Skeleton refined by `rounds` rounds of random marking (each cell marked
/// with probability `fraction`).
inline RMSpace random_refined_space(std::mt19937_64& rng, int m, int rounds, double fraction,
                                    const RefineOptions& options = {})
{
    RMSpace space = tensor_space(m, m, {0, 0, 1, 1}, 0);
    std::bernoulli_distribution pick(fraction);
    for (int r = 0; r < rounds; ++r) {
        std::vector<Cell> marked;
        const auto all = space.skeleton_mesh.cells();
        for (const auto& c : all)
            if (pick(rng)) marked.push_back(c);
        if (marked.empty()) marked.push_back(all[rng() % all.size()]);
        space = rm_refine_marked(space, marked, options);
    }
    return space;
}

/// Interior collocation points of a cell: an n x n grid at (k + 1/2) / n.
inline std::vector<Point> cell_grid(const Cell& c, int n)
{
    std::vector<Point> out;
    const double x0 = to_double(c.x0), w = to_double(c.width());
    const double y0 = to_double(c.y0), h = to_double(c.height());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.push_back({x0 + w * (i + 0.5) / n, y0 + h * (j + 0.5) / n});
    return out;
}

/// Smallest over largest singular value of the collocation matrix of the RM
/// functions covering each cell, at (2s+2)^2 interior points; the minimum
/// over all cells.
inline double worst_collocation_ratio(const RMSpace& space)
{
    const int n = 2 * space.s + 2;
    double worst = 1.0;
    for (const auto& cell : space.skeleton_mesh.cells()) {
        std::vector<TensorBSpline> funcs;
        for (const auto& b : space.skeleton)
            if (b.support().contains(cell))
                for (auto& m : lift_function(b, space.s).members) funcs.push_back(std::move(m));
        const auto pts = cell_grid(cell, n);
        Eigen::MatrixXd a(pts.size(), funcs.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < funcs.size(); ++j) a(i, j) = funcs[j].evaluate(pts[i]);
        if (a.rows() != a.cols()) return 0.0;
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        const auto& sv = svd.singularValues();
        worst = std::min(worst, sv(sv.size() - 1) / sv(0));
    }
    return worst;
}

/// Arithmetic modulo the prime 2^61 - 1.
namespace modp {

constexpr std::uint64_t P = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b)
{
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % P);
}

inline std::uint64_t add(std::uint64_t a, std::uint64_t b)
{
    return (a + b) % P;
}

inline std::uint64_t sub(std::uint64_t a, std::uint64_t b)
{
    return (a + P - b) % P;
}

inline std::uint64_t pow(std::uint64_t a, std::uint64_t e)
{
    std::uint64_t r = 1;
    for (; e; e >>= 1, a = mul(a, a))
        if (e & 1) r = mul(r, a);
    return r;
}

inline std::uint64_t inv(std::uint64_t a)
{
    if (a == 0) throw std::runtime_error("division by zero modulo p");
    std::int64_t r0 = static_cast<std::int64_t>(P), r1 = static_cast<std::int64_t>(a), s0 = 0, s1 = 1;
    while (r1) {
        const std::int64_t q = r0 / r1;
        std::tie(r0, r1) = std::pair{r1, r0 - q * r1};
        std::tie(s0, s1) = std::pair{s1, s0 - q * s1};
    }
    return static_cast<std::uint64_t>(s0 < 0 ? s0 + static_cast<std::int64_t>(P) : s0);
}

inline std::uint64_t from(const Param& v)
{
    const auto reduce = [](std::int64_t x) {
        const auto m = static_cast<std::int64_t>(P);
        return static_cast<std::uint64_t>(((x % m) + m) % m);
    };
    return mul(reduce(v.numerator()), inv(reduce(v.denominator())));
}

/// Cox-de Boor at an exact point: support tests in Q, arithmetic mod p.
inline std::uint64_t bspline(const std::vector<Param>& t, const Param& x)
{
    const int p = static_cast<int>(t.size()) - 2;
    std::vector<std::uint64_t> n(p + 1);
    for (int i = 0; i <= p; ++i) n[i] = t[i] <= x && x < t[i + 1] ? 1 : 0;
    for (int d = 1; d <= p; ++d) {
        for (int i = 0; i + d <= p; ++i) {
            std::uint64_t v = 0;
            if (t[i + d] > t[i])
                v = add(v, mul(mul(from(x - t[i]), inv(from(t[i + d] - t[i]))), n[i]));
            if (t[i + d + 1] > t[i + 1])
                v = add(v, mul(mul(from(t[i + d + 1] - x), inv(from(t[i + d + 1] - t[i + 1]))), n[i + 1]));
            n[i] = v;
        }
    }
    return n[0];
}

inline int rank(std::vector<std::vector<std::uint64_t>> a)
{
    const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    int r = 0;
    for (std::size_t c = 0; c < cols && r < static_cast<int>(rows); ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        const std::uint64_t iv = inv(a[r][c]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (a[i][c] == 0) continue;
            const std::uint64_t f = mul(a[i][c], iv);
            for (std::size_t j = c; j < cols; ++j) a[i][j] = sub(a[i][j], mul(f, a[r][j]));
        }
        ++r;
    }
    return r;
}

}  // namespace modp

/// Cells whose (2s+2)^2 covering RM functions have a rank-deficient
/// collocation matrix at the interior grid points, with the rank computed
/// exactly (rank mod p <= rank over Q, so a full rank mod p is a proof).
inline int rank_deficient_cells(const RMSpace& space)
{
    const int n = 2 * space.s + 2;
    int deficient = 0;
    for (const auto& cell : space.skeleton_mesh.cells()) {
        std::vector<TensorBSpline> funcs;
        for (const auto& b : space.skeleton)
            if (b.support().contains(cell))
                for (auto& m : lift_function(b, space.s).members) funcs.push_back(std::move(m));
        if (static_cast<int>(funcs.size()) != n * n) {
            ++deficient;
            continue;
        }
        std::vector<Param> xs, ys;
        for (int i = 0; i < n; ++i) {
            xs.push_back(cell.x0 + cell.width() * Param(2 * i + 1, 2 * n));
            ys.push_back(cell.y0 + cell.height() * Param(2 * i + 1, 2 * n));
        }
        std::vector<std::vector<std::uint64_t>> vx(funcs.size()), vy(funcs.size());
        for (std::size_t k = 0; k < funcs.size(); ++k)
            for (int i = 0; i < n; ++i) {
                vx[k].push_back(modp::bspline(funcs[k].kx().knots(), xs[i]));
                vy[k].push_back(modp::bspline(funcs[k].ky().knots(), ys[i]));
            }
        std::vector<std::vector<std::uint64_t>> a;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                auto& row = a.emplace_back();
                for (std::size_t k = 0; k < funcs.size(); ++k) row.push_back(modp::mul(vx[k][i], vy[k][j]));
            }
        if (modp::rank(a) < n * n) ++deficient;
    }
    return deficient;
}

/// Global open knot vector of an m-interval uniform tensor mesh on [0,1]
/// at degree 2s+1 with interior knots repeated s+1 times.
inline std::vector<double> global_rm_knots(int m, int s)
{
    std::vector<double> t(2 * s + 2, 0.0);
    for (int i = 1; i < m; ++i)
        for (int r = 0; r <= s; ++r) t.push_back(static_cast<double>(i) / m);
    for (int r = 0; r < 2 * s + 2; ++r) t.push_back(1.0);
    return t;
}

/// Largest mismatch between basis_at and the global tensor-product basis
/// at x; missing or extra nonzero functions count as a mismatch of 1.
inline double basis_mismatch(const RMSpace& space, int m, const Point& x)
{
    const int p = 2 * space.s + 1;
    const auto t = global_rm_knots(m, space.s);
    const int count = static_cast<int>(t.size()) - p - 1;
    std::map<std::pair<std::vector<double>, std::vector<double>>, double> global;
    for (int i = 0; i < count; ++i) {
        const double vx = cox_de_boor(t, i, p, x.x, true);
        if (vx == 0.0) continue;
        for (int j = 0; j < count; ++j) {
            const double vy = cox_de_boor(t, j, p, x.y, true);
            if (vy == 0.0) continue;
            global[{std::vector<double>(t.begin() + i, t.begin() + i + p + 2),
                    std::vector<double>(t.begin() + j, t.begin() + j + p + 2)}] = vx * vy;
        }
    }
    double worst = 0.0;
    std::size_t matched = 0;
    for (const auto& [b, v] : basis_at(space, x)) {
        const auto it = global.find({b.kx().as_double(), b.ky().as_double()});
        if (it == global.end()) {
            if (v != 0.0) worst = std::max(worst, 1.0);
            continue;
        }
        ++matched;
        worst = std::max(worst, std::abs(it->second - v));
    }
    if (matched != global.size()) worst = std::max(worst, 1.0);
    return worst;
}

}  // namespace lrkit::testing
