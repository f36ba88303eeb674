#include "support.hpp"

#include "lrkit/errors.hpp"

#include <doctest.h>

using namespace lrkit;
using namespace lrkit::testing;

namespace {

bool non_overloaded(const RMSpace& space)
{
    const auto report = overloaded_cells(space.skeleton, space.skeleton_mesh);
    return report.overloaded.empty() && report.underloaded.empty();
}

RMSpace staggered_space()
{
    return rm_insert(tensor_space(4, 4, {0, 0, 4, 4}, 0), H(Q(27, 8), 3, 4)).space;
}

}  // namespace

TEST_CASE("group_systems")
{
    SUBCASE("cubic mesh with double lines")
    {
        const auto m = tensor_mesh(2, 2, {0, 0, 2, 2}, 3, 2);
        const auto systems = group_systems(tensor_basis(m));
        CHECK(systems.size() == 9);
        for (const auto& sys : systems) {
            CHECK(sys.members.size() == 4);
            for (const auto& b : sys.members) CHECK(b.support() == sys.support);
        }
        const auto interior = std::find_if(systems.begin(), systems.end(), [](const auto& sys) {
            return sys.support == Rect{0, 0, 2, 2};
        });
        REQUIRE(interior != systems.end());
        CHECK(interior->members.size() == 4);
    }
    SUBCASE("bilinear sets are singletons")
    {
        const auto set = lr_basis(fig2_after());
        const auto systems = group_systems(set);
        CHECK(systems.size() == set.size());
        for (const auto& sys : systems) CHECK(sys.members.size() == 1);
    }
    SUBCASE("lifted 2x2 mesh at s = 2")
    {
        const auto mesh = tensor_mesh(2, 2, {0, 0, 1, 1}, 1, 1);
        SplineSet lifted;
        for (const auto& sys : lift_space(tensor_basis(mesh), mesh, 2))
            for (const auto& b : sys.members) lifted.insert(b);
        const auto systems = group_systems(lifted);
        CHECK(systems.size() == 9);
        for (const auto& sys : systems) CHECK(sys.members.size() == 9);
    }
}

TEST_CASE("lift_function and lift_space")
{
    SUBCASE("interior hat at s = 1")
    {
        const auto sys = lift_function(bspline({0, 1, 2}, {0, 1, 2}), 1);
        CHECK(sys.support == Rect{0, 0, 2, 2});
        const SplineSet got(sys.members.begin(), sys.members.end());
        const SplineSet expected{bspline({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}),
                                 bspline({0, 0, 1, 1, 2}, {0, 1, 1, 2, 2}),
                                 bspline({0, 1, 1, 2, 2}, {0, 0, 1, 1, 2}),
                                 bspline({0, 1, 1, 2, 2}, {0, 1, 1, 2, 2})};
        CHECK(got == expected);
    }
    SUBCASE("s = 0 gives the skeleton back")
    {
        const auto mesh = fig2_after();
        const auto set = lr_basis(mesh);
        const auto systems = lift_space(set, mesh, 0);
        SplineSet back;
        for (const auto& sys : systems) {
            CHECK(sys.members.size() == 1);
            back.insert(sys.members.begin(), sys.members.end());
        }
        CHECK(back == set);
    }
    SUBCASE("tensor skeletons lift to the tensor basis of the lifted mesh")
    {
        for (int s = 0; s <= 3; ++s) {
            const auto mesh = tensor_mesh(8, 8, {0, 0, 1, 1}, 1, 1);
            SplineSet lifted;
            for (const auto& sys : lift_space(tensor_basis(mesh), mesh, s))
                lifted.insert(sys.members.begin(), sys.members.end());
            CHECK(lifted == tensor_basis(lift_multiplicities(mesh, s)));
            CHECK(lifted.size() == static_cast<std::size_t>((s + 1) * (s + 1) * 81));
        }
    }
    SUBCASE("every cell is covered by (2s+2)^2 members")
    {
        std::mt19937_64 rng(seed() + 10);
        const auto space = random_refined_space(rng, 4, 3, 0.3);
        for (int s = 1; s <= 2; ++s) {
            std::vector<TensorBSpline> members;
            for (const auto& sys : lift_space(space.skeleton, space.skeleton_mesh, s))
                members.insert(members.end(), sys.members.begin(), sys.members.end());
            int wrong = 0;
            for (const auto& c : space.skeleton_mesh.cells()) {
                int n = 0;
                for (const auto& b : members)
                    if (b.support().contains(c)) ++n;
                if (n != (2 * s + 2) * (2 * s + 2)) ++wrong;
            }
            CHECK(wrong == 0);
        }
    }
    SUBCASE("overloaded skeletons are rejected")
    {
        auto mesh = tensor_mesh(4, 4, {0, 0, 4, 4}, 1, 1);
        SplineSet set = tensor_basis(mesh);
        for (const auto& seg : {H(Q(27, 8), 3, 4), V(Q(15, 4), 3, 4)}) {
            mesh.insert(seg);
            set = restore_minimal_support(set, mesh);
        }
        CHECK_FALSE(overloaded_cells(set, mesh).overloaded.empty());
        CHECK_THROWS_AS(lift_space(set, mesh, 1), InvalidArgument);
    }
}

TEST_CASE("rm_insert")
{
    SUBCASE("full-width line needs no extension")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 1);
        const auto r = rm_insert(space, V(Q(3, 8), 0, 1));
        CHECK(r.extensions == 0);
        CHECK(r.inserted == V(Q(3, 8), 0, 1));
        CHECK(non_overloaded(r.space));
        CHECK(r.space.skeleton == tensor_basis(r.space.skeleton_mesh));
    }
    SUBCASE("Fig. 2 lines on a bilinear skeleton")
    {
        auto space = tensor_space(3, 2, {0, 0, 3, 2}, 0);
        space = rm_insert(space, H(Q(3, 2), 0, 2)).space;
        const auto r = rm_insert(space, V(Q(3, 2), 0, 2));
        CHECK(r.extensions == 0);
        CHECK(r.space.skeleton_mesh == fig2_after());
        CHECK(r.space.skeleton == lr_basis(fig2_after()));
        for (const auto& c : r.space.skeleton_mesh.cells())
            CHECK(coverage_oracle(r.space.skeleton, c) == 4);
    }
    SUBCASE("a short segment that would overload is extended")
    {
        const auto r = rm_insert(staggered_space(), V(Q(15, 4), 3, 4));
        CHECK(r.extensions >= 1);
        CHECK(r.inserted.lo <= Q(3));
        CHECK(r.inserted.hi == Q(4));
        CHECK(r.inserted.hi - r.inserted.lo > Q(1));
        CHECK(non_overloaded(r.space));
        for (const auto& c : r.space.skeleton_mesh.cells())
            CHECK(coverage_oracle(r.space.skeleton, c) == 4);
    }
    SUBCASE("three-step extension case")
    {
        auto space = tensor_space(4, 4, {0, 0, 4, 4}, 0);
        space = rm_insert(space, V(Q(11, 4), 3, 4)).space;
        space = rm_insert(space, H(Q(7, 4), 3, 4)).space;
        const auto r = rm_insert(space, V(Q(25, 8), Q(7, 4), 3));
        CHECK(r.extensions == 1);
        CHECK(r.inserted == V(Q(25, 8), 0, 4));
        CHECK(non_overloaded(r.space));
    }
    SUBCASE("present segments are a no-op")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 0);
        const auto r = rm_insert(space, V(Q(1, 2), Q(1, 4), Q(3, 4)));
        CHECK(r.extensions == 0);
        CHECK(r.space.skeleton_mesh == space.skeleton_mesh);
        CHECK(r.space.skeleton == space.skeleton);
    }
    SUBCASE("errors")
    {
        const auto space = tensor_space(4, 4, {0, 0, 4, 4}, 0);
        CHECK_THROWS_AS(rm_insert(space, V(Q(1, 2), 1, 2)), InvalidArgument);
        CHECK_THROWS_AS(rm_insert(space, V(Q(1, 2), 0, 4, 2)), InvalidArgument);
    }
    SUBCASE("random inserts keep every cell at coverage 4 and contain the request")
    {
        std::mt19937_64 rng(seed() + 11);
        RMSpace space = tensor_space(4, 4, {0, 0, 1, 1}, 0);
        int done = 0;
        for (int attempt = 0; attempt < 400 && done < 40; ++attempt) {
            const auto all = space.skeleton_mesh.cells();
            const Cell c = all[rng() % all.size()];
            const bool vertical = rng() % 2 == 0;
            const auto& lines = space.skeleton_mesh.lines(vertical ? Direction::Horizontal
                                                                   : Direction::Vertical);
            std::vector<Param> stops;
            for (const auto& [at, line] : lines) stops.push_back(at);
            // span between two random existing perpendicular coordinates around the cell
            const Param lo0 = vertical ? c.y0 : c.x0;
            const Param hi0 = vertical ? c.y1 : c.x1;
            std::vector<Param> below, above;
            for (const auto& v : stops) {
                if (v <= lo0) below.push_back(v);
                if (v >= hi0) above.push_back(v);
            }
            const Param lo = below[rng() % below.size()];
            const Param hi = above[rng() % above.size()];
            const MeshSegment seg = vertical ? V(midpoint(c.x0, c.x1), lo, hi)
                                             : H(midpoint(c.y0, c.y1), lo, hi);
            InsertResult r;
            try {
                r = rm_insert(space, seg);
            } catch (const InvalidArgument&) {
                continue;  // crosses no support
            }
            CHECK(r.inserted.lo <= seg.lo);
            CHECK(r.inserted.hi >= seg.hi);
            space = r.space;
            ++done;
            int wrong = 0;
            for (const auto& cell : space.skeleton_mesh.cells())
                if (coverage_oracle(space.skeleton, cell) != 4) ++wrong;
            CHECK(wrong == 0);
        }
        CHECK(done >= 20);
        CHECK(lr_basis(space.skeleton_mesh) == space.skeleton);
    }
}

TEST_CASE("rm_refine_marked")
{
    SUBCASE("marking every cell refines uniformly")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 2);
        const auto refined = rm_refine_marked(space, space.skeleton_mesh.cells());
        CHECK(refined.skeleton_mesh.cells().size() == 64);
        CHECK(refined.skeleton_mesh == tensor_space(8, 8, {0, 0, 1, 1}, 2).skeleton_mesh);
        CHECK(refined.skeleton == tensor_basis(refined.skeleton_mesh));
        CHECK(refined.s == 2);
    }
    SUBCASE("the cell at (1,1) for seven rounds")
    {
        RMSpace space = tensor_space(8, 8, {0, 0, 1, 1}, 0);
        for (int r = 0; r < 7; ++r) {
            const Cell c = space.skeleton_mesh.cell_at(1, 1);
            space = rm_refine_marked(space, {c});
            CHECK(non_overloaded(space));
        }
        CHECK(space.skeleton_mesh.cell_at(1, 1).width() == Q(1, 1024));
    }
    SUBCASE("diagonal marks stay non-overloaded after every insertion")
    {
        RMSpace space = tensor_space(8, 8, {0, 0, 1, 1}, 0);
        int inserts = 0, bad = 0;
        RefineOptions opts;
        opts.on_insert = [&](const MeshSegment&, const LRMesh& mesh, const SplineSet& set) {
            ++inserts;
            if (!overloaded_cells(set, mesh).overloaded.empty()) ++bad;
        };
        for (int r = 0; r < 4; ++r) {
            std::vector<Cell> marked;
            for (const auto& c : space.skeleton_mesh.cells())
                if (c.x0 < c.y1 && c.y0 < c.x1) marked.push_back(c);
            space = rm_refine_marked(space, marked, opts);
        }
        CHECK(inserts > 0);
        CHECK(bad == 0);
        CHECK(non_overloaded(space));
        CHECK(lr_basis(space.skeleton_mesh) == space.skeleton);
    }
    SUBCASE("empty marks change nothing")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 1);
        const auto same = rm_refine_marked(space, {});
        CHECK(same.skeleton_mesh == space.skeleton_mesh);
        CHECK(same.skeleton == space.skeleton);
    }
    SUBCASE("marks must be cells")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 0);
        CHECK_THROWS_AS(rm_refine_marked(space, {Rect{0, 0, Q(1, 2), Q(1, 4)}}), InvalidArgument);
    }
    SUBCASE("refinement segments are merged")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 0);
        const auto segs = refinement_segments(space, {Rect{0, 0, Q(1, 4), Q(1, 4)},
                                                      Rect{0, Q(1, 4), Q(1, 4), Q(1, 2)}});
        int vertical = 0;
        for (const auto& s : segs)
            if (s.dir == Direction::Vertical) {
                ++vertical;
                CHECK(s == V(Q(1, 8), 0, Q(3, 4)));
            }
        CHECK(vertical == 1);
        CHECK(segs.size() == 3);
    }
}

TEST_CASE("basis_at")
{
    SUBCASE("bilinear partition of unity")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 0);
        for (const Point x : {Point{0.1, 0.2}, Point{0.5, 0.5}, Point{1.0, 1.0}, Point{0.0, 0.99}}) {
            const auto vals = basis_at(space, x);
            CHECK(vals.size() == 4);
            double sum = 0.0;
            for (const auto& [b, v] : vals) sum += v;
            CHECK(sum == doctest::Approx(1.0));
        }
    }
    SUBCASE("equals the global tensor-product basis")
    {
        std::mt19937_64 rng(seed() + 12);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int s : {1, 2}) {
            const auto space = tensor_space(4, 4, {0, 0, 1, 1}, s);
            double worst = 0.0;
            for (int i = 0; i < 100; ++i) worst = std::max(worst, basis_mismatch(space, 4, {u(rng), u(rng)}));
            for (const Point x : {Point{0, 0}, Point{1, 1}, Point{0.25, 0.5}, Point{1, 0.3}})
                worst = std::max(worst, basis_mismatch(space, 4, x));
            CHECK(worst < 1e-12);
            CHECK(basis_at(space, {0.3, 0.6}).size() == static_cast<std::size_t>(4 * (s + 1) * (s + 1)));
        }
    }
    SUBCASE("points on a skeleton line take the upper/right cell")
    {
        const auto space = tensor_space(4, 4, {0, 0, 1, 1}, 1);
        const auto active = active_skeleton(space, {0.5, 0.3});
        CHECK(active.size() == 4);
        for (const auto& b : active) CHECK(b.support().contains(Rect{Q(1, 2), Q(1, 4), Q(3, 4), Q(1, 2)}));
    }
    SUBCASE("refined skeletons: four systems and partition of unity")
    {
        std::mt19937_64 rng(seed() + 13);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto space = random_refined_space(rng, 4, 3, 0.3);
        for (int s : {0, 1, 2}) {
            space.s = s;
            for (int i = 0; i < 50; ++i) {
                const Point x{u(rng), u(rng)};
                CHECK(active_skeleton(space, x).size() == 4);
            }
        }
    }
    SUBCASE("outside the domain")
    {
        const auto space = tensor_space(2, 2, {0, 0, 1, 1}, 0);
        CHECK_THROWS_AS(basis_at(space, {1.5, 0.5}), InvalidArgument);
    }
}

TEST_CASE("admissible_check")
{
    CHECK(admissible_check(tensor_mesh(4, 4, {0, 0, 1, 1}, 3, 2), 1));
    CHECK(admissible_check(tensor_mesh(4, 4, {0, 0, 1, 1}, 1, 1), 0));
    CHECK(admissible_check(lift_multiplicities(fig2_after(), 1), 1));
    CHECK_FALSE(admissible_check(lift_multiplicities(fig2_after(), 1), 2));

    // one internal line at multiplicity s instead of s+1
    auto segs = tensor_mesh(4, 4, {0, 0, 1, 1}, 3, 2).segments();
    for (auto& s : segs)
        if (s.dir == Direction::Vertical && s.fixed == Q(1, 2)) s.mult = 1;
    CHECK_FALSE(admissible_check(LRMesh::from_segments({0, 0, 1, 1}, 3, segs), 1));

    auto overloaded = staggered_space().skeleton_mesh;
    overloaded.insert(V(Q(15, 4), 3, 4));
    CHECK_FALSE(admissible_check(overloaded, 0));
    CHECK_FALSE(admissible_check(lift_multiplicities(overloaded, 1), 1));
}

TEST_CASE("space_from_mesh")
{
    std::mt19937_64 rng(seed() + 14);
    const auto space = random_refined_space(rng, 4, 3, 0.3);
    const auto from_bilinear = space_from_mesh(space.skeleton_mesh, 2);
    CHECK(from_bilinear.skeleton == space.skeleton);
    CHECK(from_bilinear.s == 2);
    const auto from_rm = space_from_mesh(lift_multiplicities(space.skeleton_mesh, 1), 1);
    CHECK(from_rm.skeleton_mesh == space.skeleton_mesh);
    CHECK(from_rm.skeleton == space.skeleton);
    auto overloaded = staggered_space().skeleton_mesh;
    overloaded.insert(V(Q(15, 4), 3, 4));
    CHECK_THROWS_AS(space_from_mesh(overloaded, 0), InvariantError);
}

TEST_CASE("cardinality")
{
    CHECK(cardinality(tensor_space(8, 8, {0, 0, 1, 1}, 0)) == 81);
    CHECK(cardinality(tensor_space(8, 8, {0, 0, 1, 1}, 2)) == 729);
    const auto base = tensor_space(8, 8, {0, 0, 1, 1}, 0);
    auto refined = rm_refine_marked(base, base.skeleton_mesh.cells());
    for (int s = 0; s <= 4; ++s) {
        refined.s = s;
        CHECK(cardinality(refined) == static_cast<std::size_t>((s + 1) * (s + 1) * 17 * 17));
    }
}

TEST_CASE("lift/adjust round trip")
{
    std::mt19937_64 rng(seed() + 15);
    for (int trial = 0; trial < 5; ++trial) {
        const auto space = random_refined_space(rng, 4, 3, 0.3);
        for (int s = 1; s <= 3; ++s) {
            const auto lifted = lift_multiplicities(space.skeleton_mesh, s);
            CHECK(adjust_multiplicities(lifted, s, 0).segments() == space.skeleton_mesh.segments());
            // systems rebuilt from the adjusted mesh match the direct lift
            const auto again = space_from_mesh(lifted, s);
            CHECK(again.skeleton == space.skeleton);
        }
    }
}

TEST_CASE("exact rank detects dependence")
{
    // the five supports over the overloaded cell cannot be independent
    auto mesh = tensor_mesh(4, 4, {0, 0, 4, 4}, 1, 1);
    SplineSet set = tensor_basis(mesh);
    for (const auto& seg : {H(Q(27, 8), 3, 4), V(Q(15, 4), 3, 4)}) {
        mesh.insert(seg);
        set = restore_minimal_support(set, mesh);
    }
    CHECK(rank_deficient_cells(RMSpace{0, mesh, set}) > 0);
    CHECK(modp::rank({{1, 2}, {2, 4}}) == 1);
    CHECK(modp::rank({{1, 2}, {3, 4}}) == 2);
    CHECK(modp::bspline({0, 1, 2}, Q(1, 2)) == modp::from(Q(1, 2)));
}

TEST_CASE("local linear independence on refined meshes")
{
    std::mt19937_64 rng(seed() + 16);
    for (int trial = 0; trial < 3; ++trial) {
        auto space = random_refined_space(rng, 4, 2, 0.3);
        for (int s : {0, 1, 2}) {
            space.s = s;
            CHECK(rank_deficient_cells(space) == 0);
            if (s == 0) CHECK(worst_collocation_ratio(space) > 1e-8);
        }
    }
}
