#include "lrkit/poisson.hpp"

#include "lrkit/errors.hpp"
#include "lrkit/lr_builder.hpp"
#include "lrkit/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace lrkit {

PoissonProblem arctan_problem()
{
    constexpr double cx = 1.25;
    constexpr double cy = -0.25;
    constexpr double radius = std::numbers::pi / 3.0;
    constexpr double sharp = 100.0;
    PoissonProblem prob;
    prob.name = "arctan";
    prob.u_exact = [=](const Point& x) {
        const double r = std::hypot(x.x - cx, x.y - cy);
        return std::atan(sharp * (r - radius));
    };
    prob.u_D = prob.u_exact;
    // radial Laplacian u'' + u'/r
    prob.f = [=](const Point& x) {
        const double r = std::hypot(x.x - cx, x.y - cy);
        const double z = sharp * (r - radius);
        const double q = 1.0 + z * z;
        const double du = sharp / q;
        const double d2u = -2.0 * sharp * sharp * z / (q * q);
        return -(d2u + du / r);
    };
    return prob;
}

PoissonProblem sine_problem()
{
    using std::numbers::pi;
    PoissonProblem prob;
    prob.name = "sine";
    prob.u_exact = [](const Point& x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
    prob.u_D = prob.u_exact;
    prob.f = [](const Point& x) {
        return 2.0 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y);
    };
    return prob;
}

PoissonProblem linear_problem(double c)
{
    PoissonProblem prob;
    prob.name = "linear";
    prob.u_exact = [c](const Point& x) { return x.x + c; };
    prob.u_D = prob.u_exact;
    prob.f = [](const Point&) { return 0.0; };
    return prob;
}

PoissonProblem problem_by_name(const std::string& name)
{
    if (name == "arctan") return arctan_problem();
    if (name == "sine") return sine_problem();
    if (name == "linear") return linear_problem();
    throw InvalidArgument("unknown problem '" + name + "'");
}

SpaceIndex::SpaceIndex(const RMSpace& space)
    : space_(space), skeleton_(space.skeleton.begin(), space.skeleton.end()),
      per_system_((space.s + 1) * (space.s + 1))
{
    // Builder ids follow SplineSet order on construction.
    LrBuilder builder(space.skeleton_mesh, space.skeleton);
    cells_ = space.skeleton_mesh.cells();
    systems_.reserve(cells_.size());
    for (const auto& cell : cells_) {
        auto cover = builder.covering(cell);
        if (cover.size() != 4)
            throw InvalidArgument("space not admissible: a cell is covered by " +
                                  std::to_string(cover.size()) + " systems");
        systems_.push_back(std::move(cover));
    }
    xwin_.resize(skeleton_.size());
    ywin_.resize(skeleton_.size());
    for (std::size_t k = 0; k < skeleton_.size(); ++k) {
        for (const auto& kv : lift_knots(skeleton_[k].kx(), space.s))
            xwin_[k].push_back(kv.as_double());
        for (const auto& kv : lift_knots(skeleton_[k].ky(), space.s))
            ywin_[k].push_back(kv.as_double());
    }
}

void SpaceIndex::evaluate(std::size_t cell, const Point& x, LocalEval& out) const
{
    const int n = space_.s + 1;
    const double x1 = to_double(space_.domain().x1);
    const double y1 = to_double(space_.domain().y1);
    out.dofs.clear();
    out.value.clear();
    out.dx.clear();
    out.dy.clear();
    double vx[32], dxv[32], vy[32], dyv[32];
    for (int k : systems_[cell]) {
        for (int a = 0; a < n; ++a) {
            const auto& w = xwin_[k][a];
            std::tie(vx[a], dxv[a]) = bspline_value_deriv(w, x.x, w.back() == x1);
        }
        for (int b = 0; b < n; ++b) {
            const auto& w = ywin_[k][b];
            std::tie(vy[b], dyv[b]) = bspline_value_deriv(w, x.y, w.back() == y1);
        }
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                out.dofs.push_back(k * per_system_ + a * n + b);
                out.value.push_back(vx[a] * vy[b]);
                out.dx.push_back(dxv[a] * vy[b]);
                out.dy.push_back(vx[a] * dyv[b]);
            }
        }
    }
}

namespace {

struct EdgeTrace {
    int dof;
    std::vector<double> knots;
};

// L2 projection of u_D onto the traces of the boundary functions, edge by
// edge, after fixing the four corner functions by interpolation.
std::map<int, double> boundary_values(const SpaceIndex& index, const PoissonProblem& problem)
{
    const RMSpace& space = index.space();
    const Rect& dom = space.domain();
    const int s = space.s;
    const int n = s + 1;
    const int per = index.per_system();
    const double X0 = to_double(dom.x0), X1 = to_double(dom.x1);
    const double Y0 = to_double(dom.y0), Y1 = to_double(dom.y1);

    // Edges: 0 left, 1 right, 2 bottom, 3 top.
    std::vector<EdgeTrace> edges[4];
    std::map<int, std::set<int>> edges_of;
    for (std::size_t k = 0; k < space.skeleton.size(); ++k) {
        const auto& b = index.skeleton(static_cast<int>(k));
        const auto& kx = b.kx();
        const auto& ky = b.ky();
        const int base = static_cast<int>(k) * per;
        const bool left = kx[0] == dom.x0 && kx[1] == dom.x0;
        const bool right = kx[1] == dom.x1 && kx[2] == dom.x1;
        const bool bottom = ky[0] == dom.y0 && ky[1] == dom.y0;
        const bool top = ky[1] == dom.y1 && ky[2] == dom.y1;
        for (int j = 0; j < n; ++j) {
            if (left) edges[0].push_back({base + 0 * n + j, index.y_windows(k)[j]});
            if (right) edges[1].push_back({base + s * n + j, index.y_windows(k)[j]});
            if (bottom) edges[2].push_back({base + j * n + 0, index.x_windows(k)[j]});
            if (top) edges[3].push_back({base + j * n + s, index.x_windows(k)[j]});
        }
    }
    for (int e = 0; e < 4; ++e)
        for (const auto& t : edges[e]) edges_of[t.dof].insert(e);

    std::map<int, double> fixed;
    // Corner functions are the ones shared by two edges; they interpolate u_D.
    for (const auto& [dof, es] : edges_of) {
        if (es.size() < 2) continue;
        const double cx = es.count(0) ? X0 : X1;
        const double cy = es.count(2) ? Y0 : Y1;
        fixed[dof] = problem.u_D({cx, cy});
    }

    const int points = space.degree() + 3;
    for (int e = 0; e < 4; ++e) {
        const bool vertical_edge = e < 2;
        const double at = e == 0 ? X0 : e == 1 ? X1 : e == 2 ? Y0 : Y1;
        const double end = vertical_edge ? Y1 : X1;
        const auto trace_point = [&](double t) {
            return vertical_edge ? Point{at, t} : Point{t, at};
        };

        std::vector<const EdgeTrace*> free_traces, corner_traces;
        std::vector<double> breaks;
        for (const auto& t : edges[e]) {
            (fixed.count(t.dof) ? corner_traces : free_traces).push_back(&t);
            breaks.insert(breaks.end(), t.knots.begin(), t.knots.end());
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

        const std::size_t m = free_traces.size();
        Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        std::vector<double> phi(m);
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const auto rule = gauss_legendre(points, breaks[i], breaks[i + 1]);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double t = rule.nodes[q];
                const double w = rule.weights[q];
                double target = problem.u_D(trace_point(t));
                for (const auto* c : corner_traces)
                    target -= fixed[c->dof] * bspline_value(c->knots, t, c->knots.back() == end);
                for (std::size_t a = 0; a < m; ++a)
                    phi[a] = bspline_value(free_traces[a]->knots, t,
                                           free_traces[a]->knots.back() == end);
                for (std::size_t a = 0; a < m; ++a) {
                    if (phi[a] == 0.0) continue;
                    rhs[a] += w * target * phi[a];
                    for (std::size_t b = 0; b < m; ++b) mass(a, b) += w * phi[a] * phi[b];
                }
            }
        }
        if (m == 0) continue;
        const Eigen::VectorXd coeffs = mass.ldlt().solve(rhs);
        for (std::size_t a = 0; a < m; ++a) fixed[free_traces[a]->dof] = coeffs[a];
    }
    return fixed;
}

}  // namespace

DiscreteSystem assemble(const RMSpace& space, const PoissonProblem& problem)
{
    if (!problem.f || !problem.u_D) throw InvalidArgument("problem needs f and u_D");
    const SpaceIndex index(space);
    const std::size_t ndof = index.dof_count();
    const int points = space.degree() + 1;
    const int local = 4 * index.per_system();

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(index.cells().size() * local * local);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
    Eigen::MatrixXd kloc(local, local);
    Eigen::VectorXd floc(local);
    SpaceIndex::LocalEval ev;

    for (std::size_t c = 0; c < index.cells().size(); ++c) {
        const Cell& cell = index.cells()[c];
        const auto gx = gauss_legendre(points, to_double(cell.x0), to_double(cell.x1));
        const auto gy = gauss_legendre(points, to_double(cell.y0), to_double(cell.y1));
        kloc.setZero();
        floc.setZero();
        for (int i = 0; i < points; ++i) {
            for (int j = 0; j < points; ++j) {
                const Point x{gx.nodes[i], gy.nodes[j]};
                const double w = gx.weights[i] * gy.weights[j];
                index.evaluate(c, x, ev);
                const double fx = problem.f(x);
                for (int a = 0; a < local; ++a) {
                    floc[a] += w * fx * ev.value[a];
                    for (int b = a; b < local; ++b)
                        kloc(a, b) += w * (ev.dx[a] * ev.dx[b] + ev.dy[a] * ev.dy[b]);
                }
            }
        }
        for (int a = 0; a < local; ++a) {
            load[ev.dofs[a]] += floc[a];
            for (int b = 0; b < local; ++b) {
                const double v = a <= b ? kloc(a, b) : kloc(b, a);
                if (v != 0.0) triplets.emplace_back(ev.dofs[a], ev.dofs[b], v);
            }
        }
    }

    DiscreteSystem sys;
    sys.stiffness.resize(static_cast<Eigen::Index>(ndof), static_cast<Eigen::Index>(ndof));
    sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    sys.load = std::move(load);
    sys.dirichlet = boundary_values(index, problem);
    return sys;
}

Eigen::VectorXd solve_system(const DiscreteSystem& sys, const SolverOptions& options)
{
    const Eigen::Index n = sys.stiffness.rows();
    if (sys.stiffness.cols() != n || sys.load.size() != n)
        throw InvalidArgument("inconsistent system dimensions");

    std::vector<Eigen::Index> free_of(n, -1);
    Eigen::Index nfree = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!sys.dirichlet.count(static_cast<int>(i))) free_of[i] = nfree++;

    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (const auto& [dof, v] : sys.dirichlet) {
        if (dof < 0 || dof >= n) throw InvalidArgument("Dirichlet index out of range");
        full[dof] = v;
    }
    if (nfree == 0) return full;

    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
    for (Eigen::Index i = 0; i < n; ++i)
        if (free_of[i] >= 0) rhs[free_of[i]] = sys.load[i];
    for (int k = 0; k < sys.stiffness.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.stiffness, k); it; ++it) {
            const auto r = free_of[it.row()];
            const auto c = free_of[it.col()];
            if (r >= 0 && c >= 0)
                triplets.emplace_back(r, c, it.value());
            else if (r >= 0)
                rhs[r] -= it.value() * full[it.col()];
        }
    }
    Eigen::SparseMatrix<double> kff(nfree, nfree);
    kff.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::VectorXd u;
    if (nfree <= options.direct_limit) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kff);
        if (ldlt.info() != Eigen::Success) throw InvariantError("factorization failed");
        const Eigen::VectorXd d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        if (d.minCoeff() <= 1e-12 * dmax)
            throw InvariantError("stiffness matrix is singular or indefinite");
        u = ldlt.solve(rhs);
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::IncompleteCholesky<double>>
            cg;
        cg.setTolerance(options.tolerance);
        cg.setMaxIterations(10 * nfree);
        cg.compute(kff);
        if (cg.info() != Eigen::Success) throw InvariantError("preconditioner setup failed");
        u = cg.solve(rhs);
        if (cg.info() != Eigen::Success)
            throw InvariantError("conjugate gradients did not converge (residual " +
                                 std::to_string(cg.error()) + ")");
    }
    for (Eigen::Index i = 0; i < n; ++i)
        if (free_of[i] >= 0) full[i] = u[free_of[i]];
    return full;
}

double evaluate_solution(const RMSpace& space, const Eigen::VectorXd& coeffs, const Point& x)
{
    const int per = (space.s + 1) * (space.s + 1);
    double sum = 0.0;
    for (const auto& b : active_skeleton(space, x)) {
        const auto k = std::distance(space.skeleton.begin(), space.skeleton.find(b));
        const auto sys = lift_function(b, space.s);
        for (std::size_t m = 0; m < sys.members.size(); ++m)
            sum += coeffs[k * per + static_cast<Eigen::Index>(m)] *
                   sys.members[m].evaluate(x, &space.domain());
    }
    return sum;
}

namespace {

double local_solution(const SpaceIndex::LocalEval& ev, const Eigen::VectorXd& coeffs)
{
    double v = 0.0;
    for (std::size_t a = 0; a < ev.dofs.size(); ++a) v += coeffs[ev.dofs[a]] * ev.value[a];
    return v;
}

}  // namespace

CellErrors l2_error_per_cell(const RMSpace& space, const Eigen::VectorXd& coeffs,
                             const Field& u_exact)
{
    if (!u_exact) throw InvalidArgument("the estimator needs the exact solution");
    const SpaceIndex index(space);
    if (coeffs.size() != static_cast<Eigen::Index>(index.dof_count()))
        throw InvalidArgument("coefficient count does not match the space");
    const int points = space.degree() + 3;
    CellErrors out;
    SpaceIndex::LocalEval ev;
    for (std::size_t c = 0; c < index.cells().size(); ++c) {
        const Cell& cell = index.cells()[c];
        const auto gx = gauss_legendre(points, to_double(cell.x0), to_double(cell.x1));
        const auto gy = gauss_legendre(points, to_double(cell.y0), to_double(cell.y1));
        double sq = 0.0;
        for (int i = 0; i < points; ++i) {
            for (int j = 0; j < points; ++j) {
                const Point x{gx.nodes[i], gy.nodes[j]};
                index.evaluate(c, x, ev);
                const double e = local_solution(ev, coeffs) - u_exact(x);
                sq += gx.weights[i] * gy.weights[j] * e * e;
            }
        }
        out.emplace(cell, std::sqrt(sq));
    }
    return out;
}

double global_l2(const CellErrors& errors)
{
    double sq = 0.0;
    for (const auto& [cell, e] : errors) sq += e * e;
    return std::sqrt(sq);
}

double linf_error_estimate(const RMSpace& space, const Eigen::VectorXd& coeffs,
                           const Field& u_exact)
{
    const SpaceIndex index(space);
    constexpr int samples = 4;
    double worst = 0.0;
    SpaceIndex::LocalEval ev;
    for (std::size_t c = 0; c < index.cells().size(); ++c) {
        const Cell& cell = index.cells()[c];
        const double x0 = to_double(cell.x0), w = to_double(cell.width());
        const double y0 = to_double(cell.y0), h = to_double(cell.height());
        for (int i = 0; i < samples; ++i) {
            for (int j = 0; j < samples; ++j) {
                const Point x{x0 + w * (i + 0.5) / samples, y0 + h * (j + 0.5) / samples};
                index.evaluate(c, x, ev);
                worst = std::max(worst, std::abs(local_solution(ev, coeffs) - u_exact(x)));
            }
        }
    }
    return worst;
}

std::vector<Cell> mark(const CellErrors& errors, double theta)
{
    if (errors.empty()) throw InvalidArgument("no cell errors to mark");
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0, 1]");
    double worst = 0.0;
    for (const auto& [cell, e] : errors) worst = std::max(worst, e);
    const double threshold = theta * worst;
    std::vector<Cell> out;
    for (const auto& [cell, e] : errors)
        if (e >= threshold) out.push_back(cell);
    return out;
}

AdaptiveReport adaptive_solve(const PoissonProblem& problem, int s, int m0, int iters,
                              double theta, const SolverOptions& options)
{
    if (iters < 1) throw InvalidArgument("at least one iteration is required");
    AdaptiveReport report;
    RMSpace space = tensor_space(m0, m0, problem.domain, s);
    for (int it = 0; it < iters; ++it) {
        const auto sys = assemble(space, problem);
        const auto coeffs = solve_system(sys, options);
        const auto errors = l2_error_per_cell(space, coeffs, problem.u_exact);

        IterationRecord rec;
        rec.iter = it;
        rec.dof = cardinality(space);
        rec.l2_error = global_l2(errors);
        rec.linf_error = linf_error_estimate(space, coeffs, problem.u_exact);
        for (const auto& [cell, e] : errors) rec.max_cell_error = std::max(rec.max_cell_error, e);
        rec.n_cells = errors.size();
        rec.snapshot = report.meshes.size();
        report.meshes.push_back(space.skeleton_mesh);

        if (it + 1 < iters) {
            auto marked = mark(errors, theta);
            rec.n_marked = marked.size();
            space = rm_refine_marked(space, marked);
            report.marks.push_back(std::move(marked));
        }
        report.records.push_back(rec);
    }
    report.final_space = std::move(space);
    return report;
}

std::string report_csv(const AdaptiveReport& report)
{
    std::ostringstream out;
    out.precision(10);
    out << "iter,dof,l2_error,linf_error,max_cell_error,n_marked,n_cells\n";
    for (const auto& r : report.records)
        out << r.iter << ',' << r.dof << ',' << r.l2_error << ',' << r.linf_error << ','
            << r.max_cell_error << ',' << r.n_marked << ',' << r.n_cells << '\n';
    return out.str();
}

}  // namespace lrkit
