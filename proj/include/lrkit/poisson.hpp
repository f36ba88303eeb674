#pragma once

#include "lrkit/rm_space.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace lrkit {

using Field = std::function<double(const Point&)>;

/// -Laplace(u) = f in the domain, u = u_D on its boundary.
struct PoissonProblem {
    std::string name;
    Field f;
    Field u_D;
    Field u_exact;  ///< may be empty; required by the error estimator
    Rect domain{0, 0, 1, 1};
};

/// u = atan(100 (|x - c| - pi/3)), c = (1.25, -0.25), on [0,1]^2.
PoissonProblem arctan_problem();

/// u = sin(pi x) sin(pi y), f = 2 pi^2 u, on [0,1]^2.
PoissonProblem sine_problem();

/// Harmonic u = x + c on [0,1]^2 (f = 0).
PoissonProblem linear_problem(double c = 0.0);

/// Looks a problem up by CLI name: arctan, sine, linear.
PoissonProblem problem_by_name(const std::string& name);

/// Per-cell access to the RM functions of a space. Global function indices
/// are skeleton_index * (s+1)^2 + a * (s+1) + b, with skeleton functions in
/// SplineSet order and (a, b) the member position in the lifted system.
class SpaceIndex {
public:
    explicit SpaceIndex(const RMSpace& space);

    const RMSpace& space() const { return space_; }
    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t dof_count() const { return skeleton_.size() * per_system_; }
    int per_system() const { return per_system_; }

    /// Skeleton indices of the four systems over cell i.
    const std::vector<int>& systems(std::size_t cell) const { return systems_[cell]; }

    /// The lifted member windows of skeleton function k.
    const std::vector<std::vector<double>>& x_windows(int k) const { return xwin_[k]; }
    const std::vector<std::vector<double>>& y_windows(int k) const { return ywin_[k]; }
    const TensorBSpline& skeleton(int k) const { return skeleton_[k]; }

    /// Global indices, values and gradients of the (p+1)^2 functions
    /// nonzero on cell i, evaluated at x.
    struct LocalEval {
        std::vector<int> dofs;
        std::vector<double> value, dx, dy;
    };
    void evaluate(std::size_t cell, const Point& x, LocalEval& out) const;

private:
    RMSpace space_;
    std::vector<TensorBSpline> skeleton_;
    std::vector<Cell> cells_;
    std::vector<std::vector<int>> systems_;
    std::vector<std::vector<std::vector<double>>> xwin_, ywin_;
    int per_system_;
};

struct DiscreteSystem {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd load;
    /// Fixed coefficients of the boundary functions.
    std::map<int, double> dirichlet;
};

DiscreteSystem assemble(const RMSpace& space, const PoissonProblem& problem);

struct SolverOptions {
    /// Direct factorization up to this many free unknowns, PCG beyond.
    int direct_limit = 3000;
    double tolerance = 1e-10;
};

/// Eliminates the Dirichlet coefficients, solves, and returns the full
/// coefficient vector.
Eigen::VectorXd solve_system(const DiscreteSystem& sys, const SolverOptions& options = {});

/// u_h(x) for coefficients over the space.
double evaluate_solution(const RMSpace& space, const Eigen::VectorXd& coeffs, const Point& x);

using CellErrors = std::map<Cell, double>;

/// ||u_h - u||_{L2(cell)} for every cell, with p+3 Gauss points per direction.
CellErrors l2_error_per_cell(const RMSpace& space, const Eigen::VectorXd& coeffs,
                             const Field& u_exact);

/// sqrt of the sum of squared cell errors.
double global_l2(const CellErrors& errors);

/// Max |u_h - u| over a 4x4 sample grid per cell.
double linf_error_estimate(const RMSpace& space, const Eigen::VectorXd& coeffs,
                           const Field& u_exact);

/// Cells with error >= theta * max error.
std::vector<Cell> mark(const CellErrors& errors, double theta);

struct IterationRecord {
    int iter = 0;
    std::size_t dof = 0;
    double l2_error = 0.0;
    double linf_error = 0.0;
    double max_cell_error = 0.0;
    std::size_t n_marked = 0;
    std::size_t n_cells = 0;
    /// Index into AdaptiveReport::meshes.
    std::size_t snapshot = 0;
};

struct AdaptiveReport {
    std::vector<IterationRecord> records;
    std::vector<LRMesh> meshes;        ///< skeleton mesh per iteration
    std::vector<std::vector<Cell>> marks;  ///< marked cells per refined iteration
    RMSpace final_space;
};

/// SOLVE -> ESTIMATE -> MARK -> REFINE, starting from an m0 x m0 skeleton.
/// The last iteration only solves and estimates.
AdaptiveReport adaptive_solve(const PoissonProblem& problem, int s, int m0, int iters,
                              double theta, const SolverOptions& options = {});

/// CSV with columns iter,dof,l2_error,linf_error,max_cell_error,n_marked,n_cells.
std::string report_csv(const AdaptiveReport& report);

}  // namespace lrkit
