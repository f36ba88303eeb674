#include "cli.hpp"

#include "lrkit/errors.hpp"
#include "lrkit/io.hpp"
#include "lrkit/poisson.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <sstream>

namespace lrkit::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, sep);) out.push_back(item);
    return out;
}

Param usage_param(const std::string& text)
{
    try {
        return parse_param(text);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + text + "'");
    }
}

Rect parse_domain(const std::string& text)
{
    const auto parts = split(text, ',');
    if (parts.size() != 4) throw UsageError("--domain expects x0,y0,x1,y1");
    const Rect r{usage_param(parts[0]), usage_param(parts[1]), usage_param(parts[2]),
                 usage_param(parts[3])};
    if (!(r.x0 < r.x1 && r.y0 < r.y1)) throw UsageError("--domain is empty");
    return r;
}

void emit(const std::string& path, const std::string& contents, std::ostream& out)
{
    if (path.empty() || path == "-")
        out << contents;
    else
        write_file(path, contents);
}

// The skeleton space of a mesh file in bilinear or RM shape, and the s of
// that shape (0 for bilinear input).
std::pair<RMSpace, int> load_space(const std::string& path, int s)
{
    const LRMesh mesh = mesh_from_json(read_file(path));
    const int shape = is_bilinear_shape(mesh) ? 0 : (mesh.degree() - 1) / 2;
    return {space_from_mesh(mesh, s), shape};
}

LRMesh in_shape(const RMSpace& space, int shape)
{
    return shape == 0 ? space.skeleton_mesh : lift_multiplicities(space.skeleton_mesh, shape);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Locally refined B-spline meshes and RM spline spaces", "lrkit"};
    app.require_subcommand(1);

    std::string mesh_path, marks_path, out_path, set_path, space_path, report_path;
    std::string cells_text = "4x4", domain_text = "0,0,1,1", point_text;
    std::string problem_name = "arctan";
    int s = 0, rounds = 1, s_max = 0, m0 = 8, iters = 7, direct_limit = 3000;
    double theta = 0.05;

    auto* mesh_new = app.add_subcommand("mesh-new", "Write a uniform bilinear tensor mesh");
    mesh_new->add_option("--cells", cells_text, "Cell counts MxN")->capture_default_str();
    mesh_new->add_option("--domain", domain_text, "x0,y0,x1,y1")->capture_default_str();
    mesh_new->add_option("--out", out_path, "Output mesh file (stdout if omitted)");

    auto* refine = app.add_subcommand("refine", "Refine marked cells, round after round");
    refine->add_option("--mesh", mesh_path)->required();
    refine->add_option("--marks", marks_path)->required();
    refine->add_option("--rounds", rounds)->check(CLI::PositiveNumber)->capture_default_str();
    refine->add_option("--s", s, "Smoothness used for the reported RM counts")
        ->check(CLI::NonNegativeNumber);
    refine->add_option("--out", out_path, "Refined mesh file (stdout if omitted)");
    refine->add_option("--set", set_path, "Also write the skeleton B-splines here");
    refine->add_option("--space", space_path, "Also write the RM space here");

    auto* lift = app.add_subcommand("lift", "Write the mesh in RM shape for smoothness s");
    lift->add_option("--mesh", mesh_path)->required();
    lift->add_option("--s", s)->required()->check(CLI::NonNegativeNumber);
    lift->add_option("--out", out_path);

    auto* check = app.add_subcommand("check", "Check that a mesh is admissible for s");
    check->add_option("--mesh", mesh_path)->required();
    check->add_option("--s", s)->required()->check(CLI::NonNegativeNumber);

    auto* count = app.add_subcommand("count", "Number of RM B-splines for s = 0..s-max");
    count->add_option("--mesh", mesh_path)->required();
    count->add_option("--s-max", s_max)->required()->check(CLI::NonNegativeNumber);

    auto* eval = app.add_subcommand("eval", "Evaluate the RM basis functions at a point");
    auto* eval_space = eval->add_option("--space", space_path);
    auto* eval_mesh = eval->add_option("--mesh", mesh_path);
    eval->add_option("--s", s)->check(CLI::NonNegativeNumber);
    eval->add_option("--point", point_text, "x,y")->required();
    eval_space->excludes(eval_mesh);

    auto* solve = app.add_subcommand("solve", "Adaptive Poisson solve");
    solve->add_option("--problem", problem_name)
        ->check(CLI::IsMember({"arctan", "sine", "linear"}))
        ->capture_default_str();
    solve->add_option("--s", s)->check(CLI::NonNegativeNumber)->capture_default_str();
    solve->add_option("--m0", m0)->check(CLI::PositiveNumber)->capture_default_str();
    solve->add_option("--iters", iters)->check(CLI::PositiveNumber)->capture_default_str();
    solve->add_option("--theta", theta)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    solve->add_option("--direct-limit", direct_limit)->capture_default_str();
    solve->add_option("--report", report_path, "CSV report (stdout if omitted)");

    auto* render = app.add_subcommand("render", "Draw a mesh as SVG");
    render->add_option("--mesh", mesh_path)->required();
    render->add_option("--out", out_path, "SVG file (stdout if omitted)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*mesh_new) {
            const auto mn = split(cells_text, 'x');
            if (mn.size() != 2) throw UsageError("--cells expects MxN");
            int m = 0, n = 0;
            try {
                m = std::stoi(mn[0]);
                n = std::stoi(mn[1]);
            } catch (const std::exception&) {
                throw UsageError("--cells expects MxN");
            }
            if (m < 1 || n < 1) throw UsageError("--cells needs positive counts");
            emit(out_path, mesh_to_json(tensor_mesh(m, n, parse_domain(domain_text), 1, 1)), out);
        } else if (*refine) {
            auto [space, shape] = load_space(mesh_path, s);
            space.s = s;
            const auto marks = parse_marks(read_file(marks_path));
            for (int r = 1; r <= rounds; ++r) {
                const auto cells = resolve_marks(marks, space.skeleton_mesh, r == 1);
                space = rm_refine_marked(space, cells);
                err << "round " << r << ": marked " << cells.size() << ", cells "
                    << space.skeleton_mesh.cells().size() << ", skeleton functions "
                    << space.skeleton.size() << ", RM functions " << cardinality(space) << "\n";
            }
            emit(out_path, mesh_to_json(in_shape(space, shape)), out);
            if (!set_path.empty()) write_file(set_path, splines_to_json(space.skeleton));
            if (!space_path.empty()) write_file(space_path, space_to_json(space));
        } else if (*lift) {
            const auto [space, shape] = load_space(mesh_path, s);
            emit(out_path, mesh_to_json(lift_multiplicities(space.skeleton_mesh, s)), out);
        } else if (*check) {
            LRMesh mesh = mesh_from_json(read_file(mesh_path));
            if (is_bilinear_shape(mesh) && s > 0) mesh = lift_multiplicities(mesh, s);
            if (!admissible_check(mesh, s)) {
                err << "not admissible for s = " << s << "\n";
                return Invariant;
            }
            out << "admissible for s = " << s << "\n";
        } else if (*count) {
            const auto [space, shape] = load_space(mesh_path, 0);
            const auto report = overloaded_cells(space.skeleton, space.skeleton_mesh);
            if (!report.underloaded.empty()) throw InvariantError("skeleton is underloaded");
            out << "s,count\n";
            for (int k = 0; k <= s_max; ++k) {
                RMSpace sk = space;
                sk.s = k;
                out << k << ',' << cardinality(sk) << '\n';
            }
        } else if (*eval) {
            RMSpace space;
            if (!space_path.empty()) {
                space = space_from_json(read_file(space_path));
                if (eval->count("--s")) space.s = s;
            } else if (!mesh_path.empty()) {
                space = load_space(mesh_path, s).first;
            } else {
                throw UsageError("eval needs --space or --mesh");
            }
            const auto xy = split(point_text, ',');
            if (xy.size() != 2) throw UsageError("--point expects x,y");
            const Point x{to_double(usage_param(xy[0])), to_double(usage_param(xy[1]))};
            out.precision(17);
            out << "kvx;kvy;value\n";
            double sum = 0.0;
            for (const auto& [b, v] : basis_at(space, x)) {
                std::string kx, ky;
                for (const auto& k : b.kx().knots()) kx += (kx.empty() ? "" : " ") + to_string(k);
                for (const auto& k : b.ky().knots()) ky += (ky.empty() ? "" : " ") + to_string(k);
                out << kx << ';' << ky << ';' << v << '\n';
                sum += v;
            }
            out << "# sum " << sum << '\n';
        } else if (*solve) {
            SolverOptions opts;
            opts.direct_limit = direct_limit;
            const auto report =
                adaptive_solve(problem_by_name(problem_name), s, m0, iters, theta, opts);
            emit(report_path, report_csv(report), out);
        } else if (*render) {
            emit(out_path, render_svg(mesh_from_json(read_file(mesh_path))), out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return Usage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return Parse;
    } catch (const InvariantError& e) {
        err << "invariant violated: " << e.what() << "\n";
        return Invariant;
    } catch (const InvalidArgument& e) {
        err << "invalid: " << e.what() << "\n";
        return Invariant;
    }
    return Ok;
}

}  // namespace lrkit::cli
