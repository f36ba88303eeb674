#include "lrkit/io.hpp"

#include "lrkit/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrkit {

using nlohmann::json;

namespace {

json param_json(const Param& v)
{
    return json::array({v.numerator(), v.denominator()});
}

Param param_from(const json& j)
{
    if (j.is_array()) {
        if (j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
            throw ParseError("rational must be [numerator, denominator]");
        const auto den = j[1].get<std::int64_t>();
        if (den == 0) throw ParseError("zero denominator");
        return Param(j[0].get<std::int64_t>(), den);
    }
    if (j.is_number_integer()) return Param(j.get<std::int64_t>());
    if (j.is_string()) return parse_param(j.get<std::string>());
    throw ParseError("expected a rational, got " + j.dump());
}

json knots_json(const LocalKnotVector& kv)
{
    json out = json::array();
    for (const auto& k : kv.knots()) out.push_back(param_json(k));
    return out;
}

LocalKnotVector knots_from(const json& j)
{
    if (!j.is_array()) throw ParseError("knot vector must be an array");
    std::vector<Param> knots;
    for (const auto& k : j) knots.push_back(param_from(k));
    return LocalKnotVector(std::move(knots));
}

json mesh_json(const LRMesh& mesh)
{
    const Rect& d = mesh.domain();
    json segs = json::array();
    for (const auto& s : mesh.segments()) {
        segs.push_back({{"dir", s.dir == Direction::Vertical ? "v" : "h"},
                        {"fixed", param_json(s.fixed)},
                        {"span", json::array({param_json(s.lo), param_json(s.hi)})},
                        {"mult", s.mult}});
    }
    return {{"domain", json::array({param_json(d.x0), param_json(d.y0), param_json(d.x1),
                                    param_json(d.y1)})},
            {"degree", mesh.degree()},
            {"segments", segs}};
}

LRMesh mesh_from(const json& j)
{
    const auto& dom = j.at("domain");
    if (!dom.is_array() || dom.size() != 4) throw ParseError("domain must have four entries");
    const Rect domain{param_from(dom[0]), param_from(dom[1]), param_from(dom[2]),
                      param_from(dom[3])};
    const int degree = j.at("degree").get<int>();
    std::vector<MeshSegment> segs;
    for (const auto& s : j.at("segments")) {
        const std::string dir = s.at("dir").get<std::string>();
        if (dir != "v" && dir != "h") throw ParseError("segment dir must be \"v\" or \"h\"");
        const auto& span = s.at("span");
        if (!span.is_array() || span.size() != 2) throw ParseError("span must have two entries");
        segs.push_back({dir == "v" ? Direction::Vertical : Direction::Horizontal,
                        param_from(s.at("fixed")), param_from(span[0]), param_from(span[1]),
                        s.value("mult", 1)});
    }
    return LRMesh::from_segments(domain, degree, segs);
}

json splines_json(const SplineSet& set)
{
    json out = json::array();
    for (const auto& b : set) out.push_back({{"kvx", knots_json(b.kx())}, {"kvy", knots_json(b.ky())}});
    return out;
}

SplineSet splines_from(const json& j)
{
    if (!j.is_array()) throw ParseError("spline list must be an array");
    SplineSet out;
    for (const auto& b : j) out.emplace(knots_from(b.at("kvx")), knots_from(b.at("kvy")));
    return out;
}

template <typename Fn>
auto parsing(Fn fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

}  // namespace

// One array element per line keeps the files compact and diff-friendly.
std::string list_dump(const json& list, const std::string& indent)
{
    std::string out = "[";
    for (std::size_t i = 0; i < list.size(); ++i)
        out += (i ? ",\n" : "\n") + indent + list[i].dump();
    return out + "\n" + indent.substr(1) + "]";
}

std::string mesh_dump(const json& j, const std::string& indent)
{
    return "{\n" + indent + "\"degree\": " + j["degree"].dump() + ",\n" + indent +
           "\"domain\": " + j["domain"].dump() + ",\n" + indent +
           "\"segments\": " + list_dump(j["segments"], indent + " ") + "\n" +
           indent.substr(1) + "}";
}

std::string mesh_to_json(const LRMesh& mesh)
{
    return mesh_dump(mesh_json(mesh), " ") + "\n";
}

LRMesh mesh_from_json(const std::string& text)
{
    return parsing([&] { return mesh_from(json::parse(text)); });
}

std::string splines_to_json(const SplineSet& set)
{
    return list_dump(splines_json(set), " ") + "\n";
}

SplineSet splines_from_json(const std::string& text)
{
    return parsing([&] { return splines_from(json::parse(text)); });
}

std::string space_to_json(const RMSpace& space)
{
    return "{\n \"s\": " + std::to_string(space.s) + ",\n \"mesh\": " +
           mesh_dump(mesh_json(space.skeleton_mesh), "  ") + ",\n \"skeleton\": " +
           list_dump(splines_json(space.skeleton), "  ") + "\n}\n";
}

RMSpace space_from_json(const std::string& text)
{
    return parsing([&] {
        const json j = json::parse(text);
        RMSpace space{j.at("s").get<int>(), mesh_from(j.at("mesh")),
                      splines_from(j.at("skeleton"))};
        if (space.s < 0) throw ParseError("s must be non-negative");
        if (!is_bilinear_shape(space.skeleton_mesh))
            throw ParseError("space mesh must be the bilinear skeleton");
        for (const auto& b : space.skeleton)
            if (b.kx().degree() != 1 || b.ky().degree() != 1)
                throw ParseError("skeleton functions must be bilinear");
        return space;
    });
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << contents;
    if (!out) throw ParseError("write to '" + path + "' failed");
}

std::vector<Mark> parse_marks(const std::string& text)
{
    std::vector<Mark> out;
    std::istringstream in(text);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        std::istringstream words(line);
        std::vector<std::string> w;
        for (std::string t; words >> t;) w.push_back(t);
        if (w.empty() || w[0].starts_with('#')) continue;
        try {
            if (w[0] == "@point") {
                if (w.size() != 3) throw ParseError("expected '@point x y'");
                out.push_back({MarkPoint{parse_param(w[1]), parse_param(w[2])}, n});
            } else {
                if (w.size() != 4) throw ParseError("expected 'x0 y0 x1 y1'");
                const Rect r{parse_param(w[0]), parse_param(w[1]), parse_param(w[2]),
                             parse_param(w[3])};
                if (!(r.x0 < r.x1 && r.y0 < r.y1)) throw ParseError("empty rectangle");
                out.push_back({MarkRect{r}, n});
            }
        } catch (const std::exception& e) {
            throw ParseError("marks line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Cell> resolve_marks(const std::vector<Mark>& marks, const LRMesh& mesh, bool exact)
{
    const auto all = mesh.cells();
    std::vector<Cell> out;
    for (const auto& m : marks) {
        const std::string where = "marks line " + std::to_string(m.line) + ": ";
        if (const auto* p = std::get_if<MarkPoint>(&m.what)) {
            try {
                out.push_back(mesh.cell_at(p->x, p->y));
            } catch (const InvalidArgument& e) {
                throw ParseError(where + e.what());
            }
            continue;
        }
        const Rect& r = std::get<MarkRect>(m.what).rect;
        if (exact) {
            if (!std::binary_search(all.begin(), all.end(), r))
                throw ParseError(where + "no such cell");
            out.push_back(r);
        } else {
            const auto inside = mesh.cells_within(r);
            out.insert(out.end(), inside.begin(), inside.end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string render_svg(const LRMesh& mesh)
{
    constexpr double size = 1000.0;
    constexpr double margin = 20.0;
    const Rect& d = mesh.domain();
    const double w = to_double(d.width());
    const double h = to_double(d.height());
    const double scale = (size - 2 * margin) / std::max(w, h);
    const double offset = 0.005 * w * scale;
    const auto sx = [&](double x) { return margin + (x - to_double(d.x0)) * scale; };
    const auto sy = [&](double y) { return size - margin - (y - to_double(d.y0)) * scale; };

    std::string out;
    char buf[256];
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" "
           "viewBox=\"0 0 1000 1000\">\n";
    out += "<rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"none\" "
                  "stroke=\"black\" stroke-width=\"1.5\"/>\n",
                  sx(to_double(d.x0)), sy(to_double(d.y1)), w * scale, h * scale);
    out += buf;
    out += "<g stroke=\"black\" stroke-width=\"0.5\">\n";
    for (const auto& s : mesh.segments()) {
        if (mesh.is_boundary(s.dir, s.fixed)) continue;
        const double f = to_double(s.fixed);
        const double lo = to_double(s.lo);
        const double hi = to_double(s.hi);
        for (int k = 0; k < s.mult; ++k) {
            const double shift = (k - 0.5 * (s.mult - 1)) * offset;
            double x1, y1, x2, y2;
            if (s.dir == Direction::Vertical) {
                x1 = x2 = sx(f) + shift;
                y1 = sy(lo);
                y2 = sy(hi);
            } else {
                y1 = y2 = sy(f) - shift;
                x1 = sx(lo);
                x2 = sx(hi);
            }
            std::snprintf(buf, sizeof buf,
                          "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n", x1, y1, x2,
                          y2);
            out += buf;
        }
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace lrkit
