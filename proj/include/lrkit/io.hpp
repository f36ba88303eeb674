#pragma once

#include "lrkit/rm_space.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace lrkit {

// JSON layouts. Rationals are written as [num, den] pairs; readers also
// accept integers and strings such as "3/8" or "0.25".
//   mesh:   {"domain": [x0, y0, x1, y1], "degree": p,
//            "segments": [{"dir": "v"|"h", "fixed": q, "span": [q, q], "mult": k}]}
//   splines: [{"kvx": [q, ...], "kvy": [q, ...]}]
//   space:  {"s": s, "mesh": <mesh>, "skeleton": <splines>}

std::string mesh_to_json(const LRMesh& mesh);
LRMesh mesh_from_json(const std::string& text);

std::string splines_to_json(const SplineSet& set);
SplineSet splines_from_json(const std::string& text);

std::string space_to_json(const RMSpace& space);
RMSpace space_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// One line of a marks file: a rectangle "x0 y0 x1 y1" or "@point x y".
struct MarkRect {
    Rect rect;
};
struct MarkPoint {
    Param x, y;
};
struct Mark {
    std::variant<MarkRect, MarkPoint> what;
    int line = 0;  ///< 1-based line number in the file
};

/// Blank lines and lines starting with '#' are skipped.
std::vector<Mark> parse_marks(const std::string& text);

/// Cells selected by the marks on the given mesh. With exact = true every
/// rectangle must be a cell of the mesh; otherwise a rectangle selects the
/// cells lying inside it. Throws ParseError naming the offending line.
std::vector<Cell> resolve_marks(const std::vector<Mark>& marks, const LRMesh& mesh, bool exact);

/// 1000x1000 SVG of the mesh; a multiplicity-k segment is drawn as k
/// parallel hairlines.
std::string render_svg(const LRMesh& mesh);

}  // namespace lrkit
