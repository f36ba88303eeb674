#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace lrkit {

/// Exact parameter value. Mesh coordinates are kept rational so that
/// meshline coincidence tests never depend on rounding.
using Param = boost::rational<std::int64_t>;

inline double to_double(const Param& v)
{
    return boost::rational_cast<double>(v);
}

inline Param midpoint(const Param& a, const Param& b)
{
    return (a + b) / 2;
}

/// "n/d", or "n" for integers.
std::string to_string(const Param& v);

/// Parses "n", "n/d" or a finite decimal literal such as "0.125".
Param parse_param(const std::string& text);

enum class Direction { Vertical, Horizontal };

inline Direction other(Direction d)
{
    return d == Direction::Vertical ? Direction::Horizontal : Direction::Vertical;
}

inline int axis(Direction d)
{
    return d == Direction::Vertical ? 0 : 1;
}

/// Closed axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
    Param x0, y0, x1, y1;

    Param lo(int ax) const { return ax == 0 ? x0 : y0; }
    Param hi(int ax) const { return ax == 0 ? x1 : y1; }
    Param width() const { return x1 - x0; }
    Param height() const { return y1 - y0; }

    bool contains(const Rect& r) const
    {
        return x0 <= r.x0 && r.x1 <= x1 && y0 <= r.y0 && r.y1 <= y1;
    }
    /// Positive-area overlap.
    bool overlaps(const Rect& r) const
    {
        return x0 < r.x1 && r.x0 < x1 && y0 < r.y1 && r.y0 < y1;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

bool operator<(const Rect& a, const Rect& b);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

}  // namespace lrkit
