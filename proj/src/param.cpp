#include "lrkit/param.hpp"

#include "lrkit/errors.hpp"

#include <cctype>
#include <tuple>

namespace lrkit {

std::string to_string(const Param& v)
{
    if (v.denominator() == 1) return std::to_string(v.numerator());
    return std::to_string(v.numerator()) + "/" + std::to_string(v.denominator());
}

namespace {

std::int64_t parse_int(const std::string& text, const std::string& whole)
{
    if (text.empty()) throw ParseError("empty number in '" + whole + "'");
    std::size_t pos = 0;
    std::int64_t value = 0;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw ParseError("invalid number '" + whole + "'");
    }
    if (pos != text.size()) throw ParseError("invalid number '" + whole + "'");
    return value;
}

}  // namespace

Param parse_param(const std::string& text)
{
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const auto num = parse_int(text.substr(0, slash), text);
        const auto den = parse_int(text.substr(slash + 1), text);
        if (den == 0) throw ParseError("zero denominator in '" + text + "'");
        return Param(num, den);
    }
    if (const auto dot = text.find('.'); dot != std::string::npos) {
        const std::string int_part = text.substr(0, dot);
        const std::string frac_part = text.substr(dot + 1);
        if (frac_part.empty() || frac_part.size() > 17)
            throw ParseError("unsupported decimal '" + text + "'");
        for (char c : frac_part)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw ParseError("invalid number '" + text + "'");
        const bool negative = !int_part.empty() && int_part[0] == '-';
        const std::string digits =
            (int_part == "-" || int_part.empty() || int_part == "+") ? "0" : int_part;
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
        const Param whole(parse_int(digits, text));
        const Param frac(parse_int(frac_part, text), scale);
        return negative ? whole - frac : whole + frac;
    }
    return Param(parse_int(text, text));
}

bool operator<(const Rect& a, const Rect& b)
{
    return std::tie(a.x0, a.y0, a.x1, a.y1) < std::tie(b.x0, b.y0, b.x1, b.y1);
}

}  // namespace lrkit
