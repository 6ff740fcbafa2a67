#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "maldom/errors.hpp"

namespace maldom {

/// Doubles are stored as C99 hex floats so that save/load round-trips are
/// bit-exact. strtod is used for parsing because stream extraction of
/// hexfloat is not portable.
inline void write_hex_double(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    out << buf;
}

inline std::string read_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw ParseError(std::string("model stream ended while reading ") + what);
    return tok;
}

inline double read_hex_double(std::istream& in, const char* what) {
    std::string tok = read_token(in, what);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw ParseError(std::string("bad numeric value '") + tok + "' for " + what);
    return v;
}

inline long read_long(std::istream& in, const char* what) {
    std::string tok = read_token(in, what);
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size())
        throw ParseError(std::string("bad integer value '") + tok + "' for " + what);
    return v;
}

inline void expect_tag(std::istream& in, const std::string& tag) {
    std::string tok = read_token(in, "section tag");
    if (tok != tag)
        throw ParseError("expected section '" + tag + "', found '" + tok + "'");
}

}  // namespace maldom
