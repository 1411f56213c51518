#ifndef QFLOW_BODY_IO_HPP
#define QFLOW_BODY_IO_HPP

// Plain-text bodies:
//   CIRCLE 256
//   <parameter> <u>      x N, %.16e (17 significant digits, exact round trip)
// Trajectories prefix every body with a `t h dt` line.

#include <qflow/diagnostics.hpp>
#include <qflow/errors.hpp>
#include <qflow/support_field.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace qflow {

namespace detail {

inline std::string sci(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

inline std::vector<std::string> words(const std::string& line)
{
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string w;
    while (ss >> w)
        out.push_back(w);
    return out;
}

inline bool next_line(std::istream& is, std::string& line, int& lineno)
{
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            return true;
    }
    return false;
}

inline SupportField read_body_block(std::istream& is, int& lineno)
{
    std::string line;
    if (!next_line(is, line, lineno))
        throw ParseError("line " + std::to_string(lineno) + ": missing body header");
    const auto head = words(line);
    if (head.size() != 2)
        throw ParseError("line " + std::to_string(lineno) + ": expected 'BACKEND N'");
    Backend backend;
    try {
        backend = backend_from_string(head[0]);
    } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    int size = 0;
    try {
        size = std::stoi(head[1]);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad node count '" + head[1] + "'");
    }
    std::shared_ptr<const Grid> grid;
    try {
        grid = Grid::get(backend, size);
    } catch (const DomainError& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    std::vector<double> u(size);
    for (int j = 0; j < size; ++j) {
        if (!next_line(is, line, lineno))
            throw ParseError("line " + std::to_string(lineno) + ": body truncated after " + std::to_string(j)
                             + " of " + std::to_string(size) + " nodes");
        const auto w = words(line);
        if (w.size() != 2)
            throw ParseError("line " + std::to_string(lineno) + ": expected 'parameter u'");
        try {
            const double p = parse_double(w[0]);
            if (std::abs(p - grid->nodes()[j]) > 1e-12)
                throw ParseError("parameter does not match grid node " + std::to_string(j));
            u[j] = parse_double(w[1]);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    try {
        return SupportField(backend, std::move(u));
    } catch (const DomainError& e) {
        throw ParseError(std::string("invalid body: ") + e.what());
    }
}

} // namespace detail

inline void write_body(std::ostream& os, const SupportField& body)
{
    os << to_string(body.backend()) << ' ' << body.size() << '\n';
    const auto& nodes = body.grid().nodes();
    for (int j = 0; j < body.size(); ++j)
        os << detail::sci(nodes[j]) << ' ' << detail::sci(body[j]) << '\n';
}

inline SupportField read_body(std::istream& is)
{
    int lineno = 0;
    return detail::read_body_block(is, lineno);
}

struct Snapshot {
    double t = 0.0;
    double h = 0.0;
    double dt = 0.0;
    SupportField body;
};

inline void write_snapshot(std::ostream& os, double t, double h, double dt, const SupportField& body)
{
    os << detail::sci(t) << ' ' << detail::sci(h) << ' ' << detail::sci(dt) << '\n';
    write_body(os, body);
}

inline std::vector<Snapshot> read_trajectory(std::istream& is)
{
    std::vector<Snapshot> out;
    std::string line;
    int lineno = 0;
    while (detail::next_line(is, line, lineno)) {
        const auto w = detail::words(line);
        if (w.size() != 3)
            throw ParseError("line " + std::to_string(lineno) + ": expected 't h dt'");
        double t, h, dt;
        try {
            t = detail::parse_double(w[0]);
            h = detail::parse_double(w[1]);
            dt = detail::parse_double(w[2]);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        out.push_back({t, h, dt, detail::read_body_block(is, lineno)});
    }
    return out;
}

} // namespace qflow

#endif
