#ifndef QFLOW_CONFIG_HPP
#define QFLOW_CONFIG_HPP

// Run configuration files: `[section]` headers and `key = value` lines,
// `#` or `;` comments. Any value may be a list `[v1, v2, ...]`; lists are
// only accepted by sweeps, which expand them into a Cartesian product.
//
//   [shape]   type = sphere | ellipse | ellipsoid_rev | random_trig, N,
//             radius, backend, a, b, c, seed, modes, margin
//   [law]     n, k, alpha
//   [flow]    t_end, dt_init, dt_safety, roundness_stop, volume_correct,
//             snapshot_stride, max_step_retries
//   [output]  directory, formats (csv, json, bodies, svg)

#include <qflow/convex_body.hpp>
#include <qflow/diagnostics.hpp>
#include <qflow/errors.hpp>
#include <qflow/flow.hpp>

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace qflow {

struct ConfigEntry {
    std::string key;
    std::vector<std::string> values; // one element unless written as a list
    bool is_list = false;
    int line = 0;
};

struct RawConfig {
    // section -> entries in file order
    std::map<std::string, std::vector<ConfigEntry>> sections;

    const ConfigEntry* find(const std::string& section, const std::string& key) const
    {
        const auto it = sections.find(section);
        if (it == sections.end())
            return nullptr;
        for (const auto& e : it->second)
            if (e.key == key)
                return &e;
        return nullptr;
    }
};

struct RunConfig {
    ShapeSpec shape;
    int N = 128;
    FlowConfig flow;
    std::string directory;
    std::set<std::string> formats{"csv", "json", "bodies", "svg"};

    Backend backend() const
    {
        return std::visit(
            [](const auto& s) -> Backend {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, shape::Ellipse>)
                    return Backend::circle;
                else if constexpr (std::is_same_v<S, shape::EllipsoidRev>)
                    return Backend::axisymmetric;
                else
                    return s.backend;
            },
            shape);
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline ParseError line_error(int line, const std::string& msg)
{
    return ParseError("line " + std::to_string(line) + ": " + msg);
}

inline const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"shape", {"type", "N", "radius", "backend", "a", "b", "c", "seed", "modes", "margin"}},
        {"law", {"n", "k", "alpha"}},
        {"flow", {"t_end", "dt_init", "dt_safety", "roundness_stop", "volume_correct", "snapshot_stride",
                  "max_step_retries"}},
        {"output", {"directory", "formats"}},
    };
    return keys;
}

} // namespace detail

inline RawConfig parse_config(std::istream& is)
{
    RawConfig cfg;
    std::string section;
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto cut = raw.find_first_of("#;");
        const std::string line = detail::trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw detail::line_error(lineno, "unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!detail::known_keys().count(section))
                throw detail::line_error(lineno, "unknown section [" + section + "]");
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw detail::line_error(lineno, "expected 'key = value'");
        if (section.empty())
            throw detail::line_error(lineno, "key outside of any section");
        ConfigEntry e;
        e.key = detail::trim(line.substr(0, eq));
        e.line = lineno;
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!detail::known_keys().at(section).count(e.key))
            throw detail::line_error(lineno, "unknown key '" + e.key + "' in [" + section + "]");
        if (cfg.find(section, e.key))
            throw detail::line_error(lineno, "duplicate key '" + e.key + "'");
        if (value.empty())
            throw detail::line_error(lineno, "empty value for '" + e.key + "'");
        if (value.front() == '[') {
            if (value.back() != ']')
                throw detail::line_error(lineno, "unterminated list");
            e.is_list = true;
            const std::string inner = detail::trim(value.substr(1, value.size() - 2));
            if (inner.empty())
                throw detail::line_error(lineno, "empty list for '" + e.key + "'");
            for (const auto& item : detail::split(inner, ',')) {
                const auto v = detail::trim(item);
                if (v.empty())
                    throw detail::line_error(lineno, "empty list element for '" + e.key + "'");
                e.values.push_back(v);
            }
        } else {
            e.values.push_back(value);
        }
        cfg.sections[section].push_back(std::move(e));
    }
    return cfg;
}

inline RawConfig parse_config_string(const std::string& text)
{
    std::istringstream ss(text);
    return parse_config(ss);
}

/// One sweep cell: the scalar configuration and a label naming the swept values.
struct SweepCell {
    RawConfig config;
    std::string label;
    std::vector<std::pair<std::string, std::string>> swept; // "section.key" -> value
};

/// Cartesian product over list-valued entries, first list varying slowest.
inline std::vector<SweepCell> expand_sweep(const RawConfig& cfg)
{
    std::vector<std::pair<std::string, const ConfigEntry*>> lists;
    for (const auto& [section, entries] : cfg.sections)
        for (const auto& e : entries)
            if (e.is_list)
                lists.emplace_back(section, &e);
    std::sort(lists.begin(), lists.end(),
              [](const auto& x, const auto& y) { return x.second->line < y.second->line; });

    std::vector<SweepCell> cells;
    std::vector<std::size_t> idx(lists.size(), 0);
    for (;;) {
        SweepCell cell{cfg, "", {}};
        for (std::size_t i = 0; i < lists.size(); ++i) {
            const auto& [section, entry] = lists[i];
            const std::string& v = entry->values[idx[i]];
            for (auto& e : cell.config.sections[section]) {
                if (e.key == entry->key) {
                    e.values = {v};
                    e.is_list = false;
                }
            }
            cell.swept.emplace_back(section + "." + entry->key, v);
            cell.label += (cell.label.empty() ? "" : "_") + entry->key + "-" + v;
        }
        if (cell.label.empty())
            cell.label = "single";
        cells.push_back(std::move(cell));
        std::size_t i = lists.size();
        while (i > 0) {
            --i;
            if (++idx[i] < lists[i].second->values.size())
                break;
            idx[i] = 0;
            if (i == 0)
                return cells;
        }
        if (lists.empty())
            return cells;
    }
}

namespace detail {

class Reader {
public:
    explicit Reader(const RawConfig& cfg) : cfg_(cfg) {}

    const ConfigEntry* entry(const std::string& section, const std::string& key) const
    {
        const auto* e = cfg_.find(section, key);
        if (e && e->is_list)
            throw line_error(e->line, "list value for '" + key + "' is only allowed in a sweep");
        return e;
    }

    int line(const std::string& section, const std::string& key) const
    {
        const auto* e = cfg_.find(section, key);
        return e ? e->line : 0;
    }

    std::optional<std::string> str(const std::string& section, const std::string& key) const
    {
        const auto* e = entry(section, key);
        if (!e)
            return std::nullopt;
        return e->values.front();
    }

    std::optional<double> num(const std::string& section, const std::string& key) const
    {
        const auto* e = entry(section, key);
        if (!e)
            return std::nullopt;
        try {
            return parse_double(e->values.front());
        } catch (const ParseError&) {
            throw line_error(e->line, "'" + key + "' must be a number, got '" + e->values.front() + "'");
        }
    }

    std::optional<long long> integer(const std::string& section, const std::string& key) const
    {
        const auto* e = entry(section, key);
        if (!e)
            return std::nullopt;
        const auto& s = e->values.front();
        long long v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw line_error(e->line, "'" + key + "' must be an integer, got '" + s + "'");
        return v;
    }

    std::optional<bool> boolean(const std::string& section, const std::string& key) const
    {
        const auto* e = entry(section, key);
        if (!e)
            return std::nullopt;
        const auto& s = e->values.front();
        if (s == "true" || s == "yes" || s == "1")
            return true;
        if (s == "false" || s == "no" || s == "0")
            return false;
        throw line_error(e->line, "'" + key + "' must be true or false, got '" + s + "'");
    }

    std::string required_str(const std::string& section, const std::string& key) const
    {
        auto v = str(section, key);
        if (!v)
            throw ParseError("missing required key '" + key + "' in [" + section + "]");
        return *v;
    }

    void reject_unused(const std::string& section, const std::set<std::string>& used, const std::string& why) const
    {
        const auto it = cfg_.sections.find(section);
        if (it == cfg_.sections.end())
            return;
        for (const auto& e : it->second)
            if (!used.count(e.key))
                throw line_error(e.line, "key '" + e.key + "' is not used " + why);
    }

private:
    const RawConfig& cfg_;
};

// Runs f; a DomainError becomes a ParseError on the given line.
template <class F>
auto at_line(int line, F&& f)
{
    try {
        return f();
    } catch (const DomainError& e) {
        throw line_error(line, e.what());
    }
}

} // namespace detail

/// Validates a scalar configuration against every constraint of the
/// underlying types; errors carry the offending line.
inline RunConfig to_run_config(const RawConfig& cfg)
{
    const detail::Reader rd(cfg);
    RunConfig rc;

    const std::string type = rd.required_str("shape", "type");
    const int type_line = rd.line("shape", "type");
    auto positive = [&](const char* key, double fallback) {
        const double v = rd.num("shape", key).value_or(fallback);
        if (!(v > 0.0) || !std::isfinite(v))
            throw detail::line_error(rd.line("shape", key), std::string(key) + " > 0 required");
        return v;
    };
    auto backend = [&]() {
        const auto s = rd.str("shape", "backend").value_or("CIRCLE");
        try {
            return backend_from_string(s);
        } catch (const ParseError& e) {
            throw detail::line_error(rd.line("shape", "backend"), e.what());
        }
    };
    if (type == "sphere") {
        rc.shape = shape::Sphere{positive("radius", 1.0), backend()};
        rd.reject_unused("shape", {"type", "N", "radius", "backend"}, "by shape sphere");
    } else if (type == "ellipse") {
        rc.shape = shape::Ellipse{positive("a", 2.0), positive("b", 1.0)};
        rd.reject_unused("shape", {"type", "N", "a", "b"}, "by shape ellipse");
    } else if (type == "ellipsoid_rev") {
        rc.shape = shape::EllipsoidRev{positive("a", 1.0), positive("c", 1.6)};
        rd.reject_unused("shape", {"type", "N", "a", "c"}, "by shape ellipsoid_rev");
    } else if (type == "random_trig") {
        shape::RandomTrig rt;
        const auto seed = rd.integer("shape", "seed").value_or(0);
        if (seed < 0)
            throw detail::line_error(rd.line("shape", "seed"), "seed >= 0 required");
        rt.seed = static_cast<std::uint64_t>(seed);
        rt.modes = static_cast<int>(rd.integer("shape", "modes").value_or(4));
        if (rt.modes < 1)
            throw detail::line_error(rd.line("shape", "modes"), "modes >= 1 required");
        rt.margin = positive("margin", 0.1);
        rt.backend = backend();
        rc.shape = rt;
        rd.reject_unused("shape", {"type", "N", "seed", "modes", "margin", "backend"}, "by shape random_trig");
    } else {
        throw detail::line_error(type_line, "unknown shape type '" + type + "'");
    }

    const auto N = rd.integer("shape", "N").value_or(128);
    const int n_line = rd.line("shape", "N");
    if (N < 16 || N > (1 << 20))
        throw detail::line_error(n_line, "N must lie in [16, 2^20]");
    rc.N = static_cast<int>(N);
    detail::at_line(n_line, [&] { return Grid::get(rc.backend(), rc.N); });

    const int dim = dimension(rc.backend());
    const auto n = rd.integer("law", "n").value_or(dim);
    const auto k = rd.integer("law", "k").value_or(1);
    const double alpha = rd.num("law", "alpha").value_or(1.0);
    if (n != dim)
        throw detail::line_error(rd.line("law", "n"), "n = " + std::to_string(n) + " does not match the "
                                                          + to_string(rc.backend()) + " backend (n = "
                                                          + std::to_string(dim) + ")");
    if (!(alpha > 0.0))
        throw detail::line_error(rd.line("law", "alpha"), "alpha > 0 required");
    const int law_line = std::max({rd.line("law", "k"), rd.line("law", "n"), rd.line("law", "alpha")});
    rc.flow.law = detail::at_line(law_line, [&] { return SpeedLaw(static_cast<int>(n), static_cast<int>(k), alpha); });

    auto& f = rc.flow;
    f.t_end = rd.num("flow", "t_end").value_or(f.t_end);
    f.dt_init = rd.num("flow", "dt_init").value_or(f.dt_init);
    f.dt_safety = rd.num("flow", "dt_safety").value_or(f.dt_safety);
    f.roundness_stop = rd.num("flow", "roundness_stop").value_or(f.roundness_stop);
    f.volume_correct = rd.boolean("flow", "volume_correct").value_or(f.volume_correct);
    f.snapshot_stride = static_cast<int>(rd.integer("flow", "snapshot_stride").value_or(f.snapshot_stride));
    f.max_step_retries = static_cast<int>(rd.integer("flow", "max_step_retries").value_or(f.max_step_retries));
    auto require = [&](bool ok, const char* key, const char* msg) {
        if (!ok)
            throw detail::line_error(rd.line("flow", key), msg);
    };
    require(f.t_end > 0.0, "t_end", "t_end > 0 required");
    require(f.dt_init > 0.0, "dt_init", "dt_init > 0 required");
    require(f.dt_safety > 0.0 && f.dt_safety <= 1.0, "dt_safety", "dt_safety must lie in (0, 1]");
    require(f.roundness_stop >= 0.0, "roundness_stop", "roundness_stop >= 0 required");
    require(f.snapshot_stride >= 1, "snapshot_stride", "snapshot_stride >= 1 required");
    require(f.max_step_retries >= 1, "max_step_retries", "max_step_retries >= 1 required");
    f.validate();

    rc.directory = rd.str("output", "directory").value_or("");
    if (const auto* e = rd.entry("output", "formats")) {
        rc.formats.clear();
        for (const auto& item : detail::split(e->values.front(), ',')) {
            const auto fmt = detail::trim(item);
            if (fmt != "csv" && fmt != "json" && fmt != "bodies" && fmt != "svg")
                throw detail::line_error(e->line, "unknown output format '" + fmt + "'");
            rc.formats.insert(fmt);
        }
    }
    return rc;
}

} // namespace qflow

#endif
