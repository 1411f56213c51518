#ifndef QFLOW_COMMANDS_HPP
#define QFLOW_COMMANDS_HPP

// The four `qflow` subcommands. Exit statuses:
//   0  run completed and every applicable audit passed
//   1  an audit (or a verify check) failed
//   2  configuration error, missing input, unusable directory
//   3  step failure; partial outputs were written
//
// Output directories are staged under a temporary name and renamed into
// place, so a directory either holds a complete result set or nothing.

#include <qflow/audits.hpp>
#include <qflow/body_io.hpp>
#include <qflow/config.hpp>
#include <qflow/diagnostics.hpp>
#include <qflow/run.hpp>
#include <qflow/svg.hpp>
#include <qflow/verify.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace qflow {

namespace fs = std::filesystem;

enum ExitStatus { exit_ok = 0, exit_audit_failed = 1, exit_config = 2, exit_step_failure = 3 };

inline constexpr const char* kOutputRootEnv = "QFLOW_OUTPUT_ROOT";

inline fs::path output_root()
{
    const char* env = std::getenv(kOutputRootEnv);
    return env && *env ? fs::path(env) : fs::path("qflow-out");
}

/// Results of one configured run, before anything touches the disk.
struct RunOutcome {
    RunConfig config;
    Trajectory trajectory;
    std::vector<DiagnosticsRecord> records;
    AuditContext context;
    int partner_N = 0; // 0: no half-resolution partner was available
    std::string eps_note;
    std::vector<AuditReport> audits;

    int status() const
    {
        if (trajectory.failed)
            return exit_step_failure;
        return all_ok(audits) ? exit_ok : exit_audit_failed;
    }
};

namespace detail {

// Largest valid grid size <= N/2 for the backend, or 0.
inline int partner_size(Backend b, int N)
{
    int half = N / 2;
    if (b == Backend::circle)
        half -= half % 2;
    return half >= 16 ? half : 0;
}

} // namespace detail

inline AuditContext audit_context(const RunConfig& rc, double eps_disc)
{
    AuditContext ctx;
    ctx.k = rc.flow.law.k();
    ctx.alpha = rc.flow.law.alpha();
    ctx.roundness_tol = rc.flow.roundness_stop > 0.0 ? rc.flow.roundness_stop : 1e-3;
    ctx.drift_budget = 1e-4;
    ctx.eps_disc = eps_disc;
    return ctx;
}

/// Runs the flow, the half-resolution partner that sets eps_disc, and the
/// audits. Construction errors propagate.
inline RunOutcome simulate(const RunConfig& rc)
{
    RunOutcome out;
    out.config = rc;
    const auto body = make_body(rc.shape, rc.N);
    out.trajectory = run(body, rc.flow);
    out.records = out.trajectory.records();

    double eps = 0.0;
    const int half = detail::partner_size(rc.backend(), rc.N);
    if (out.trajectory.failed) {
        out.eps_note = "no partner run after a step failure";
    } else if (half == 0) {
        out.eps_note = "no valid half-resolution grid";
    } else {
        FlowConfig pf = rc.flow;
        pf.roundness_stop = 0.0;
        pf.t_end = out.records.back().t;
        const auto partner = run(make_body(rc.shape, half), pf);
        if (partner.failed) {
            out.eps_note = "partner run failed: " + partner.failure;
        } else {
            eps = estimate_eps_disc(out.records, partner.records());
            out.partner_N = half;
        }
    }
    out.context = audit_context(rc, eps);
    out.audits = run_audits(out.records, out.context);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization of audits and run metadata

inline nlohmann::json to_json(const AuditReport& r)
{
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["worst_violation"] = r.worst_violation;
    j["location"] = r.location;
    j["fitted"] = nlohmann::json::object();
    for (const auto& [k, v] : r.fitted)
        j["fitted"][k] = v;
    j["clauses"] = nlohmann::json::array();
    for (const auto& c : r.clauses)
        j["clauses"].push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}});
    if (!r.note.empty())
        j["note"] = r.note;
    return j;
}

inline std::string audits_json(const std::vector<AuditReport>& reports)
{
    nlohmann::json j;
    j["overall"] = all_ok(reports) ? "pass" : "fail";
    j["audits"] = nlohmann::json::object();
    for (const auto& r : reports)
        j["audits"][r.name] = to_json(r);
    return j.dump(2) + "\n";
}

inline nlohmann::json context_json(const AuditContext& ctx)
{
    return {{"k", ctx.k},
            {"alpha", ctx.alpha},
            {"roundness_tol", ctx.roundness_tol},
            {"drift_budget", ctx.drift_budget},
            {"eps_disc", ctx.eps_disc}};
}

inline AuditContext context_from_json(const nlohmann::json& j)
{
    AuditContext ctx;
    ctx.k = j.at("k").get<int>();
    ctx.alpha = j.at("alpha").get<double>();
    ctx.roundness_tol = j.at("roundness_tol").get<double>();
    ctx.drift_budget = j.at("drift_budget").get<double>();
    ctx.eps_disc = j.at("eps_disc").get<double>();
    return ctx;
}

inline std::string run_json(const RunOutcome& o)
{
    const auto& rc = o.config;
    const auto& tr = o.trajectory;
    nlohmann::json j;
    j["backend"] = to_string(rc.backend());
    j["N"] = rc.N;
    j["law"] = {{"n", rc.flow.law.n()}, {"k", rc.flow.law.k()}, {"alpha", rc.flow.law.alpha()}};
    j["flow"] = {{"t_end", rc.flow.t_end},
                 {"dt_init", rc.flow.dt_init},
                 {"dt_safety", rc.flow.dt_safety},
                 {"roundness_stop", rc.flow.roundness_stop},
                 {"volume_correct", rc.flow.volume_correct},
                 {"snapshot_stride", rc.flow.snapshot_stride},
                 {"max_step_retries", rc.flow.max_step_retries}};
    j["audit_context"] = context_json(o.context);
    j["eps_disc_partner_N"] = o.partner_N;
    if (!o.eps_note.empty())
        j["eps_disc_note"] = o.eps_note;
    j["stop"] = tr.failed ? "step_failure" : (tr.stopped_round ? "roundness" : "t_end");
    if (tr.failed)
        j["failure"] = tr.failure;
    j["recenterings"] = tr.recenterings;
    j["steps"] = tr.final_state().step_count;
    j["final_t"] = tr.final_state().t;
    return j.dump(2) + "\n";
}

inline std::string summary_text(const std::vector<AuditReport>& reports, const std::vector<DiagnosticsRecord>& recs)
{
    std::ostringstream os;
    if (!recs.empty()) {
        const auto& f = recs.back();
        os << "records " << recs.size() << ", final t " << detail::format_double(f.t) << "\n";
        os << "  volume drift    " << detail::sci3(f.volume_drift) << "\n";
        os << "  R_minus/R_plus  " << detail::format_double(f.R_minus) << " / " << detail::format_double(f.R_plus) << "\n";
        os << "  hausdorff ball  " << detail::sci3(f.hausdorff_ball) << "\n";
        os << "  l2 deviation    " << detail::sci3(f.l2_deviation) << "\n";
    }
    for (const auto& r : reports) {
        os << r.name << ": " << to_string(r.verdict);
        if (r.location >= 0)
            os << " (first violation at record " << r.location << ")";
        os << "\n";
        for (const auto& c : r.clauses)
            os << "  " << c.name << ": " << to_string(c.verdict) << (c.detail.empty() ? "" : " - " + c.detail) << "\n";
        if (!r.note.empty())
            os << "  note: " << r.note << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Staged output directories

class StagedDir {
public:
    explicit StagedDir(fs::path target) : target_(std::move(target))
    {
        if (target_.filename().empty())
            target_ = target_.parent_path();
        tmp_ = target_.parent_path() / ("." + target_.filename().string() + ".partial");
        fs::remove_all(tmp_);
        fs::create_directories(tmp_);
    }
    StagedDir(const StagedDir&) = delete;
    StagedDir& operator=(const StagedDir&) = delete;
    ~StagedDir()
    {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(tmp_, ec);
        }
    }

    const fs::path& path() const { return tmp_; }

    void write(const std::string& name, const std::string& content) const
    {
        std::ofstream os(tmp_ / name, std::ios::binary);
        os << content;
        if (!os)
            throw Error("cannot write " + (tmp_ / name).string());
    }

    void commit()
    {
        fs::remove_all(target_);
        fs::rename(tmp_, target_);
        committed_ = true;
    }

private:
    fs::path target_;
    fs::path tmp_;
    bool committed_ = false;
};

inline std::string read_file(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is)
        throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

/// Writes every product of a run into dir (staged, then renamed).
inline void write_outputs(const RunOutcome& o, const fs::path& dir)
{
    StagedDir stage(dir);
    const auto& rc = o.config;
    const int n = rc.flow.law.n();
    std::ostringstream csv;
    write_csv(csv, o.records, n);
    stage.write("series.csv", csv.str());
    stage.write("audits.json", audits_json(o.audits));
    stage.write("run.json", run_json(o));
    stage.write("summary.txt", summary_text(o.audits, o.records));
    const auto& entries = o.trajectory.entries;
    if (rc.formats.count("bodies")) {
        std::ostringstream ss;
        for (const auto& e : entries)
            write_snapshot(ss, e.state.t, e.state.h, e.state.dt, e.state.body);
        stage.write("snapshots.txt", ss.str());
    }
    if (rc.formats.count("svg") && !entries.empty()) {
        // at most 12 evenly spaced snapshots, always including both ends
        std::vector<SupportField> bodies;
        std::vector<double> times;
        const std::size_t count = std::min<std::size_t>(12, entries.size());
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t idx = count == 1 ? 0 : i * (entries.size() - 1) / (count - 1);
            bodies.push_back(entries[idx].state.body);
            times.push_back(entries[idx].state.t);
        }
        std::ostringstream svg;
        write_svg(svg, bodies, times);
        stage.write(svg_name(rc.backend()), svg.str());
    }
    stage.commit();
}

inline fs::path resolve_output(const RunConfig& rc, const fs::path& config_path)
{
    if (rc.directory.empty())
        return output_root() / config_path.stem();
    const fs::path d(rc.directory);
    return d.is_absolute() ? d : output_root() / d;
}

inline RawConfig load_config(const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw ParseError("cannot open config " + path.string());
    return parse_config(is);
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_run(const fs::path& config_path, std::ostream& out, std::ostream& err)
{
    RunConfig rc;
    try {
        const auto raw = load_config(config_path);
        rc = to_run_config(raw);
    } catch (const Error& e) {
        err << "config error: " << config_path.string() << ": " << e.what() << "\n";
        return exit_config;
    }
    RunOutcome o;
    try {
        o = simulate(rc);
    } catch (const ConstructionError& e) {
        err << "config error: " << config_path.string() << ": " << e.what() << "\n";
        return exit_config;
    }
    const fs::path dir = resolve_output(rc, config_path);
    try {
        write_outputs(o, dir);
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << "\n";
        return exit_config;
    }
    const auto& f = o.records.back();
    out << "wrote " << dir.string() << "\n";
    out << "t " << detail::format_double(f.t) << ", steps " << o.trajectory.final_state().step_count << ", drift "
        << detail::sci3(f.volume_drift) << ", R+ - R- " << detail::sci3(f.R_plus - f.R_minus) << "\n";
    for (const auto& r : o.audits)
        out << "  " << r.name << ": " << to_string(r.verdict) << "\n";
    if (o.trajectory.failed)
        err << "step failure: " << o.trajectory.failure << "\n";
    return o.status();
}

inline int cmd_verify(const std::string& suite, std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err)
{
    const std::uint64_t s = seed ? *seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    out << "seed " << s << "\n";
    std::vector<SuiteResult> results;
    try {
        results = verify_suite(suite, s);
    } catch (const DomainError& e) {
        err << e.what() << "\n";
        return exit_config;
    }
    bool ok = true;
    for (const auto& r : results) {
        print_suite(out, r);
        ok = ok && r.ok();
    }
    return ok ? exit_ok : exit_audit_failed;
}

inline int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err)
{
    if (!fs::is_directory(dir)) {
        err << "no such results directory: " << dir.string() << "\n";
        return exit_config;
    }
    std::vector<DiagnosticsRecord> recs;
    AuditContext ctx;
    try {
        std::ifstream series(dir / "series.csv");
        if (!series)
            throw Error("missing series.csv in " + dir.string());
        recs = read_csv(series);
        if (recs.empty())
            throw Error("series.csv holds no records");
        ctx = context_from_json(nlohmann::json::parse(read_file(dir / "run.json")).at("audit_context"));
    } catch (const std::exception& e) {
        err << "report error: " << e.what() << "\n";
        return exit_config;
    }
    const auto reports = run_audits(recs, ctx);
    const auto write = [&](const char* name, const std::string& content) {
        const fs::path tmp = dir / (std::string(".") + name + ".partial");
        {
            std::ofstream os(tmp, std::ios::binary);
            os << content;
        }
        fs::rename(tmp, dir / name);
    };
    write("audits.json", audits_json(reports));
    write("summary.txt", summary_text(reports, recs));
    out << summary_text(reports, recs);
    return all_ok(reports) ? exit_ok : exit_audit_failed;
}

inline int cmd_sweep(const fs::path& config_path, int jobs, std::ostream& out, std::ostream& err)
{
    std::vector<SweepCell> cells;
    std::vector<RunConfig> configs;
    try {
        cells = expand_sweep(load_config(config_path));
        for (const auto& c : cells) {
            try {
                configs.push_back(to_run_config(c.config));
            } catch (const Error& e) {
                throw ParseError("cell " + c.label + ": " + e.what());
            }
        }
    } catch (const Error& e) {
        err << "config error: " << config_path.string() << ": " << e.what() << "\n";
        return exit_config;
    }
    const fs::path root = resolve_output(configs.front(), config_path);
    try {
        fs::create_directories(root);
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << "\n";
        return exit_config;
    }

    std::vector<int> status(cells.size(), exit_ok);
    std::vector<std::string> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            std::ostringstream row;
            row << cells[i].label;
            for (const auto& kv : cells[i].swept)
                row << "," << kv.second;
            try {
                const auto o = simulate(configs[i]);
                write_outputs(o, root / cells[i].label);
                status[i] = o.status();
                const auto& f = o.records.back();
                row << "," << status[i] << "," << detail::format_double(f.t) << ","
                    << o.trajectory.final_state().step_count << "," << detail::format_double(f.volume_drift) << ","
                    << detail::format_double(f.hausdorff_ball) << "," << detail::format_double(f.R_plus - f.R_minus)
                    << "," << detail::format_double(f.l2_deviation) << "," << detail::format_double(f.iso_ratio) << ","
                    << detail::format_double(o.context.eps_disc);
                for (const auto& r : o.audits)
                    row << "," << to_string(r.verdict);
                const auto& decay = o.audits[3].fitted;
                for (const char* key : {"rate_slope", "rate_r2"}) {
                    const auto it = decay.find(key);
                    row << "," << (it == decay.end() ? std::string("") : detail::format_double(it->second));
                }
            } catch (const Error& e) {
                status[i] = exit_config;
                row << "," << status[i] << std::string(16, ',');
                std::lock_guard lock(log);
                err << "cell " << cells[i].label << ": " << e.what() << "\n";
            }
            rows[i] = row.str();
            std::lock_guard lock(log);
            out << "cell " << cells[i].label << ": exit " << status[i] << "\n";
        }
    };
    {
        std::vector<std::jthread> pool;
        const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }

    std::ostringstream csv;
    csv << "cell";
    for (const auto& kv : cells.front().swept)
        csv << "," << kv.first;
    csv << ",status,final_t,steps,volume_drift,hausdorff_ball,radius_gap,l2_deviation,iso_ratio,eps_disc";
    for (const char* a : {"monotone", "balance", "pinching", "decay", "ros_sequence", "envelopes"})
        csv << "," << a;
    csv << ",rate_slope,rate_r2\n";
    for (const auto& r : rows)
        csv << r << "\n";
    const fs::path tmp = root / ".sweep_summary.csv.partial";
    {
        std::ofstream os(tmp, std::ios::binary);
        os << csv.str();
    }
    fs::rename(tmp, root / "sweep_summary.csv");
    out << "wrote " << (root / "sweep_summary.csv").string() << "\n";
    return *std::max_element(status.begin(), status.end());
}

} // namespace qflow

#endif
