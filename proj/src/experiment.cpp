#include "rdlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdlab/analysis.hpp"
#include "rdlab/discretize.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/io.hpp"
#include "rdlab/kernels.hpp"
#include "rdlab/newton.hpp"
#include "rdlab/steppers.hpp"

namespace rdlab::cli {
namespace {

using ordered_json = nlohmann::ordered_json;
using steppers::Scheme;
using steppers::StepperKind;

// ---------------------------------------------------------------------------
// Config access with field-path error messages.

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

/// Reruns a core-library call, rebranding its validation failures as config
/// errors anchored at the given field path.
template <typename F>
auto checked(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

void require_object(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const ordered_json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&it](const char* k) { return it.key() == k; });
        if (!known) fail(join_path(path, it.key()), "unknown key");
    }
}

const ordered_json* find(const ordered_json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &it.value();
}

double get_number(const ordered_json& obj, const std::string& path, const char* key, double def) {
    const ordered_json* v = find(obj, key);
    if (v == nullptr) return def;
    if (!v->is_number()) fail(join_path(path, key), "expected a number");
    return v->get<double>();
}

std::optional<double> get_number_opt(const ordered_json& obj, const std::string& path,
                                     const char* key) {
    const ordered_json* v = find(obj, key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) fail(join_path(path, key), "expected a number");
    return v->get<double>();
}

int get_int(const ordered_json& obj, const std::string& path, const char* key, int def) {
    const ordered_json* v = find(obj, key);
    if (v == nullptr) return def;
    if (!v->is_number_integer() && !v->is_number_unsigned())
        fail(join_path(path, key), "expected an integer");
    const auto raw = v->get<long long>();
    if (raw < -1000000000LL || raw > 1000000000LL) fail(join_path(path, key), "out of range");
    return static_cast<int>(raw);
}

std::uint64_t get_uint64(const ordered_json& obj, const std::string& path, const char* key,
                         std::uint64_t def) {
    const ordered_json* v = find(obj, key);
    if (v == nullptr) return def;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0)
        return static_cast<std::uint64_t>(v->get<long long>());
    fail(join_path(path, key), "expected a non-negative integer");
}

bool get_bool(const ordered_json& obj, const std::string& path, const char* key, bool def) {
    const ordered_json* v = find(obj, key);
    if (v == nullptr) return def;
    if (!v->is_boolean()) fail(join_path(path, key), "expected true or false");
    return v->get<bool>();
}

std::string get_string(const ordered_json& obj, const std::string& path, const char* key,
                       const std::string& def) {
    const ordered_json* v = find(obj, key);
    if (v == nullptr) return def;
    if (!v->is_string()) fail(join_path(path, key), "expected a string");
    return v->get<std::string>();
}

std::vector<double> get_number_list(const ordered_json& obj, const std::string& path,
                                    const char* key, std::vector<double> def) {
    const ordered_json* v = find(obj, key);
    if (v == nullptr) return def;
    if (!v->is_array()) fail(join_path(path, key), "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v->size());
    for (const auto& elem : *v) {
        if (!elem.is_number()) fail(join_path(path, key), "expected an array of numbers");
        out.push_back(elem.get<double>());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scheme names.

struct SchemeName {
    const char* name;
    Scheme scheme;
};

constexpr SchemeName kSchemeNames[] = {
    {"forward_euler", Scheme::ForwardEuler},
    {"backward_euler", Scheme::BackwardEulerLinear},
    {"crank_nicolson", Scheme::CrankNicolsonLinear},
    {"crank_nicolson_semi_implicit", Scheme::CrankNicolsonSemiImplicit},
    {"crank_nicolson_improved_euler", Scheme::CrankNicolsonImprovedEuler},
    {"rosenbrock", Scheme::Rosenbrock},
};

Scheme parse_scheme(const std::string& name, const std::string& path) {
    for (const auto& s : kSchemeNames)
        if (name == s.name) return s.scheme;
    std::string options;
    for (const auto& s : kSchemeNames) {
        if (!options.empty()) options += " | ";
        options += s.name;
    }
    fail(path, "unknown scheme '" + name + "' (expected " + options + ")");
}

// ---------------------------------------------------------------------------
// Problem block.

discretize::ReactionSpec parse_reaction(const ordered_json& obj, const std::string& path,
                                        ordered_json& echo) {
    require_object(obj, path);
    const std::string kind = get_string(obj, path, "kind", "logistic");
    if (kind == "none") {
        check_keys(obj, path, {"kind"});
        echo = ordered_json{{"kind", "none"}};
        return discretize::ReactionSpec::none();
    }
    if (kind == "logistic") {
        check_keys(obj, path, {"kind", "rho"});
        const double rho = get_number(obj, path, "rho", 1.0);
        echo = ordered_json{{"kind", "logistic"}, {"rho", rho}};
        return checked(join_path(path, "rho"),
                       [&] { return discretize::ReactionSpec::logistic(rho); });
    }
    if (kind == "fitzhugh_nagumo") {
        check_keys(obj, path, {"kind", "rho", "alpha"});
        const double rho = get_number(obj, path, "rho", 1.0);
        const double alpha = get_number(obj, path, "alpha", 0.25);
        echo = ordered_json{{"kind", "fitzhugh_nagumo"}, {"rho", rho}, {"alpha", alpha}};
        return checked(path, [&] { return discretize::ReactionSpec::fitzhugh_nagumo(rho, alpha); });
    }
    fail(join_path(path, "kind"),
         "unknown reaction '" + kind + "' (expected none | logistic | fitzhugh_nagumo)");
}

discretize::InitialConditionSpec parse_ic(const ordered_json& obj, const std::string& path,
                                          ordered_json& echo, int depth) {
    if (depth > 4) fail(path, "perturbed bases nest too deeply");
    require_object(obj, path);
    const std::string kind = get_string(obj, path, "kind", "polynomial_fit");
    if (kind == "polynomial_fit") {
        check_keys(obj, path, {"kind", "degree", "c"});
        const int degree = get_int(obj, path, "degree", 2);
        const double c = get_number(obj, path, "c", 1.0 / 3.0);
        echo = ordered_json{{"kind", "polynomial_fit"}, {"degree", degree}, {"c", c}};
        return checked(path,
                       [&] { return discretize::InitialConditionSpec::polynomial_fit(degree, c); });
    }
    if (kind == "sine_mode") {
        check_keys(obj, path, {"kind", "mode"});
        const int mode = get_int(obj, path, "mode", 1);
        echo = ordered_json{{"kind", "sine_mode"}, {"mode", mode}};
        return checked(join_path(path, "mode"),
                       [&] { return discretize::InitialConditionSpec::sine_mode(mode); });
    }
    if (kind == "explicit") {
        check_keys(obj, path, {"kind", "values"});
        if (find(obj, "values") == nullptr)
            fail(join_path(path, "values"), "required for explicit initial conditions");
        std::vector<double> values = get_number_list(obj, path, "values", {});
        echo = ordered_json{{"kind", "explicit"}, {"values", values}};
        return checked(join_path(path, "values"), [&] {
            return discretize::InitialConditionSpec::explicit_values(std::move(values));
        });
    }
    if (kind == "perturbed") {
        check_keys(obj, path, {"kind", "base", "seed", "amplitude"});
        const ordered_json* base_obj = find(obj, "base");
        const ordered_json empty = ordered_json::object();
        ordered_json base_echo;
        discretize::InitialConditionSpec base = parse_ic(
            base_obj != nullptr ? *base_obj : empty, join_path(path, "base"), base_echo, depth + 1);
        const std::uint64_t seed = get_uint64(obj, path, "seed", 0);
        const double amplitude = get_number(obj, path, "amplitude", 0.0);
        echo = ordered_json{
            {"kind", "perturbed"}, {"base", base_echo}, {"seed", seed}, {"amplitude", amplitude}};
        return checked(path, [&] {
            return discretize::InitialConditionSpec::perturbed(std::move(base), seed, amplitude);
        });
    }
    fail(join_path(path, "kind"),
         "unknown initial condition '" + kind +
             "' (expected polynomial_fit | sine_mode | explicit | perturbed)");
}

struct ProblemParts {
    discretize::RDProblem problem;
    ordered_json echo;
};

ProblemParts parse_problem(const ordered_json& root, const Overrides& ov) {
    const ordered_json* block = find(root, "problem");
    const ordered_json empty = ordered_json::object();
    const ordered_json& obj = block != nullptr ? *block : empty;
    require_object(obj, "problem");
    check_keys(obj, "problem", {"a", "b", "L", "delta", "dx", "c", "reaction", "ic"});

    const double a = get_number(obj, "problem", "a", 0.0);
    const double b = get_number(obj, "problem", "b", 1.0);
    const double length = get_number(obj, "problem", "L", 10.0);
    const double delta = get_number(obj, "problem", "delta", 1.0);
    const double dx = get_number(obj, "problem", "dx", 0.05);
    const double c = get_number(obj, "problem", "c", 0.0);
    if (!std::isfinite(a)) fail("problem.a", "must be finite");
    if (!std::isfinite(b)) fail("problem.b", "must be finite");
    if (!(delta > 0.0) || !std::isfinite(delta)) fail("problem.delta", "must be positive");
    if (!(c >= 0.0) || !std::isfinite(c)) fail("problem.c", "must be zero or positive");

    const ordered_json* reaction_obj = find(obj, "reaction");
    ordered_json reaction_echo;
    discretize::ReactionSpec reaction = parse_reaction(
        reaction_obj != nullptr ? *reaction_obj : empty, "problem.reaction", reaction_echo);

    const ordered_json* ic_obj = find(obj, "ic");
    ordered_json ic_echo;
    discretize::InitialConditionSpec ic =
        parse_ic(ic_obj != nullptr ? *ic_obj : empty, "problem.ic", ic_echo, 0);

    if (ov.seed.has_value()) {
        if (ic.kind != discretize::InitialConditionKind::Perturbed)
            fail("--seed", "requires a perturbed initial condition");
        ic.seed = *ov.seed;
        ic_echo["seed"] = *ov.seed;
    }

    ProblemParts parts;
    parts.problem.grid =
        checked("problem.dx", [&] { return discretize::Grid1D::make(length, dx); });
    parts.problem.bc = {a, b};
    parts.problem.diffusion = delta;
    parts.problem.reaction = reaction;
    parts.problem.frame_speed = c;
    parts.problem.ic = std::move(ic);
    parts.echo = ordered_json{{"a", a},     {"b", b},
                              {"L", length}, {"delta", delta},
                              {"dx", dx},    {"c", c},
                              {"reaction", reaction_echo}, {"ic", ic_echo}};
    return parts;
}

// ---------------------------------------------------------------------------
// Output block and the file emitter.

struct OutputCfg {
    std::string dir = ".";
    std::string format = "csv";
    bool svg = true;
    ordered_json echo;
};

OutputCfg parse_output(const ordered_json& root, const Overrides& ov) {
    const ordered_json* block = find(root, "output");
    const ordered_json empty = ordered_json::object();
    const ordered_json& obj = block != nullptr ? *block : empty;
    require_object(obj, "output");
    check_keys(obj, "output", {"dir", "format", "svg"});

    OutputCfg out;
    out.dir = get_string(obj, "output", "dir", ".");
    out.format = get_string(obj, "output", "format", "csv");
    out.svg = get_bool(obj, "output", "svg", true);
    if (ov.out_dir.has_value()) out.dir = *ov.out_dir;
    if (ov.format.has_value()) out.format = *ov.format;
    if (out.format != "csv" && out.format != "json")
        fail("output.format", "expected \"csv\" or \"json\"");
    if (out.dir.empty()) fail("output.dir", "must not be empty");
    out.echo = ordered_json{{"dir", out.dir}, {"format", out.format}, {"svg", out.svg}};
    return out;
}

/// Writes the per-command artifacts and assembles result.json. Construct it
/// only after config parsing succeeds so config errors touch no files.
class Emitter {
  public:
    Emitter(std::string command, OutputCfg out, ordered_json config_echo)
        : command_(std::move(command)), out_(std::move(out)), config_(std::move(config_echo)) {}

    void csv(const std::string& name, std::span<const std::string> header,
             std::span<const std::vector<std::string>> rows) {
        io::write_text_file(out_.dir + "/" + name, io::render_csv(header, rows));
        files_.push_back(name);
    }

    void svg(const std::string& name, const io::SvgPlot& plot) {
        if (!out_.svg) return;
        io::write_text_file(out_.dir + "/" + name, plot.render());
        files_.push_back(name);
    }

    ordered_json& summary() { return summary_; }
    void payload(ordered_json p) { payload_ = std::move(p); }

    void finish(double wall_ms, const std::string& status) {
        io::write_text_file(out_.dir + "/resolved_config.json", config_.dump(2) + "\n");
        ordered_json result{{"command", command_}, {"version", kToolVersion},
                            {"status", status},   {"wall_ms", wall_ms},
                            {"config", config_},  {"files", files_}};
        if (!summary_.is_null()) result["summary"] = summary_;
        if (out_.format == "json" && !payload_.is_null()) result["payload"] = payload_;
        io::write_text_file(out_.dir + "/result.json", result.dump(2) + "\n");
    }

    [[nodiscard]] const std::string& dir() const { return out_.dir; }

  private:
    std::string command_;
    OutputCfg out_;
    ordered_json config_;
    ordered_json summary_;
    ordered_json payload_;
    std::vector<std::string> files_;
};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Shared rendering helpers.

std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const auto channel = [t](double from, double to) {
        return static_cast<int>(std::lround(from + (to - from) * t));
    };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(31, 214), channel(119, 39),
                  channel(180, 40));
    return buf;
}

std::vector<std::string> state_header(std::size_t m, const std::string& first) {
    std::vector<std::string> header;
    header.reserve(m + 1);
    header.push_back(first);
    for (std::size_t j = 1; j <= m; ++j) header.push_back("x_" + std::to_string(j));
    return header;
}

std::vector<std::vector<std::string>> trajectory_rows(const steppers::Trajectory& traj) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(1 + traj.states[i].size());
        row.push_back(io::format_scientific(traj.times[i]));
        for (double v : traj.states[i]) row.push_back(io::format_scientific(v));
        rows.push_back(std::move(row));
    }
    return rows;
}

void add_waterfall(io::SvgPlot& plot, const discretize::RDProblem& p,
                   const steppers::Trajectory& traj) {
    const std::size_t n = traj.states.size();
    if (n == 0) return;
    const std::size_t snapshots = std::min<std::size_t>(n, 12);
    std::size_t previous = n;  // out-of-range sentinel
    for (std::size_t i = 0; i < snapshots; ++i) {
        const std::size_t idx =
            snapshots == 1 ? 0 : i * (n - 1) / (snapshots - 1);
        if (idx == previous) continue;
        previous = idx;
        const double shade = snapshots == 1 ? 1.0 : static_cast<double>(i) / (snapshots - 1);
        plot.add_line(p.grid.x, traj.states[idx], ramp_color(shade));
    }
}

StepperKind fixed_kind(Scheme scheme) {
    StepperKind kind;
    kind.scheme = scheme;
    kind.adaptive = false;
    return kind;
}

std::vector<double> default_halving_list() {
    std::vector<double> dts;
    for (int i = 0; i < 8; ++i) dts.push_back(std::ldexp(1.0, -i));
    return dts;
}

// ---------------------------------------------------------------------------
// Subcommands.

Outcome cmd_solve(const ordered_json& root, const Overrides& ov) {
    ProblemParts pp = parse_problem(root, ov);
    OutputCfg out = parse_output(root, ov);

    const ordered_json* block = find(root, "run");
    const ordered_json empty = ordered_json::object();
    const ordered_json& run = block != nullptr ? *block : empty;
    require_object(run, "run");
    check_keys(run, "run", {"scheme", "adaptive", "dt", "t_end", "rtol", "atol"});

    const std::string scheme_name = get_string(run, "run", "scheme", "rosenbrock");
    const Scheme scheme = parse_scheme(scheme_name, "run.scheme");
    const bool adaptive = get_bool(run, "run", "adaptive", scheme == Scheme::Rosenbrock);
    if (adaptive && scheme != Scheme::Rosenbrock)
        fail("run.adaptive", "only the rosenbrock scheme steps adaptively");
    const double t_end = get_number(run, "run", "t_end", 60.0);
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("run.t_end", "must be finite and >= 0");

    const std::optional<double> dt = get_number_opt(run, "run", "dt");
    double rtol = 1e-3;
    double atol = 1e-6;
    ordered_json run_echo{{"scheme", scheme_name}, {"adaptive", adaptive}};
    if (adaptive) {
        if (dt.has_value()) fail("run.dt", "not used by adaptive runs");
        rtol = get_number(run, "run", "rtol", 1e-3);
        atol = get_number(run, "run", "atol", 1e-6);
        if (!(rtol > 0.0) || !std::isfinite(rtol)) fail("run.rtol", "must be positive");
        if (!(atol > 0.0) || !std::isfinite(atol)) fail("run.atol", "must be positive");
        run_echo["rtol"] = rtol;
        run_echo["atol"] = atol;
    } else {
        if (find(run, "rtol") != nullptr || find(run, "atol") != nullptr)
            fail("run.rtol", "only used by adaptive runs");
        if (!dt.has_value()) fail("run.dt", "required for fixed-step runs");
        if (!(*dt > 0.0) || !std::isfinite(*dt)) fail("run.dt", "must be positive");
        run_echo["dt"] = *dt;
    }
    run_echo["t_end"] = t_end;

    StepperKind kind;
    kind.scheme = scheme;
    kind.adaptive = adaptive;
    kind.rtol = rtol;
    kind.atol = atol;

    const discretize::RDProblem& p = pp.problem;
    std::vector<double> u0 =
        checked("problem.ic", [&] { return discretize::initial_condition(p, p.ic); });

    Emitter em("solve", out,
               ordered_json{{"problem", pp.echo}, {"run", run_echo}, {"output", out.echo}});
    const auto t0 = Clock::now();

    steppers::Trajectory traj;
    std::string status = "ok";
    std::string message;
    int exit_code = 0;
    try {
        traj = adaptive ? steppers::adaptive_evolve(p, u0, rtol, atol, t_end)
                        : steppers::evolve(kind, p, u0, *dt, t_end);
    } catch (const IncompatibleStepper& e) {
        fail("run.scheme", e.what());
    } catch (const steppers::BlowUp& e) {
        traj = e.partial();
        status = "blow_up";
        message = e.what();
        exit_code = 3;
    } catch (const steppers::StepUnderflow& e) {
        traj = e.partial();
        status = "step_underflow";
        message = e.what();
        exit_code = 3;
    }

    const std::size_t m = p.grid.m_interior;
    em.csv("solution.csv", state_header(m, "t"), trajectory_rows(traj));

    io::SvgPlot plot("Solution profiles", "x", "u");
    add_waterfall(plot, p, traj);
    em.svg("solution.svg", plot);

    em.summary() = ordered_json{{"rows", traj.times.size()},
                                {"final_time", traj.times.empty() ? 0.0 : traj.times.back()}};
    if (status == "ok" && !traj.states.empty())
        em.summary()["extremum_count"] =
            newton::classify_steady_state(traj.states.back()).extremum_count;
    if (out.format == "json")
        em.payload(ordered_json{{"times", traj.times},
                                {"step_sizes", traj.step_sizes},
                                {"states", traj.states}});
    em.finish(elapsed_ms(t0), status);

    if (exit_code != 0) return {exit_code, "solve: " + message};
    return {0, "solve: " + std::to_string(traj.times.size()) + " states -> " + em.dir()};
}

Outcome cmd_accuracy_table(const ordered_json& root, const Overrides& ov) {
    ProblemParts pp = parse_problem(root, ov);
    OutputCfg out = parse_output(root, ov);

    const ordered_json* block = find(root, "run");
    const ordered_json empty = ordered_json::object();
    const ordered_json& run = block != nullptr ? *block : empty;
    require_object(run, "run");
    check_keys(run, "run", {"scheme", "dt_list", "t_end"});

    const std::string scheme_name =
        get_string(run, "run", "scheme", "crank_nicolson_semi_implicit");
    const Scheme scheme = parse_scheme(scheme_name, "run.scheme");
    const std::vector<double> dt_list =
        get_number_list(run, "run", "dt_list", default_halving_list());
    const double t_end = get_number(run, "run", "t_end", 10.0);
    if (dt_list.empty()) fail("run.dt_list", "must list at least one step size");
    for (double dt : dt_list)
        if (!(dt > 0.0) || !std::isfinite(dt)) fail("run.dt_list", "step sizes must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) fail("run.t_end", "must be positive");

    const ordered_json run_echo{
        {"scheme", scheme_name}, {"dt_list", dt_list}, {"t_end", t_end}};
    Emitter em("accuracy-table", out,
               ordered_json{{"problem", pp.echo}, {"run", run_echo}, {"output", out.echo}});
    const auto t0 = Clock::now();

    const analysis::AccuracyTable table = checked("run", [&] {
        return analysis::accuracy_table(pp.problem, fixed_kind(scheme), dt_list, t_end);
    });

    const std::vector<std::string> header{"dt", "error_pct", "sig_figs", "order_raw",
                                          "order_rounded"};
    std::vector<std::vector<std::string>> rows;
    ordered_json payload = ordered_json::array();
    for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        cells.push_back(io::format_scientific(row.dt));
        cells.push_back(io::format_scientific(row.approx_error_pct));
        cells.push_back(std::to_string(row.sig_figs));
        cells.push_back(row.order.has_value() ? io::format_scientific(row.order->raw) : "");
        cells.push_back(row.order.has_value() ? std::to_string(row.order->rounded) : "");
        rows.push_back(std::move(cells));

        ordered_json entry{{"dt", row.dt},
                           {"error_pct", row.approx_error_pct},
                           {"sig_figs", row.sig_figs},
                           {"order_raw", nullptr},
                           {"order_rounded", nullptr},
                           {"stable", row.stable}};
        if (row.order.has_value()) {
            entry["order_raw"] = row.order->raw;
            entry["order_rounded"] = row.order->rounded;
        }
        payload.push_back(std::move(entry));
    }
    em.csv("accuracy.csv", header, rows);
    em.summary() = ordered_json{{"rows", table.rows.size()}};
    if (out.format == "json") em.payload(std::move(payload));
    em.finish(elapsed_ms(t0), "ok");
    return {0, "accuracy-table: " + std::to_string(table.rows.size()) + " rows -> " + em.dir()};
}

Outcome cmd_spectrum(const ordered_json& root, const Overrides& ov) {
    ProblemParts pp = parse_problem(root, ov);
    OutputCfg out = parse_output(root, ov);

    const ordered_json* block = find(root, "run");
    const ordered_json empty = ordered_json::object();
    const ordered_json& run = block != nullptr ? *block : empty;
    require_object(run, "run");
    check_keys(run, "run", {"scheme", "state", "dt", "growth_c", "rtol", "atol", "t_end"});

    const std::string scheme_name =
        get_string(run, "run", "scheme", "crank_nicolson_semi_implicit");
    const Scheme scheme = parse_scheme(scheme_name, "run.scheme");
    if (scheme == Scheme::Rosenbrock)
        fail("run.scheme", "the rosenbrock pair has no two-level matrix");
    const std::string state = get_string(run, "run", "state", "final");
    if (state != "initial" && state != "final")
        fail("run.state", "expected \"initial\" or \"final\"");
    const double growth_c = get_number(run, "run", "growth_c", 0.0);
    if (!std::isfinite(growth_c) || growth_c < 0.0) fail("run.growth_c", "must be >= 0");
    std::optional<double> dt = get_number_opt(run, "run", "dt");
    if (dt.has_value() && (!(*dt > 0.0) || !std::isfinite(*dt)))
        fail("run.dt", "must be positive");

    double rtol = 1e-3;
    double atol = 1e-6;
    double t_end = 60.0;
    if (state == "initial") {
        if (!dt.has_value()) fail("run.dt", "required when run.state is \"initial\"");
        if (find(run, "rtol") != nullptr || find(run, "atol") != nullptr ||
            find(run, "t_end") != nullptr)
            fail("run.t_end", "only used when run.state is \"final\"");
    } else {
        rtol = get_number(run, "run", "rtol", 1e-3);
        atol = get_number(run, "run", "atol", 1e-6);
        t_end = get_number(run, "run", "t_end", 60.0);
        if (!(rtol > 0.0) || !std::isfinite(rtol)) fail("run.rtol", "must be positive");
        if (!(atol > 0.0) || !std::isfinite(atol)) fail("run.atol", "must be positive");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) fail("run.t_end", "must be positive");
    }

    ordered_json run_echo{{"scheme", scheme_name}, {"state", state}, {"growth_c", growth_c}};
    if (state == "final") {
        run_echo["rtol"] = rtol;
        run_echo["atol"] = atol;
        run_echo["t_end"] = t_end;
    }

    const discretize::RDProblem& p = pp.problem;
    std::vector<double> u0 =
        checked("problem.ic", [&] { return discretize::initial_condition(p, p.ic); });

    const auto make_emitter = [&] {
        return Emitter("spectrum", out,
                       ordered_json{{"problem", pp.echo}, {"run", run_echo}, {"output", out.echo}});
    };
    const auto t0 = Clock::now();

    std::vector<double> u_current = u0;
    if (state == "final") {
        steppers::Trajectory traj;
        try {
            traj = steppers::adaptive_evolve(p, u0, rtol, atol, t_end);
        } catch (const steppers::BlowUp& e) {
            make_emitter().finish(elapsed_ms(t0), "blow_up");
            return {3, std::string("spectrum: state run failed: ") + e.what()};
        } catch (const steppers::StepUnderflow& e) {
            make_emitter().finish(elapsed_ms(t0), "step_underflow");
            return {3, std::string("spectrum: state run failed: ") + e.what()};
        }
        u_current = traj.states.back();
        if (!dt.has_value()) {
            if (traj.step_sizes.empty())
                fail("run.dt", "required when the state run takes no steps");
            dt = *std::max_element(traj.step_sizes.begin(), traj.step_sizes.end());
        }
    }
    run_echo["dt"] = *dt;
    Emitter em2 = make_emitter();

    const analysis::SpectrumReport report = checked("run", [&] {
        try {
            return analysis::spectrum_report(p, fixed_kind(scheme), u_current, *dt, growth_c);
        } catch (const IncompatibleStepper& e) {
            fail("run.scheme", e.what());
        }
    });

    const std::vector<std::string> header{"re", "im"};
    std::vector<std::vector<std::string>> rows;
    std::vector<double> re;
    std::vector<double> im;
    for (const auto& z : report.spectrum.eigenvalues) {
        rows.push_back({io::format_scientific(z.real()), io::format_scientific(z.imag())});
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    em2.csv("spectrum.csv", header, rows);

    io::SvgPlot plot("Method-matrix spectrum", "Re", "Im");
    plot.set_equal_aspect(true);
    plot.add_reference_circle(0.0, 0.0, 1.0);
    plot.add_points(re, im, "#1f77b4");
    em2.svg("spectrum.svg", plot);

    em2.summary() = ordered_json{{"dt", *dt},
                                 {"r_ratio", report.r_ratio},
                                 {"spectral_radius", report.spectral_radius},
                                 {"min_real_part", report.min_real_part},
                                 {"von_neumann_ok", report.von_neumann_ok},
                                 {"nonneg_ok", report.nonneg_ok}};
    if (out.format == "json") em2.payload(ordered_json{{"re", re}, {"im", im}});
    em2.finish(elapsed_ms(t0), "ok");
    return {0, "spectrum: " + std::to_string(rows.size()) + " eigenvalues -> " + em2.dir()};
}

Outcome cmd_newton(const ordered_json& root, const Overrides& ov) {
    ProblemParts pp = parse_problem(root, ov);
    OutputCfg out = parse_output(root, ov);

    const ordered_json* block = find(root, "run");
    const ordered_json empty = ordered_json::object();
    const ordered_json& run = block != nullptr ? *block : empty;
    require_object(run, "run");
    check_keys(run, "run", {"tolerance", "max_iterations"});

    const double tol = get_number(run, "run", "tolerance", newton::kDefaultTolerance);
    const int max_iter = get_int(run, "run", "max_iterations", newton::kDefaultMaxIterations);
    if (!(tol > 0.0) || !std::isfinite(tol)) fail("run.tolerance", "must be positive");
    if (max_iter < 1) fail("run.max_iterations", "must be at least 1");

    const ordered_json run_echo{{"tolerance", tol}, {"max_iterations", max_iter}};
    const discretize::RDProblem& p = pp.problem;
    std::vector<double> u0 =
        checked("problem.ic", [&] { return discretize::initial_condition(p, p.ic); });

    Emitter em("newton", out,
               ordered_json{{"problem", pp.echo}, {"run", run_echo}, {"output", out.echo}});
    const auto t0 = Clock::now();

    std::vector<double> u_star;
    newton::NewtonTrace trace;
    try {
        std::tie(u_star, trace) = newton::newton_solve(p, u0, tol, max_iter);
    } catch (const Diverged& e) {
        em.finish(elapsed_ms(t0), "diverged");
        return {3, std::string("newton: ") + e.what()};
    } catch (const SingularJacobian& e) {
        em.finish(elapsed_ms(t0), "singular_jacobian");
        return {3, std::string("newton: ") + e.what()};
    }

    const std::size_t m = p.grid.m_interior;
    std::vector<std::vector<std::string>> iterate_rows;
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        std::vector<std::string> row;
        row.reserve(m + 1);
        row.push_back(std::to_string(k));
        for (double v : trace.iterates[k]) row.push_back(io::format_scientific(v));
        iterate_rows.push_back(std::move(row));
    }
    em.csv("iterates.csv", state_header(m, "iteration"), iterate_rows);

    const std::size_t n_err = trace.errors.size();
    const bool orders_defined =
        n_err >= 2 && std::all_of(trace.errors.begin(), trace.errors.end(),
                                  [](double e) { return e > 0.0; });
    newton::ConvergenceOrder ord;
    if (orders_defined) ord = newton::order_of_convergence(trace.errors);

    const std::vector<std::string> conv_header{"iteration", "error", "order_raw",
                                               "order_rounded"};
    std::vector<std::vector<std::string>> conv_rows;
    for (std::size_t k = 0; k < n_err; ++k) {
        std::vector<std::string> row;
        row.push_back(std::to_string(k + 1));
        row.push_back(io::format_scientific(trace.errors[k]));
        const bool has = orders_defined && k + 1 < n_err;
        row.push_back(has ? io::format_scientific(ord.raw[k]) : "");
        row.push_back(has && ord.rounded[k].has_value() ? std::to_string(*ord.rounded[k]) : "");
        conv_rows.push_back(std::move(row));
    }
    em.csv("convergence.csv", conv_header, conv_rows);

    std::vector<double> iter_axis;
    std::vector<double> log_err;
    for (std::size_t k = 0; k < n_err; ++k) {
        iter_axis.push_back(static_cast<double>(k + 1));
        log_err.push_back(std::log10(trace.errors[k]));
    }
    io::SvgPlot plot("Newton update norms", "iteration", "log10 |update|");
    plot.add_line(iter_axis, log_err, "#1f77b4");
    plot.add_points(iter_axis, log_err, "#d62728");
    em.svg("newton_error.svg", plot);

    const std::vector<double> res = newton::residual(p, u_star);
    em.summary() = ordered_json{
        {"converged", trace.converged},
        {"iterations_used", trace.iterations_used},
        {"final_error", n_err > 0 ? trace.errors.back() : 0.0},
        {"residual_norm", kernels::inf_norm(res)},
        {"extremum_count", newton::classify_steady_state(u_star).extremum_count}};
    if (out.format == "json") {
        ordered_json rounded = ordered_json::array();
        if (orders_defined)
            for (const auto& r : ord.rounded)
                rounded.push_back(r.has_value() ? ordered_json(*r) : ordered_json(nullptr));
        em.payload(ordered_json{{"solution", u_star},
                                {"errors", trace.errors},
                                {"order_raw", orders_defined ? ordered_json(ord.raw)
                                                             : ordered_json::array()},
                                {"order_rounded", rounded}});
    }
    em.finish(elapsed_ms(t0), trace.converged ? "ok" : "not_converged");

    if (!trace.converged)
        return {0, "newton: no convergence within " + std::to_string(max_iter) + " iterations"};
    return {0, "newton: converged in " + std::to_string(trace.iterations_used) +
                   " iterations -> " + em.dir()};
}

Outcome cmd_oscillation_scan(const ordered_json& root, const Overrides& ov) {
    ProblemParts pp = parse_problem(root, ov);
    OutputCfg out = parse_output(root, ov);

    const ordered_json* block = find(root, "run");
    const ordered_json empty = ordered_json::object();
    const ordered_json& run = block != nullptr ? *block : empty;
    require_object(run, "run");
    check_keys(run, "run", {"scheme", "dx_list", "r_lo", "r_hi"});

    const std::string scheme_name =
        get_string(run, "run", "scheme", "crank_nicolson_semi_implicit");
    const Scheme scheme = parse_scheme(scheme_name, "run.scheme");
    const std::vector<double> dx_list =
        get_number_list(run, "run", "dx_list", {0.05, 0.1, 0.5, 1.0});
    const double r_lo = get_number(run, "run", "r_lo", 0.4);
    const double r_hi = get_number(run, "run", "r_hi", 5.0);
    if (dx_list.empty()) fail("run.dx_list", "must list at least one spacing");
    for (double dx : dx_list)
        if (!(dx > 0.0) || !std::isfinite(dx)) fail("run.dx_list", "spacings must be positive");
    if (!(r_lo > 0.0) || !(r_hi > r_lo) || !std::isfinite(r_hi))
        fail("run.r_lo", "need 0 < r_lo < r_hi");

    const ordered_json run_echo{
        {"scheme", scheme_name}, {"dx_list", dx_list}, {"r_lo", r_lo}, {"r_hi", r_hi}};
    Emitter em("oscillation-scan", out,
               ordered_json{{"problem", pp.echo}, {"run", run_echo}, {"output", out.echo}});
    const auto t0 = Clock::now();

    const discretize::RDProblem& p = pp.problem;
    std::vector<double> thresholds;
    for (double dx : dx_list) {
        const double dt_lo = r_lo * dx * dx / p.diffusion;
        const double dt_hi = r_hi * dx * dx / p.diffusion;
        const double dt_star = checked("run", [&] {
            try {
                return analysis::oscillation_threshold(p, fixed_kind(scheme), dx, dt_hi, dt_lo);
            } catch (const BracketInvalid& e) {
                fail("run.r_lo", std::string(e.what()) + " (widen the r bracket)");
            }
        });
        thresholds.push_back(dt_star);
    }

    const std::vector<std::string> header{"dx", "dt_star"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < dx_list.size(); ++i)
        rows.push_back(
            {io::format_scientific(dx_list[i]), io::format_scientific(thresholds[i])});
    em.csv("thresholds.csv", header, rows);

    io::SvgPlot plot("Oscillation thresholds", "dx", "dt*");
    plot.add_line(dx_list, thresholds, "#1f77b4");
    plot.add_points(dx_list, thresholds, "#d62728");
    em.svg("thresholds.svg", plot);

    em.summary() = ordered_json{{"rows", dx_list.size()}};
    if (out.format == "json")
        em.payload(ordered_json{{"dx", dx_list}, {"dt_star", thresholds}});
    em.finish(elapsed_ms(t0), "ok");
    return {0, "oscillation-scan: " + std::to_string(dx_list.size()) + " spacings -> " + em.dir()};
}

Outcome cmd_basin_scan(const ordered_json& root, const Overrides& ov) {
    ProblemParts pp = parse_problem(root, ov);
    OutputCfg out = parse_output(root, ov);

    const ordered_json* block = find(root, "run");
    const ordered_json empty = ordered_json::object();
    const ordered_json& run = block != nullptr ? *block : empty;
    require_object(run, "run");
    check_keys(run, "run", {"family", "values", "degree"});

    const std::string family = get_string(run, "run", "family", "interior_value");
    if (family != "interior_value" && family != "sine_mode")
        fail("run.family", "expected \"interior_value\" or \"sine_mode\"");
    std::vector<double> defaults;
    if (family == "interior_value")
        defaults = {-1.0, -0.5, 0.0, 1.0 / 3.0, 0.5, 1.0};
    else
        defaults = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> values = get_number_list(run, "run", "values", defaults);
    if (values.empty()) fail("run.values", "must list at least one entry");
    const int degree = get_int(run, "run", "degree", 2);
    if (family == "sine_mode" && find(run, "degree") != nullptr)
        fail("run.degree", "only used by the interior_value family");

    std::vector<discretize::InitialConditionSpec> family_specs;
    for (double v : values) {
        if (family == "interior_value") {
            family_specs.push_back(checked("run", [&] {
                return discretize::InitialConditionSpec::polynomial_fit(degree, v);
            }));
        } else {
            const double rounded = std::round(v);
            if (std::fabs(v - rounded) > 1e-9 || rounded < 1.0)
                fail("run.values", "sine modes must be positive integers");
            family_specs.push_back(checked("run", [&] {
                return discretize::InitialConditionSpec::sine_mode(static_cast<int>(rounded));
            }));
        }
    }

    ordered_json run_echo{{"family", family}, {"values", values}};
    if (family == "interior_value") run_echo["degree"] = degree;
    Emitter em("basin-scan", out,
               ordered_json{{"problem", pp.echo}, {"run", run_echo}, {"output", out.echo}});
    const auto t0 = Clock::now();

    const std::vector<newton::SteadyStateClass> classes =
        newton::basin_scan(pp.problem, family_specs);

    const std::vector<std::string> header{"value", "extremum_count", "diverged"};
    std::vector<std::vector<std::string>> rows;
    ordered_json payload = ordered_json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        rows.push_back({io::format_scientific(values[i]),
                        std::to_string(classes[i].extremum_count),
                        classes[i].diverged ? "true" : "false"});
        payload.push_back(ordered_json{{"value", values[i]},
                                       {"extremum_count", classes[i].extremum_count},
                                       {"diverged", classes[i].diverged}});
    }
    em.csv("basins.csv", header, rows);
    em.summary() = ordered_json{{"rows", values.size()}};
    if (out.format == "json") em.payload(std::move(payload));
    em.finish(elapsed_ms(t0), "ok");
    return {0, "basin-scan: " + std::to_string(values.size()) + " starts -> " + em.dir()};
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"solve",  "accuracy-table",   "spectrum",
                                                "newton", "oscillation-scan", "basin-scan"};
    return names;
}

Outcome run_command(const std::string& command, const ordered_json& raw_config,
                    const Overrides& overrides) {
    try {
        if (!raw_config.is_object()) throw ConfigError("config: expected a JSON object");
        check_keys(raw_config, "", {"problem", "run", "output"});
        if (command == "solve") return cmd_solve(raw_config, overrides);
        if (command == "accuracy-table") return cmd_accuracy_table(raw_config, overrides);
        if (command == "spectrum") return cmd_spectrum(raw_config, overrides);
        if (command == "newton") return cmd_newton(raw_config, overrides);
        if (command == "oscillation-scan") return cmd_oscillation_scan(raw_config, overrides);
        if (command == "basin-scan") return cmd_basin_scan(raw_config, overrides);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        return {2, std::string("config error: ") + e.what()};
    } catch (const std::invalid_argument& e) {
        return {2, std::string("config error: ") + e.what()};
    } catch (const Error& e) {
        return {3, std::string("numerical failure: ") + e.what()};
    } catch (const std::exception& e) {
        return {1, std::string("error: ") + e.what()};
    }
}

}  // namespace rdlab::cli
