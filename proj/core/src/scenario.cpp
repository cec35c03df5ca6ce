#include "nbplan/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "nbplan/log.hpp"
#include "nbplan/plan_io.hpp"

namespace nbplan {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Value {
    std::string text;
    bool quoted = false;
    std::optional<std::vector<std::string>> list;
};

class Parser {
public:
    Parser(std::string_view source, std::size_t line) : source_(source), line_(line) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(std::string(source_) + ":" + std::to_string(line_) + ": " + what);
    }

    std::string unquote(std::string_view s) const {
        s = trim(s);
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
            return std::string(s.substr(1, s.size() - 2));
        if (!s.empty() && (s.front() == '"' || s.front() == '\'')) fail("unterminated string");
        return std::string(s);
    }

    Value parse_value(std::string_view s) const {
        s = trim(s);
        if (s.empty()) fail("missing value");
        Value v;
        if (s.front() == '[') {
            if (s.back() != ']') fail("unterminated list");
            std::vector<std::string> items;
            std::string_view body = trim(s.substr(1, s.size() - 2));
            while (!body.empty()) {
                const auto comma = body.find(',');
                std::string item = unquote(body.substr(0, comma));
                if (item.empty()) fail("empty list item");
                items.push_back(std::move(item));
                if (comma == std::string_view::npos) break;
                body = trim(body.substr(comma + 1));
            }
            v.list = std::move(items);
            return v;
        }
        v.quoted = s.front() == '"' || s.front() == '\'';
        v.text = unquote(s);
        return v;
    }

    double number(const std::string& key, const Value& v) const {
        double out = 0.0;
        if (v.list || v.quoted) fail("'" + key + "' expects a number");
        const char* end = v.text.data() + v.text.size();
        auto [ptr, ec] = std::from_chars(v.text.data(), end, out);
        if (ec != std::errc() || ptr != end || !std::isfinite(out))
            fail("'" + key + "' expects a number, got '" + v.text + "'");
        return out;
    }

    std::string string(const std::string& key, const Value& v) const {
        if (v.list) fail("'" + key + "' expects a single value");
        return v.text;
    }

private:
    std::string_view source_;
    std::size_t line_;
};

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string describe_failures(const VerificationReport& report) {
    std::ostringstream msg;
    msg << "verification failed:";
    for (const auto& name : report.failures()) {
        const CheckResult& c = report.check(name);
        msg << ' ' << name << " (" << c.max_violation << " at " << c.location << ")";
    }
    return msg.str();
}

std::string stage_file_name(const std::string& label) { return label + ".lp"; }

}  // namespace

ScenarioConfig parse_config(std::string_view text, std::string_view source) {
    ScenarioConfig config;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        Parser p(source, line_no);
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') p.fail("sections are not supported; use flat keys");
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) p.fail("expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) p.fail("missing key");
        if (!seen.insert(key).second) p.fail("duplicate key '" + key + "'");
        const Value v = p.parse_value(line.substr(eq + 1));

        if (key == "co2_cap") config.co2_cap = p.number(key, v);
        else if (key == "co2_reduction") config.co2_reduction = p.number(key, v);
        else if (key == "co2_baseline") config.co2_baseline = p.number(key, v);
        else if (key == "tatl_factor") config.tatl_factor = p.number(key, v);
        else if (key == "nb_capital_cost_up") config.nb_capital_cost_up = p.number(key, v);
        else if (key == "nb_capital_cost_down") config.nb_capital_cost_down = p.number(key, v);
        else if (key == "nb_dispatch_cost_up") config.nb_dispatch_cost_up = p.number(key, v);
        else if (key == "nb_dispatch_cost_down") config.nb_dispatch_cost_down = p.number(key, v);
        else if (key == "base_mva") config.base_mva = p.number(key, v);
        else if (key == "verify_tolerance") config.verify_tolerance = p.number(key, v);
        else if (key == "solver.feasibility_tolerance") config.solver.feasibility_tolerance = p.number(key, v);
        else if (key == "solver.optimality_tolerance") config.solver.optimality_tolerance = p.number(key, v);
        else if (key == "solver.max_iterations") {
            const double n = p.number(key, v);
            if (n < 0 || n != std::floor(n)) p.fail("'solver.max_iterations' expects a non-negative integer");
            config.solver.max_iterations = static_cast<std::size_t>(n);
        } else if (key == "backend") config.backend = p.string(key, v);
        else if (key == "slack_bus") config.slack_bus = p.string(key, v);
        else if (key == "model") {
            try {
                config.model = parse_model_kind(p.string(key, v));
            } catch (const PlanningError& e) {
                p.fail(e.what());
            }
        } else if (key == "contingencies") {
            if (!v.list) p.fail("'contingencies' expects a list like [\"L1\", \"L2\"]");
            config.contingencies = *v.list;
        } else {
            p.fail("unknown key '" + key + "'");
        }
    }
    try {
        config.validate();
    } catch (const PlanningError& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    }
    return config;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), file.string());
}

std::string format_config(const ScenarioConfig& c) {
    std::ostringstream out;
    auto num = [&](const char* key, double v) { out << key << " = " << csv::format_double(v) << '\n'; };
    if (c.co2_cap) num("co2_cap", *c.co2_cap);
    if (c.co2_reduction) num("co2_reduction", *c.co2_reduction);
    if (c.co2_baseline) num("co2_baseline", *c.co2_baseline);
    num("tatl_factor", c.tatl_factor);
    num("nb_capital_cost_up", c.nb_capital_cost_up);
    num("nb_capital_cost_down", c.nb_capital_cost_down);
    num("nb_dispatch_cost_up", c.nb_dispatch_cost_up);
    num("nb_dispatch_cost_down", c.nb_dispatch_cost_down);
    out << "model = \"" << to_string(c.model) << "\"\n";
    if (c.contingencies) {
        out << "contingencies = [";
        for (std::size_t i = 0; i < c.contingencies->size(); ++i)
            out << (i ? ", " : "") << '"' << (*c.contingencies)[i] << '"';
        out << "]\n";
    }
    if (c.slack_bus) out << "slack_bus = \"" << *c.slack_bus << "\"\n";
    num("base_mva", c.base_mva);
    out << "backend = \"" << c.backend << "\"\n";
    num("verify_tolerance", c.verify_tolerance);
    num("solver.feasibility_tolerance", c.solver.feasibility_tolerance);
    num("solver.optimality_tolerance", c.solver.optimality_tolerance);
    out << "solver.max_iterations = " << c.solver.max_iterations << '\n';
    return out.str();
}

ScenarioOutcome run_scenario(const Network& network, const ScenarioConfig& config, const RunOptions& options) {
    ScenarioOutcome outcome;
    outcome.model = config.model;
    std::optional<PlanningContext> context;
    try {
        config.validate();
        if (!lp::backend_available(config.backend)) lp::make_backend(config.backend);
        context.emplace(network, config);
    } catch (const std::exception& e) {
        outcome.code = ExitCode::InputError;
        outcome.message = e.what();
        return outcome;
    }
    const auto& out_dir = options.out_dir;
    if (out_dir) std::filesystem::create_directories(*out_dir);
    if (out_dir && options.dump_sensitivities) write_sensitivities_csv(network, context->sensitivities, *out_dir);

    ModelRun run;
    try {
        run = run_model(*context, config, options.dump_lp);
    } catch (const PlanningError& e) {
        outcome.code = ExitCode::SolveFailure;
        outcome.message = e.what();
        return outcome;
    }
    outcome.stages = run.stages;
    outcome.status = run.status;
    if (out_dir && options.dump_lp)
        for (std::size_t i = 0; i < run.problems.size(); ++i) {
            std::ofstream lp_out(*out_dir / stage_file_name(run.stages[i].label), std::ios::binary);
            lp::write_lp(lp_out, run.problems[i].lp);
        }
    if (!run.optimal()) {
        outcome.code = ExitCode::SolveFailure;
        outcome.message = run.message;
        return outcome;
    }

    VerificationReport report =
        verify_plan(*run.plan, network, context->sensitivities, config, config.verify_tolerance);
    if (out_dir) write_verification(report, *out_dir / "verification.csv");
    if (!report.valid()) {
        outcome.code = ExitCode::VerificationFailure;
        outcome.message = describe_failures(report);
    } else {
        outcome.code = ExitCode::Ok;
        if (out_dir) {
            std::vector<std::string> labels;
            for (const auto& s : run.stages) labels.push_back(s.label);
            write_plan(*run.plan, network, *out_dir, labels);
        }
    }
    outcome.plan = std::move(run.plan);
    outcome.report = std::move(report);
    return outcome;
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Co2Reduction: return "co2_reduction";
        case SweepAxis::TatlFactor: return "tatl_factor";
        case SweepAxis::NbCost: return "nb_cost";
    }
    return "";
}

SweepAxis parse_sweep_axis(std::string_view text) {
    if (text == "co2" || text == "co2_reduction") return SweepAxis::Co2Reduction;
    if (text == "tatl" || text == "tatl_factor") return SweepAxis::TatlFactor;
    if (text == "nbcost" || text == "nb_cost") return SweepAxis::NbCost;
    throw ConfigError("unknown sweep axis '" + std::string(text) + "' (expected co2, tatl or nbcost)");
}

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
    ScenarioConfig c = base;
    switch (axis) {
        case SweepAxis::Co2Reduction:
            c.co2_cap.reset();
            c.co2_reduction = value;
            break;
        case SweepAxis::TatlFactor: c.tatl_factor = value; break;
        case SweepAxis::NbCost:
            c.nb_capital_cost_up = value;
            c.nb_capital_cost_down = value;
            break;
    }
    return c;
}

void SweepSpec::validate() const {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (models.empty()) throw ConfigError("sweep needs at least one model");
    if (axis == SweepAxis::Co2Reduction && !base.co2_baseline)
        throw ConfigError("a co2 sweep needs co2_baseline in the config");
    for (double v : values) {
        try {
            apply_axis(base, axis, v).validate();
        } catch (const PlanningError& e) {
            throw ConfigError("sweep value " + fmt(v) + ": " + e.what());
        }
    }
}

namespace {

std::string scenario_name(SweepAxis axis, double value) { return std::string(to_string(axis)) + "_" + fmt(value); }

SummaryRow make_row(const std::string& scenario, SweepAxis axis, double value, const ScenarioOutcome& outcome) {
    SummaryRow row;
    row.scenario = scenario;
    row.axis = std::string(to_string(axis));
    row.value = value;
    row.model = outcome.model;
    row.message = outcome.message;
    switch (outcome.code) {
        case ExitCode::Ok: row.status = "optimal"; break;
        case ExitCode::InputError: row.status = "input_error"; break;
        case ExitCode::SolveFailure:
            row.status = outcome.status == lp::SolveStatus::Optimal ? "failed" : std::string(lp::to_string(outcome.status));
            break;
        case ExitCode::VerificationFailure: row.status = "verification_failed"; break;
    }
    if (outcome.ok() && outcome.plan) {
        const PlanResult& plan = *outcome.plan;
        row.objective = plan.solver_objective();
        row.costs = plan.costs;
        row.nb_up_mw = plan.total_nb_up();
        row.nb_down_mw = plan.total_nb_down();
        row.emissions = plan.emissions;
    }
    return row;
}

int model_rank(ModelKind m) { return static_cast<int>(m); }

}  // namespace

std::vector<SummaryRow> run_sweep(const Network& network, const SweepSpec& spec, std::size_t jobs,
                                  const std::optional<std::filesystem::path>& out_dir) {
    spec.validate();
    struct Task {
        std::size_t value_index;
        ModelKind model;
    };
    std::vector<Task> tasks;
    for (std::size_t v = 0; v < spec.values.size(); ++v)
        for (ModelKind m : spec.models) tasks.push_back({v, m});

    // Tatl sweeps compare against the preventive plan, which does not depend
    // on the tatl value; it is solved once up front.
    std::optional<CostReport> preventive;
    if (spec.axis == SweepAxis::TatlFactor) {
        ScenarioConfig c = spec.base;
        c.model = ModelKind::Preventive;
        ScenarioOutcome o = run_scenario(network, c);
        if (o.ok()) preventive = o.plan->costs;
    }

    std::vector<std::optional<SummaryRow>> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task& task = tasks[i];
            const double value = spec.values[task.value_index];
            const std::string scenario = scenario_name(spec.axis, value);
            ScenarioConfig config = apply_axis(spec.base, spec.axis, value);
            config.model = task.model;
            RunOptions options;
            if (out_dir) options.out_dir = *out_dir / scenario / std::string(to_string(task.model));
            ScenarioOutcome outcome;
            try {
                outcome = run_scenario(network, config, options);
            } catch (const std::exception& e) {
                outcome.model = task.model;
                outcome.code = ExitCode::SolveFailure;
                outcome.message = e.what();
            }
            SummaryRow row = make_row(scenario, spec.axis, value, outcome);
            if (preventive && outcome.ok()) {
                row.ci_delta_total = preventive->generation() - row.costs.generation();
                row.ci_delta_capital = preventive->capital_generation - row.costs.capital_generation;
            }
            if (!outcome.ok()) log::warning(scenario + " / " + std::string(to_string(task.model)) + ": " + row.message);
            rows[i] = std::move(row);
        }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, tasks.size());
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    std::vector<std::pair<std::size_t, SummaryRow>> keyed;
    for (std::size_t i = 0; i < tasks.size(); ++i) keyed.emplace_back(tasks[i].value_index, std::move(*rows[i]));
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return model_rank(a.second.model) < model_rank(b.second.model);
    });
    std::vector<SummaryRow> out;
    for (auto& [_, row] : keyed) out.push_back(std::move(row));
    return out;
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    csv::write_row(out, {"scenario", "axis", "value", "model", "status", "objective", "total_cost",
                         "capital_generation", "operation_generation", "nb_capital", "nb_operation",
                         "nb_up_mw", "nb_down_mw", "c_nb", "emissions_t", "ci_delta_total",
                         "ci_delta_capital", "message"});
    for (const auto& r : rows) {
        const bool ok = r.status == "optimal";
        auto num = [&](double v) { return ok ? fmt(v) : std::string(); };
        auto opt = [&](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
        csv::write_row(out, {r.scenario, r.axis, fmt(r.value), std::string(to_string(r.model)), r.status,
                             num(r.objective), num(r.costs.total), num(r.costs.capital_generation),
                             num(r.costs.operation_generation), num(r.costs.nb_capital),
                             num(r.costs.nb_operation), num(r.nb_up_mw), num(r.nb_down_mw), num(r.costs.nb()),
                             num(r.emissions), opt(r.ci_delta_total), opt(r.ci_delta_capital), r.message});
    }
    return out.str();
}

void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << format_summary(rows);
}

Comparison compare_strategies(const Network& network, const ScenarioConfig& config,
                              const std::optional<std::filesystem::path>& out_dir, double relative_slack) {
    Comparison cmp;
    std::map<ModelKind, double> totals;
    for (ModelKind m : {ModelKind::Preventive, ModelKind::Sequential, ModelKind::Simultaneous}) {
        ScenarioConfig c = config;
        c.model = m;
        RunOptions options;
        if (out_dir) options.out_dir = *out_dir / std::string(to_string(m));
        ScenarioOutcome outcome = run_scenario(network, c, options);
        SummaryRow row = make_row("compare", SweepAxis::TatlFactor, config.tatl_factor, outcome);
        row.axis = "compare";
        if (outcome.ok()) totals[m] = outcome.plan->costs.total;
        else if (cmp.message.empty())
            cmp.message = std::string(to_string(m)) + ": " + outcome.message;
        cmp.rows.push_back(std::move(row));
    }
    cmp.solved = totals.size() == 3;
    if (!cmp.solved) return cmp;
    const double prev = totals[ModelKind::Preventive];
    const double seq = totals[ModelKind::Sequential];
    const double sim = totals[ModelKind::Simultaneous];
    const double slack = relative_slack * std::abs(prev);
    cmp.dominance_holds = sim <= std::min(prev, seq) + slack;
    std::ostringstream msg;
    msg << "preventive " << fmt(prev) << ", sequential " << fmt(seq) << ", simultaneous " << fmt(sim);
    if (!cmp.dominance_holds)
        msg << "; simultaneous exceeds the better alternative by " << fmt(sim - std::min(prev, seq))
            << " (allowed " << fmt(slack) << "), probably a solver tolerance issue";
    cmp.message = msg.str();
    return cmp;
}

}  // namespace nbplan
