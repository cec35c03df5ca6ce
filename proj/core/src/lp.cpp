#include "nbplan/lp.hpp"

#include <algorithm>
#include <cmath>

namespace nbplan::lp {

namespace {

void check_bounds(const std::string& name, double lower, double upper) {
    if (std::isnan(lower) || std::isnan(upper))
        throw ModelError("variable '" + name + "': NaN bound");
    if (lower > upper) throw ModelError("variable '" + name + "': lower bound exceeds upper bound");
    if (lower == kInf || upper == -kInf)
        throw ModelError("variable '" + name + "': bounds exclude every finite value");
}

}  // namespace

VarId LinearProgram::add_variable(std::string name, double lower, double upper, double cost) {
    if (name.empty()) throw ModelError("variable name must not be empty");
    check_bounds(name, lower, upper);
    if (!std::isfinite(cost)) throw ModelError("variable '" + name + "': non-finite cost");
    if (var_index_.count(name)) throw ModelError("duplicate variable name '" + name + "'");
    var_index_.emplace(name, variables_.size());
    variables_.push_back({std::move(name), lower, upper, cost});
    return VarId{variables_.size() - 1};
}

RowId LinearProgram::add_constraint(std::string name, std::vector<Term> terms, Sense sense,
                                    double rhs) {
    if (name.empty()) throw ModelError("constraint name must not be empty");
    if (row_index_.count(name)) throw ModelError("duplicate constraint name '" + name + "'");
    if (!std::isfinite(rhs)) throw ModelError("constraint '" + name + "': non-finite right-hand side");
    for (const Term& t : terms) {
        if (t.var.index >= variables_.size())
            throw ModelError("constraint '" + name + "' references an unknown variable");
        if (!std::isfinite(t.coeff)) throw ModelError("constraint '" + name + "': non-finite coefficient");
    }
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.var.index < b.var.index; });
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const Term& t : terms) {
        if (!merged.empty() && merged.back().var == t.var)
            merged.back().coeff += t.coeff;
        else
            merged.push_back(t);
    }
    row_index_.emplace(name, constraints_.size());
    constraints_.push_back({std::move(name), std::move(merged), sense, rhs});
    return RowId{constraints_.size() - 1};
}

RowId LinearProgram::add_constraint(std::string name,
                                    const std::vector<std::pair<std::string, double>>& named_terms,
                                    Sense sense, double rhs) {
    std::vector<Term> terms;
    terms.reserve(named_terms.size());
    for (const auto& [var, coeff] : named_terms) {
        auto id = find_variable(var);
        if (!id) throw ModelError("constraint '" + name + "' references unknown variable '" + var + "'");
        terms.push_back({*id, coeff});
    }
    return add_constraint(std::move(name), std::move(terms), sense, rhs);
}

std::pair<RowId, RowId> LinearProgram::add_range(const std::string& name,
                                                 const std::vector<Term>& terms, double lower,
                                                 double upper) {
    if (lower > upper) throw ModelError("range '" + name + "': lower limit exceeds upper limit");
    RowId lo = add_constraint(name + "/lower", terms, Sense::GreaterEqual, lower);
    RowId hi = add_constraint(name + "/upper", terms, Sense::LessEqual, upper);
    return {lo, hi};
}

void LinearProgram::set_cost(VarId var, double cost) {
    if (!std::isfinite(cost)) throw ModelError("non-finite cost");
    variables_.at(var.index).cost = cost;
}

void LinearProgram::set_bounds(VarId var, double lower, double upper) {
    Variable& v = variables_.at(var.index);
    check_bounds(v.name, lower, upper);
    v.lower = lower;
    v.upper = upper;
}

std::optional<VarId> LinearProgram::find_variable(std::string_view name) const {
    auto it = var_index_.find(std::string(name));
    if (it == var_index_.end()) return std::nullopt;
    return VarId{it->second};
}

std::optional<RowId> LinearProgram::find_constraint(std::string_view name) const {
    auto it = row_index_.find(std::string(name));
    if (it == row_index_.end()) return std::nullopt;
    return RowId{it->second};
}

VarId LinearProgram::variable(std::string_view name) const {
    auto id = find_variable(name);
    if (!id) throw ModelError("unknown variable '" + std::string(name) + "'");
    return *id;
}

std::size_t LinearProgram::count_constraints_with_prefix(std::string_view prefix) const {
    return static_cast<std::size_t>(
        std::count_if(constraints_.begin(), constraints_.end(), [&](const Constraint& c) {
            return std::string_view(c.name).substr(0, prefix.size()) == prefix;
        }));
}

double LinearProgram::objective_value(const std::vector<double>& primal) const {
    double total = 0.0;
    for (std::size_t j = 0; j < variables_.size(); ++j) total += variables_[j].cost * primal.at(j);
    return total;
}

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::Error: return "error";
    }
    return "error";
}

double Solution::value(const LinearProgram& lp, std::string_view name) const {
    return primal.at(lp.variable(name).index);
}

FeasibilityReport check_feasibility(const LinearProgram& lp, const std::vector<double>& primal) {
    if (primal.size() != lp.variable_count())
        throw ModelError("primal vector length does not match the LP");
    FeasibilityReport report;
    for (std::size_t j = 0; j < lp.variable_count(); ++j) {
        const Variable& v = lp.variables()[j];
        double violation = std::max(v.lower - primal[j], primal[j] - v.upper);
        if (violation > report.max_bound_violation) {
            report.max_bound_violation = violation;
            report.worst_variable = v.name;
        }
    }
    for (const Constraint& c : lp.constraints()) {
        double activity = 0.0;
        for (const Term& t : c.terms) activity += t.coeff * primal[t.var.index];
        double violation = 0.0;
        switch (c.sense) {
            case Sense::LessEqual: violation = activity - c.rhs; break;
            case Sense::GreaterEqual: violation = c.rhs - activity; break;
            case Sense::Equal: violation = std::abs(activity - c.rhs); break;
        }
        if (violation > report.max_row_violation) {
            report.max_row_violation = violation;
            report.worst_row = c.name;
        }
    }
    report.objective = lp.objective_value(primal);
    return report;
}

Solution solve(const LinearProgram& lp, std::string_view backend, const SolverOptions& options) {
    return make_backend(backend)->solve(lp, options);
}

}  // namespace nbplan::lp
