#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nbplan::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct VarId {
    std::size_t index = 0;
    friend bool operator==(VarId, VarId) = default;
};

struct RowId {
    std::size_t index = 0;
    friend bool operator==(RowId, RowId) = default;
};

struct Term {
    VarId var;
    double coeff = 0.0;
};

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    double cost = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

/// Minimisation LP with named variables and one-sided named constraints.
/// Names follow "family/index1/index2/..." so results can be read back by name.
class LinearProgram {
public:
    VarId add_variable(std::string name, double lower, double upper, double cost);

    /// Repeated variables in `terms` are merged. An empty expression is allowed.
    RowId add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);
    RowId add_constraint(std::string name,
                         const std::vector<std::pair<std::string, double>>& named_terms,
                         Sense sense, double rhs);

    /// lower <= expr <= upper as two constraints "<name>/lower" and "<name>/upper".
    std::pair<RowId, RowId> add_range(const std::string& name, const std::vector<Term>& terms,
                                      double lower, double upper);

    void set_cost(VarId var, double cost);
    void set_bounds(VarId var, double lower, double upper);

    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    std::size_t variable_count() const noexcept { return variables_.size(); }
    std::size_t constraint_count() const noexcept { return constraints_.size(); }

    std::optional<VarId> find_variable(std::string_view name) const;
    std::optional<RowId> find_constraint(std::string_view name) const;
    VarId variable(std::string_view name) const;

    /// Number of constraints whose name starts with `prefix`.
    std::size_t count_constraints_with_prefix(std::string_view prefix) const;

    double objective_value(const std::vector<double>& primal) const;

private:
    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::unordered_map<std::string, std::size_t> var_index_;
    std::unordered_map<std::string, std::size_t> row_index_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Error };

std::string_view to_string(SolveStatus status);

struct Solution {
    SolveStatus status = SolveStatus::Error;
    double objective = 0.0;
    std::vector<double> primal;   // by variable position, present iff optimal
    std::vector<double> dual;     // by constraint position, optional
    std::string message;
    std::string backend;
    std::size_t iterations = 0;

    bool optimal() const noexcept { return status == SolveStatus::Optimal; }
    double value(VarId var) const { return primal.at(var.index); }
    double value(const LinearProgram& lp, std::string_view name) const;
};

struct SolverOptions {
    double feasibility_tolerance = 1e-6;
    double optimality_tolerance = 1e-6;
    std::size_t max_iterations = 0;  // 0 selects a size-based limit
    bool compute_duals = true;
};

class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual Solution solve(const LinearProgram& lp, const SolverOptions& options) const = 0;
};

/// "simplex" is the built-in dense bounded-variable simplex; "highs" loads
/// the HiGHS shared library at runtime (see highs_library_path()).
std::unique_ptr<SolverBackend> make_backend(std::string_view name);
bool backend_available(std::string_view name);
std::vector<std::string> backend_names();

Solution solve(const LinearProgram& lp, std::string_view backend = "simplex",
               const SolverOptions& options = {});

/// Independent re-check of a primal point against the stored LP.
struct FeasibilityReport {
    double max_bound_violation = 0.0;
    double max_row_violation = 0.0;
    std::string worst_row;
    std::string worst_variable;
    double objective = 0.0;

    double max_violation() const noexcept {
        return max_bound_violation > max_row_violation ? max_bound_violation : max_row_violation;
    }
};

FeasibilityReport check_feasibility(const LinearProgram& lp, const std::vector<double>& primal);

/// CPLEX-style LP text: Minimize / Subject To / Bounds / End.
void write_lp(std::ostream& out, const LinearProgram& lp);
LinearProgram read_lp(std::istream& in);

}  // namespace nbplan::lp
