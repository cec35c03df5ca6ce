// Dense bounded-variable primal simplex.
//
// Every row gets a slack (s >= 0 for <=, s <= 0 for >=, s = 0 for =) so the
// model reads M x = b with bounds on every column. Rows whose initial slack
// would be out of bounds get an artificial column; phase 1 drives their sum
// to zero. The full tableau B^-1 M is kept dense, which limits this backend
// to models of a few thousand rows.

#include <algorithm>
#include <cmath>
#include <limits>

#include "backends.hpp"

namespace nbplan::lp {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kPivotTolerance = 1e-9;
constexpr double kPrimalTolerance = 1e-9;
constexpr double kDualTolerance = 1e-9;
constexpr std::size_t kDegenerateLimit = 50;

enum class Outcome { Optimal, Unbounded, IterationLimit };

class DenseSimplex {
public:
    DenseSimplex(const LinearProgram& lp, const SolverOptions& options);
    Solution run();

private:
    double& at(std::size_t row, std::size_t col) { return tableau_[row * cols_ + col]; }
    bool is_basic(std::size_t col) const { return position_[col] != kNone; }

    void set_phase_costs(bool phase_one);
    void recompute_reduced_costs();
    void recompute_basic_values();
    std::size_t choose_entering(bool bland) const;
    Outcome iterate();
    void pivot(std::size_t row, std::size_t col);
    void drive_out_artificials();
    Solution extract(SolveStatus status, std::string message) const;

    const LinearProgram& lp_;
    SolverOptions options_;
    std::size_t m_ = 0;         // rows
    std::size_t n_ = 0;         // structural columns
    std::size_t cols_ = 0;      // structural + slack + artificial
    std::size_t first_artificial_ = 0;

    std::vector<double> tableau_;
    std::vector<double> lower_, upper_, cost_, value_;
    std::vector<double> reduced_;
    std::vector<double> rhs_;
    std::vector<double> row_scale_;
    std::vector<double> row_sign_;
    std::vector<std::vector<Term>> rows_;  // scaled and signed structural rows
    std::vector<std::size_t> basis_;       // row -> column
    std::vector<std::size_t> position_;    // column -> row, kNone when nonbasic
    std::vector<std::size_t> artificial_row_;
    bool allow_artificial_entry_ = true;
    double cost_scale_ = 1.0;
    std::size_t iterations_ = 0;
    std::size_t max_iterations_ = 0;
};

DenseSimplex::DenseSimplex(const LinearProgram& lp, const SolverOptions& options)
    : lp_(lp), options_(options) {
    m_ = lp.constraint_count();
    n_ = lp.variable_count();

    double max_cost = 0.0;
    for (const auto& v : lp.variables()) max_cost = std::max(max_cost, std::abs(v.cost));
    cost_scale_ = max_cost > 0.0 ? 1.0 / max_cost : 1.0;

    // Structural columns start at a finite bound, or at zero when free.
    std::vector<double> start(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        const Variable& v = lp.variables()[j];
        start[j] = std::isfinite(v.lower) ? v.lower : (std::isfinite(v.upper) ? v.upper : 0.0);
    }

    row_scale_.assign(m_, 1.0);
    row_sign_.assign(m_, 1.0);
    rhs_.assign(m_, 0.0);
    rows_.resize(m_);
    std::vector<double> slack_lower(m_), slack_upper(m_), slack_value(m_);
    std::vector<bool> needs_artificial(m_, false);
    std::size_t artificial_count = 0;
    for (std::size_t r = 0; r < m_; ++r) {
        const Constraint& c = lp.constraints()[r];
        double biggest = 0.0;
        for (const Term& t : c.terms) biggest = std::max(biggest, std::abs(t.coeff));
        row_scale_[r] = biggest > 0.0 ? 1.0 / biggest : 1.0;
        switch (c.sense) {
            case Sense::LessEqual: slack_lower[r] = 0.0; slack_upper[r] = kInf; break;
            case Sense::GreaterEqual: slack_lower[r] = -kInf; slack_upper[r] = 0.0; break;
            case Sense::Equal: slack_lower[r] = 0.0; slack_upper[r] = 0.0; break;
        }
        double residual = c.rhs * row_scale_[r];
        for (const Term& t : c.terms) residual -= t.coeff * row_scale_[r] * start[t.var.index];
        double clamped = std::clamp(residual, slack_lower[r], slack_upper[r]);
        slack_value[r] = clamped;
        if (std::abs(residual - clamped) > 0.0) {
            needs_artificial[r] = true;
            row_sign_[r] = residual > clamped ? 1.0 : -1.0;
            ++artificial_count;
        }
    }

    first_artificial_ = n_ + m_;
    cols_ = n_ + m_ + artificial_count;
    tableau_.assign(m_ * cols_, 0.0);
    lower_.assign(cols_, 0.0);
    upper_.assign(cols_, 0.0);
    cost_.assign(cols_, 0.0);
    value_.assign(cols_, 0.0);
    position_.assign(cols_, kNone);
    basis_.assign(m_, kNone);
    artificial_row_.assign(artificial_count, kNone);

    for (std::size_t j = 0; j < n_; ++j) {
        lower_[j] = lp.variables()[j].lower;
        upper_[j] = lp.variables()[j].upper;
        value_[j] = start[j];
    }

    std::size_t next_artificial = first_artificial_;
    for (std::size_t r = 0; r < m_; ++r) {
        const Constraint& c = lp.constraints()[r];
        const double factor = row_scale_[r] * row_sign_[r];
        for (const Term& t : c.terms) {
            if (t.coeff == 0.0) continue;
            rows_[r].push_back({t.var, t.coeff * factor});
            at(r, t.var.index) = t.coeff * factor;
        }
        rhs_[r] = c.rhs * factor;
        const std::size_t slack = n_ + r;
        at(r, slack) = row_sign_[r];
        lower_[slack] = slack_lower[r];
        upper_[slack] = slack_upper[r];
        value_[slack] = slack_value[r];
        if (needs_artificial[r]) {
            const std::size_t art = next_artificial++;
            at(r, art) = 1.0;
            lower_[art] = 0.0;
            upper_[art] = kInf;
            artificial_row_[art - first_artificial_] = r;
            basis_[r] = art;
            position_[art] = r;
        } else {
            basis_[r] = slack;
            position_[slack] = r;
        }
    }
    // Rows with a basic artificial were multiplied by the sign; the basic
    // column coefficient is +1 in every row, so the tableau is B^-1 M already.
    recompute_basic_values();

    max_iterations_ = options.max_iterations ? options.max_iterations : 50 * (m_ + cols_) + 1000;
}

void DenseSimplex::set_phase_costs(bool phase_one) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    if (phase_one) {
        for (std::size_t j = first_artificial_; j < cols_; ++j) cost_[j] = 1.0;
    } else {
        for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.variables()[j].cost * cost_scale_;
    }
    recompute_reduced_costs();
}

void DenseSimplex::recompute_reduced_costs() {
    reduced_ = cost_;
    for (std::size_t r = 0; r < m_; ++r) {
        const double cb = cost_[basis_[r]];
        if (cb == 0.0) continue;
        const double* row = &tableau_[r * cols_];
        for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= cb * row[j];
    }
    for (std::size_t r = 0; r < m_; ++r) reduced_[basis_[r]] = 0.0;
}

// x_B = B^-1 (b - M_N x_N), twice for refinement. B^-1 is read off the slack
// columns: T[:, n+r] = B^-1 M[:, n+r] = B^-1 e_r * sign_r.
void DenseSimplex::recompute_basic_values() {
    if (m_ == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> residual(rhs_);
        for (std::size_t r = 0; r < m_; ++r) {
            for (const Term& t : rows_[r]) residual[r] -= t.coeff * value_[t.var.index];
            residual[r] -= row_sign_[r] * value_[n_ + r];
        }
        for (std::size_t a = 0; a < artificial_row_.size(); ++a)
            residual[artificial_row_[a]] -= value_[first_artificial_ + a];
        // residual now holds b - M x for the current point; correct x_B by B^-1 residual.
        std::vector<double> correction(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double* row = &tableau_[i * cols_ + n_];
            double sum = 0.0;
            for (std::size_t r = 0; r < m_; ++r) sum += row[r] * row_sign_[r] * residual[r];
            correction[i] = sum;
        }
        for (std::size_t i = 0; i < m_; ++i) value_[basis_[i]] += correction[i];
    }
}

std::size_t DenseSimplex::choose_entering(bool bland) const {
    std::size_t best = kNone;
    double best_score = 0.0;
    const std::size_t limit = allow_artificial_entry_ ? cols_ : first_artificial_;
    for (std::size_t j = 0; j < limit; ++j) {
        if (is_basic(j) || lower_[j] == upper_[j]) continue;
        const double d = reduced_[j];
        const bool can_increase = value_[j] < upper_[j] - kPrimalTolerance;
        const bool can_decrease = value_[j] > lower_[j] + kPrimalTolerance;
        double score = 0.0;
        if (d < -kDualTolerance && can_increase) score = -d;
        else if (d > kDualTolerance && can_decrease) score = d;
        if (score == 0.0) continue;
        if (bland) return j;
        if (score > best_score) {
            best_score = score;
            best = j;
        }
    }
    return best;
}

void DenseSimplex::pivot(std::size_t row, std::size_t col) {
    double* pivot_row = &tableau_[row * cols_];
    const double inverse = 1.0 / pivot_row[col];
    std::vector<std::size_t> nonzero;
    nonzero.reserve(64);
    for (std::size_t j = 0; j < cols_; ++j) {
        if (pivot_row[j] != 0.0) {
            pivot_row[j] *= inverse;
            nonzero.push_back(j);
        }
    }
    pivot_row[col] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
        if (i == row) continue;
        double* target = &tableau_[i * cols_];
        const double factor = target[col];
        if (factor == 0.0) continue;
        for (std::size_t j : nonzero) {
            double v = target[j] - factor * pivot_row[j];
            target[j] = std::abs(v) < 1e-14 ? 0.0 : v;
        }
        target[col] = 0.0;
    }
    const double dq = reduced_[col];
    if (dq != 0.0)
        for (std::size_t j : nonzero) reduced_[j] -= dq * pivot_row[j];
    reduced_[col] = 0.0;

    position_[basis_[row]] = kNone;
    basis_[row] = col;
    position_[col] = row;
}

Outcome DenseSimplex::iterate() {
    std::size_t degenerate_run = 0;
    bool bland = false;
    std::size_t since_refresh = 0;
    while (true) {
        if (iterations_ >= max_iterations_) return Outcome::IterationLimit;
        if (++since_refresh >= 200) {
            recompute_reduced_costs();
            since_refresh = 0;
        }
        const std::size_t q = choose_entering(bland);
        if (q == kNone) return Outcome::Optimal;
        ++iterations_;
        const double direction = reduced_[q] < 0.0 ? 1.0 : -1.0;

        // Harris two-pass ratio test.
        double relaxed_step = kInf;
        for (std::size_t r = 0; r < m_; ++r) {
            const double alpha = tableau_[r * cols_ + q];
            if (std::abs(alpha) <= kPivotTolerance) continue;
            const double rate = -direction * alpha;
            const std::size_t b = basis_[r];
            if (rate < 0.0 && std::isfinite(lower_[b]))
                relaxed_step = std::min(relaxed_step, (value_[b] - lower_[b] + kPrimalTolerance) / -rate);
            else if (rate > 0.0 && std::isfinite(upper_[b]))
                relaxed_step = std::min(relaxed_step, (upper_[b] - value_[b] + kPrimalTolerance) / rate);
        }
        std::size_t leave_row = kNone;
        double step = kInf;
        double best_alpha = 0.0;
        if (std::isfinite(relaxed_step)) {
            for (std::size_t r = 0; r < m_; ++r) {
                const double alpha = tableau_[r * cols_ + q];
                if (std::abs(alpha) <= kPivotTolerance) continue;
                const double rate = -direction * alpha;
                const std::size_t b = basis_[r];
                double ratio = kInf;
                if (rate < 0.0 && std::isfinite(lower_[b])) ratio = (value_[b] - lower_[b]) / -rate;
                else if (rate > 0.0 && std::isfinite(upper_[b])) ratio = (upper_[b] - value_[b]) / rate;
                if (ratio <= relaxed_step && std::abs(alpha) > best_alpha) {
                    best_alpha = std::abs(alpha);
                    leave_row = r;
                    step = std::max(ratio, 0.0);
                }
            }
        }
        const double flip = upper_[q] - lower_[q];
        if (leave_row == kNone && !std::isfinite(flip)) return Outcome::Unbounded;

        if (std::isfinite(flip) && flip <= step) {
            step = flip;
            leave_row = kNone;
        }

        if (step > 0.0) {
            for (std::size_t r = 0; r < m_; ++r) {
                const double alpha = tableau_[r * cols_ + q];
                if (alpha != 0.0) value_[basis_[r]] -= direction * alpha * step;
            }
        }
        if (leave_row == kNone) {
            value_[q] = direction > 0.0 ? upper_[q] : lower_[q];
        } else {
            value_[q] += direction * step;
            const std::size_t leaving = basis_[leave_row];
            const double rate = -direction * tableau_[leave_row * cols_ + q];
            value_[leaving] = rate < 0.0 ? lower_[leaving] : upper_[leaving];
            pivot(leave_row, q);
        }

        if (step < 1e-12) {
            if (++degenerate_run > kDegenerateLimit) bland = true;
        } else {
            degenerate_run = 0;
            bland = false;
        }
    }
}

void DenseSimplex::drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
        if (basis_[r] < first_artificial_) continue;
        std::size_t best = kNone;
        double best_abs = 1e-7;
        for (std::size_t j = 0; j < first_artificial_; ++j) {
            if (is_basic(j)) continue;
            const double a = std::abs(tableau_[r * cols_ + j]);
            if (a > best_abs) {
                best_abs = a;
                best = j;
            }
        }
        // No candidate: the row is redundant and the artificial stays basic at 0.
        if (best != kNone) pivot(r, best);
    }
}

Solution DenseSimplex::extract(SolveStatus status, std::string message) const {
    Solution solution;
    solution.status = status;
    solution.message = std::move(message);
    solution.backend = "simplex";
    solution.iterations = iterations_;
    if (status != SolveStatus::Optimal) return solution;
    solution.primal.assign(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
    solution.objective = lp_.objective_value(solution.primal);
    if (options_.compute_duals) {
        solution.dual.assign(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            // pi_r * sign_r = -d_slack; undo row and cost scaling.
            double pi = 0.0;
            for (std::size_t i = 0; i < m_; ++i)
                pi += cost_[basis_[i]] * tableau_[i * cols_ + n_ + r];
            solution.dual[r] = pi * row_sign_[r] * row_sign_[r] * row_scale_[r] / cost_scale_;
        }
    }
    return solution;
}

Solution DenseSimplex::run() {
    if (!artificial_row_.empty()) {
        set_phase_costs(true);
        Outcome outcome = iterate();
        if (outcome == Outcome::IterationLimit)
            return extract(SolveStatus::Error, "iteration limit reached in phase 1");
        recompute_basic_values();
        double infeasibility = 0.0;
        for (std::size_t j = first_artificial_; j < cols_; ++j) infeasibility += value_[j];
        if (infeasibility > options_.feasibility_tolerance)
            return extract(SolveStatus::Infeasible,
                           "phase 1 ended with infeasibility " + std::to_string(infeasibility));
        for (std::size_t j = first_artificial_; j < cols_; ++j) {
            upper_[j] = 0.0;
            if (!is_basic(j)) value_[j] = 0.0;
        }
        drive_out_artificials();
        allow_artificial_entry_ = false;
        recompute_basic_values();
    }
    set_phase_costs(false);
    Outcome outcome = iterate();
    if (outcome == Outcome::IterationLimit)
        return extract(SolveStatus::Error, "iteration limit reached in phase 2");
    if (outcome == Outcome::Unbounded) return extract(SolveStatus::Unbounded, "unbounded ray found");
    recompute_basic_values();

    Solution solution = extract(SolveStatus::Optimal, "");
    const FeasibilityReport check = check_feasibility(lp_, solution.primal);
    if (check.max_violation() > options_.feasibility_tolerance) {
        solution.status = SolveStatus::Error;
        solution.message = "numerical trouble: final point violates '" +
                           (check.worst_row.empty() ? check.worst_variable : check.worst_row) +
                           "' by " + std::to_string(check.max_violation());
        solution.primal.clear();
        solution.dual.clear();
    }
    return solution;
}

class SimplexBackend final : public SolverBackend {
public:
    std::string name() const override { return "simplex"; }
    Solution solve(const LinearProgram& lp, const SolverOptions& options) const override {
        try {
            DenseSimplex simplex(lp, options);
            return simplex.run();
        } catch (const std::bad_alloc&) {
            Solution s;
            s.status = SolveStatus::Error;
            s.backend = "simplex";
            s.message = "model too large for the dense simplex backend";
            return s;
        }
    }
};

}  // namespace

std::unique_ptr<SolverBackend> make_simplex_backend() { return std::make_unique<SimplexBackend>(); }

}  // namespace nbplan::lp
