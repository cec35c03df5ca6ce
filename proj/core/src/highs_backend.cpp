// HiGHS through its C API, loaded with dlopen so the library stays an
// optional runtime dependency.

#include <dlfcn.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>

#include "backends.hpp"

#ifndef NBPLAN_HIGHS_DEFAULT_PATH
#define NBPLAN_HIGHS_DEFAULT_PATH ""
#endif

namespace nbplan::lp {

namespace {

using HighsInt = std::int32_t;

constexpr HighsInt kRowwise = 2;
constexpr HighsInt kMinimize = 1;
constexpr HighsInt kStatusOptimal = 7;
constexpr HighsInt kStatusInfeasible = 8;
constexpr HighsInt kStatusUnboundedOrInfeasible = 9;
constexpr HighsInt kStatusUnbounded = 10;
constexpr HighsInt kModelEmpty = 6;

struct HighsApi {
    void* handle = nullptr;
    void* (*create)() = nullptr;
    void (*destroy)(void*) = nullptr;
    HighsInt (*pass_lp)(void*, HighsInt, HighsInt, HighsInt, HighsInt, HighsInt, double,
                        const double*, const double*, const double*, const double*, const double*,
                        const HighsInt*, const HighsInt*, const double*) = nullptr;
    HighsInt (*run)(void*) = nullptr;
    HighsInt (*model_status)(const void*) = nullptr;
    HighsInt (*get_solution)(const void*, double*, double*, double*, double*) = nullptr;
    HighsInt (*set_bool)(void*, const char*, HighsInt) = nullptr;
    HighsInt (*set_double)(void*, const char*, double) = nullptr;
    HighsInt (*set_string)(void*, const char*, const char*) = nullptr;
    double (*infinity)(const void*) = nullptr;
    HighsInt (*sizeof_int)(const void*) = nullptr;
    HighsInt (*iteration_count)(const void*) = nullptr;
};

template <typename Fn>
bool bind(void* handle, const char* symbol, Fn& fn) {
    fn = reinterpret_cast<Fn>(dlsym(handle, symbol));
    return fn != nullptr;
}

const HighsApi* load_api() {
    static std::once_flag once;
    static HighsApi api;
    static bool ok = false;
    std::call_once(once, [] {
        const std::string path = highs_library_path();
        void* handle = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
        if (!handle) return;
        api.handle = handle;
        ok = bind(handle, "Highs_create", api.create) && bind(handle, "Highs_destroy", api.destroy) &&
             bind(handle, "Highs_passLp", api.pass_lp) && bind(handle, "Highs_run", api.run) &&
             bind(handle, "Highs_getModelStatus", api.model_status) &&
             bind(handle, "Highs_getSolution", api.get_solution) &&
             bind(handle, "Highs_setBoolOptionValue", api.set_bool) &&
             bind(handle, "Highs_setDoubleOptionValue", api.set_double) &&
             bind(handle, "Highs_setStringOptionValue", api.set_string) &&
             bind(handle, "Highs_getInfinity", api.infinity) &&
             bind(handle, "Highs_getSizeofHighsInt", api.sizeof_int) &&
             bind(handle, "Highs_getSimplexIterationCount", api.iteration_count);
        if (ok) {
            void* probe = api.create();
            ok = api.sizeof_int(probe) == static_cast<HighsInt>(sizeof(HighsInt));
            api.destroy(probe);
        }
    });
    return ok ? &api : nullptr;
}

class HighsBackend final : public SolverBackend {
public:
    explicit HighsBackend(const HighsApi* api) : api_(api) {}
    std::string name() const override { return "highs"; }

    Solution solve(const LinearProgram& lp, const SolverOptions& options) const override {
        Solution solution;
        solution.backend = "highs";
        std::unique_ptr<void, void (*)(void*)> highs(api_->create(), api_->destroy);
        api_->set_bool(highs.get(), "output_flag", 0);
        api_->set_double(highs.get(), "primal_feasibility_tolerance",
                         std::min(options.feasibility_tolerance, 1e-7) * 1e-2);
        api_->set_double(highs.get(), "dual_feasibility_tolerance",
                         std::min(options.optimality_tolerance, 1e-7) * 1e-2);
        api_->set_string(highs.get(), "solver", "simplex");

        const double inf = api_->infinity(highs.get());
        auto clip = [inf](double v) { return std::isinf(v) ? (v > 0 ? inf : -inf) : v; };

        const auto n = static_cast<HighsInt>(lp.variable_count());
        const auto m = static_cast<HighsInt>(lp.constraint_count());
        std::vector<double> cost, col_lower, col_upper, row_lower, row_upper, values;
        std::vector<HighsInt> starts, indices;
        for (const auto& v : lp.variables()) {
            cost.push_back(v.cost);
            col_lower.push_back(clip(v.lower));
            col_upper.push_back(clip(v.upper));
        }
        for (const auto& c : lp.constraints()) {
            starts.push_back(static_cast<HighsInt>(indices.size()));
            row_lower.push_back(c.sense == Sense::LessEqual ? -inf : c.rhs);
            row_upper.push_back(c.sense == Sense::GreaterEqual ? inf : c.rhs);
            for (const Term& t : c.terms) {
                indices.push_back(static_cast<HighsInt>(t.var.index));
                values.push_back(t.coeff);
            }
        }
        starts.push_back(static_cast<HighsInt>(indices.size()));

        HighsInt rc = api_->pass_lp(highs.get(), n, m, static_cast<HighsInt>(indices.size()),
                                    kRowwise, kMinimize, 0.0, cost.data(), col_lower.data(),
                                    col_upper.data(), row_lower.data(), row_upper.data(),
                                    starts.data(), indices.data(), values.data());
        if (rc < 0) {
            solution.message = "Highs_passLp rejected the model";
            return solution;
        }
        if (api_->run(highs.get()) < 0) {
            solution.message = "Highs_run failed";
            return solution;
        }
        HighsInt status = api_->model_status(highs.get());
        if (status == kStatusUnboundedOrInfeasible) {
            api_->set_string(highs.get(), "presolve", "off");
            api_->run(highs.get());
            status = api_->model_status(highs.get());
        }
        solution.iterations = static_cast<std::size_t>(std::max<HighsInt>(0, api_->iteration_count(highs.get())));
        if (status == kStatusInfeasible) {
            solution.status = SolveStatus::Infeasible;
            return solution;
        }
        if (status == kStatusUnbounded || status == kStatusUnboundedOrInfeasible) {
            solution.status = SolveStatus::Unbounded;
            return solution;
        }
        if (status != kStatusOptimal && status != kModelEmpty) {
            solution.message = "HiGHS model status " + std::to_string(status);
            return solution;
        }
        std::vector<double> col_value(static_cast<std::size_t>(n)), col_dual(static_cast<std::size_t>(n));
        std::vector<double> row_value(static_cast<std::size_t>(m)), row_dual(static_cast<std::size_t>(m));
        api_->get_solution(highs.get(), col_value.data(), col_dual.data(), row_value.data(),
                           row_dual.data());
        solution.status = SolveStatus::Optimal;
        solution.primal = std::move(col_value);
        if (options.compute_duals) solution.dual = std::move(row_dual);
        solution.objective = lp.objective_value(solution.primal);
        return solution;
    }

private:
    const HighsApi* api_;
};

}  // namespace

std::string highs_library_path() {
    if (const char* env = std::getenv("NBPLAN_HIGHS_LIBRARY"); env && *env) return env;
    if (*NBPLAN_HIGHS_DEFAULT_PATH) return NBPLAN_HIGHS_DEFAULT_PATH;
    return "libhighs.so.1";
}

std::unique_ptr<SolverBackend> make_highs_backend() {
    const HighsApi* api = load_api();
    if (!api) return nullptr;
    return std::make_unique<HighsBackend>(api);
}

std::unique_ptr<SolverBackend> make_backend(std::string_view name) {
    if (name == "simplex") return make_simplex_backend();
    if (name == "highs") {
        auto backend = make_highs_backend();
        if (!backend)
            throw ModelError("HiGHS backend unavailable: cannot load '" + highs_library_path() +
                             "' (set NBPLAN_HIGHS_LIBRARY)");
        return backend;
    }
    throw ModelError("unknown solver backend '" + std::string(name) + "'");
}

bool backend_available(std::string_view name) {
    if (name == "simplex") return true;
    if (name == "highs") return load_api() != nullptr;
    return false;
}

std::vector<std::string> backend_names() { return {"simplex", "highs"}; }

}  // namespace nbplan::lp
