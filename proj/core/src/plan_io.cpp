#include "nbplan/plan_io.hpp"

#include <fstream>

#include <json.hpp>

#include "csv.hpp"

namespace nbplan {

namespace {

std::ofstream open(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    return out;
}

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

void write_plan(const PlanResult& plan, const Network& net, const std::filesystem::path& dir,
                const std::vector<std::string>& stage_labels) {
    std::filesystem::create_directories(dir);
    using csv::format_double;

    {
        auto out = open(dir / "capacities.csv");
        csv::write_row(out, {"generator", "capacity_mw"});
        for (std::size_t s = 0; s < net.generator_count(); ++s)
            csv::write_row(out, {net.generators()[s].id, format_double(plan.generator_capacity(ix(s)))});
    }
    {
        auto out = open(dir / "dispatch.csv");
        csv::write_row(out, {"generator", "snapshot", "dispatch_mw"});
        for (std::size_t s = 0; s < net.generator_count(); ++s)
            for (std::size_t t = 0; t < net.snapshot_count(); ++t)
                csv::write_row(out, {net.generators()[s].id, net.snapshots()[t].label,
                                     format_double(plan.dispatch(ix(s), ix(t)))});
    }
    {
        auto out = open(dir / "flows.csv");
        csv::write_row(out, {"line", "snapshot", "flow_mw"});
        for (std::size_t l = 0; l < net.line_count(); ++l)
            for (std::size_t t = 0; t < net.snapshot_count(); ++t)
                csv::write_row(out, {net.lines()[l].id, net.snapshots()[t].label,
                                     format_double(plan.line_flow(ix(l), ix(t)))});
    }
    {
        auto out = open(dir / "nb_capacities.csv");
        csv::write_row(out, {"bus", "p_plus_mw", "p_minus_mw"});
        if (plan.has_boosters())
            for (std::size_t i = 0; i < net.bus_count(); ++i)
                csv::write_row(out, {net.buses()[i].id, format_double(plan.nb_capacity_up(ix(i))),
                                     format_double(plan.nb_capacity_down(ix(i)))});
    }
    {
        auto out = open(dir / "nb_dispatch.csv");
        csv::write_row(out, {"bus", "snapshot", "contingency", "p_plus_mw", "p_minus_mw"});
        if (plan.has_boosters())
            for (std::size_t i = 0; i < net.bus_count(); ++i)
                for (std::size_t t = 0; t < net.snapshot_count(); ++t)
                    for (std::size_t c = 0; c < plan.contingencies.size(); ++c)
                        csv::write_row(out, {net.buses()[i].id, net.snapshots()[t].label,
                                             net.lines()[plan.contingencies[c]].id,
                                             format_double(plan.nb_dispatch_up[c](ix(i), ix(t))),
                                             format_double(plan.nb_dispatch_down[c](ix(i), ix(t)))});
    }
    {
        nlohmann::ordered_json doc;
        doc["model"] = std::string(to_string(plan.model));
        doc["tatl_factor"] = plan.tatl_factor;
        doc["capital_generation"] = plan.costs.capital_generation;
        doc["operation_generation"] = plan.costs.operation_generation;
        doc["nb_capital"] = plan.costs.nb_capital;
        doc["nb_operation"] = plan.costs.nb_operation;
        doc["total"] = plan.costs.total;
        doc["emissions_t"] = plan.emissions;
        doc["co2_cap_t"] = plan.co2_cap ? nlohmann::ordered_json(*plan.co2_cap) : nlohmann::ordered_json();
        doc["nb_capacity_up_mw"] = plan.total_nb_up();
        doc["nb_capacity_down_mw"] = plan.total_nb_down();
        auto stages = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < plan.stage_objectives.size(); ++i) {
            const std::string label = i < stage_labels.size() ? stage_labels[i] : "stage" + std::to_string(i + 1);
            stages.push_back({{"label", label}, {"objective", plan.stage_objectives[i]}});
        }
        doc["stages"] = std::move(stages);
        auto out = open(dir / "costs.json");
        out << doc.dump(2) << '\n';
    }
}

void write_verification(const VerificationReport& report, const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    auto out = open(file);
    csv::write_row(out, {"check", "max_violation", "location", "evaluated", "passed"});
    for (const auto& c : report.checks)
        csv::write_row(out, {c.name, csv::format_double(c.max_violation), c.location, std::to_string(c.evaluated),
                             c.max_violation <= report.tolerance ? "true" : "false"});
}

}  // namespace nbplan
