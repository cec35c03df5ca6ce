#include "nbplan/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "csv.hpp"

namespace nbplan {

namespace {

template <typename Map>
std::size_t lookup(const Map& map, std::string_view id, const char* what) {
    auto it = map.find(std::string(id));
    if (it == map.end()) throw DataError(std::string("unknown ") + what + " '" + std::string(id) + "'");
    return it->second;
}

std::string row_context(const csv::Table& t, std::size_t row) {
    return t.path.filename().string() + ", row " + std::to_string(t.line_numbers[row]);
}

}  // namespace

bool is_valid_identifier(std::string_view id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.';
    });
}

Network::Network(NetworkData data)
    : buses_(std::move(data.buses)),
      lines_(std::move(data.lines)),
      generators_(std::move(data.generators)),
      snapshots_(std::move(data.snapshots)),
      base_mva_(data.base_mva) {
    if (buses_.empty()) throw DataError("network has no buses");
    if (snapshots_.empty()) throw DataError("network has no snapshots");
    if (!(base_mva_ > 0.0)) throw DataError("base MVA must be positive");

    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const auto& id = buses_[i].id;
        if (!is_valid_identifier(id)) throw DataError("invalid bus id '" + id + "'");
        if (!bus_index_.emplace(id, i).second) throw DataError("duplicate bus id '" + id + "'");
    }

    for (std::size_t l = 0; l < lines_.size(); ++l) {
        const Line& line = lines_[l];
        if (!is_valid_identifier(line.id)) throw DataError("invalid line id '" + line.id + "'");
        if (!line_index_.emplace(line.id, l).second)
            throw DataError("duplicate line id '" + line.id + "'");
        line_from_.push_back(lookup(bus_index_, line.from_bus, "bus"));
        line_to_.push_back(lookup(bus_index_, line.to_bus, "bus"));
        if (line_from_.back() == line_to_.back())
            throw DataError("line '" + line.id + "' connects bus '" + line.from_bus + "' to itself");
        if (!(line.reactance_pu > 0.0))
            throw DataError("line '" + line.id + "': reactance must be positive");
        if (!(line.patl_mw > 0.0)) throw DataError("line '" + line.id + "': PATL must be positive");
    }

    std::unordered_set<std::string> labels;
    double weight_sum = 0.0;
    for (const auto& s : snapshots_) {
        if (!labels.insert(s.label).second) throw DataError("duplicate snapshot '" + s.label + "'");
        if (!(s.weight_hours > 0.0))
            throw DataError("snapshot '" + s.label + "': weight must be positive");
        weight_sum += s.weight_hours;
    }
    if (data.period_hours &&
        std::abs(weight_sum - *data.period_hours) > 1e-6 * std::max(1.0, *data.period_hours))
        throw DataError("snapshot weights must sum to period length " +
                        csv::format_double(*data.period_hours) + " (found " +
                        csv::format_double(weight_sum) + ")");

    const std::size_t T = snapshots_.size();
    for (std::size_t g = 0; g < generators_.size(); ++g) {
        Generator& gen = generators_[g];
        if (!is_valid_identifier(gen.id)) throw DataError("invalid generator id '" + gen.id + "'");
        if (!gen_index_.emplace(gen.id, g).second)
            throw DataError("duplicate generator id '" + gen.id + "'");
        gen_bus_.push_back(lookup(bus_index_, gen.bus, "bus"));
        if (!(gen.efficiency > 0.0 && gen.efficiency <= 1.0))
            throw DataError("generator '" + gen.id + "': efficiency must lie in (0, 1]");
        if (!(gen.max_capacity_mw >= 0.0))
            throw DataError("generator '" + gen.id + "': max capacity must be non-negative");
        if (gen.emission_factor < 0.0)
            throw DataError("generator '" + gen.id + "': emission factor must be non-negative");
        if (gen.availability.empty()) gen.availability.assign(T, 1.0);
        if (gen.availability.size() != T)
            throw DataError("generator '" + gen.id + "': availability series length " +
                            std::to_string(gen.availability.size()) + " does not match " +
                            std::to_string(T) + " snapshots");
        for (double a : gen.availability)
            if (!(a >= 0.0 && a <= 1.0))
                throw DataError("generator '" + gen.id + "': availability outside [0, 1]");
    }

    demand_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(buses_.size()),
                                    static_cast<Eigen::Index>(T));
    for (const auto& [bus_id, series] : data.demand) {
        std::size_t i = lookup(bus_index_, bus_id, "bus");
        if (series.size() != T)
            throw DataError("demand series for bus '" + bus_id + "' has " +
                            std::to_string(series.size()) + " values, expected " +
                            std::to_string(T));
        for (std::size_t t = 0; t < T; ++t) {
            if (!(series[t] >= 0.0)) throw DataError("negative demand at bus '" + bus_id + "'");
            demand_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = series[t];
        }
    }

    if (!is_connected(*this)) throw DataError("network graph is disconnected");
}

std::size_t Network::bus_index(std::string_view id) const { return lookup(bus_index_, id, "bus"); }
std::size_t Network::line_index(std::string_view id) const { return lookup(line_index_, id, "line"); }
std::size_t Network::generator_index(std::string_view id) const {
    return lookup(gen_index_, id, "generator");
}

double Network::susceptance_mw(std::size_t line) const noexcept {
    return base_mva_ / lines_[line].reactance_pu;
}

double Network::availability(std::size_t gen, std::size_t snapshot) const noexcept {
    return generators_[gen].availability[snapshot];
}

double Network::total_weight() const noexcept {
    return std::accumulate(snapshots_.begin(), snapshots_.end(), 0.0,
                           [](double acc, const Snapshot& s) { return acc + s.weight_hours; });
}

bool is_connected(const Network& network, const std::vector<bool>& removed) {
    const std::size_t n = network.bus_count();
    std::vector<std::vector<std::size_t>> adjacent(n);
    for (std::size_t l = 0; l < network.line_count(); ++l) {
        if (!removed.empty() && removed[l]) continue;
        adjacent[network.line_from(l)].push_back(network.line_to(l));
        adjacent[network.line_to(l)].push_back(network.line_from(l));
    }
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v : adjacent[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

Eigen::MatrixXd incidence_matrix(const Network& network) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(network.bus_count()),
                                              static_cast<Eigen::Index>(network.line_count()));
    for (std::size_t l = 0; l < network.line_count(); ++l) {
        K(static_cast<Eigen::Index>(network.line_from(l)), static_cast<Eigen::Index>(l)) = 1.0;
        K(static_cast<Eigen::Index>(network.line_to(l)), static_cast<Eigen::Index>(l)) = -1.0;
    }
    return K;
}

NetworkData Network::data() const {
    NetworkData d;
    d.buses = buses_;
    d.lines = lines_;
    d.generators = generators_;
    d.snapshots = snapshots_;
    d.base_mva = base_mva_;
    d.period_hours = total_weight();
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const auto row = demand_.row(static_cast<Eigen::Index>(i));
        if ((row.array() != 0.0).any()) d.demand[buses_[i].id] = std::vector<double>(row.begin(), row.end());
    }
    return d;
}

Network load_network(const std::filesystem::path& dir, const LoadOptions& options) {
    NetworkData data;
    data.base_mva = options.base_mva;
    data.period_hours = options.period_hours;

    auto buses = csv::read(dir / "buses.csv");
    {
        int c_id = buses.require_column("id");
        int c_name = buses.column("name");
        int c_x = buses.column("x");
        int c_y = buses.column("y");
        std::unordered_set<std::string> seen;
        for (std::size_t r = 0; r < buses.rows.size(); ++r) {
            Bus bus;
            bus.id = buses.rows[r][c_id];
            if (!is_valid_identifier(bus.id))
                throw DataError(row_context(buses, r) + ": invalid bus id '" + bus.id + "'");
            if (!seen.insert(bus.id).second)
                throw DataError(row_context(buses, r) + ": duplicate bus id '" + bus.id + "'");
            if (c_name >= 0) bus.name = buses.rows[r][c_name];
            if (c_x >= 0 && !buses.rows[r][c_x].empty()) bus.x = csv::parse_double(buses, r, c_x);
            if (c_y >= 0 && !buses.rows[r][c_y].empty()) bus.y = csv::parse_double(buses, r, c_y);
            data.buses.push_back(std::move(bus));
        }
    }
    std::unordered_set<std::string> bus_ids;
    for (const auto& b : data.buses) bus_ids.insert(b.id);
    auto check_bus = [&](const csv::Table& t, std::size_t r, const std::string& id) {
        if (!bus_ids.count(id))
            throw DataError(row_context(t, r) + ": unknown bus '" + id + "'");
    };

    auto lines = csv::read(dir / "lines.csv");
    {
        int c_id = lines.require_column("id");
        int c_from = lines.require_column("from_bus");
        int c_to = lines.require_column("to_bus");
        int c_x = lines.require_column("reactance_pu");
        int c_patl = lines.require_column("patl_mw");
        for (std::size_t r = 0; r < lines.rows.size(); ++r) {
            Line line;
            line.id = lines.rows[r][c_id];
            line.from_bus = lines.rows[r][c_from];
            line.to_bus = lines.rows[r][c_to];
            check_bus(lines, r, line.from_bus);
            check_bus(lines, r, line.to_bus);
            line.reactance_pu = csv::parse_double(lines, r, c_x);
            line.patl_mw = csv::parse_double(lines, r, c_patl);
            if (line.from_bus == line.to_bus)
                throw DataError(row_context(lines, r) + ": line connects a bus to itself");
            if (!(line.reactance_pu > 0.0))
                throw DataError(row_context(lines, r) + ": reactance must be positive");
            if (!(line.patl_mw > 0.0))
                throw DataError(row_context(lines, r) + ": PATL must be positive");
            data.lines.push_back(std::move(line));
        }
    }

    auto snaps = csv::read(dir / "snapshots.csv");
    {
        int c_s = snaps.require_column("snapshot");
        int c_w = snaps.require_column("weight_hours");
        for (std::size_t r = 0; r < snaps.rows.size(); ++r) {
            Snapshot s{snaps.rows[r][c_s], csv::parse_double(snaps, r, c_w)};
            if (!(s.weight_hours > 0.0))
                throw DataError(row_context(snaps, r) + ": weight must be positive");
            data.snapshots.push_back(std::move(s));
        }
    }
    const std::size_t T = data.snapshots.size();

    // Wide time series must list exactly the snapshots of snapshots.csv, in order.
    auto check_index = [&](const csv::Table& t) {
        if (t.header.empty() || t.header[0] != "snapshot")
            throw DataError(t.path.filename().string() + ": first column must be 'snapshot'");
        if (t.rows.size() != T)
            throw DataError(t.path.filename().string() + ": has " + std::to_string(t.rows.size()) +
                            " snapshot rows, snapshots.csv has " + std::to_string(T));
        for (std::size_t r = 0; r < T; ++r)
            if (t.rows[r][0] != data.snapshots[r].label)
                throw DataError(row_context(t, r) + ": snapshot '" + t.rows[r][0] +
                                "' does not match snapshots.csv entry '" +
                                data.snapshots[r].label + "'");
    };

    auto gens = csv::read(dir / "generators.csv");
    {
        int c_id = gens.require_column("id");
        int c_bus = gens.require_column("bus");
        int c_cap = gens.require_column("capital_cost_eur_per_mw_a");
        int c_mc = gens.require_column("marginal_cost_eur_per_mwh");
        int c_max = gens.require_column("max_capacity_mw");
        int c_em = gens.require_column("emission_factor_t_per_mwh");
        int c_eff = gens.require_column("efficiency");
        int c_ext = gens.require_column("extendable");
        for (std::size_t r = 0; r < gens.rows.size(); ++r) {
            Generator g;
            g.id = gens.rows[r][c_id];
            g.bus = gens.rows[r][c_bus];
            check_bus(gens, r, g.bus);
            g.capital_cost = csv::parse_double(gens, r, c_cap);
            g.marginal_cost = csv::parse_double(gens, r, c_mc);
            g.max_capacity_mw = csv::parse_double(gens, r, c_max);
            g.emission_factor = csv::parse_double(gens, r, c_em);
            g.efficiency = csv::parse_double(gens, r, c_eff);
            g.extendable = csv::parse_bool(gens, r, c_ext);
            if (!(g.efficiency > 0.0 && g.efficiency <= 1.0))
                throw DataError(row_context(gens, r) + ": efficiency must lie in (0, 1]");
            data.generators.push_back(std::move(g));
        }
    }

    auto avail = csv::read(dir / "availability.csv");
    check_index(avail);
    for (std::size_t c = 1; c < avail.header.size(); ++c) {
        auto it = std::find_if(data.generators.begin(), data.generators.end(),
                               [&](const Generator& g) { return g.id == avail.header[c]; });
        if (it == data.generators.end())
            throw DataError(avail.path.filename().string() + ": unknown generator '" +
                            avail.header[c] + "'");
        it->availability.resize(T);
        for (std::size_t r = 0; r < T; ++r) {
            double a = csv::parse_double(avail, r, c);
            if (!(a >= 0.0 && a <= 1.0))
                throw DataError(row_context(avail, r) + ": availability outside [0, 1]");
            it->availability[r] = a;
        }
    }

    auto loads = csv::read(dir / "loads.csv");
    check_index(loads);
    for (std::size_t c = 1; c < loads.header.size(); ++c) {
        if (!bus_ids.count(loads.header[c]))
            throw DataError(loads.path.filename().string() + ": unknown bus '" + loads.header[c] +
                            "'");
        std::vector<double> series(T);
        for (std::size_t r = 0; r < T; ++r) {
            series[r] = csv::parse_double(loads, r, c);
            if (series[r] < 0.0) throw DataError(row_context(loads, r) + ": negative demand");
        }
        data.demand[loads.header[c]] = std::move(series);
    }

    try {
        return Network(std::move(data));
    } catch (const DataError& e) {
        throw DataError(dir.filename().string() + ": " + e.what());
    }
}

void save_network(const Network& network, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto num = [](double v) { return csv::format_double(v); };
    auto open = [&](const char* name) {
        std::ofstream out(dir / name);
        if (!out) throw DataError(std::string("cannot write ") + (dir / name).string());
        return out;
    };

    {
        auto out = open("buses.csv");
        csv::write_row(out, {"id", "name", "x", "y"});
        for (const auto& b : network.buses())
            csv::write_row(out, {b.id, b.name, b.x ? num(*b.x) : "", b.y ? num(*b.y) : ""});
    }
    {
        auto out = open("lines.csv");
        csv::write_row(out, {"id", "from_bus", "to_bus", "reactance_pu", "patl_mw"});
        for (const auto& l : network.lines())
            csv::write_row(out, {l.id, l.from_bus, l.to_bus, num(l.reactance_pu), num(l.patl_mw)});
    }
    {
        auto out = open("generators.csv");
        csv::write_row(out, {"id", "bus", "capital_cost_eur_per_mw_a", "marginal_cost_eur_per_mwh",
                             "max_capacity_mw", "emission_factor_t_per_mwh", "efficiency",
                             "extendable"});
        for (const auto& g : network.generators())
            csv::write_row(out, {g.id, g.bus, num(g.capital_cost), num(g.marginal_cost),
                                 num(g.max_capacity_mw), num(g.emission_factor), num(g.efficiency),
                                 g.extendable ? "true" : "false"});
    }
    {
        auto out = open("snapshots.csv");
        csv::write_row(out, {"snapshot", "weight_hours"});
        for (const auto& s : network.snapshots()) csv::write_row(out, {s.label, num(s.weight_hours)});
    }
    {
        auto out = open("availability.csv");
        std::vector<std::string> header{"snapshot"};
        for (const auto& g : network.generators()) header.push_back(g.id);
        csv::write_row(out, header);
        for (std::size_t t = 0; t < network.snapshot_count(); ++t) {
            std::vector<std::string> row{network.snapshots()[t].label};
            for (std::size_t g = 0; g < network.generator_count(); ++g)
                row.push_back(num(network.availability(g, t)));
            csv::write_row(out, row);
        }
    }
    {
        auto out = open("loads.csv");
        std::vector<std::string> header{"snapshot"};
        for (const auto& b : network.buses()) header.push_back(b.id);
        csv::write_row(out, header);
        for (std::size_t t = 0; t < network.snapshot_count(); ++t) {
            std::vector<std::string> row{network.snapshots()[t].label};
            for (std::size_t i = 0; i < network.bus_count(); ++i) row.push_back(num(network.demand(i, t)));
            csv::write_row(out, row);
        }
    }
}

}  // namespace nbplan
