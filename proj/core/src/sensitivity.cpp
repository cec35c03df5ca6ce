#include "nbplan/sensitivity.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "csv.hpp"

namespace nbplan {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Laplacian B = K diag(b) K^T with row and column `slack` removed.
Eigen::MatrixXd reduced_laplacian(const Network& network, std::size_t slack,
                                  std::optional<std::size_t> outage) {
    const std::size_t n = network.bus_count();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(idx(n), idx(n));
    for (std::size_t l = 0; l < network.line_count(); ++l) {
        if (outage && *outage == l) continue;
        const double b = network.susceptance_mw(l);
        const Index i = idx(network.line_from(l));
        const Index j = idx(network.line_to(l));
        B(i, i) += b;
        B(j, j) += b;
        B(i, j) -= b;
        B(j, i) -= b;
    }
    Eigen::MatrixXd reduced(idx(n - 1), idx(n - 1));
    for (std::size_t r = 0, rr = 0; r < n; ++r) {
        if (r == slack) continue;
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
            if (c == slack) continue;
            reduced(idx(rr), idx(cc)) = B(idx(r), idx(c));
            ++cc;
        }
        ++rr;
    }
    return reduced;
}

}  // namespace

double SensitivitySet::post_outage_ptdf(std::size_t line, std::size_t outage, std::size_t bus) const {
    return ptdf_at(line, bus) + lodf_at(line, outage) * ptdf_at(outage, bus);
}

Eigen::MatrixXd compute_ptdf(const Network& network, std::size_t slack) {
    const std::size_t n = network.bus_count();
    const std::size_t L = network.line_count();
    if (slack >= n) throw std::out_of_range("slack bus index out of range");
    Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(idx(L), idx(n));
    if (n == 1) return ptdf;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced_laplacian(network, slack, std::nullopt));
    if (!lu.isInvertible()) throw DataError("reduced Laplacian is singular (disconnected network)");
    const Eigen::MatrixXd reduced_inverse = lu.inverse();

    // Angle sensitivity X: bus angles per unit injection, zero row/column at slack.
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(idx(n), idx(n));
    for (std::size_t r = 0, rr = 0; r < n; ++r) {
        if (r == slack) continue;
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
            if (c == slack) continue;
            X(idx(r), idx(c)) = reduced_inverse(idx(rr), idx(cc));
            ++cc;
        }
        ++rr;
    }
    for (std::size_t l = 0; l < L; ++l) {
        const double b = network.susceptance_mw(l);
        ptdf.row(idx(l)) = b * (X.row(idx(network.line_from(l))) - X.row(idx(network.line_to(l))));
    }
    return ptdf;
}

LodfResult compute_lodf(const Eigen::MatrixXd& ptdf, const Eigen::MatrixXd& incidence,
                        double bridge_tolerance) {
    const Eigen::MatrixXd transfer = ptdf * incidence;  // lines x lines
    const Index L = transfer.rows();
    LodfResult result;
    result.lodf = Eigen::MatrixXd::Zero(L, L);
    result.bridge.assign(static_cast<std::size_t>(L), false);
    for (Index k = 0; k < L; ++k) {
        const double denominator = 1.0 - transfer(k, k);
        if (std::abs(denominator) < bridge_tolerance) {
            result.bridge[static_cast<std::size_t>(k)] = true;
            result.lodf.col(k).setConstant(std::numeric_limits<double>::quiet_NaN());
            result.lodf(k, k) = -1.0;
            continue;
        }
        for (Index l = 0; l < L; ++l) result.lodf(l, k) = transfer(l, k) / denominator;
        result.lodf(k, k) = -1.0;
    }
    return result;
}

SensitivitySet compute_sensitivities(const Network& network, std::size_t slack) {
    SensitivitySet set;
    set.slack = slack;
    set.ptdf = compute_ptdf(network, slack);
    auto lodf = compute_lodf(set.ptdf, incidence_matrix(network));
    set.lodf = std::move(lodf.lodf);
    set.bridge = std::move(lodf.bridge);
    return set;
}

std::vector<double> dc_angles(const Network& network, std::span<const double> injections,
                              std::size_t slack, std::optional<std::size_t> outage) {
    const std::size_t n = network.bus_count();
    if (injections.size() != n) throw std::invalid_argument("injection vector has wrong length");
    const double imbalance = std::accumulate(injections.begin(), injections.end(), 0.0);
    if (std::abs(imbalance) > 1e-6)
        throw std::invalid_argument("injections are unbalanced by " + std::to_string(imbalance) +
                                    " MW");
    if (outage) {
        std::vector<bool> removed(network.line_count(), false);
        removed.at(*outage) = true;
        if (!is_connected(network, removed))
            throw BridgeContingencyError("outage of line '" + network.lines()[*outage].id +
                                         "' disconnects the network");
    }
    std::vector<double> theta(n, 0.0);
    if (n == 1) return theta;

    Eigen::VectorXd rhs(idx(n - 1));
    for (std::size_t i = 0, r = 0; i < n; ++i)
        if (i != slack) rhs(idx(r++)) = injections[i];
    Eigen::VectorXd solved = reduced_laplacian(network, slack, outage).ldlt().solve(rhs);
    for (std::size_t i = 0, r = 0; i < n; ++i)
        if (i != slack) theta[i] = solved(idx(r++));
    return theta;
}

std::vector<double> dc_flow(const Network& network, std::span<const double> injections,
                            std::optional<std::size_t> outage) {
    const auto theta = dc_angles(network, injections, 0, outage);
    std::vector<double> flows(network.line_count(), 0.0);
    for (std::size_t l = 0; l < network.line_count(); ++l) {
        if (outage && *outage == l) continue;
        flows[l] = network.susceptance_mw(l) * (theta[network.line_from(l)] - theta[network.line_to(l)]);
    }
    return flows;
}

std::vector<double> post_outage_flow(std::span<const double> base_flows,
                                     const SensitivitySet& sensitivities, std::size_t outage) {
    if (outage >= base_flows.size()) throw std::out_of_range("outage line index out of range");
    if (sensitivities.is_bridge(outage))
        throw BridgeContingencyError("line " + std::to_string(outage) +
                                     " is a bridge; its outage islands the network");
    std::vector<double> flows(base_flows.size(), 0.0);
    for (std::size_t l = 0; l < base_flows.size(); ++l) {
        if (l == outage) continue;
        flows[l] = base_flows[l] + sensitivities.lodf_at(l, outage) * base_flows[outage];
    }
    return flows;
}

std::vector<bool> find_bridges(const Network& network) {
    const std::size_t n = network.bus_count();
    const std::size_t L = network.line_count();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacent(n);  // (bus, line)
    for (std::size_t l = 0; l < L; ++l) {
        adjacent[network.line_from(l)].emplace_back(network.line_to(l), l);
        adjacent[network.line_to(l)].emplace_back(network.line_from(l), l);
    }

    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> order(n, unvisited), low(n, 0);
    std::vector<bool> bridge(L, false);
    std::size_t counter = 0;

    struct Frame {
        std::size_t bus;
        std::size_t via_line;
        std::size_t next = 0;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (order[root] != unvisited) continue;
        std::vector<Frame> stack{{root, unvisited}};
        order[root] = low[root] = counter++;
        while (!stack.empty()) {
            Frame& top = stack.back();
            if (top.next < adjacent[top.bus].size()) {
                auto [v, line] = adjacent[top.bus][top.next++];
                if (line == top.via_line) continue;  // parallel lines have distinct ids
                if (order[v] == unvisited) {
                    order[v] = low[v] = counter++;
                    stack.push_back({v, line});
                } else {
                    low[top.bus] = std::min(low[top.bus], order[v]);
                }
            } else {
                Frame done = top;
                stack.pop_back();
                if (!stack.empty()) {
                    std::size_t parent = stack.back().bus;
                    low[parent] = std::min(low[parent], low[done.bus]);
                    if (low[done.bus] > order[parent]) bridge[done.via_line] = true;
                }
            }
        }
    }
    return bridge;
}

void write_sensitivities_csv(const Network& network, const SensitivitySet& sensitivities,
                             const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto cell = [](double v) { return std::isnan(v) ? std::string("nan") : csv::format_double(v); };
    {
        std::ofstream out(dir / "ptdf.csv");
        std::vector<std::string> header{"line"};
        for (const auto& b : network.buses()) header.push_back(b.id);
        csv::write_row(out, header);
        for (std::size_t l = 0; l < network.line_count(); ++l) {
            std::vector<std::string> row{network.lines()[l].id};
            for (std::size_t i = 0; i < network.bus_count(); ++i)
                row.push_back(cell(sensitivities.ptdf_at(l, i)));
            csv::write_row(out, row);
        }
    }
    {
        std::ofstream out(dir / "lodf.csv");
        std::vector<std::string> header{"line"};
        for (const auto& l : network.lines()) header.push_back(l.id);
        csv::write_row(out, header);
        for (std::size_t l = 0; l < network.line_count(); ++l) {
            std::vector<std::string> row{network.lines()[l].id};
            for (std::size_t k = 0; k < network.line_count(); ++k)
                row.push_back(cell(sensitivities.lodf_at(l, k)));
            csv::write_row(out, row);
        }
    }
}

}  // namespace nbplan
