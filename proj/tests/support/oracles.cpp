#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "eocs/config.hpp"
#include "eocs/errors.hpp"

namespace eocs::testing {

GridModel ieee39() { return build_grid(load_config(EOCS_CONFIG_DIR "/ieee39.toml")); }
GridModel ieee118() { return build_grid(load_config(EOCS_CONFIG_DIR "/ieee118.toml")); }
GridModel ieee39_sync_only() { return load_case(EOCS_CASE_DIR "/case39.json"); }

GridModel make_grid(int n, const std::vector<Edge>& edges, const std::vector<SyncGenerator>& gens,
                    const std::vector<RenewableUnit>& units, const std::string& name) {
    std::vector<Bus> buses;
    for (int i = 0; i < n; ++i) buses.push_back({i, BusKind::plain, 1.0});
    for (const auto& g : gens) buses[static_cast<std::size_t>(g.bus)].kind = BusKind::gen_terminal;
    for (const auto& u : units) buses[static_cast<std::size_t>(u.bus)].kind = BusKind::renewable_terminal;
    std::vector<Branch> branches;
    for (const auto& e : edges) {
        Branch b;
        b.id = static_cast<int>(branches.size());
        b.from_bus = e.from;
        b.to_bus = e.to;
        b.z = e.z;
        branches.push_back(b);
    }
    return GridModel(name, 100.0, buses, branches, gens, units);
}

RenewableUnit fips_unit(int bus, double rated, double m, double headroom) {
    RenewableUnit u;
    u.bus = bus;
    u.kind = SourceKind::fips;
    u.rated_current = rated;
    u.m = m;
    u.i_lim = headroom * rated;
    u.p0 = m * rated;
    return u;
}

GridModel two_bus() {
    return make_grid(2, {{0, 1, {0.01, 0.1}}}, {{0, 0.2, 1.0, 0.0}}, {}, "two-bus");
}

GridModel four_bus() {
    return make_grid(4,
                     {{0, 2, {0.01, 0.10}},
                      {1, 2, {0.01, 0.12}},
                      {2, 3, {0.01, 0.10}},
                      {0, 1, {0.01, 0.15}},
                      {1, 3, {0.02, 0.30}}},
                     {{0, 0.2, 1.0, 0.0}, {1, 0.25, 1.0, 0.0}}, {fips_unit(2, 1.0, 1.0, 1.2)}, "four-bus");
}

GridModel six_bus() {
    return make_grid(6,
                     {{0, 1, {0.010, 0.080}},
                      {1, 2, {0.012, 0.110}},
                      {2, 3, {0.008, 0.095}},
                      {3, 4, {0.015, 0.130}},
                      {4, 5, {0.011, 0.090}},
                      {5, 0, {0.009, 0.140}},
                      {1, 4, {0.020, 0.170}},
                      {0, 2, {0.014, 0.125}}},
                     {{0, 0.20, 1.0, 0.0}, {3, 0.25, 1.0, 0.0}}, {fips_unit(5, 0.8, 1.0, 1.2)}, "six-bus");
}

GridModel five_line_mesh() {
    // Transformer star from bus 0 keeps every bus attached whatever lines
    // are out; the five lines form K4 minus one edge on buses 1..4.
    std::vector<Bus> buses;
    for (int i = 0; i < 5; ++i) buses.push_back({i, i == 0 ? BusKind::gen_terminal : BusKind::plain, 1.0});
    std::vector<Branch> branches;
    auto add = [&](int a, int b, BranchKind kind) {
        Branch br;
        br.id = static_cast<int>(branches.size());
        br.from_bus = a;
        br.to_bus = b;
        br.z = {0.01, 0.1 + 0.01 * br.id};
        br.kind = kind;
        br.switchable = kind == BranchKind::line;
        branches.push_back(br);
    };
    for (int b = 1; b <= 4; ++b) add(0, b, BranchKind::transformer);
    add(1, 2, BranchKind::line);
    add(2, 3, BranchKind::line);
    add(3, 4, BranchKind::line);
    add(4, 1, BranchKind::line);
    add(1, 3, BranchKind::line);
    return GridModel("mesh5", 100.0, buses, branches, {{0, 0.2, 1.0, 0.0}}, {});
}

GridModel path_grid(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, {0.01, 0.1}});
    return make_grid(n, edges, {{0, 0.2, 1.0, 0.0}}, {}, "path");
}

FarOutageCase far_outage_case() {
    // Buses: 0 g, 1-4 e1..e4, 5 A, 6 B, 7 y, 8-10 c3..c1, 11-13 d3..d1.
    const Complex z{0.005, 0.05};
    std::vector<Edge> edges{
        {0, 1, z}, {1, 2, z}, {2, 3, z}, {3, 4, z}, {4, 5, z},  // route 1 to A
        {5, 6, z},                                               // protected A -> B
        {0, 7, z},                                               // g - y, the far line
        {7, 8, z}, {8, 9, z}, {9, 10, z}, {10, 6, z},            // y - c3 - c2 - c1 - B
        {7, 11, z}, {11, 12, z}, {12, 13, z}, {13, 6, z},        // y - d3 - d2 - d1 - B
    };
    FarOutageCase c{make_grid(14, edges, {{0, 0.1, 1.0, 0.0}}, {}, "far-outage"), 5, 6};
    return c;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

bool union_find_connected(const GridModel& grid, const OperatingCondition& tau) {
    UnionFind uf(grid.bus_count());
    for (const auto& br : grid.branches()) {
        if (tau.in_service(static_cast<std::size_t>(br.id))) uf.unite(br.from_bus, br.to_bus);
    }
    const int root = uf.find(0);
    for (std::size_t i = 1; i < grid.bus_count(); ++i) {
        if (uf.find(static_cast<int>(i)) != root) return false;
    }
    return true;
}

Eigen::MatrixXcd dense_ybus(const GridModel& grid, const OperatingCondition& tau) {
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : grid.branches()) {
        if (!tau.in_service(static_cast<std::size_t>(br.id))) continue;
        const Complex a = 1.0 / br.z;
        y(br.from_bus, br.from_bus) += a;
        y(br.to_bus, br.to_bus) += a;
        y(br.from_bus, br.to_bus) -= a;
        y(br.to_bus, br.from_bus) -= a;
    }
    for (const auto& g : grid.sync_gens()) y(g.bus, g.bus) += 1.0 / Complex(0.0, g.x_d2);
    return y;
}

Eigen::VectorXcd gauss_solve(Eigen::MatrixXcd a, Eigen::VectorXcd b) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        }
        if (std::abs(a(pivot, col)) == 0.0) throw std::runtime_error("gauss_solve: singular");
        a.row(col).swap(a.row(pivot));
        std::swap(b(col), b(pivot));
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const Complex f = a(r, col) / a(col, col);
            if (f == Complex(0.0, 0.0)) continue;
            for (Eigen::Index c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b(r) -= f * b(col);
        }
    }
    Eigen::VectorXcd x(n);
    for (Eigen::Index r = n - 1; r >= 0; --r) {
        Complex s = b(r);
        for (Eigen::Index c = r + 1; c < n; ++c) s -= a(r, c) * x(c);
        x(r) = s / a(r, r);
    }
    return x;
}

namespace {

Eigen::VectorXcd sync_norton(const GridModel& grid) {
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.bus_count()));
    for (const auto& g : grid.sync_gens()) rhs(g.bus) += g.emf / Complex(0.0, g.x_d2);
    return rhs;
}

}  // namespace

Complex linear_fault_current(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                             double big_m) {
    const Branch& line = grid.branches().at(static_cast<std::size_t>(protected_line));
    Eigen::MatrixXcd y = dense_ybus(grid, tau);
    y(line.to_bus, line.to_bus) += big_m;
    const Eigen::VectorXcd v = gauss_solve(y, sync_norton(grid));
    return (v(line.from_bus) - v(line.to_bus)) / line.z;
}

namespace {

// Controlled LVRT law of a FIPS unit in its own voltage frame, written out
// from the piecewise definition.
Complex fips_law(double u, const RenewableUnit& unit, const LvrtCurveParams& p) {
    if (u >= p.u_hold) return {unit.m * unit.rated_current, 0.0};
    if (u < p.u_cut) return {0.0, -unit.i_lim};
    double iq = p.k_q * (p.u_hold - u) * unit.rated_current;
    if (iq > unit.i_lim) iq = unit.i_lim;
    double id = std::sqrt(std::max(unit.i_lim * unit.i_lim - iq * iq, 0.0));
    if (unit.m * unit.rated_current < id) id = unit.m * unit.rated_current;
    return {id, -iq};
}

}  // namespace

ScanResult grid_scan_fault(const GridModel& grid, const OperatingCondition& tau, int protected_line,
                           const LvrtCurveParams& lvrt, double step, double big_m) {
    if (grid.renewables().size() != 1 || grid.renewables()[0].kind != SourceKind::fips) {
        throw std::invalid_argument("grid_scan_fault handles exactly one FIPS unit");
    }
    const RenewableUnit& unit = grid.renewables()[0];
    const Branch& line = grid.branches().at(static_cast<std::size_t>(protected_line));
    Eigen::MatrixXcd y = dense_ybus(grid, tau);
    y(line.to_bus, line.to_bus) += big_m;
    const Eigen::VectorXcd v0 = gauss_solve(y, sync_norton(grid));
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(y.rows());
    e(unit.bus) = 1.0;
    const Eigen::VectorXcd zcol = gauss_solve(y, e);
    const Complex zuu = zcol(unit.bus);
    const double target = std::abs(v0(unit.bus));

    auto g = [&](double u) { return std::abs(u - zuu * fips_law(u, unit, lvrt)) - target; };
    ScanResult out;
    double root = 0.0;
    double prev = g(0.0);
    for (int i = 1; i * step <= 1.5; ++i) {
        const double u0 = (i - 1) * step;
        const double u1 = i * step;
        const double cur = g(u1);
        if ((prev <= 0.0) != (cur <= 0.0)) {
            ++out.roots;
            root = u0 + step * prev / (prev - cur);
        }
        prev = cur;
    }
    if (out.roots != 1) return out;
    const Complex c = fips_law(root, unit, lvrt);
    const double theta = std::arg(v0(unit.bus)) - std::arg(root - zuu * c);
    const Complex x = c * std::polar(1.0, theta);
    const Eigen::VectorXcd v = v0 + zcol * x;
    out.unit_voltage = root;
    out.line_current = (v(line.from_bus) - v(line.to_bus)) / line.z;
    return out;
}

std::vector<int> bfs_within(int n, const std::vector<std::pair<int, int>>& edges, int source, int levels) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    seen[static_cast<std::size_t>(source)] = 1;
    std::vector<int> frontier{source};
    for (int level = 0; level < levels; ++level) {
        std::vector<int> next;
        for (int v : frontier) {
            for (const auto& [a, b] : edges) {
                int other = -1;
                if (a == v) other = b;
                if (b == v) other = a;
                if (other >= 0 && !seen[static_cast<std::size_t>(other)]) {
                    seen[static_cast<std::size_t>(other)] = 1;
                    next.push_back(other);
                }
            }
        }
        frontier = std::move(next);
    }
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        if (seen[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
}

Eigen::MatrixXd floyd_warshall(const std::vector<std::vector<int>>& adj) {
    const auto n = static_cast<Eigen::Index>(adj.size());
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, inf);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (int j : adj[static_cast<std::size_t>(i)]) {
            if (j != i) d(i, j) = 1.0;
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (d(i, k) + d(k, j) < d(i, j)) d(i, j) = d(i, k) + d(k, j);
            }
        }
    }
    return d.unaryExpr([inf](double x) { return x == inf ? -1.0 : x; });
}

std::vector<std::vector<int>> random_connected_graph(int n, int extra_edges, std::mt19937_64& rng) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    auto link = [&](int a, int b) {
        auto& row = adj[static_cast<std::size_t>(a)];
        if (a == b || std::find(row.begin(), row.end(), b) != row.end()) return;
        row.push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    };
    for (int v = 1; v < n; ++v) link(v, std::uniform_int_distribution<int>(0, v - 1)(rng));
    std::uniform_int_distribution<int> any(0, n - 1);
    for (int e = 0; e < extra_edges; ++e) link(any(rng), any(rng));
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
}

OperatingCondition random_condition(const GridModel& grid, int outages, std::mt19937_64& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        OperatingCondition tau = grid.base_condition();
        std::vector<int> lines = grid.lines();
        std::shuffle(lines.begin(), lines.end(), rng);
        for (int i = 0; i < outages && i < static_cast<int>(lines.size()); ++i) {
            tau.set(static_cast<std::size_t>(lines[static_cast<std::size_t>(i)]), false);
        }
        if (union_find_connected(grid, tau)) return tau;
    }
    throw std::runtime_error("random_condition: no connected draw");
}

int random_line(const GridModel& grid, const OperatingCondition& tau, std::mt19937_64& rng) {
    std::vector<int> live;
    for (int b : grid.lines()) {
        if (tau.in_service(static_cast<std::size_t>(b))) live.push_back(b);
    }
    return live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
}

std::optional<BruteForceResult> brute_force_eoc(const GridModel& grid, const OperatingCondition& tau0,
                                                int protected_line, int k, const FaultSolverOptions& fault) {
    std::vector<int> pool;
    for (const auto& br : grid.branches()) {
        if (br.switchable && br.id != protected_line && tau0.in_service(static_cast<std::size_t>(br.id))) {
            pool.push_back(br.id);
        }
    }
    if (pool.size() > 30) throw std::invalid_argument("brute_force_eoc: pool too large");
    bool found = false;
    double best_i = 0.0;
    std::vector<int> best_out;
    for (std::uint32_t mask = 0; mask < (1u << pool.size()); ++mask) {
        if (std::popcount(mask) > k) continue;
        OperatingCondition tau = tau0;
        std::vector<int> out;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (mask & (1u << i)) {
                tau.set(static_cast<std::size_t>(pool[i]), false);
                out.push_back(pool[i]);
            }
        }
        if (!union_find_connected(grid, tau)) continue;
        double cur = 0.0;
        try {
            cur = std::abs(solve_fault(grid, tau, protected_line, fault).line_current);
        } catch (const NotConverged&) {
            continue;
        }
        bool better = !found;
        if (found) {
            const double scale = 1e-12 * std::max(cur, best_i);
            if (cur > best_i + scale) {
                better = true;
            } else if (cur >= best_i - scale) {
                better = out.size() < best_out.size() || (out.size() == best_out.size() && out < best_out);
            }
        }
        if (better) {
            found = true;
            best_i = cur;
            best_out = out;
        }
    }
    if (!found) return std::nullopt;
    BruteForceResult r;
    r.label.assign(grid.line_count(), 0);
    for (int b : best_out) r.label[static_cast<std::size_t>(grid.line_index(b))] = 1;
    r.i_max = best_i;
    return r;
}

Eigen::MatrixXd naive_sage(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                           const std::vector<std::vector<int>>& adjacency, nn::Aggregator agg) {
    const Eigen::Index nodes = h.rows();
    Eigen::MatrixXd out(nodes, w.rows());
    for (Eigen::Index v = 0; v < nodes; ++v) {
        const auto& nb = adjacency[static_cast<std::size_t>(v)];
        std::vector<double> a(static_cast<std::size_t>(h.cols()), 0.0);
        for (Eigen::Index f = 0; f < h.cols(); ++f) {
            double acc = agg == nn::Aggregator::max ? -std::numeric_limits<double>::infinity() : 0.0;
            for (int u : nb) {
                const double x = h(u, f);
                if (agg == nn::Aggregator::max) {
                    if (x > acc) acc = x;
                } else {
                    acc += x;
                }
            }
            if (agg == nn::Aggregator::mean) acc /= static_cast<double>(nb.size());
            a[static_cast<std::size_t>(f)] = acc;
        }
        for (Eigen::Index o = 0; o < w.rows(); ++o) {
            double s = 0.0;
            for (Eigen::Index f = 0; f < h.cols(); ++f) s += w(o, f) * a[static_cast<std::size_t>(f)];
            out(v, o) = s > 0.0 ? s : 0.0;
        }
    }
    return out;
}

namespace {

// -[y log s(z) + (1-y) log(1-s(z))] written as log(1+e^z) - y z, so saturated
// outputs keep their slope.
double logit_bce(const Eigen::VectorXd& z, const std::vector<std::uint8_t>& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double softplus = z(i) > 0.0 ? z(i) + std::log1p(std::exp(-z(i))) : std::log1p(std::exp(z(i)));
        total += softplus - (labels[static_cast<std::size_t>(i)] ? z(i) : 0.0);
    }
    return total / static_cast<double>(z.size());
}

}  // namespace

GradientCheck check_gradients(const nn::PgnnModel& model, const FeatureSet& fs, const std::vector<std::uint8_t>& label,
                              double h, double floor) {
    const nn::Gradients analytic = nn::backward(model, fs, label);
    nn::PgnnModel probe = model;
    auto params = probe.parameters();
    GradientCheck out;
    for (std::size_t b = 0; b < params.size(); ++b) {
        for (Eigen::Index i = 0; i < params[b]->size(); ++i) {
            double& w = params[b]->data()[i];
            const double saved = w;
            w = saved + h;
            const double up = logit_bce(nn::pgnn_logits(probe, fs), label);
            w = saved - h;
            const double down = logit_bce(nn::pgnn_logits(probe, fs), label);
            w = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[b].data()[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            if (rel > out.max_rel_error) {
                out.max_rel_error = rel;
                out.worst_analytic = a;
                out.worst_numeric = numeric;
            }
            ++out.weights;
        }
    }
    return out;
}

double scalar_bce(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double v = scores[i];
        if (v < 1e-7) v = 1e-7;
        if (v > 1.0 - 1e-7) v = 1.0 - 1e-7;
        total -= labels[i] ? std::log(v) : std::log(1.0 - v);
    }
    return total / static_cast<double>(scores.size());
}

}  // namespace eocs::testing
