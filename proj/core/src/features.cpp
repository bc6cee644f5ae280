#include "eocs/features.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

#include "eocs/binary_io.hpp"
#include "eocs/errors.hpp"
#include "eocs/network.hpp"

namespace eocs {

const Eigen::MatrixXd& FeatureSet::channel(std::size_t c) const {
    switch (c) {
        case 0: return p;
        case 1: return t;
        case 2: return dz;
        case 3: return d;
        default: throw ShapeMismatch("feature channel index out of range");
    }
}

Eigen::MatrixXd& FeatureSet::channel(std::size_t c) {
    return const_cast<Eigen::MatrixXd&>(std::as_const(*this).channel(c));
}

double component_code(BusKind kind) {
    switch (kind) {
        case BusKind::gen_terminal: return 1.0;
        case BusKind::renewable_terminal: return 0.75;
        case BusKind::xfmr_high: return 0.5;
        case BusKind::xfmr_low: return 0.25;
        case BusKind::plain: return 0.0;
    }
    return 0.0;
}

Eigen::MatrixXd component_matrix(const GridModel& grid, const OperatingCondition& tau0) {
    check_condition(grid, tau0);
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (const auto& b : grid.buses()) p(b.id, b.id) = component_code(b.kind);
    for (const auto& br : grid.branches()) {
        if (!tau0.in_service(static_cast<std::size_t>(br.id))) continue;
        p(br.from_bus, br.to_bus) = std::abs(br.z);
        p(br.to_bus, br.from_bus) = std::abs(br.z);
    }
    return p;
}

Eigen::MatrixXd topology_matrix(const GridModel& grid, const OperatingCondition& tau0) {
    check_condition(grid, tau0);
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n);
    for (const auto& br : grid.branches()) {
        if (!tau0.in_service(static_cast<std::size_t>(br.id))) continue;
        t(br.from_bus, br.to_bus) = 1.0;
        t(br.to_bus, br.from_bus) = 1.0;
    }
    return t;
}

Eigen::MatrixXd electrical_distance_matrix(const GridModel& grid, const OperatingCondition& tau0) {
    Eigen::MatrixXd dz = impedance_matrix(build_ybus(grid, tau0)).matrix.cwiseAbs();
    dz.diagonal().setZero();
    return dz;
}

Eigen::MatrixXd all_pairs_hops(const std::vector<std::vector<int>>& adj) {
    const auto n = static_cast<Eigen::Index>(adj.size());
    constexpr int kInf = std::numeric_limits<int>::max();
    Eigen::MatrixXd out(n, n);
    std::vector<int> dist(adj.size());
    using Entry = std::pair<int, int>;  // (distance, node)
    for (Eigen::Index s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        dist[static_cast<std::size_t>(s)] = 0;
        heap.emplace(0, static_cast<int>(s));
        while (!heap.empty()) {
            const auto [dv, v] = heap.top();
            heap.pop();
            if (dv > dist[static_cast<std::size_t>(v)]) continue;
            for (int u : adj[static_cast<std::size_t>(v)]) {
                const int alt = dv + 1;
                if (alt < dist[static_cast<std::size_t>(u)]) {
                    dist[static_cast<std::size_t>(u)] = alt;
                    heap.emplace(alt, u);
                }
            }
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (dist[static_cast<std::size_t>(j)] == kInf) throw Disconnected("graph distance undefined: disconnected");
            out(s, j) = dist[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

Eigen::MatrixXd graph_distance_matrix(const GridModel& grid, const OperatingCondition& tau0) {
    check_condition(grid, tau0);
    return all_pairs_hops(adjacency(grid, tau0));
}

FeatureSet encode_raw(const GridModel& grid, const OperatingCondition& tau0, int protected_line) {
    if (protected_line < 0 || protected_line >= static_cast<int>(grid.branch_count())) {
        throw ValidationError("protected line out of range");
    }
    const auto n = static_cast<Eigen::Index>(grid.bus_count());
    const Branch& line = grid.branches()[static_cast<std::size_t>(protected_line)];
    Eigen::VectorXd indicator = Eigen::VectorXd::Zero(n);
    indicator(line.from_bus) = 1.0;
    indicator(line.to_bus) = -1.0;

    auto with_indicator = [&](const Eigen::MatrixXd& m) {
        Eigen::MatrixXd out(n, n + 1);
        out.leftCols(n) = m;
        out.col(n) = indicator;
        return out;
    };
    FeatureSet fs;
    fs.p = with_indicator(component_matrix(grid, tau0));
    fs.t = with_indicator(topology_matrix(grid, tau0));
    fs.dz = with_indicator(electrical_distance_matrix(grid, tau0));
    fs.d = with_indicator(graph_distance_matrix(grid, tau0));
    return fs;
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureSet> training) {
    FeatureScaler s;
    if (training.empty()) return s;
    for (std::size_t c = 0; c < FeatureSet::channel_count; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& fs : training) {
            const auto& m = fs.channel(c);
            const Eigen::Index n = m.rows();
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (i == j) continue;
                    lo = std::min(lo, m(i, j));
                    hi = std::max(hi, m(i, j));
                }
            }
        }
        if (!(hi >= lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        s.lo[c] = lo;
        s.hi[c] = hi;
    }
    return s;
}

namespace {

template <class Map>
void map_off_diagonal(FeatureSet& fs, Map&& map) {
    for (std::size_t c = 0; c < FeatureSet::channel_count; ++c) {
        auto& m = fs.channel(c);
        const Eigen::Index n = m.rows();
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (i != j) m(i, j) = map(c, m(i, j));
            }
        }
    }
}

}  // namespace

void FeatureScaler::apply(FeatureSet& fs) const {
    map_off_diagonal(fs, [this](std::size_t c, double x) {
        const double span = hi[c] - lo[c];
        return span > 0.0 ? (x - lo[c]) / span : x - lo[c];
    });
}

void FeatureScaler::invert(FeatureSet& fs) const {
    map_off_diagonal(fs, [this](std::size_t c, double x) {
        const double span = hi[c] - lo[c];
        return span > 0.0 ? x * span + lo[c] : x + lo[c];
    });
}

FeatureSet encode(const GridModel& grid, const OperatingCondition& tau0, int protected_line,
                  const FeatureScaler& scaler) {
    FeatureSet fs = encode_raw(grid, tau0, protected_line);
    scaler.apply(fs);
    return fs;
}

void write_feature_set(std::ostream& out, const FeatureSet& fs) {
    binary::write<std::uint32_t>(out, FeatureSet::channel_count);
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(fs.p.rows()));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(fs.p.cols()));
    for (std::size_t c = 0; c < FeatureSet::channel_count; ++c) {
        const auto& m = fs.channel(c);
        if (m.rows() != fs.p.rows() || m.cols() != fs.p.cols()) throw ShapeMismatch("feature channels differ in shape");
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) binary::write<double>(out, m(i, j));
        }
    }
}

FeatureSet read_feature_set(std::istream& in) {
    const auto channels = binary::read<std::uint32_t>(in);
    if (channels != FeatureSet::channel_count) throw ShapeMismatch("feature record has wrong channel count");
    const auto rows = binary::read<std::uint32_t>(in);
    const auto cols = binary::read<std::uint32_t>(in);
    FeatureSet fs;
    for (std::size_t c = 0; c < FeatureSet::channel_count; ++c) {
        auto& m = fs.channel(c);
        m.resize(rows, cols);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = binary::read<double>(in);
        }
    }
    return fs;
}

}  // namespace eocs
