#include "eocs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eocs/errors.hpp"

namespace eocs {

using nlohmann::json;

std::vector<int> OperatingCondition::outages() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < flags_.size(); ++i) {
        if (flags_[i] == 0) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::size_t OperatingCondition::outage_count() const {
    return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{0}));
}

GridModel::GridModel(std::string name, double base_mva, std::vector<Bus> buses,
                     std::vector<Branch> branches, std::vector<SyncGenerator> sync_gens,
                     std::vector<RenewableUnit> renewables)
    : name_(std::move(name)),
      base_mva_(base_mva),
      buses_(std::move(buses)),
      branches_(std::move(branches)),
      sync_gens_(std::move(sync_gens)),
      renewables_(std::move(renewables)) {
    if (!(base_mva_ > 0.0)) throw ValidationError("base_mva must be positive");
    if (buses_.empty()) throw ValidationError("grid has no buses");
    const int n = static_cast<int>(buses_.size());
    for (int i = 0; i < n; ++i) {
        if (buses_[i].id != i) {
            throw ValidationError("bus ids must be contiguous 0..N-1 (bus at position " +
                                  std::to_string(i) + " has id " + std::to_string(buses_[i].id) + ")");
        }
        if (!(buses_[i].base_kv > 0.0)) {
            throw ValidationError("bus " + std::to_string(i) + " has non-positive base_kV");
        }
    }
    auto check_bus = [n](int bus, const std::string& what) {
        if (bus < 0 || bus >= n) throw ValidationError(what + " references unknown bus " + std::to_string(bus));
    };
    line_index_.assign(branches_.size(), -1);
    std::set<std::pair<int, int>> pairs;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        const Branch& br = branches_[b];
        const std::string what = "branch " + std::to_string(b);
        if (br.id != static_cast<int>(b)) throw ValidationError(what + " has id out of sequence");
        check_bus(br.from_bus, what);
        check_bus(br.to_bus, what);
        if (br.from_bus == br.to_bus) throw ValidationError(what + " is a self-loop");
        if (!(std::abs(br.z) > 0.0) || !std::isfinite(br.z.real()) || !std::isfinite(br.z.imag())) {
            throw ValidationError(what + " has non-positive impedance");
        }
        if (br.kind == BranchKind::transformer && br.switchable) {
            throw ValidationError(what + ": transformers are not outage candidates");
        }
        if (!pairs.emplace(std::min(br.from_bus, br.to_bus), std::max(br.from_bus, br.to_bus)).second) {
            throw ValidationError(what + " is parallel to another branch; merge circuits first");
        }
        if (br.switchable) {
            line_index_[b] = static_cast<int>(lines_.size());
            lines_.push_back(static_cast<int>(b));
        }
    }
    if (sync_gens_.empty()) throw ValidationError("grid needs at least one synchronous source");
    std::set<int> source_buses;
    for (const auto& g : sync_gens_) {
        check_bus(g.bus, "sync generator");
        if (!(g.x_d2 > 0.0)) throw ValidationError("sync generator x_d2 must be positive");
        if (!source_buses.insert(g.bus).second) throw ValidationError("two sources on bus " + std::to_string(g.bus));
    }
    for (const auto& r : renewables_) {
        check_bus(r.bus, "renewable unit");
        if (r.m < 0.0 || r.m > 1.0) throw ValidationError("renewable m must lie in [0,1]");
        if (r.i_lim < r.rated_current) throw ValidationError("renewable I_lim must be >= I_N");
        if (!source_buses.insert(r.bus).second) throw ValidationError("two sources on bus " + std::to_string(r.bus));
    }
}

// ---------------------------------------------------------------------------
// JSON case files

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::plain: return "plain";
        case BusKind::gen_terminal: return "gen_terminal";
        case BusKind::renewable_terminal: return "renewable_terminal";
        case BusKind::xfmr_high: return "xfmr_high";
        case BusKind::xfmr_low: return "xfmr_low";
    }
    return "plain";
}

std::string to_string(BranchKind kind) { return kind == BranchKind::line ? "line" : "transformer"; }

std::string to_string(SourceKind kind) { return kind == SourceKind::fips ? "FIPS" : "PIPS"; }

SourceKind parse_source_kind(const std::string& text) {
    if (text == "FIPS" || text == "fips") return SourceKind::fips;
    if (text == "PIPS" || text == "pips") return SourceKind::pips;
    throw ParseError("unknown renewable kind '" + text + "'");
}

namespace {

BusKind parse_bus_kind(const std::string& s) {
    for (BusKind k : {BusKind::plain, BusKind::gen_terminal, BusKind::renewable_terminal, BusKind::xfmr_high,
                      BusKind::xfmr_low}) {
        if (to_string(k) == s) return k;
    }
    throw ParseError("unknown bus kind '" + s + "'");
}

BranchKind parse_branch_kind(const std::string& s) {
    if (s == "line") return BranchKind::line;
    if (s == "transformer") return BranchKind::transformer;
    throw ParseError("unknown branch kind '" + s + "'");
}

template <class T>
T field(const json& obj, const char* key) {
    if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T field_or(const json& obj, const char* key, T fallback) {
    return obj.contains(key) ? field<T>(obj, key) : fallback;
}

}  // namespace

GridModel parse_case(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("case file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("case file must be a JSON object");

    std::vector<Bus> buses;
    for (const auto& b : field<json>(doc, "buses")) {
        buses.push_back({field<int>(b, "id"), parse_bus_kind(field<std::string>(b, "kind")),
                         field<double>(b, "base_kV")});
    }
    std::sort(buses.begin(), buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });

    std::vector<Branch> branches;
    for (const auto& b : field<json>(doc, "branches")) {
        auto z = field<std::vector<double>>(b, "z");
        if (z.size() != 2) throw ParseError("branch impedance must be an [re, im] pair");
        Branch br;
        br.id = field<int>(b, "id");
        br.from_bus = field<int>(b, "from_bus");
        br.to_bus = field<int>(b, "to_bus");
        br.z = {z[0], z[1]};
        br.kind = parse_branch_kind(field<std::string>(b, "kind"));
        br.switchable = field_or<bool>(b, "switchable", br.kind == BranchKind::line);
        branches.push_back(br);
    }
    std::sort(branches.begin(), branches.end(), [](const Branch& a, const Branch& b) { return a.id < b.id; });

    std::vector<SyncGenerator> gens;
    for (const auto& g : field_or<json>(doc, "sync_gens", json::array())) {
        gens.push_back({field<int>(g, "bus"), field<double>(g, "x_d2"), field_or<double>(g, "emf", 1.0),
                        field_or<double>(g, "rated_mva", 0.0)});
    }

    std::vector<RenewableUnit> units;
    for (const auto& r : field_or<json>(doc, "renewables", json::array())) {
        RenewableUnit u;
        u.bus = field<int>(r, "bus");
        u.kind = parse_source_kind(field<std::string>(r, "kind"));
        u.rated_current = field<double>(r, "rated_current");
        u.m = field_or<double>(r, "m", 1.0);
        u.i_lim = field<double>(r, "I_lim");
        u.p0 = field_or<double>(r, "P0", u.m * u.rated_current);
        u.i_dcb = field_or<double>(r, "I_dcb", 0.0);
        u.i_qcb = field_or<double>(r, "I_qcb", 0.0);
        units.push_back(u);
    }

    return GridModel(field_or<std::string>(doc, "name", "unnamed"), field<double>(doc, "base_mva"),
                     std::move(buses), std::move(branches), std::move(gens), std::move(units));
}

std::string dump_case(const GridModel& grid) {
    json doc;
    doc["name"] = grid.name();
    doc["base_mva"] = grid.base_mva();
    doc["buses"] = json::array();
    for (const auto& b : grid.buses()) {
        doc["buses"].push_back({{"id", b.id}, {"kind", to_string(b.kind)}, {"base_kV", b.base_kv}});
    }
    doc["branches"] = json::array();
    for (const auto& br : grid.branches()) {
        doc["branches"].push_back({{"id", br.id},
                                   {"from_bus", br.from_bus},
                                   {"to_bus", br.to_bus},
                                   {"z", {br.z.real(), br.z.imag()}},
                                   {"kind", to_string(br.kind)},
                                   {"switchable", br.switchable}});
    }
    doc["sync_gens"] = json::array();
    for (const auto& g : grid.sync_gens()) {
        doc["sync_gens"].push_back({{"bus", g.bus}, {"x_d2", g.x_d2}, {"emf", g.emf}, {"rated_mva", g.rated_mva}});
    }
    doc["renewables"] = json::array();
    for (const auto& r : grid.renewables()) {
        doc["renewables"].push_back({{"bus", r.bus},
                                     {"kind", to_string(r.kind)},
                                     {"rated_current", r.rated_current},
                                     {"m", r.m},
                                     {"I_lim", r.i_lim},
                                     {"P0", r.p0},
                                     {"I_dcb", r.i_dcb},
                                     {"I_qcb", r.i_qcb}});
    }
    return doc.dump(1);
}

GridModel load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open case file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_case(ss.str());
}

void save_case(const GridModel& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write case file " + path.string());
    out << dump_case(grid) << '\n';
}

// ---------------------------------------------------------------------------

GridModel apply_replacement(const GridModel& grid, std::span<const int> gen_buses, SourceKind kind,
                            const RenewableDefaults& defaults) {
    std::vector<SyncGenerator> gens = grid.sync_gens();
    std::vector<RenewableUnit> units = grid.renewables();
    std::vector<Bus> buses = grid.buses();
    for (int bus : gen_buses) {
        auto it = std::find_if(gens.begin(), gens.end(), [bus](const SyncGenerator& g) { return g.bus == bus; });
        if (it == gens.end()) throw UnknownGenerator("no synchronous generator on bus " + std::to_string(bus));
        const double rating = it->rated_mva > 0.0 ? it->rated_mva : grid.base_mva();
        RenewableUnit u;
        u.bus = bus;
        u.kind = kind;
        u.rated_current = rating / grid.base_mva();
        u.m = defaults.m;
        u.i_lim = (kind == SourceKind::fips ? defaults.fips_headroom : defaults.pips_headroom) * u.rated_current;
        u.p0 = u.m * u.rated_current;
        u.i_dcb = defaults.crowbar_d * u.rated_current;
        u.i_qcb = defaults.crowbar_q * u.rated_current;
        units.push_back(u);
        gens.erase(it);
        buses[static_cast<std::size_t>(bus)].kind = BusKind::renewable_terminal;
    }
    return GridModel(grid.name(), grid.base_mva(), std::move(buses), grid.branches(), std::move(gens),
                     std::move(units));
}

void check_condition(const GridModel& grid, const OperatingCondition& tau) {
    if (tau.size() != grid.branch_count()) {
        throw ValidationError("operating condition has " + std::to_string(tau.size()) + " entries, grid has " +
                              std::to_string(grid.branch_count()) + " branches");
    }
    for (const auto& br : grid.branches()) {
        if (!br.switchable && !tau.in_service(static_cast<std::size_t>(br.id))) {
            throw ValidationError("branch " + std::to_string(br.id) + " is not switchable but marked out of service");
        }
    }
}

std::vector<std::vector<int>> adjacency(const GridModel& grid, const OperatingCondition& tau) {
    std::vector<std::vector<int>> adj(grid.bus_count());
    for (const auto& br : grid.branches()) {
        if (!tau.in_service(static_cast<std::size_t>(br.id))) continue;
        adj[static_cast<std::size_t>(br.from_bus)].push_back(br.to_bus);
        adj[static_cast<std::size_t>(br.to_bus)].push_back(br.from_bus);
    }
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return adj;
}

std::vector<int> hop_distances(const std::vector<std::vector<int>>& adj, int source) {
    std::vector<int> dist(adj.size(), -1);
    std::deque<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int u : adj[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(u)] < 0) {
                dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

bool is_connected(const GridModel& grid, const OperatingCondition& tau) {
    if (tau.size() != grid.branch_count()) throw ValidationError("operating condition length mismatch");
    const auto dist = hop_distances(adjacency(grid, tau), 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

}  // namespace eocs
