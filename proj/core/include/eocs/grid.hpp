#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace eocs {

using Complex = std::complex<double>;

enum class BusKind { plain, gen_terminal, renewable_terminal, xfmr_high, xfmr_low };
enum class BranchKind { line, transformer };
enum class SourceKind { fips, pips };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::plain;
    double base_kv = 1.0;

    bool operator==(const Bus&) const = default;
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    Complex z{0.0, 0.1};  // series impedance, per-unit
    BranchKind kind = BranchKind::line;
    bool switchable = true;

    bool operator==(const Branch&) const = default;
};

struct SyncGenerator {
    int bus = 0;
    double x_d2 = 0.2;       // subtransient reactance, per-unit on system base
    double emf = 1.0;        // internal voltage magnitude
    double rated_mva = 0.0;  // 0 means "system base"

    bool operator==(const SyncGenerator&) const = default;
};

struct RenewableUnit {
    int bus = 0;
    SourceKind kind = SourceKind::fips;
    double rated_current = 1.0;  // I_N
    double m = 1.0;              // pre-fault output ratio
    double i_lim = 1.2;          // current ceiling
    double p0 = 1.0;             // pre-fault active power (PIPS)
    double i_dcb = 0.0;          // crowbar equivalent-impedance coefficients (PIPS)
    double i_qcb = 0.0;

    bool operator==(const RenewableUnit&) const = default;
};

/// Line/transformer in-service flags, one per branch (1 = in service).
class OperatingCondition {
  public:
    OperatingCondition() = default;
    explicit OperatingCondition(std::vector<std::uint8_t> flags) : flags_(std::move(flags)) {}

    static OperatingCondition all_in_service(std::size_t branch_count) {
        return OperatingCondition(std::vector<std::uint8_t>(branch_count, 1));
    }

    std::size_t size() const { return flags_.size(); }
    bool in_service(std::size_t branch) const { return flags_.at(branch) != 0; }
    void set(std::size_t branch, bool on) { flags_.at(branch) = on ? 1 : 0; }
    std::span<const std::uint8_t> flags() const { return flags_; }

    /// Branch ids currently out of service, ascending.
    std::vector<int> outages() const;
    std::size_t outage_count() const;

    auto operator<=>(const OperatingCondition&) const = default;

  private:
    std::vector<std::uint8_t> flags_;
};

/// Immutable network description. Construction validates every invariant.
class GridModel {
  public:
    GridModel(std::string name, double base_mva, std::vector<Bus> buses,
              std::vector<Branch> branches, std::vector<SyncGenerator> sync_gens,
              std::vector<RenewableUnit> renewables);

    const std::string& name() const { return name_; }
    double base_mva() const { return base_mva_; }
    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const std::vector<SyncGenerator>& sync_gens() const { return sync_gens_; }
    const std::vector<RenewableUnit>& renewables() const { return renewables_; }

    std::size_t bus_count() const { return buses_.size(); }
    std::size_t branch_count() const { return branches_.size(); }

    /// Branch ids of switchable lines, ascending. Position in this list is
    /// the "line index" used by outage labels and model outputs.
    const std::vector<int>& lines() const { return lines_; }
    std::size_t line_count() const { return lines_.size(); }
    /// Line index of a branch, or -1 when the branch is not a switchable line.
    int line_index(int branch_id) const { return line_index_.at(static_cast<std::size_t>(branch_id)); }

    OperatingCondition base_condition() const {
        return OperatingCondition::all_in_service(branches_.size());
    }

    bool operator==(const GridModel&) const = default;

  private:
    std::string name_;
    double base_mva_;
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<SyncGenerator> sync_gens_;
    std::vector<RenewableUnit> renewables_;
    std::vector<int> lines_;
    std::vector<int> line_index_;
};

/// Defaults used when a synchronous machine is converted to an inverter source.
struct RenewableDefaults {
    double m = 1.0;
    double fips_headroom = 1.2;  // I_lim = headroom * I_N
    double pips_headroom = 1.5;
    double crowbar_d = 0.5;      // I_dcb = crowbar_d * I_N
    double crowbar_q = -2.0;     // I_qcb = crowbar_q * I_N
};

GridModel parse_case(const std::string& json_text);
std::string dump_case(const GridModel& grid);
GridModel load_case(const std::filesystem::path& path);
void save_case(const GridModel& grid, const std::filesystem::path& path);

/// Replaces the synchronous machines on `gen_buses` with renewable units.
GridModel apply_replacement(const GridModel& grid, std::span<const int> gen_buses, SourceKind kind,
                            const RenewableDefaults& defaults = {});

/// Validates length and that non-switchable branches stay in service.
void check_condition(const GridModel& grid, const OperatingCondition& tau);

/// Sorted, de-duplicated neighbour lists over in-service branches.
std::vector<std::vector<int>> adjacency(const GridModel& grid, const OperatingCondition& tau);

/// Unweighted hop distances from `source`; unreachable buses get -1.
std::vector<int> hop_distances(const std::vector<std::vector<int>>& adj, int source);

bool is_connected(const GridModel& grid, const OperatingCondition& tau);

std::string to_string(BusKind kind);
std::string to_string(BranchKind kind);
std::string to_string(SourceKind kind);
SourceKind parse_source_kind(const std::string& text);

}  // namespace eocs
