#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "eocs/fault.hpp"
#include "eocs/grid.hpp"

namespace eocs {

/// Find the condition reachable from `tau0` by switching off at most `k`
/// further lines that maximizes the three-phase fault current at the far end
/// of `protected_line`, as seen by its head-end relay.
struct EocsProblem {
    OperatingCondition tau0;
    int protected_line = 0;  // branch id; must be a switchable line
    int k = 2;
};

void validate(const GridModel& grid, const EocsProblem& problem);

struct SearchResult {
    std::vector<std::uint8_t> eoc_label;  // per line index; 1 = switched off in the EOC
    OperatingCondition tau_star;
    double i_max = 0.0;
    std::size_t evaluations = 0;  // fault solves performed
    std::size_t failures = 0;     // candidates skipped because the solve did not converge
    std::chrono::duration<double> wall_time{0.0};
};

struct SearchOptions {
    FaultSolverOptions fault;
    int workers = 1;
};

struct GaParams {
    int population = 50;
    int generations = 100;
    int tournament = 3;
    double crossover_rate = 0.9;
    double mutation_rate = 0.05;
};

void validate(const GaParams& params);

/// In-service switchable lines other than the protected one: the lines an
/// EOC may switch off.
std::vector<int> outage_pool(const GridModel& grid, const EocsProblem& problem);

/// Every admissible condition, ordered by outage count and then
/// lexicographically by the outaged branch ids. `pool` restricts the lines
/// that may be switched off (defaults to outage_pool).
std::vector<OperatingCondition> candidates(const GridModel& grid, const EocsProblem& problem);
std::vector<OperatingCondition> candidates(const GridModel& grid, const EocsProblem& problem,
                                           const std::vector<int>& pool);

/// Lines of the pool whose endpoints both lie within `levels` hops of either
/// end of the protected line (tau0 topology).
std::vector<int> local_pool(const GridModel& grid, const EocsProblem& problem, int levels);

SearchResult enumerate_global(const GridModel& grid, const EocsProblem& problem, const SearchOptions& options = {});
SearchResult enumerate_local(const GridModel& grid, const EocsProblem& problem, int levels = 3,
                             const SearchOptions& options = {});
SearchResult ga_search(const GridModel& grid, const EocsProblem& problem, const GaParams& params,
                       std::uint64_t seed, const SearchOptions& options = {});

/// Re-checks the constraint set: tau_star <= tau0, at most k extra outages,
/// protected line in service, connected, label consistent with tau_star.
bool satisfies_constraints(const GridModel& grid, const EocsProblem& problem, const SearchResult& result);

/// Builds tau_star from tau0 and a per-line outage label.
OperatingCondition apply_label(const GridModel& grid, const OperatingCondition& tau0,
                               const std::vector<std::uint8_t>& label);

/// "none" or a comma-separated list of out-of-service branch ids.
OperatingCondition parse_condition_spec(const GridModel& grid, const std::string& spec);

std::string to_json(const GridModel& grid, const EocsProblem& problem, const SearchResult& result,
                    bool include_timing);

}  // namespace eocs
