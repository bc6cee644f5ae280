#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eocs/features.hpp"
#include "eocs/grid.hpp"
#include "eocs/nn.hpp"
#include "eocs/search.hpp"

namespace eocs {

struct Sample {
    OperatingCondition tau0;
    int protected_line = 0;
    std::vector<std::uint8_t> label;  // per line index; 1 = switched off in the EOC
    double i_max = 0.0;

    bool operator==(const Sample&) const = default;
};

enum class Split : std::uint32_t { train = 0, test = 1, validation = 2 };

std::string to_string(Split split);
Split parse_split(const std::string& text);

using SampleKey = std::pair<OperatingCondition, int>;

struct DatasetSpec {
    int count = 0;
    int k = 2;
    int min_outages = 0;
    int max_outages = 2;
    std::uint64_t seed = 1;
    Split split = Split::train;
};

struct Dataset {
    Split split = Split::train;
    int k = 2;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::size_t branch_count = 0;
    std::size_t line_count = 0;
    std::vector<Sample> samples;

    std::set<SampleKey> keys() const;
    bool operator==(const Dataset&) const = default;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Hash of everything that determines labels: case contents, solver
/// settings and sampling spec.
std::uint64_t dataset_hash(const GridModel& grid, const DatasetSpec& spec, const FaultSolverOptions& fault);

/// Draws distinct (tau0, p_l) keys not in `exclude` and labels each with
/// global enumeration. Keys whose every candidate fails to converge are
/// dropped and replaced by further draws.
Dataset generate_dataset(const GridModel& grid, const DatasetSpec& spec, const SearchOptions& options,
                         const std::set<SampleKey>& exclude = {});

/// Binary format: "EOCD", u32 version, u32 split, u32 k, u32 branch count,
/// u32 line count, u64 seed, u64 config hash, u32 sample count, then per
/// sample: branch flags (u8 each), u32 p_l, line label (u8 each), f64 i_max.
void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Throws ShapeMismatch when a dataset was produced for a different case.
void check_dataset(const GridModel& grid, const Dataset& data);

struct CurvePoint {
    int epoch = 0;
    double loss = 0.0;
    double oc_acc = 0.0;  // held-out exact-match rate, percent
};

struct TrainResult {
    nn::PgnnModel best;
    std::vector<CurvePoint> curves;
    int best_epoch = 0;
    double best_oc_acc = -1.0;
};

using EpochCallback = std::function<void(const CurvePoint&)>;

/// Unscaled encodings of every sample, in order.
std::vector<FeatureSet> encode_samples(const GridModel& grid, const Dataset& data, int workers = 1);

/// Mini-batch Adam on BCE. The scaler is fit on `train_set`; held-out
/// OC-Acc on `holdout` selects the returned checkpoint (earliest epoch wins
/// ties).
TrainResult train(nn::PgnnModel model, const GridModel& grid, const Dataset& train_set, const Dataset& holdout,
                  const nn::TrainConfig& config, const EpochCallback& on_epoch = {}, int workers = 1);

void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& curves);
std::vector<CurvePoint> read_curves_csv(std::istream& in);
/// Two-panel SVG (loss, OC-Acc against epoch).
std::string curves_svg(const std::vector<CurvePoint>& curves);

struct MetricOptions {
    std::vector<double> tolerances{0.01, 0.05};
    double ps_factor = 1.2;
    double exact_tol = 1e-9;  // relative, for SCC-Acc
};

/// Per-problem outcome of a method against the oracle.
struct Outcome {
    bool valid = false;  // prediction admissible and its fault solve converged
    bool exact = false;  // label equals the oracle label
    double i_pred = 0.0;
};

struct MethodReport {
    std::string method;
    std::size_t problems = 0;
    std::size_t invalid = 0;
    double oc_acc = 0.0;
    double scc_acc = 0.0;
    std::vector<std::pair<double, double>> e_scc_acc;  // (e, percent)
    double ps_acc = 0.0;
    double mean_time_s = 0.0;
    double median_time_s = 0.0;
};

/// Scores outcomes; asserts ps >= e-scc (descending e) >= scc >= oc.
MethodReport score(const std::string& method, const std::vector<Sample>& oracle, const std::vector<Outcome>& outcomes,
                   const MetricOptions& options);

/// Fault current of a predicted label; invalid when the label switches off
/// p_l or an out-of-service line, exceeds k, disconnects, or fails to solve.
Outcome assess_label(const GridModel& grid, const Sample& oracle, const std::vector<std::uint8_t>& label, int k,
                     const FaultSolverOptions& fault);

/// The threshold/top-k rule of nn::decode_eoc restricted to admissible
/// outage sets: lines are taken in descending score (ties to the lower
/// index) while the score is >= 0.5, skipping the protected line, lines
/// already out in tau0, and any line whose removal would disconnect the grid
/// together with those already taken.
std::vector<std::uint8_t> decode_feasible(const GridModel& grid, const OperatingCondition& tau0, int protected_line,
                                          const Eigen::VectorXd& scores, int k);

/// Encode, forward and feasible decode.
std::vector<std::uint8_t> predict(const nn::PgnnModel& model, const GridModel& grid, const OperatingCondition& tau0,
                                  int protected_line);

struct EvalOptions {
    MetricOptions metrics;
    FaultSolverOptions fault;
    int workers = 1;
};

MethodReport evaluate(const nn::PgnnModel& model, const GridModel& grid, const Dataset& data,
                      const EvalOptions& options);

enum class Method { global, local, ga, pgnn };
std::string to_string(Method method);
Method parse_method(const std::string& text);

struct CompareOptions {
    std::vector<Method> methods{Method::global, Method::local, Method::ga, Method::pgnn};
    MetricOptions metrics;
    SearchOptions search;
    int levels = 3;
    GaParams ga;
    std::uint64_t ga_seed = 1;
    int timing_repetitions = 30;
    int timing_warmup = 3;
};

/// Median and mean wall time of `fn` over `repetitions` calls after `warmup`
/// unmeasured calls.
struct Timing {
    double median_s = 0.0;
    double mean_s = 0.0;
};
Timing time_calls(const std::function<void(std::size_t)>& fn, int repetitions, int warmup);

/// Runs each method on every sample's problem and scores it against the
/// stored oracle label. Timing columns come from a separate steady-state
/// pass cycling through the problems.
std::vector<MethodReport> compare(const GridModel& grid, const Dataset& problems, const nn::PgnnModel* model,
                                  const CompareOptions& options);

std::string report_json(const std::vector<MethodReport>& rows);
std::string report_table(const std::vector<MethodReport>& rows);

}  // namespace eocs
