#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eocs/features.hpp"

namespace eocs::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Aggregator : std::uint32_t { mean = 0, sum = 1, max = 2 };

std::string to_string(Aggregator agg);
Aggregator parse_aggregator(const std::string& text);

/// Neighbour lists (self-loops included) for a batch of graphs laid out as
/// consecutive node blocks.
struct BatchGraph {
    std::vector<int> offsets{0};
    std::vector<int> neighbors;

    Eigen::Index nodes() const { return static_cast<Eigen::Index>(offsets.size()) - 1; }
    std::span<const int> of(Eigen::Index v) const {
        return {neighbors.data() + offsets[static_cast<std::size_t>(v)],
                static_cast<std::size_t>(offsets[static_cast<std::size_t>(v) + 1] -
                                         offsets[static_cast<std::size_t>(v)])};
    }
    /// Appends one graph from the nonzero pattern of the square block of `t`.
    void append(const Eigen::MatrixXd& t);
    /// Appends one graph from explicit neighbour lists.
    void append(const std::vector<std::vector<int>>& adjacency);
};

struct LayerCache {
    RowMatrix aggregated;
    RowMatrix pre_activation;
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> argmax;
};

/// Message-passing layer interface. Only GraphSAGE is provided; convolution
/// or attention variants plug in by implementing this.
class GraphLayer {
  public:
    virtual ~GraphLayer() = default;
    virtual std::unique_ptr<GraphLayer> clone() const = 0;
    virtual std::uint32_t kind_id() const = 0;
    virtual Eigen::Index in_dim() const = 0;
    virtual Eigen::Index out_dim() const = 0;

    virtual RowMatrix forward(const RowMatrix& h, const BatchGraph& graph, LayerCache* cache) const = 0;
    /// Adds parameter gradients into `grads` (ordered as parameters()) and
    /// returns dL/dh when `want_input_grad`, else an empty matrix.
    virtual RowMatrix backward(const RowMatrix& grad_out, const BatchGraph& graph, const LayerCache& cache,
                               std::span<RowMatrix> grads, bool want_input_grad) const = 0;

    virtual std::vector<RowMatrix*> parameters() = 0;
    std::vector<const RowMatrix*> parameters() const;
};

/// h'_v = ReLU(W * AGG{h_u : u in N(v)}), N(v) containing v itself.
class SageLayer final : public GraphLayer {
  public:
    static constexpr std::uint32_t kKindId = 1;

    SageLayer(RowMatrix weight, Aggregator agg) : weight_(std::move(weight)), agg_(agg) {}

    std::unique_ptr<GraphLayer> clone() const override { return std::make_unique<SageLayer>(*this); }
    std::uint32_t kind_id() const override { return kKindId; }
    Eigen::Index in_dim() const override { return weight_.cols(); }
    Eigen::Index out_dim() const override { return weight_.rows(); }
    Aggregator aggregator() const { return agg_; }
    const RowMatrix& weight() const { return weight_; }
    RowMatrix& weight() { return weight_; }

    RowMatrix forward(const RowMatrix& h, const BatchGraph& graph, LayerCache* cache) const override;
    RowMatrix backward(const RowMatrix& grad_out, const BatchGraph& graph, const LayerCache& cache,
                       std::span<RowMatrix> grads, bool want_input_grad) const override;
    std::vector<RowMatrix*> parameters() override { return {&weight_}; }

  private:
    RowMatrix weight_;
    Aggregator agg_;
};

/// Single-graph convenience wrapper over SageLayer::forward.
RowMatrix sage_forward(const SageLayer& layer, const RowMatrix& h, const std::vector<std::vector<int>>& adjacency);

struct DenseLayer {
    RowMatrix weight;  // out x in
    RowMatrix bias;    // out x 1
};

struct PgnnArchitecture {
    int buses = 0;        // n
    int lines = 0;        // m
    int hidden = 0;       // d
    int sage_layers = 3;  // L
    int k = 2;
    Aggregator aggregator = Aggregator::mean;
    std::vector<int> mlp_widths;  // hidden widths then m

    int decision_input() const { return 4 * hidden * buses; }
    bool operator==(const PgnnArchitecture&) const = default;
};

/// Geometric hidden widths from min(4dn, cap) down toward m; `depth` counts
/// linear layers including the output layer.
std::vector<int> geometric_widths(int input, int output, int depth, int cap);

PgnnArchitecture make_architecture(int buses, int lines, int k, int mlp_depth, int hidden_cap = 128,
                                   Aggregator agg = Aggregator::mean, int sage_layers = 3, int hidden = 0);

class PgnnModel {
  public:
    PgnnModel() = default;
    /// Randomly initialised (uniform Glorot, biases zero).
    PgnnModel(const PgnnArchitecture& arch, std::uint64_t seed);
    PgnnModel(const PgnnModel& other);
    PgnnModel& operator=(const PgnnModel& other);
    PgnnModel(PgnnModel&&) noexcept = default;
    PgnnModel& operator=(PgnnModel&&) noexcept = default;

    const PgnnArchitecture& architecture() const { return arch_; }
    const FeatureScaler& scaler() const { return scaler_; }
    void set_scaler(const FeatureScaler& s) { scaler_ = s; }

    const std::vector<std::unique_ptr<GraphLayer>>& stack(std::size_t c) const { return stacks_.at(c); }
    std::vector<std::unique_ptr<GraphLayer>>& stack(std::size_t c) { return stacks_.at(c); }
    const std::vector<DenseLayer>& mlp() const { return mlp_; }
    std::vector<DenseLayer>& mlp() { return mlp_; }

    /// Every trainable block in a fixed order: stacks P, T, D_Z, D layer by
    /// layer, then MLP weight/bias pairs.
    std::vector<RowMatrix*> parameters();
    std::vector<const RowMatrix*> parameters() const;
    std::size_t parameter_count() const;

    void set_zero();

  private:
    void check_shapes() const;

    PgnnArchitecture arch_;
    std::array<std::vector<std::unique_ptr<GraphLayer>>, 4> stacks_;
    std::vector<DenseLayer> mlp_;
    FeatureScaler scaler_;
};

using Gradients = std::vector<RowMatrix>;

Gradients zero_gradients(const PgnnModel& model);

struct ForwardCache {
    BatchGraph graph;
    std::array<std::vector<RowMatrix>, 4> stack_inputs;  // input of each sage layer
    std::array<std::vector<LayerCache>, 4> stack_caches;
    std::array<RowMatrix, 4> stack_outputs;
    std::vector<RowMatrix> mlp_inputs;
    std::vector<RowMatrix> mlp_pre;
    RowMatrix scores;
    RowMatrix logits;
};

/// Scores for a batch: one row per feature set, one column per line.
RowMatrix forward_batch(const PgnnModel& model, std::span<const FeatureSet* const> batch, ForwardCache* cache);

/// Scores in (0,1), one per line.
Eigen::VectorXd pgnn_forward(const PgnnModel& model, const FeatureSet& fs);
/// Output pre-activations, one per line.
Eigen::VectorXd pgnn_logits(const PgnnModel& model, const FeatureSet& fs);

/// Top-k lines whose score is also >= 0.5; ties at the cut go to the lower index.
std::vector<std::uint8_t> decode_eoc(const Eigen::VectorXd& scores, int k);

/// Mean binary cross-entropy with scores clamped to [1e-7, 1 - 1e-7].
double bce_loss(const Eigen::VectorXd& scores, std::span<const std::uint8_t> labels);
/// The same loss evaluated from logits as softplus(z) - y z. Exact where the
/// sigmoid saturates; this is the loss `backward` differentiates.
double bce_with_logits(const Eigen::VectorXd& logits, std::span<const std::uint8_t> labels);

/// Loss of a batch and exact gradients of the batch-mean BCE. `grads` is
/// overwritten.
double backward(const PgnnModel& model, std::span<const FeatureSet* const> batch,
                std::span<const std::vector<std::uint8_t>* const> labels, Gradients& grads);

/// Single-sample form.
Gradients backward(const PgnnModel& model, const FeatureSet& fs, const std::vector<std::uint8_t>& label);

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 100;
    int batch_size = 64;
    std::uint64_t seed = 1;
};

struct AdamState {
    std::vector<RowMatrix> first;
    std::vector<RowMatrix> second;
    std::int64_t step = 0;

    static AdamState for_model(const PgnnModel& model);
};

/// One bias-corrected Adam update; increments state.step.
void adam_step(PgnnModel& model, const Gradients& grads, AdamState& state, const TrainConfig& config);

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const PgnnModel& model, const std::filesystem::path& path);
PgnnModel load_checkpoint(const std::filesystem::path& path);
void write_checkpoint(std::ostream& out, const PgnnModel& model);
PgnnModel read_checkpoint(std::istream& in);

}  // namespace eocs::nn
