#include "eocs/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "eocs/binary_io.hpp"
#include "eocs/errors.hpp"

namespace eocs::nn {

std::string to_string(Aggregator agg) {
    switch (agg) {
        case Aggregator::mean: return "mean";
        case Aggregator::sum: return "sum";
        case Aggregator::max: return "max";
    }
    return "mean";
}

Aggregator parse_aggregator(const std::string& text) {
    if (text == "mean") return Aggregator::mean;
    if (text == "sum") return Aggregator::sum;
    if (text == "max") return Aggregator::max;
    throw ParseError("unknown aggregator '" + text + "'");
}

// ---------------------------------------------------------------------------
// Graph batches

void BatchGraph::append(const Eigen::MatrixXd& t) {
    const Eigen::Index n = t.rows();
    if (t.cols() < n) throw ShapeMismatch("topology block must be square");
    const int base = static_cast<int>(nodes());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (t(i, j) != 0.0) neighbors.push_back(base + static_cast<int>(j));
        }
        offsets.push_back(static_cast<int>(neighbors.size()));
    }
}

void BatchGraph::append(const std::vector<std::vector<int>>& adjacency) {
    const int base = static_cast<int>(nodes());
    for (const auto& row : adjacency) {
        std::vector<int> sorted = row;
        std::sort(sorted.begin(), sorted.end());
        for (int u : sorted) neighbors.push_back(base + u);
        offsets.push_back(static_cast<int>(neighbors.size()));
    }
}

std::vector<const RowMatrix*> GraphLayer::parameters() const {
    auto params = const_cast<GraphLayer*>(this)->parameters();
    return {params.begin(), params.end()};
}

// ---------------------------------------------------------------------------
// GraphSAGE

RowMatrix SageLayer::forward(const RowMatrix& h, const BatchGraph& graph, LayerCache* cache) const {
    const Eigen::Index nodes = graph.nodes();
    const Eigen::Index in = h.cols();
    if (h.rows() != nodes || in != weight_.cols()) {
        throw ShapeMismatch("sage input " + std::to_string(h.rows()) + "x" + std::to_string(in) + ", expected " +
                            std::to_string(nodes) + "x" + std::to_string(weight_.cols()));
    }
    RowMatrix agg(nodes, in);
    LayerCache local;
    LayerCache& c = cache ? *cache : local;
    if (agg_ == Aggregator::max) c.argmax.resize(nodes, in);
    for (Eigen::Index v = 0; v < nodes; ++v) {
        const auto nb = graph.of(v);
        if (nb.empty()) throw ShapeMismatch("node without neighbours (missing self-loop)");
        if (agg_ == Aggregator::max) {
            agg.row(v) = h.row(nb[0]);
            c.argmax.row(v).setConstant(nb[0]);
            for (std::size_t q = 1; q < nb.size(); ++q) {
                const int u = nb[q];
                for (Eigen::Index f = 0; f < in; ++f) {
                    if (h(u, f) > agg(v, f)) {
                        agg(v, f) = h(u, f);
                        c.argmax(v, f) = u;
                    }
                }
            }
        } else {
            agg.row(v) = h.row(nb[0]);
            for (std::size_t q = 1; q < nb.size(); ++q) agg.row(v) += h.row(nb[q]);
            if (agg_ == Aggregator::mean) agg.row(v) /= static_cast<double>(nb.size());
        }
    }
    RowMatrix z;
    z.noalias() = agg * weight_.transpose();
    RowMatrix out = z.cwiseMax(0.0);
    if (cache) {
        c.aggregated = std::move(agg);
        c.pre_activation = std::move(z);
    }
    return out;
}

RowMatrix SageLayer::backward(const RowMatrix& grad_out, const BatchGraph& graph, const LayerCache& cache,
                              std::span<RowMatrix> grads, bool want_input_grad) const {
    if (grads.empty()) throw ShapeMismatch("sage backward needs one gradient slot");
    const RowMatrix dz = (cache.pre_activation.array() > 0.0).select(grad_out, 0.0);
    grads[0].noalias() += dz.transpose() * cache.aggregated;
    if (!want_input_grad) return {};
    RowMatrix da;
    da.noalias() = dz * weight_;
    const Eigen::Index nodes = graph.nodes();
    RowMatrix dh = RowMatrix::Zero(nodes, da.cols());
    for (Eigen::Index v = 0; v < nodes; ++v) {
        const auto nb = graph.of(v);
        switch (agg_) {
            case Aggregator::sum:
                for (int u : nb) dh.row(u) += da.row(v);
                break;
            case Aggregator::mean: {
                const double w = 1.0 / static_cast<double>(nb.size());
                for (int u : nb) dh.row(u) += w * da.row(v);
                break;
            }
            case Aggregator::max:
                for (Eigen::Index f = 0; f < da.cols(); ++f) dh(cache.argmax(v, f), f) += da(v, f);
                break;
        }
    }
    return dh;
}

RowMatrix sage_forward(const SageLayer& layer, const RowMatrix& h, const std::vector<std::vector<int>>& adjacency) {
    BatchGraph g;
    g.append(adjacency);
    return layer.forward(h, g, nullptr);
}

// ---------------------------------------------------------------------------
// Model

std::vector<int> geometric_widths(int input, int output, int depth, int cap) {
    if (depth < 1) throw ValidationError("MLP depth must be >= 1");
    std::vector<int> widths;
    const double top = std::min(input, cap);
    for (int i = 0; i + 1 < depth; ++i) {
        const double w = top * std::pow(static_cast<double>(output) / top, static_cast<double>(i) / (depth - 1));
        widths.push_back(std::max(1, static_cast<int>(std::lround(w))));
    }
    widths.push_back(output);
    return widths;
}

PgnnArchitecture make_architecture(int buses, int lines, int k, int mlp_depth, int hidden_cap, Aggregator agg,
                                   int sage_layers, int hidden) {
    PgnnArchitecture a;
    a.buses = buses;
    a.lines = lines;
    a.hidden = hidden > 0 ? hidden : buses;
    a.sage_layers = sage_layers;
    a.k = k;
    a.aggregator = agg;
    a.mlp_widths = geometric_widths(a.decision_input(), lines, mlp_depth, hidden_cap);
    return a;
}

namespace {

RowMatrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    RowMatrix w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = dist(rng);
    }
    return w;
}

}  // namespace

PgnnModel::PgnnModel(const PgnnArchitecture& arch, std::uint64_t seed) : arch_(arch) {
    if (arch.buses < 1 || arch.lines < 1 || arch.hidden < 1 || arch.sage_layers < 1 || arch.mlp_widths.empty()) {
        throw ShapeMismatch("invalid PGNN architecture");
    }
    std::mt19937_64 rng(seed);
    for (auto& stack : stacks_) {
        Eigen::Index in = arch.buses + 1;
        for (int l = 0; l < arch.sage_layers; ++l) {
            stack.push_back(std::make_unique<SageLayer>(glorot(arch.hidden, in, rng), arch.aggregator));
            in = arch.hidden;
        }
    }
    Eigen::Index in = arch.decision_input();
    for (int w : arch.mlp_widths) {
        mlp_.push_back({glorot(w, in, rng), RowMatrix::Zero(w, 1)});
        in = w;
    }
    check_shapes();
}

PgnnModel::PgnnModel(const PgnnModel& other) : arch_(other.arch_), mlp_(other.mlp_), scaler_(other.scaler_) {
    for (std::size_t c = 0; c < stacks_.size(); ++c) {
        for (const auto& layer : other.stacks_[c]) stacks_[c].push_back(layer->clone());
    }
}

PgnnModel& PgnnModel::operator=(const PgnnModel& other) {
    if (this != &other) {
        PgnnModel copy(other);
        *this = std::move(copy);
    }
    return *this;
}

void PgnnModel::check_shapes() const {
    for (const auto& stack : stacks_) {
        if (static_cast<int>(stack.size()) != arch_.sage_layers) throw ShapeMismatch("stack depth differs from L");
        Eigen::Index in = arch_.buses + 1;
        for (const auto& layer : stack) {
            if (layer->in_dim() != in || layer->out_dim() != arch_.hidden) {
                throw ShapeMismatch("graph layer shape breaks the (n+1) -> d chain");
            }
            in = layer->out_dim();
        }
    }
    Eigen::Index in = arch_.decision_input();
    for (const auto& layer : mlp_) {
        if (layer.weight.cols() != in || layer.bias.rows() != layer.weight.rows() || layer.bias.cols() != 1) {
            throw ShapeMismatch("decision network shape mismatch");
        }
        in = layer.weight.rows();
    }
    if (in != arch_.lines) throw ShapeMismatch("decision network must emit one score per line");
}

std::vector<RowMatrix*> PgnnModel::parameters() {
    std::vector<RowMatrix*> out;
    for (auto& stack : stacks_) {
        for (auto& layer : stack) {
            for (RowMatrix* p : layer->parameters()) out.push_back(p);
        }
    }
    for (auto& layer : mlp_) {
        out.push_back(&layer.weight);
        out.push_back(&layer.bias);
    }
    return out;
}

std::vector<const RowMatrix*> PgnnModel::parameters() const {
    auto params = const_cast<PgnnModel*>(this)->parameters();
    return {params.begin(), params.end()};
}

std::size_t PgnnModel::parameter_count() const {
    std::size_t total = 0;
    for (const RowMatrix* p : parameters()) total += static_cast<std::size_t>(p->size());
    return total;
}

void PgnnModel::set_zero() {
    for (RowMatrix* p : parameters()) p->setZero();
}

Gradients zero_gradients(const PgnnModel& model) {
    Gradients g;
    for (const RowMatrix* p : model.parameters()) g.push_back(RowMatrix::Zero(p->rows(), p->cols()));
    return g;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

double bce_term(double v, double y) {
    const double c = std::clamp(v, kClampLo, kClampHi);
    return -(y * std::log(c) + (1.0 - y) * std::log(1.0 - c));
}

double bce_logit_term(double z, double y) { return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

RowMatrix forward_batch(const PgnnModel& model, std::span<const FeatureSet* const> batch, ForwardCache* cache) {
    const auto& arch = model.architecture();
    const Eigen::Index n = arch.buses;
    const Eigen::Index d = arch.hidden;
    const auto b_count = static_cast<Eigen::Index>(batch.size());
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.graph = BatchGraph{};
    for (const FeatureSet* fs : batch) {
        for (std::size_t ch = 0; ch < FeatureSet::channel_count; ++ch) {
            const auto& m = fs->channel(ch);
            if (m.rows() != n || m.cols() != n + 1) {
                throw ShapeMismatch("feature matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                    ", model expects " + std::to_string(n) + "x" + std::to_string(n + 1));
            }
        }
        c.graph.append(fs->t);
    }

    RowMatrix features(b_count, arch.decision_input());
    for (std::size_t ch = 0; ch < FeatureSet::channel_count; ++ch) {
        RowMatrix x(b_count * n, n + 1);
        for (Eigen::Index b = 0; b < b_count; ++b) x.middleRows(b * n, n) = batch[static_cast<std::size_t>(b)]->channel(ch);
        const auto& stack = model.stack(ch);
        if (cache) {
            c.stack_inputs[ch].clear();
            c.stack_caches[ch].assign(stack.size(), LayerCache{});
        }
        for (std::size_t l = 0; l < stack.size(); ++l) {
            if (cache) c.stack_inputs[ch].push_back(x);
            x = stack[l]->forward(x, c.graph, cache ? &c.stack_caches[ch][l] : nullptr);
        }
        // Row-major node block of each sample flattens to P rows, then T, D_Z, D.
        for (Eigen::Index b = 0; b < b_count; ++b) {
            features.row(b).segment(static_cast<Eigen::Index>(ch) * n * d, n * d) =
                Eigen::Map<const Eigen::RowVectorXd>(x.data() + b * n * d, n * d);
        }
        if (cache) c.stack_outputs[ch] = std::move(x);
    }

    if (cache) {
        c.mlp_inputs.clear();
        c.mlp_pre.clear();
    }
    RowMatrix x = std::move(features);
    const auto& mlp = model.mlp();
    for (std::size_t i = 0; i < mlp.size(); ++i) {
        RowMatrix pre;
        pre.noalias() = x * mlp[i].weight.transpose();
        pre.rowwise() += mlp[i].bias.col(0).transpose();
        if (cache) {
            c.mlp_inputs.push_back(std::move(x));
            c.mlp_pre.push_back(pre);
        }
        if (i + 1 < mlp.size()) {
            x = pre.cwiseMax(0.0);
        } else {
            if (cache) c.logits = pre;
            x = pre.unaryExpr([](double v) { return sigmoid(v); });
        }
    }
    if (cache) c.scores = x;
    return x;
}

Eigen::VectorXd pgnn_forward(const PgnnModel& model, const FeatureSet& fs) {
    const FeatureSet* one[] = {&fs};
    return forward_batch(model, one, nullptr).row(0).transpose();
}

Eigen::VectorXd pgnn_logits(const PgnnModel& model, const FeatureSet& fs) {
    const FeatureSet* one[] = {&fs};
    ForwardCache cache;
    forward_batch(model, one, &cache);
    return cache.logits.row(0).transpose();
}

std::vector<std::uint8_t> decode_eoc(const Eigen::VectorXd& scores, int k) {
    const auto m = static_cast<std::size_t>(scores.size());
    std::vector<std::uint8_t> label(m, 0);
    if (k <= 0 || m == 0) return label;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
    });
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), m);
    for (std::size_t r = 0; r < top; ++r) {
        if (scores(static_cast<Eigen::Index>(order[r])) >= 0.5) label[order[r]] = 1;
    }
    return label;
}

double bce_loss(const Eigen::VectorXd& scores, std::span<const std::uint8_t> labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size()) throw ShapeMismatch("score/label length mismatch");
    if (labels.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) total += bce_term(scores(static_cast<Eigen::Index>(i)), labels[i]);
    return total / static_cast<double>(labels.size());
}

double bce_with_logits(const Eigen::VectorXd& logits, std::span<const std::uint8_t> labels) {
    if (static_cast<std::size_t>(logits.size()) != labels.size()) throw ShapeMismatch("logit/label length mismatch");
    if (labels.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) total += bce_logit_term(logits(static_cast<Eigen::Index>(i)), labels[i]);
    return total / static_cast<double>(labels.size());
}

double backward(const PgnnModel& model, std::span<const FeatureSet* const> batch,
                std::span<const std::vector<std::uint8_t>* const> labels, Gradients& grads) {
    if (batch.size() != labels.size() || batch.empty()) throw ShapeMismatch("batch/label count mismatch");
    const auto& arch = model.architecture();
    const Eigen::Index n = arch.buses;
    const Eigen::Index d = arch.hidden;
    const auto b_count = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index m = arch.lines;

    ForwardCache cache;
    forward_batch(model, batch, &cache);

    grads = zero_gradients(model);

    // Fused sigmoid + BCE: dL/dlogit = (v - y) / (B m).
    RowMatrix delta(b_count, m);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < b_count; ++b) {
        const auto& y = *labels[static_cast<std::size_t>(b)];
        if (static_cast<Eigen::Index>(y.size()) != m) throw ShapeMismatch("label length differs from line count");
        for (Eigen::Index j = 0; j < m; ++j) {
            const double v = cache.scores(b, j);
            const double target = y[static_cast<std::size_t>(j)];
            loss += bce_logit_term(cache.logits(b, j), target);
            delta(b, j) = (v - target) / static_cast<double>(b_count * m);
        }
    }
    loss /= static_cast<double>(b_count * m);

    std::size_t graph_params = 0;
    for (std::size_t ch = 0; ch < FeatureSet::channel_count; ++ch) {
        for (const auto& layer : model.stack(ch)) graph_params += layer->parameters().size();
    }

    const auto& mlp = model.mlp();
    RowMatrix dx;
    for (std::size_t i = mlp.size(); i-- > 0;) {
        RowMatrix& gw = grads[graph_params + 2 * i];
        RowMatrix& gb = grads[graph_params + 2 * i + 1];
        gw.noalias() += delta.transpose() * cache.mlp_inputs[i];
        gb.col(0) += delta.colwise().sum().transpose();
        dx.noalias() = delta * mlp[i].weight;
        if (i > 0) delta = (cache.mlp_pre[i - 1].array() > 0.0).select(dx, 0.0);
    }

    std::size_t offset = 0;
    for (std::size_t ch = 0; ch < FeatureSet::channel_count; ++ch) {
        RowMatrix dh(b_count * n, d);
        for (Eigen::Index b = 0; b < b_count; ++b) {
            Eigen::Map<Eigen::RowVectorXd>(dh.data() + b * n * d, n * d) =
                dx.row(b).segment(static_cast<Eigen::Index>(ch) * n * d, n * d);
        }
        const auto& stack = model.stack(ch);
        std::vector<std::size_t> starts;
        for (const auto& layer : stack) {
            starts.push_back(offset);
            offset += layer->parameters().size();
        }
        for (std::size_t l = stack.size(); l-- > 0;) {
            const std::size_t count = stack[l]->parameters().size();
            std::span<RowMatrix> slot(grads.data() + starts[l], count);
            dh = stack[l]->backward(dh, cache.graph, cache.stack_caches[ch][l], slot, l > 0);
        }
    }
    return loss;
}

Gradients backward(const PgnnModel& model, const FeatureSet& fs, const std::vector<std::uint8_t>& label) {
    const FeatureSet* batch[] = {&fs};
    const std::vector<std::uint8_t>* labels[] = {&label};
    Gradients g;
    backward(model, batch, labels, g);
    return g;
}

// ---------------------------------------------------------------------------
// Adam

AdamState AdamState::for_model(const PgnnModel& model) {
    AdamState s;
    s.first = zero_gradients(model);
    s.second = zero_gradients(model);
    return s;
}

void adam_step(PgnnModel& model, const Gradients& grads, AdamState& state, const TrainConfig& config) {
    auto params = model.parameters();
    if (grads.size() != params.size() || state.first.size() != params.size()) {
        throw ShapeMismatch("gradient/optimizer state does not match model");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].rows() != params[i]->rows() || grads[i].cols() != params[i]->cols()) {
            throw ShapeMismatch("gradient block shape mismatch");
        }
        auto m = state.first[i].array();
        auto v = state.second[i].array();
        const auto g = grads[i].array();
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g.square();
        params[i]->array() -= config.learning_rate * (m / c1) / ((v / c2).sqrt() + config.epsilon);
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

void write_checkpoint(std::ostream& out, const PgnnModel& model) {
    const auto& a = model.architecture();
    binary::write_magic(out, "PGNN");
    binary::write<std::uint32_t>(out, kCheckpointVersion);
    for (int v : {a.buses, a.lines, a.hidden, a.sage_layers, a.k}) binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(v));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(a.aggregator));
    binary::write<std::uint32_t>(out, model.stack(0).front()->kind_id());
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(a.mlp_widths.size()));
    for (int w : a.mlp_widths) binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(w));
    const auto& s = model.scaler();
    for (std::size_t c = 0; c < 4; ++c) {
        binary::write<double>(out, s.lo[c]);
        binary::write<double>(out, s.hi[c]);
    }
    const auto params = model.parameters();
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const RowMatrix* p : params) {
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(p->rows()));
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(p->cols()));
        for (Eigen::Index i = 0; i < p->size(); ++i) binary::write<double>(out, p->data()[i]);
    }
}

PgnnModel read_checkpoint(std::istream& in) {
    if (!binary::read_magic(in, "PGNN")) throw VersionMismatch("not a PGNN checkpoint (bad magic)");
    const auto version = binary::read<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw VersionMismatch("checkpoint version " + std::to_string(version) + " unsupported");
    }
    PgnnArchitecture a;
    a.buses = static_cast<int>(binary::read<std::uint32_t>(in));
    a.lines = static_cast<int>(binary::read<std::uint32_t>(in));
    a.hidden = static_cast<int>(binary::read<std::uint32_t>(in));
    a.sage_layers = static_cast<int>(binary::read<std::uint32_t>(in));
    a.k = static_cast<int>(binary::read<std::uint32_t>(in));
    const auto agg = binary::read<std::uint32_t>(in);
    if (agg > 2) throw VersionMismatch("unknown aggregator id in checkpoint");
    a.aggregator = static_cast<Aggregator>(agg);
    if (binary::read<std::uint32_t>(in) != SageLayer::kKindId) throw VersionMismatch("unknown graph layer kind");
    const auto depth = binary::read<std::uint32_t>(in);
    if (depth == 0 || depth > 64) throw VersionMismatch("implausible decision network depth");
    for (std::uint32_t i = 0; i < depth; ++i) a.mlp_widths.push_back(static_cast<int>(binary::read<std::uint32_t>(in)));
    FeatureScaler s;
    for (std::size_t c = 0; c < 4; ++c) {
        s.lo[c] = binary::read<double>(in);
        s.hi[c] = binary::read<double>(in);
    }
    PgnnModel model(a, 0);
    model.set_scaler(s);
    auto params = model.parameters();
    if (binary::read<std::uint32_t>(in) != params.size()) throw VersionMismatch("weight block count mismatch");
    for (RowMatrix* p : params) {
        const auto rows = binary::read<std::uint32_t>(in);
        const auto cols = binary::read<std::uint32_t>(in);
        if (rows != p->rows() || cols != p->cols()) throw VersionMismatch("weight block shape mismatch");
        for (Eigen::Index i = 0; i < p->size(); ++i) p->data()[i] = binary::read<double>(in);
    }
    return model;
}

void save_checkpoint(const PgnnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    write_checkpoint(out, model);
}

PgnnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace eocs::nn
