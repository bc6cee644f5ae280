#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "eocs/errors.hpp"
#include "eocs/features.hpp"
#include "eocs/grid.hpp"
#include "eocs/nn.hpp"
#include "eocs/search.hpp"
#include "oracles.hpp"

namespace eocs {

namespace nn {
void PrintTo(Aggregator agg, std::ostream* os) { *os << to_string(agg); }
}  // namespace nn

namespace {

using nn::Aggregator;
using nn::RowMatrix;

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RowMatrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

FeatureSet six_bus_features(const GridModel& grid, int outages, std::mt19937_64& rng) {
    const OperatingCondition tau = testing::random_condition(grid, outages, rng);
    return encode_raw(grid, tau, testing::random_line(grid, tau, rng));
}

nn::PgnnModel six_bus_model(Aggregator agg, std::uint64_t seed) {
    const GridModel g = testing::six_bus();
    return nn::PgnnModel(nn::make_architecture(6, static_cast<int>(g.line_count()), 2, 3, 128, agg), seed);
}

TEST(SageLayer, SingleNodeIdentityMeanIsRelu) {
    nn::SageLayer layer(RowMatrix::Identity(3, 3), Aggregator::mean);
    RowMatrix h(1, 3);
    h << 0.5, -2.0, 1.5;
    const RowMatrix out = nn::sage_forward(layer, h, {{0}});
    EXPECT_DOUBLE_EQ(out(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(out(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(out(0, 2), 1.5);
}

TEST(SageLayer, TwoNodeSumGivesSameOutputOnBothNodes) {
    nn::SageLayer layer(RowMatrix::Identity(2, 2), Aggregator::sum);
    RowMatrix h(2, 2);
    h << 1.0, -3.0, 2.0, 1.0;
    const RowMatrix out = nn::sage_forward(layer, h, {{0, 1}, {0, 1}});
    for (int v = 0; v < 2; ++v) {
        EXPECT_DOUBLE_EQ(out(v, 0), 3.0);
        EXPECT_DOUBLE_EQ(out(v, 1), 0.0);
    }
}

TEST(SageLayer, MatchesNaiveOracleForEveryAggregator) {
    std::mt19937_64 rng(5);
    const std::vector<std::vector<int>> adj{{0, 1, 4}, {0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {0, 3, 4}};
    for (Aggregator agg : {Aggregator::mean, Aggregator::sum, Aggregator::max}) {
        const RowMatrix w = random_matrix(4, 3, rng);
        const RowMatrix h = random_matrix(5, 3, rng);
        const RowMatrix fast = nn::sage_forward(nn::SageLayer(w, agg), h, adj);
        const Eigen::MatrixXd slow = testing::naive_sage(w, h, adj, agg);
        EXPECT_LE((Eigen::MatrixXd(fast) - slow).cwiseAbs().maxCoeff(), 1e-12) << nn::to_string(agg);
    }
}

TEST(SageLayer, RejectsWrongFeatureWidth) {
    nn::SageLayer layer(RowMatrix::Identity(3, 3), Aggregator::mean);
    EXPECT_THROW(nn::sage_forward(layer, RowMatrix::Zero(2, 4), {{0, 1}, {0, 1}}), ShapeMismatch);
}

TEST(Architecture, ShapeChainOn39Bus) {
    const auto a = nn::make_architecture(39, 34, 2, 3);
    EXPECT_EQ(a.hidden, 39);
    EXPECT_EQ(a.decision_input(), 4 * 39 * 39);
    ASSERT_EQ(a.mlp_widths.size(), 3u);
    EXPECT_EQ(a.mlp_widths.front(), 128);
    EXPECT_EQ(a.mlp_widths.back(), 34);
}

TEST(Pgnn, ZeroWeightsScoreOneHalf) {
    std::mt19937_64 rng(1);
    nn::PgnnModel model = six_bus_model(Aggregator::mean, 3);
    model.set_zero();
    const auto scores = nn::pgnn_forward(model, six_bus_features(testing::six_bus(), 1, rng));
    for (Eigen::Index i = 0; i < scores.size(); ++i) EXPECT_EQ(scores(i), 0.5);
}

TEST(Pgnn, OutputLengthMatchesLineCountOn39Bus) {
    const GridModel base = load_case(EOCS_CASE_DIR "/case39.json");
    const std::vector<int> replace{29, 30, 31, 32, 33};
    const GridModel grid = apply_replacement(base, replace, SourceKind::fips);
    const nn::PgnnModel model(nn::make_architecture(39, 34, 2, 3), 1);
    const auto scores = nn::pgnn_forward(model, encode_raw(grid, grid.base_condition(), grid.lines()[0]));
    ASSERT_EQ(scores.size(), 34);
    EXPECT_TRUE(((scores.array() > 0.0) && (scores.array() < 1.0)).all());
}

TEST(Pgnn, ForwardIsBitReproducible) {
    std::mt19937_64 rng(2);
    const nn::PgnnModel a = six_bus_model(Aggregator::max, 9);
    const nn::PgnnModel b = six_bus_model(Aggregator::max, 9);
    const FeatureSet fs = six_bus_features(testing::six_bus(), 2, rng);
    const Eigen::VectorXd sa = nn::pgnn_forward(a, fs);
    const Eigen::VectorXd sb = nn::pgnn_forward(b, fs);
    EXPECT_EQ(0, std::memcmp(sa.data(), sb.data(), sizeof(double) * static_cast<std::size_t>(sa.size())));
}

TEST(Pgnn, RejectsMismatchedFeatureSet) {
    const nn::PgnnModel model = six_bus_model(Aggregator::mean, 1);
    const FeatureSet wrong = encode_raw(testing::four_bus(), testing::four_bus().base_condition(), 2);
    EXPECT_THROW(nn::pgnn_forward(model, wrong), ShapeMismatch);
}

TEST(Decode, TopKAboveThreshold) {
    Eigen::VectorXd v(4);
    v << 0.9, 0.6, 0.4, 0.2;
    EXPECT_EQ(nn::decode_eoc(v, 2), (std::vector<std::uint8_t>{1, 1, 0, 0}));
}

TEST(Decode, AllBelowHalfGivesNoOutage) {
    Eigen::VectorXd v(3);
    v << 0.49, 0.1, 0.3;
    EXPECT_EQ(nn::decode_eoc(v, 2), (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(Decode, TopKCut) {
    Eigen::VectorXd v(3);
    v << 0.8, 0.7, 0.6;
    EXPECT_EQ(nn::decode_eoc(v, 2), (std::vector<std::uint8_t>{1, 1, 0}));
}

TEST(Decode, TiesAtCutGoToLowerIndex) {
    Eigen::VectorXd v(4);
    v << 0.6, 0.9, 0.6, 0.6;
    EXPECT_EQ(nn::decode_eoc(v, 2), (std::vector<std::uint8_t>{1, 1, 0, 0}));
}

TEST(Bce, PerfectPredictionIsNearZero) {
    Eigen::VectorXd v(3);
    v << 1.0, 0.0, 1.0;
    const std::vector<std::uint8_t> y{1, 0, 1};
    EXPECT_LE(nn::bce_loss(v, y), 1e-6);
}

TEST(Bce, HalfEverywhereIsLn2) {
    const std::vector<std::uint8_t> y{1, 0, 0, 1, 0};
    EXPECT_NEAR(nn::bce_loss(Eigen::VectorXd::Constant(5, 0.5), y), std::log(2.0), 1e-15);
}

TEST(Bce, MatchesScalarLoop) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(40);
    std::vector<std::uint8_t> y(40);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = u(rng);
        y[i] = u(rng) < 0.3 ? 1 : 0;
    }
    s[3] = 0.0;
    s[7] = 1.0;
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(s.data(), 40);
    EXPECT_NEAR(nn::bce_loss(v, y), testing::scalar_bce(s, y), 1e-12);
}

TEST(Bce, LogitFormAgreesAwayFromSaturation) {
    Eigen::VectorXd z(4);
    z << -3.0, -0.2, 0.7, 4.0;
    const std::vector<std::uint8_t> y{0, 1, 1, 0};
    const Eigen::VectorXd v = z.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
    EXPECT_NEAR(nn::bce_with_logits(z, y), nn::bce_loss(v, y), 1e-12);
}

TEST(Bce, LogitFormKeepsSaturatedErrors) {
    // A confidently wrong output at z = 40 costs about 40 nats per entry.
    const Eigen::VectorXd z = Eigen::VectorXd::Constant(2, 40.0);
    const std::vector<std::uint8_t> y{0, 0};
    EXPECT_NEAR(nn::bce_with_logits(z, y), 40.0, 1e-12);
    EXPECT_THROW(nn::bce_with_logits(z, std::vector<std::uint8_t>{0}), ShapeMismatch);
}

class GradientCheck : public ::testing::TestWithParam<Aggregator> {};

TEST_P(GradientCheck, AnalyticMatchesCentralDifferences) {
    std::mt19937_64 rng(11);
    const GridModel grid = testing::six_bus();
    const nn::PgnnModel model = six_bus_model(GetParam(), 21);
    FeatureSet fs = six_bus_features(grid, 1, rng);
    const std::vector<FeatureSet> fit{fs};
    FeatureScaler::fit(fit).apply(fs);
    std::vector<std::uint8_t> label(grid.line_count(), 0);
    label[2] = 1;
    label[5] = 1;
    const auto check = testing::check_gradients(model, fs, label);
    EXPECT_EQ(check.weights, model.parameter_count());
    EXPECT_LE(check.max_rel_error, 1e-4) << "analytic " << check.worst_analytic << " numeric " << check.worst_numeric;
}

// Scaler fit on several samples: the sum aggregator then drives some
// outputs into saturation, where the loss must still be differentiated
// consistently.
TEST_P(GradientCheck, HoldsWithSaturatedOutputs) {
    std::mt19937_64 rng(404);
    const GridModel grid = testing::six_bus();
    std::vector<FeatureSet> fit;
    for (int i = 0; i < 8; ++i) fit.push_back(six_bus_features(grid, static_cast<int>(rng() % 2), rng));
    FeatureSet fs = fit.front();
    FeatureScaler::fit(fit).apply(fs);
    const nn::PgnnModel model = six_bus_model(GetParam(), 41);
    std::vector<std::uint8_t> label(grid.line_count(), 0);
    label[1] = label[4] = 1;
    const auto check = testing::check_gradients(model, fs, label);
    EXPECT_LE(check.max_rel_error, 1e-4) << "analytic " << check.worst_analytic << " numeric " << check.worst_numeric;
}

INSTANTIATE_TEST_SUITE_P(Aggregators, GradientCheck,
                         ::testing::Values(Aggregator::mean, Aggregator::sum, Aggregator::max),
                         [](const auto& info) { return nn::to_string(info.param); });

TEST(Backward, ZeroWeightsOnlyOutputBiasMoves) {
    // All weights zero: every hidden activation is zero, so only the output
    // bias sees a gradient, equal to (0.5 - y) / m.
    std::mt19937_64 rng(6);
    nn::PgnnModel model = six_bus_model(Aggregator::mean, 1);
    model.set_zero();
    const FeatureSet fs = six_bus_features(testing::six_bus(), 0, rng);
    std::vector<std::uint8_t> label(8, 0);
    label[1] = 1;
    const nn::Gradients g = nn::backward(model, fs, label);
    for (std::size_t b = 0; b + 1 < g.size(); ++b) EXPECT_EQ(g[b].cwiseAbs().maxCoeff(), 0.0) << "block " << b;
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(g.back()(i, 0), (0.5 - label[static_cast<std::size_t>(i)]) / 8.0, 1e-15);
}

TEST(Backward, Deterministic) {
    std::mt19937_64 rng(8);
    const nn::PgnnModel model = six_bus_model(Aggregator::sum, 2);
    const FeatureSet fs = six_bus_features(testing::six_bus(), 1, rng);
    const std::vector<std::uint8_t> label{0, 1, 0, 0, 0, 0, 0, 0};
    const auto a = nn::backward(model, fs, label);
    const auto b = nn::backward(model, fs, label);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i] == b[i]);
}

TEST(Backward, BatchGradientIsMeanOfSingles) {
    std::mt19937_64 rng(12);
    const nn::PgnnModel model = six_bus_model(Aggregator::mean, 4);
    const FeatureSet f1 = six_bus_features(testing::six_bus(), 1, rng);
    const FeatureSet f2 = six_bus_features(testing::six_bus(), 2, rng);
    const std::vector<std::uint8_t> y1{0, 1, 0, 0, 0, 0, 0, 0};
    const std::vector<std::uint8_t> y2{0, 0, 0, 1, 0, 0, 1, 0};
    const FeatureSet* batch[] = {&f1, &f2};
    const std::vector<std::uint8_t>* labels[] = {&y1, &y2};
    nn::Gradients g;
    nn::backward(model, batch, labels, g);
    const auto g1 = nn::backward(model, f1, y1);
    const auto g2 = nn::backward(model, f2, y2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_LE((g[i] - 0.5 * (g1[i] + g2[i])).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Adam, ZeroGradientLeavesWeights) {
    nn::PgnnModel model = six_bus_model(Aggregator::mean, 3);
    const nn::PgnnModel before = model;
    auto state = nn::AdamState::for_model(model);
    nn::adam_step(model, nn::zero_gradients(model), state, {});
    const auto a = model.parameters();
    const auto b = before.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(*a[i] == *b[i]);
    EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    // m_hat = g, v_hat = g^2 after bias correction, so the step is lr * g / (|g| + eps).
    nn::PgnnModel model = six_bus_model(Aggregator::mean, 3);
    const nn::PgnnModel before = model;
    nn::Gradients g = nn::zero_gradients(model);
    for (auto& block : g) block.setOnes();
    auto state = nn::AdamState::for_model(model);
    nn::TrainConfig cfg;
    cfg.learning_rate = 0.001;
    nn::adam_step(model, g, state, cfg);
    const auto a = model.parameters();
    const auto b = before.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LE(((*b[i] - *a[i]).array() - 0.001).abs().maxCoeff(), 1e-10);
    }
}

TEST(Adam, IdenticalInputsGiveIdenticalUpdates) {
    std::mt19937_64 rng(13);
    nn::PgnnModel a = six_bus_model(Aggregator::mean, 5);
    nn::PgnnModel b = six_bus_model(Aggregator::mean, 5);
    const FeatureSet fs = six_bus_features(testing::six_bus(), 1, rng);
    const auto g = nn::backward(a, fs, {1, 0, 0, 0, 0, 0, 0, 0});
    auto sa = nn::AdamState::for_model(a);
    auto sb = nn::AdamState::for_model(b);
    nn::adam_step(a, g, sa, {});
    nn::adam_step(b, g, sb, {});
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE(*pa[i] == *pb[i]);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    std::mt19937_64 rng(14);
    nn::PgnnModel model = six_bus_model(Aggregator::max, 6);
    FeatureScaler s;
    s.lo = {0.1, 0.0, 0.2, 1.0};
    s.hi = {0.5, 1.0, 0.9, 6.0};
    model.set_scaler(s);
    std::stringstream buf;
    nn::write_checkpoint(buf, model);
    const nn::PgnnModel back = nn::read_checkpoint(buf);
    EXPECT_EQ(back.architecture(), model.architecture());
    EXPECT_EQ(back.scaler(), model.scaler());
    const FeatureSet fs = six_bus_features(testing::six_bus(), 1, rng);
    const Eigen::VectorXd a = nn::pgnn_forward(model, fs);
    const Eigen::VectorXd b = nn::pgnn_forward(back, fs);
    EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())));
}

TEST(Checkpoint, CorruptedMagicIsRejected) {
    std::stringstream buf;
    nn::write_checkpoint(buf, six_bus_model(Aggregator::mean, 1));
    std::string bytes = buf.str();
    bytes[0] = 'X';
    std::stringstream bad(bytes);
    EXPECT_THROW(nn::read_checkpoint(bad), VersionMismatch);
}

TEST(Checkpoint, BlockCountFollowsArchitecture) {
    const auto arch = nn::make_architecture(39, 34, 2, 3);
    std::stringstream buf;
    nn::write_checkpoint(buf, nn::PgnnModel(arch, 1));
    const nn::PgnnModel back = nn::read_checkpoint(buf);
    // 4 stacks of L sage weights, then weight + bias per MLP layer.
    EXPECT_EQ(back.parameters().size(), static_cast<std::size_t>(4 * arch.sage_layers + 2 * 3));
}

TEST(Checkpoint, MissingFileIsIoError) {
    EXPECT_THROW(nn::load_checkpoint("/nonexistent/model.pgnn"), IoError);
}

TEST(Capacity, MemorizesTwentySamples) {
    const GridModel grid = testing::six_bus();
    std::mt19937_64 rng(31);
    std::set<std::pair<OperatingCondition, int>> seen;
    std::vector<FeatureSet> features;
    std::vector<std::vector<std::uint8_t>> labels;
    while (features.size() < 20) {
        const OperatingCondition tau = testing::random_condition(grid, static_cast<int>(rng() % 3), rng);
        const int line = testing::random_line(grid, tau, rng);
        if (!seen.emplace(tau, line).second) continue;
        const auto r = enumerate_global(grid, {tau, line, 2});
        features.push_back(encode_raw(grid, tau, line));
        labels.push_back(r.eoc_label);
    }
    const FeatureScaler scaler = FeatureScaler::fit(features);
    for (auto& fs : features) scaler.apply(fs);

    nn::PgnnModel model = six_bus_model(Aggregator::mean, 17);
    auto state = nn::AdamState::for_model(model);
    std::vector<const FeatureSet*> batch;
    std::vector<const std::vector<std::uint8_t>*> ys;
    for (std::size_t i = 0; i < features.size(); ++i) {
        batch.push_back(&features[i]);
        ys.push_back(&labels[i]);
    }
    nn::Gradients g;
    std::vector<double> losses;
    for (int epoch = 0; epoch < 2000; ++epoch) {
        losses.push_back(nn::backward(model, batch, ys, g));
        ASSERT_TRUE(std::isfinite(losses.back()));
        nn::adam_step(model, g, state, {});
    }
    EXPECT_LT(losses.back(), 0.01);
    for (std::size_t e = 0; e + 500 < losses.size(); ++e) EXPECT_LE(losses[e + 500], losses[e]) << "epoch " << e;
}

}  // namespace
}  // namespace eocs
