#include <gtest/gtest.h>

#include <cmath>

#include "setdetect/gradcheck.hpp"
#include "setdetect/losses.hpp"
#include "setdetect/network.hpp"
#include "setdetect/optim.hpp"

using namespace setdetect;

namespace {

template <typename T>
Tensor3<T> tensor_1ch(const std::vector<T>& values) {
    Tensor3<T> x(1, values.size(), 1);
    for (std::size_t t = 0; t < values.size(); ++t) x.at(0, t, 0) = values[t];
    return x;
}

template <typename T>
void set_param(Network<T>& net, const std::string& suffix, const std::vector<T>& values) {
    for (auto& e : net.param_store())
        if (e.name.size() >= suffix.size() && e.name.compare(e.name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            ASSERT_EQ(e.value->size(), values.size()) << suffix;
            *e.value = values;
            return;
        }
    FAIL() << "no parameter ending in " << suffix;
}

Tensor3<double> random_tensor(std::size_t b, std::size_t t, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor3<double> x(b, t, c);
    for (auto& v : x.data()) v = rng.uniform(lo, hi);
    return x;
}

}  // namespace

TEST(Conv1d, IdentityKernelPassesInputThrough) {
    Network<double> net({{LayerKind::conv1d, 1, 3}}, {4, 1}, 1);
    set_param(net, "conv1d.weight", {0.0, 1.0, 0.0});
    set_param(net, "conv1d.bias", {0.0});
    auto y = net.forward(tensor_1ch<double>({1, 2, 3, 4}), Mode::infer);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(y.at(0, 1, 0), 2.0);
    EXPECT_DOUBLE_EQ(y.at(0, 2, 0), 3.0);
    EXPECT_DOUBLE_EQ(y.at(0, 3, 0), 4.0);
}

TEST(Conv1d, HandComputedSamePaddingCase) {
    Network<double> net({{LayerKind::conv1d, 1, 3}}, {4, 1}, 1);
    set_param(net, "conv1d.weight", {1.0, 0.0, -1.0});
    set_param(net, "conv1d.bias", {0.0});
    auto y = net.forward(tensor_1ch<double>({1, 2, 3, 4}), Mode::infer);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0), -2.0);
    EXPECT_DOUBLE_EQ(y.at(0, 1, 0), -2.0);
    EXPECT_DOUBLE_EQ(y.at(0, 2, 0), -2.0);
    EXPECT_DOUBLE_EQ(y.at(0, 3, 0), 3.0);
}

TEST(Conv1d, EvenKernelPadsExtraZeroOnRight) {
    // kernel 2, pad_left = 0, pad_right = 1: out[t] = w0*x[t] + w1*x[t+1]
    Network<double> net({{LayerKind::conv1d, 1, 2}}, {3, 1}, 1);
    set_param(net, "conv1d.weight", {0.0, 1.0});
    set_param(net, "conv1d.bias", {0.0});
    auto y = net.forward(tensor_1ch<double>({5, 6, 7}), Mode::infer);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0), 6.0);
    EXPECT_DOUBLE_EQ(y.at(0, 1, 0), 7.0);
    EXPECT_DOUBLE_EQ(y.at(0, 2, 0), 0.0);  // right zero pad
}

TEST(Conv1d, ChannelMismatchThrows) {
    Network<double> net({{LayerKind::conv1d, 2, 3}}, {8, 3}, 1);
    Tensor3<double> x(1, 8, 2);
    EXPECT_THROW(net.forward(x, Mode::infer), ShapeMismatch);
}

TEST(MaxPool, DefinitionAndRemainder) {
    Network<double> net({{LayerKind::maxpool1d, 0, 0, 2}}, {4, 1}, 1);
    auto y = net.forward(tensor_1ch<double>({1, 3, 2, 5}), Mode::infer);
    ASSERT_EQ(y.time(), 2u);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0), 3.0);
    EXPECT_DOUBLE_EQ(y.at(0, 1, 0), 5.0);

    Network<double> net5({{LayerKind::maxpool1d, 0, 0, 2}}, {5, 1}, 1);
    auto y5 = net5.forward(tensor_1ch<double>({1, 2, 3, 4, 9}), Mode::infer);
    EXPECT_EQ(y5.time(), 2u);  // trailing remainder dropped
}

TEST(MaxPool, TieRoutesGradientToFirstIndex) {
    Network<double> net({{LayerKind::maxpool1d, 0, 0, 2}}, {2, 1}, 1);
    auto y = net.forward(tensor_1ch<double>({7, 7}), Mode::infer);
    ASSERT_EQ(y.time(), 1u);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0), 7.0);
    Tensor3<double> g(1, 1, 1);
    g.at(0, 0, 0) = 1.0;
    auto dx = net.backward(g);
    EXPECT_DOUBLE_EQ(dx.at(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(dx.at(0, 1, 0), 0.0);
}

TEST(BatchNorm, NormalizesTwoValueBatch) {
    Network<double> net({{LayerKind::batchnorm}}, {1, 1}, 1);
    Tensor3<double> x(2, 1, 1);
    x.at(0, 0, 0) = 1.0;
    x.at(1, 0, 0) = 3.0;
    auto y = net.forward(x, Mode::train);
    EXPECT_NEAR(y.at(0, 0, 0), -1.0, 1e-4);
    EXPECT_NEAR(y.at(1, 0, 0), 1.0, 1e-4);
}

TEST(BatchNorm, InferWithIdentityStatsIsIdentity) {
    Network<double> net({{LayerKind::batchnorm}}, {3, 2}, 1);
    Rng rng(5);
    auto x = random_tensor(2, 3, 2, rng);
    auto y = net.forward(x, Mode::infer);  // fresh stats: mean 0, var 1
    for (std::size_t i = 0; i < x.size(); ++i)
        EXPECT_NEAR(y.data()[i], x.data()[i], 1e-5);
}

TEST(BatchNorm, TrainModeBatchOfOneThrows) {
    Network<double> net({{LayerKind::batchnorm}}, {4, 1}, 1);
    Tensor3<double> x(1, 4, 1, 1.0);
    EXPECT_THROW(net.forward(x, Mode::train), DegenerateBatch);
}

TEST(BatchNorm, TrainOutputIsStandardizedPerChannel) {
    Network<double> net({{LayerKind::batchnorm}}, {50, 3}, 1);
    Rng rng(9);
    auto x = random_tensor(4, 50, 3, rng, -3.0, 7.0);
    auto y = net.forward(x, Mode::train);
    const double n = 4 * 50;
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0, var = 0;
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t t = 0; t < 50; ++t) mean += y.at(b, t, c);
        mean /= n;
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t t = 0; t < 50; ++t) var += (y.at(b, t, c) - mean) * (y.at(b, t, c) - mean);
        var /= n;
        EXPECT_LT(std::abs(mean), 1e-5);
        EXPECT_NEAR(var, 1.0, 1e-3);
    }
}

TEST(Dropout, RateZeroAndInferAreIdentity) {
    Network<double> train_net({{LayerKind::dropout, 0, 0, 0, 0, 0.0}}, {8, 1}, 1);
    Network<double> infer_net({{LayerKind::dropout, 0, 0, 0, 0, 0.25}}, {8, 1}, 1);
    Rng rng(3);
    auto x = random_tensor(2, 8, 1, rng);
    auto y0 = train_net.forward(x, Mode::train);
    auto y1 = infer_net.forward(x, Mode::infer);
    EXPECT_EQ(y0.data(), x.data());
    EXPECT_EQ(y1.data(), x.data());
}

TEST(Dropout, SameSeedSameMask) {
    std::vector<LayerSpec> spec = {{LayerKind::dropout, 0, 0, 0, 0, 0.5}};
    Network<double> a(spec, {16, 1}, 7);
    Network<double> b(spec, {16, 1}, 7);
    Rng rng(1);
    auto x = random_tensor(2, 16, 1, rng, 0.5, 1.5);
    EXPECT_EQ(a.forward(x, Mode::train).data(), b.forward(x, Mode::train).data());
}

TEST(Dropout, SeededMaskMeanMatchesIdentityWithinOnePercent) {
    Network<double> net({{LayerKind::dropout, 0, 0, 0, 0, 0.25}}, {10, 1}, 123);
    Tensor3<double> x(2, 10, 1, 1.0);
    std::vector<double> acc(x.size(), 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto y = net.forward(x, Mode::train);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += y.data()[j];
    }
    for (double a : acc) EXPECT_NEAR(a / n, 1.0, 0.01);
}

TEST(Heads, SigmoidAndCappedRelu) {
    Network<double> sig({{LayerKind::sigmoid}}, {1, 1}, 1);
    EXPECT_DOUBLE_EQ(sig.forward(tensor_1ch<double>({0.0}), Mode::infer).at(0, 0, 0), 0.5);

    Network<double> cap({{LayerKind::capped_relu, 0, 0, 0, 0, 0, 2047.0}}, {3, 1}, 1);
    auto y = cap.forward(tensor_1ch<double>({-3.0, 2500.0, 512.3}), Mode::infer);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(y.at(0, 1, 0), 2047.0);
    EXPECT_DOUBLE_EQ(y.at(0, 2, 0), 512.3);
}

TEST(BceLoss, ClosedFormCases) {
    auto r = bce_loss<double>({0.5}, {1.0});
    EXPECT_NEAR(r.value, std::log(2.0), 1e-12);

    auto perfect = bce_loss<double>({1.0 - 1e-7, 1e-7}, {1.0, 0.0});
    EXPECT_NEAR(perfect.value, 1e-7, 1e-9);

    auto weighted = bce_loss<double>({0.5}, {1.0}, 2.0);
    EXPECT_NEAR(weighted.value, 2.0 * std::log(2.0), 1e-12);
}

TEST(BceLoss, GradientMatchesClosedForm) {
    // d/dp of -(y ln p + (1-y) ln(1-p)) at p=0.25, y=1: -1/p = -4; mean over 2
    auto r = bce_loss<double>({0.25, 0.5}, {1.0, 0.0});
    EXPECT_NEAR(r.grad[0], -4.0 / 2.0, 1e-12);
    EXPECT_NEAR(r.grad[1], 2.0 / 2.0, 1e-12);
}

TEST(MseLoss, ClosedFormCases) {
    EXPECT_DOUBLE_EQ(mse_loss<double>({1.0, 2.0}, {1.0, 2.0}).value, 0.0);
    auto r = mse_loss<double>({0.0}, {2.0});
    EXPECT_DOUBLE_EQ(r.value, 4.0);
    EXPECT_DOUBLE_EQ(r.grad[0], -4.0);
    EXPECT_DOUBLE_EQ(mse_loss<double>({1.0, 3.0}, {1.0, 1.0}).value, 2.0);
}

TEST(Adam, FirstStepDeltaIsLearningRate) {
    Network<double> net({{LayerKind::dense, 0, 0, 0, 3}}, {1, 2}, 1);
    auto before = net.snapshot();
    for (auto& e : net.param_store())
        if (e.trainable) std::fill(e.grad->begin(), e.grad->end(), 1.0);
    Adam<double> opt(0.1);
    opt.step(net);
    auto after = net.snapshot();
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = 0; j < before[i].size(); ++j)
            EXPECT_NEAR(after[i][j] - before[i][j], -0.1, 1e-6);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    Network<double> net({{LayerKind::dense, 0, 0, 0, 3}}, {1, 2}, 1);
    auto before = net.snapshot();
    for (auto& e : net.param_store())
        if (e.trainable) std::fill(e.grad->begin(), e.grad->end(), 0.0);
    Adam<double> opt(0.1);
    opt.step(net);
    EXPECT_EQ(net.snapshot(), before);
}

TEST(Adam, SameSeedBitIdenticalAfterSteps) {
    std::vector<LayerSpec> specs = {{LayerKind::conv1d, 4, 3},
                                    {LayerKind::relu},
                                    {LayerKind::flatten},
                                    {LayerKind::dense, 0, 0, 0, 1},
                                    {LayerKind::sigmoid}};
    auto run = [&specs]() {
        Network<float> net(specs, {16, 2}, 99);
        Adam<float> opt(1e-2);
        Rng rng(4);
        Tensor3<float> x(2, 16, 2);
        for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-1, 1));
        std::vector<float> y = {1.0f, 0.0f};
        for (int step = 0; step < 5; ++step) {
            auto out = net.forward(x, Mode::train);
            auto loss = bce_loss<float>(out.data(), y);
            Tensor3<float> g(out.batch(), out.time(), out.channels());
            g.data() = loss.grad;
            net.backward(g);
            opt.step(net);
        }
        return net.snapshot();
    };
    EXPECT_EQ(run(), run());
}

TEST(Network, InferForwardIsPure) {
    std::vector<LayerSpec> specs = {{LayerKind::batchnorm},
                                    {LayerKind::conv1d, 3, 5},
                                    {LayerKind::relu},
                                    {LayerKind::maxpool1d, 0, 0, 2},
                                    {LayerKind::flatten},
                                    {LayerKind::dense, 0, 0, 0, 1},
                                    {LayerKind::sigmoid}};
    Network<float> net(specs, {32, 2}, 17);
    Rng rng(8);
    Tensor3<float> x(3, 32, 2);
    for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-2, 2));
    auto y1 = net.forward(x, Mode::infer);
    auto y2 = net.forward(x, Mode::infer);
    EXPECT_EQ(y1.data(), y2.data());
}

TEST(GradCheck, DenseSigmoidBce) {
    std::vector<LayerSpec> specs = {{LayerKind::dense, 0, 0, 0, 4},
                                    {LayerKind::relu},
                                    {LayerKind::dense, 0, 0, 0, 1},
                                    {LayerKind::sigmoid}};
    Network<double> net(specs, {1, 6}, 21);
    Rng rng(2);
    auto x = random_tensor(4, 1, 6, rng);
    auto report = grad_check(net, x, bce_check_loss({1.0, 0.0, 1.0, 0.0}));
    EXPECT_GT(report.checked, 0u);
    EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(GradCheck, ConvPoolDenseStack) {
    std::vector<LayerSpec> specs = {{LayerKind::conv1d, 3, 3},
                                    {LayerKind::relu},
                                    {LayerKind::maxpool1d, 0, 0, 2},
                                    {LayerKind::flatten},
                                    {LayerKind::dense, 0, 0, 0, 1},
                                    {LayerKind::sigmoid}};
    Network<double> net(specs, {12, 2}, 33);
    Rng rng(6);
    auto x = random_tensor(3, 12, 2, rng);
    auto report = grad_check(net, x, bce_check_loss({1.0, 1.0, 0.0}));
    EXPECT_GT(report.checked, 0u);
    EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(GradCheck, LinearWithMseIsNearExact) {
    std::vector<LayerSpec> specs = {{LayerKind::dense, 0, 0, 0, 1}};
    Network<double> net(specs, {1, 5}, 13);
    Rng rng(14);
    auto x = random_tensor(3, 1, 5, rng);
    auto report = grad_check(net, x, mse_check_loss({0.4, -0.2, 1.1}));
    EXPECT_EQ(report.skipped_kinks, 0u);
    EXPECT_LT(report.max_rel_error, 1e-6);
}

TEST(GradCheck, BatchNormAndDropoutStack) {
    std::vector<LayerSpec> specs = {{LayerKind::batchnorm},
                                    {LayerKind::conv1d, 2, 3},
                                    {LayerKind::relu},
                                    {LayerKind::batchnorm},
                                    {LayerKind::dropout, 0, 0, 0, 0, 0.3},
                                    {LayerKind::flatten},
                                    {LayerKind::dense, 0, 0, 0, 1},
                                    {LayerKind::capped_relu, 0, 0, 0, 0, 0, 10.0}};
    Network<double> net(specs, {10, 2}, 55);
    Rng rng(20);
    auto x = random_tensor(4, 10, 2, rng, 0.1, 2.0);
    auto report = grad_check(net, x, mse_check_loss({1.0, 2.0, 0.5, 1.5}));
    EXPECT_GT(report.checked, 0u);
    EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(Tensor, FiniteCheckRejectsNan) {
    Tensor3<double> x(1, 2, 1, 1.0);
    x.at(0, 1, 0) = std::nan("");
    EXPECT_THROW(x.check_finite("test"), NonFiniteLoss);
}
