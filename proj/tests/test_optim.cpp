#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "phaseclf/optim.hpp"

using namespace phaseclf;

namespace {

ParamSet<double> scalar_set(const std::string& name, double value) {
    ParamSet<double> p;
    Tensor<double> t({1});
    t.data[0] = value;
    p.add(name, t);
    return p;
}

}  // namespace

// Reference values computed independently by hand-unrolling the update in 64-bit arithmetic.
TEST(Adam, TwoStepTrace) {
    auto theta = scalar_set("w", 0.0);
    auto state = AdamState<double>::fresh(theta);
    AdamHyper h;
    h.lr = 0.1;

    adam_step(theta, scalar_set("w", 1.0), state, h);
    EXPECT_DOUBLE_EQ(state.m["w"].data[0], 0.09999999999999998);
    EXPECT_DOUBLE_EQ(state.v["w"].data[0], 0.0010000000000000009);
    EXPECT_DOUBLE_EQ(theta["w"].data[0], -0.09999999900000002);

    adam_step(theta, scalar_set("w", -1.0), state, h);
    EXPECT_DOUBLE_EQ(state.m["w"].data[0], -0.009999999999999995);
    EXPECT_DOUBLE_EQ(state.v["w"].data[0], 0.0019990000000000016);
    EXPECT_DOUBLE_EQ(theta["w"].data[0], -0.0947368411578948);
    EXPECT_EQ(state.t, 2u);
}

TEST(Adam, FirstStepHasMagnitudeLr) {
    for (const double g : {1e-3, 0.5, 7.0, -42.0}) {
        auto theta = scalar_set("w", 1.0);
        auto state = AdamState<double>::fresh(theta);
        AdamHyper h;
        adam_step(theta, scalar_set("w", g), state, h);
        const double expected = h.lr * std::abs(g) / (std::abs(g) + h.epsilon);
        EXPECT_NEAR(std::abs(theta["w"].data[0] - 1.0), expected, 1e-15);
        EXPECT_LT((theta["w"].data[0] - 1.0) * g, 0.0);
    }
}

TEST(Adam, ZeroGradientLeavesParameterUnchanged) {
    auto theta = scalar_set("w", 3.0);
    auto state = AdamState<double>::fresh(theta);
    adam_step(theta, scalar_set("w", 0.0), state, AdamHyper{});
    EXPECT_EQ(theta["w"].data[0], 3.0);
}

// Each coordinate evolves exactly as if it were updated alone.
TEST(Adam, CoordinatesAreIndependent) {
    Rng rng(6);
    ParamSet<double> joint;
    joint.add("a", Tensor<double>({3}));
    joint.add("b", Tensor<double>({2, 2}));
    for (auto& t : joint.tensors())
        for (auto& v : t.data) v = rng.uniform(-1, 1);
    std::vector<ParamSet<double>> solo;
    for (const auto& t : joint.tensors())
        for (double v : t.data) solo.push_back(scalar_set("w", v));

    auto joint_state = AdamState<double>::fresh(joint);
    std::vector<AdamState<double>> solo_state;
    for (const auto& s : solo) solo_state.push_back(AdamState<double>::fresh(s));
    AdamHyper h;
    h.lr = 0.01;
    for (int step = 0; step < 25; ++step) {
        auto g = joint.zeros_like();
        std::size_t k = 0;
        for (auto& t : g.tensors())
            for (auto& v : t.data) {
                v = rng.uniform(-2, 2);
                adam_step(solo[k], scalar_set("w", v), solo_state[k], h);
                ++k;
            }
        adam_step(joint, g, joint_state, h);
    }
    std::size_t k = 0;
    for (const auto& t : joint.tensors())
        for (double v : t.data) EXPECT_EQ(v, solo[k++]["w"].data[0]);
}

TEST(Adam, StepBoundedByTenTimesLr) {
    Rng rng(8);
    AdamHyper h;
    h.lr = 0.05;
    auto theta = scalar_set("w", 0.0);
    auto state = AdamState<double>::fresh(theta);
    for (int step = 0; step < 2000; ++step) {
        const double scale = std::pow(10.0, rng.uniform(-6, 6));
        const double before = theta["w"].data[0];
        adam_step(theta, scalar_set("w", rng.uniform(-1, 1) * scale), state, h);
        EXPECT_LE(std::abs(theta["w"].data[0] - before), 10 * h.lr);
    }
}

TEST(Adam, NonFiniteGradientNamesParameter) {
    auto theta = scalar_set("dense0.W", 1.0);
    auto state = AdamState<double>::fresh(theta);
    try {
        adam_step(theta, scalar_set("dense0.W", std::numeric_limits<double>::quiet_NaN()), state, AdamHyper{});
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("dense0.W"), std::string::npos);
    }
    EXPECT_EQ(theta["dense0.W"].data[0], 1.0);
    EXPECT_EQ(state.t, 0u);
}

TEST(Adam, HyperValidation) {
    AdamHyper h;
    EXPECT_NO_THROW(h.validate());
    h.lr = 0;
    EXPECT_THROW(h.validate(), ConfigError);
    h = {};
    h.beta2 = 1.0;
    EXPECT_THROW(h.validate(), ConfigError);
    h = {};
    h.epsilon = -1;
    EXPECT_THROW(h.validate(), ConfigError);
}

TEST(Adam, SinglePrecisionTracksDouble) {
    auto d = scalar_set("w", 0.5);
    auto f = d.cast<float>();
    auto sd = AdamState<double>::fresh(d);
    auto sf = AdamState<float>::fresh(f);
    for (int step = 1; step <= 10; ++step) {
        const double g = std::sin(step);
        adam_step(d, scalar_set("w", g), sd, AdamHyper{});
        adam_step(f, scalar_set("w", g).cast<float>(), sf, AdamHyper{});
    }
    EXPECT_NEAR(f["w"].data[0], d["w"].data[0], 1e-6);
}

TEST(ClipGlobalNorm, ScalesOnlyWhenAbove) {
    ParamSet<double> g;
    Tensor<double> a({2});
    a.data = {3, 0};
    Tensor<double> b({1});
    b.data = {4};
    g.add("a", a);
    g.add("b", b);
    auto small = g;
    EXPECT_DOUBLE_EQ(clip_global_norm(small, 10.0), 5.0);
    EXPECT_TRUE(small == g);
    EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(g["a"].data[0], 0.6);
    EXPECT_DOUBLE_EQ(g["b"].data[0], 0.8);
}
