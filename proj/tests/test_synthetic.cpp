#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "etbo/domain.hpp"
#include "etbo/synthetic.hpp"

namespace {

    std::shared_ptr<const etbo::GpSampler> line_sampler(int n) {
        const etbo::SquaredExponentialKernel k(1, 0.2);
        etbo::PointSet grid;
        for (int i = 0; i < n; ++i) {
            grid.push_back(Eigen::VectorXd::Constant(1, i / std::max(1.0, n - 1.0)));
        }
        return std::make_shared<const etbo::GpSampler>(k, grid);
    }

    struct ChainStats {
        double lag1 = 0.0;
        double var = 0.0;
    };

    ChainStats chain_stats(double eps, int seeds, long t) {
        const auto sampler = line_sampler(6);
        double sxx = 0.0, syy = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
        for (int s = 0; s < seeds; ++s) {
            etbo::MarkovChainObjective f(sampler, eps, static_cast<std::uint64_t>(s));
            for (long k = 2; k <= t; ++k) {
                f.advance(k);
            }
            const double a = f.values()(2);
            f.advance(t + 1);
            const double b = f.values()(2);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
        const double n = seeds;
        const double va = sxx / n - (sx / n) * (sx / n);
        const double vb = syy / n - (sy / n) * (sy / n);
        const double c = sxy / n - (sx / n) * (sy / n);
        return {c / std::sqrt(va * vb), vb};
    }

} // namespace

TEST(MarkovChain, LagOneCorrelationAndMarginalVariance) {
    for (double eps : {0.03, 0.1, 0.5}) {
        const auto s = chain_stats(eps, 10000, 5);
        EXPECT_NEAR(s.lag1, std::sqrt(1.0 - eps), 0.02) << eps;
        EXPECT_GE(s.var, 0.9);
        EXPECT_LE(s.var, 1.1);
    }
}

TEST(MarkovChain, EpsilonZeroIsStatic) {
    etbo::MarkovChainObjective f(line_sampler(5), 0.0, 3);
    const Eigen::VectorXd first = f.values();
    for (long t = 2; t < 20; ++t) {
        f.advance(t);
    }
    EXPECT_EQ(f.values(), first);
}

TEST(MarkovChain, EpsilonOneIsIndependentRedraw) {
    const auto s = chain_stats(1.0, 4000, 3);
    EXPECT_NEAR(s.lag1, 0.0, 0.05);
}

TEST(MarkovChain, DeterministicPerSeed) {
    const auto sampler = line_sampler(5);
    etbo::MarkovChainObjective a(sampler, 0.1, 9), b(sampler, 0.1, 9), c(sampler, 0.1, 10);
    for (long t = 2; t < 10; ++t) {
        a.advance(t);
        b.advance(t);
        c.advance(t);
    }
    EXPECT_EQ(a.values(), b.values());
    EXPECT_NE(a.values(), c.values());
}

TEST(MarkovChain, MustAdvanceOneStepAtATime) {
    etbo::MarkovChainObjective f(line_sampler(3), 0.1, 1);
    EXPECT_THROW(f.advance(3), std::invalid_argument);
    f.advance(2);
    EXPECT_THROW(f.advance(2), std::invalid_argument);
}

TEST(MarkovChain, ScheduleSwitchesRate) {
    const etbo::EpsilonSchedule s(std::vector<etbo::EpsilonSchedule::Piece>{{1, 0.0}, {10, 0.2}, {20, 0.05}});
    EXPECT_EQ(s.at(1), 0.0);
    EXPECT_EQ(s.at(9), 0.0);
    EXPECT_EQ(s.at(10), 0.2);
    EXPECT_EQ(s.at(500), 0.05);
    EXPECT_EQ(s.max_epsilon(), 0.2);
    etbo::MarkovChainObjective f(line_sampler(4), s, 2);
    const Eigen::VectorXd first = f.values();
    for (long t = 2; t < 10; ++t) {
        f.advance(t);
    }
    EXPECT_EQ(f.values(), first);
    f.advance(10);
    EXPECT_NE(f.values(), first);
    EXPECT_THROW(etbo::EpsilonSchedule(std::vector<etbo::EpsilonSchedule::Piece>{{2, 0.1}}), etbo::ConfigError);
}

TEST(SuddenChange, SwitchesAtChangeStep) {
    etbo::SuddenChangeObjective f(line_sampler(5), 4, 7);
    const Eigen::VectorXd before = f.values();
    f.advance(2);
    f.advance(3);
    EXPECT_EQ(f.values(), before);
    f.advance(4);
    EXPECT_NE(f.values(), before);
}

TEST(Replay, ColumnsInOrder) {
    auto table = std::make_shared<const Eigen::MatrixXd>((Eigen::MatrixXd(2, 3) << 1, 2, 3, 4, 5, 6).finished());
    etbo::ReplayObjective f(table);
    EXPECT_EQ(f.values()(1), 4.0);
    f.advance(2);
    f.advance(3);
    EXPECT_EQ(f.values()(0), 3.0);
    EXPECT_THROW(f.advance(4), std::out_of_range);
}

TEST(Observe, NoiseHasRequestedVariance) {
    Eigen::VectorXd f = Eigen::VectorXd::Constant(3, 2.0);
    etbo::Rng rng(4);
    double s = 0.0, ss = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const double y = etbo::observe(f, 1, 0.02, rng) - 2.0;
        s += y;
        ss += y * y;
    }
    EXPECT_NEAR(s / n, 0.0, 0.003);
    EXPECT_NEAR(ss / n, 0.02, 0.001);
    EXPECT_EQ(etbo::observe(f, 0, 0.0, rng), 2.0);
    EXPECT_THROW((void)etbo::observe(f, 3, 0.1, rng), std::out_of_range);
}

TEST(Observe, OffGridQueryUsesNearestPoint) {
    const auto dom = etbo::Domain::grid({0.0}, {1.0}, {5});
    const etbo::SquaredExponentialKernel k(1, 0.3);
    auto sampler = std::make_shared<const etbo::GpSampler>(k, dom.candidates());
    const etbo::Objective obj = etbo::MarkovChainObjective(sampler, 0.0, 1);
    etbo::Rng rng(1);
    EXPECT_EQ(etbo::observe(obj, dom, Eigen::VectorXd::Constant(1, 0.27), 0.0, rng), obj.values()(1));
}

TEST(Optimum, ExhaustiveArgmaxLowestIndexOnTies) {
    Eigen::VectorXd f(5);
    f << 0.1, 0.9, 0.3, 0.9, -1.0;
    const auto o = etbo::true_optimum(f);
    EXPECT_EQ(o.index, 1u);
    EXPECT_EQ(o.value, 0.9);
}

TEST(Domain, GridOrderingAndNearest) {
    const auto dom = etbo::Domain::grid({0.0, 0.0}, {1.0, 1.0}, {3, 4});
    ASSERT_EQ(dom.size(), 12u);
    EXPECT_DOUBLE_EQ(dom.candidates()[1](1), 1.0 / 3.0); // last coordinate varies fastest
    EXPECT_DOUBLE_EQ(dom.candidates()[4](0), 0.5);
    EXPECT_EQ(dom.nearest_index(Eigen::Vector2d(0.49, 0.99)), 7u);
}
