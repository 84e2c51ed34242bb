#include <gtest/gtest.h>

#include <array>

#include <lcpt/oracle.hpp>
#include <lcpt/regression.hpp>

#include "test_support.hpp"

using namespace lcpt;
using O = OperatorIndex;

TEST(InitialVectors, UndrivenLimitVanishes)
{
    Vector9c alpha = Vector9c::Zero();
    alpha(to_index(O::aa)) = 1.0;
    const SteadyState ss(alpha);
    EXPECT_EQ(second_order_initial(ss).norm(), 0.0);
    EXPECT_EQ(third_order_initial(ss).norm(), 0.0);
}

TEST(InitialVectors, NamedEntries)
{
    const auto ss = solve_steady_state(working_point());
    const complex ea = ss(O::ea);
    const complex ee = ss(O::ee);
    const auto g2 = second_order_initial(ss);
    EXPECT_LT(std::abs(g2(to_index(O::ae)) - (ee - std::norm(ea))), 1e-15);
    const auto g3 = third_order_initial(ss);
    EXPECT_LT(std::abs(g3(to_index(O::ea)) - 2.0 * ea * (std::norm(ea) - ee)),
              1e-15);
    EXPECT_LT(std::abs(g3(to_index(O::ee)) - ee * (2.0 * std::norm(ea) - ee)),
              1e-15);
}

TEST(InitialVectors, MatchDirectOperatorAlgebra)
{
    auto sets = test_support::random_params(50, 17);
    sets.push_back(working_point());
    for (const auto& p : sets) {
        const auto ss = solve_steady_state(p);
        const oracle::DensityMatrix rho(ss.density_matrix());
        EXPECT_LT((second_order_initial(ss) - oracle::direct_second_order(rho))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
        EXPECT_LT((third_order_initial(ss) - oracle::direct_third_order(rho))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
    }
}

TEST(InitialVectors, KindsMapToRules)
{
    const auto ss = solve_steady_state(working_point());
    EXPECT_EQ(initial_vector(ss, InitialConditionKind::SecondOrder),
              second_order_initial(ss));
    EXPECT_EQ(initial_vector(ss, InitialConditionKind::IntensityBranch),
              second_order_initial(ss));
    EXPECT_EQ(initial_vector(ss, InitialConditionKind::ThirdOrder),
              third_order_initial(ss));
}

TEST(Propagate, ZeroStaysZero)
{
    const auto gen = build_bloch_generator(working_point());
    const auto t = propagate(gen, Vector9c::Zero(), TauGrid{0.01, 100});
    for (const auto& v : t.values) {
        EXPECT_EQ(v.norm(), 0.0);
    }
}

TEST(Propagate, DiagonalMatrixGivesExponentials)
{
    Matrix9c m = Matrix9c::Zero();
    for (int k = 0; k < 9; ++k) {
        m(k, k) = -static_cast<double>(k + 1);
    }
    const Vector9c ones = Vector9c::Ones();
    const TauGrid grid{0.01, 301};
    const auto t = propagate(m, ones, grid);
    EXPECT_EQ(t.values[0], ones);
    for (std::size_t i = 0; i < grid.count; ++i) {
        for (int k = 0; k < 9; ++k) {
            EXPECT_NEAR(t.values[i](k).real(), std::exp(-(k + 1) * grid[i]),
                        1e-12);
        }
    }
}

TEST(Propagate, DivergenceIsReported)
{
    Matrix9c m = Matrix9c::Identity();
    EXPECT_THROW(propagate(m, Vector9c::Ones(), TauGrid{0.1, 200}),
                 propagation_diverged);
}

TEST(Propagate, MatchesRk4OfLinearSystem)
{
    const auto fl = analyze(working_point());
    const TauGrid grid{0.01, 2001};
    const auto t = propagate(fl.generator, fl.third, grid,
                             InitialConditionKind::ThirdOrder);
    const auto ref = oracle::integrate_linear(fl.matrix(), fl.third, grid, 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        worst = std::max(worst, (t.values[i] - ref[i]).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(Propagate, FluctuationVectorsStayTraceFree)
{
    for (const auto& p : test_support::random_params(20, 23)) {
        const auto fl = analyze(p);
        for (const Vector9c& g0 : std::array<Vector9c, 2>{fl.second, fl.third}) {
            const auto t = propagate(fl.generator, g0, TauGrid{0.05, 400});
            for (const auto& v : t.values) {
                EXPECT_LT(std::abs((trace_row() * v)(0)), 1e-10);
            }
        }
    }
}

TEST(Propagate, SemigroupProperty)
{
    for (const auto& p : test_support::random_params(10, 29)) {
        const auto fl = analyze(p);
        const TauGrid grid{0.01, 501};
        const auto full = propagate_values(fl.matrix(), fl.second, grid);
        // tau1 = 1.7 then tau2 = 3.3 vs tau1 + tau2 = 5.0
        const auto first = propagate_values(fl.matrix(), fl.second,
                                            TauGrid{0.01, 171});
        const auto second = propagate_values(fl.matrix(), first.back(),
                                             TauGrid{0.01, 331});
        EXPECT_LT((second.back() - full.back()).norm(), 1e-10);
        const Matrix9c direct = (fl.matrix() * complex(5.0)).exp();
        EXPECT_LT((direct * fl.second - full.back()).norm(), 1e-10);
    }
}

TEST(Propagate, AutoGridDecays)
{
    const auto fl = analyze(working_point());
    const TauGrid grid = fl.auto_grid();
    EXPECT_GT(grid.count, 1u);
    EXPECT_LE(grid.max(), default_tau_cap + 1e-9);
    const auto t2 = propagate(fl.generator, fl.second, grid);
    const auto t3 = propagate(fl.generator, fl.third, grid);
    EXPECT_LT(t2.values.back().norm(), 1e-8);
    EXPECT_LT(t3.values.back().norm(), 1e-8);
    // one step earlier at least one seed was still above tolerance
    const auto shorter = TauGrid{grid.step, grid.count - 1};
    const auto s2 = propagate(fl.generator, fl.second, shorter);
    const auto s3 = propagate(fl.generator, fl.third, shorter);
    EXPECT_TRUE(s2.values.back().norm() >= 1e-8 ||
                s3.values.back().norm() >= 1e-8);
}

TEST(Propagate, AdjointPairedComponentsAreConjugate)
{
    // <dsigma_ea(0) dsigma_jk(tau) dsigma_ae(0)> is the conjugate of the
    // kj component, since the seed is built from adjoint-paired operators.
    const auto fl = analyze(working_point());
    const auto t = propagate(fl.generator, fl.third, TauGrid{0.02, 500});
    for (const auto& v : t.values) {
        for (O op : all_operators) {
            EXPECT_LT(std::abs(v(to_index(op)) -
                               std::conj(v(to_index(adjoint(op))))),
                      1e-12);
        }
    }
}
