#include "dlmpc/scenario.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace dlmpc;

namespace
{

struct Fixture
{
	NetworkModel model;
	LocalityIndex idx;
	std::unique_ptr<FeasibilityOperator> op;

	Fixture(NetworkModel m, int d, Index T) : model(std::move(m))
	{
		idx = build_locality_index(build_graph(model), model, d, T);
		op = std::make_unique<FeasibilityOperator>(model, T, idx);
	}
};

NetworkModel scalar(double a, double b)
{
	return NetworkModel::from_dense(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), {1}, {1});
}

Matrix random_causal_gain(std::mt19937_64& rng, Index n, Index p, Index T, double scale = 0.5)
{
	std::uniform_real_distribution<double> unit(-scale, scale);
	Matrix K = Matrix::Zero(p * T, n * (T + 1));
	for (Index t = 0; t < T; ++t)
		for (Index k = 0; k <= t; ++k)
			K.block(t * p, k * n, p, n) = Matrix::NullaryExpr(p, n, [&] { return unit(rng); });
	return K;
}

} // namespace

TEST(FeasibilityOperator, ShapeForScalarHorizonTwo)
{
	Fixture f(scalar(1.0, 1.0), 0, 2);
	EXPECT_EQ(f.op->Z_AB().rows(), 3);
	EXPECT_EQ(f.op->Z_AB().cols(), 5);
}

TEST(FeasibilityOperator, ScalarHorizonOneRows)
{
	const double a = 0.7, b = 0.4;
	Fixture f(scalar(a, b), 0, 1);
	const Matrix Z = f.op->dense_Z_AB();
	// Rows: [x0; x1], columns: [Phi_x0, Phi_x1, Phi_u0].
	Matrix expect(2, 3);
	expect << 1.0, 0.0, 0.0, -a, 1.0, -b;
	EXPECT_TRUE(Z.isApprox(expect));
	ResponseColumn resp{Matrix(2, 1), Matrix(1, 1)};
	const double u = -0.3;
	resp.phi_x << 1.0, a + b * u;
	resp.phi_u << u;
	EXPECT_LE(f.op->residual(resp), 1e-15);
}

TEST(ResponseFromController, ZeroGainGivesOpenLoopPowers)
{
	std::mt19937_64 rng(1);
	const auto m = oracle::random_network(rng, {2, 1}, {1, 1});
	const Index T = 4;
	const Matrix K = Matrix::Zero(m.p() * T, m.n() * (T + 1));
	const auto resp = response_from_controller(m, K, T);
	const Matrix A = m.dense_A();
	Matrix power = Matrix::Identity(3, 3);
	for (Index t = 0; t <= T; ++t)
	{
		EXPECT_TRUE(resp.phi_x.middleRows(t * 3, 3).isApprox(power, 1e-12));
		power = A * power;
	}
	EXPECT_EQ(resp.phi_u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ResponseFromController, DeadbeatGainCancelsInOneStep)
{
	// B = I, K_{t,t} = -A, so x_1 = A x_0 + B u_0 = 0.
	Matrix A(2, 2);
	A << 0.9, 0.2, -0.1, 0.8;
	const auto m = NetworkModel::from_dense(A, Matrix::Identity(2, 2), {1, 1}, {1, 1});
	const Index T = 3;
	Matrix K = Matrix::Zero(2 * T, 2 * (T + 1));
	for (Index t = 0; t < T; ++t)
		K.block(t * 2, t * 2, 2, 2) = -A;
	const auto resp = response_from_controller(m, K, T);
	EXPECT_TRUE(resp.phi_x.topRows(2).isIdentity());
	EXPECT_LE(resp.phi_x.bottomRows(2 * T).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ResponseFromController, MatchesSimulation)
{
	std::mt19937_64 rng(3);
	for (int trial = 0; trial < 10; ++trial)
	{
		const auto m = oracle::random_network(rng, {2, 1, 2}, {1, 1, 1});
		const Index T = 5;
		const Matrix K = random_causal_gain(rng, m.n(), m.p(), T);
		const auto resp = response_from_controller(m, K, T);
		const auto [px, pu] = oracle::simulate_response(m.dense_A(), m.dense_B(), K, T);
		EXPECT_LE((resp.phi_x - px).cwiseAbs().maxCoeff(), 1e-12);
		EXPECT_LE((resp.phi_u - pu).cwiseAbs().maxCoeff(), 1e-12);
	}
}

TEST(ResponseFromController, RejectsNonCausalGain)
{
	const auto m = scalar(1.0, 1.0);
	Matrix K = Matrix::Zero(2, 3);
	K(0, 1) = 1.0;
	EXPECT_THROW(response_from_controller(m, K, 2), ModelError);
	EXPECT_THROW(response_from_controller(m, Matrix::Zero(3, 3), 2), std::invalid_argument);
}

TEST(ControllerFromResponse, RoundTrip)
{
	std::mt19937_64 rng(4);
	for (int trial = 0; trial < 20; ++trial)
	{
		const auto m = oracle::random_network(rng, {1, 2}, {1, 1});
		const Index T = 4;
		const Matrix K = random_causal_gain(rng, m.n(), m.p(), T);
		const auto full = full_response_from_controller(m, K, T);
		EXPECT_LE((controller_from_response(full) - K).cwiseAbs().maxCoeff(), 1e-10);
	}
}

TEST(ControllerFromResponse, TrivialCases)
{
	const auto m = scalar(0.5, 1.0);
	const Index T = 3;
	const Matrix K0 = Matrix::Zero(T, T + 1);
	EXPECT_EQ(controller_from_response(full_response_from_controller(m, K0, T)).cwiseAbs().maxCoeff(), 0.0);
	FullResponse id{Matrix::Identity(T + 1, T + 1), Matrix::Zero(T, T + 1)};
	EXPECT_EQ(controller_from_response(id).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FeasibilityOperator, ResponsesOfRandomGainsAreFeasible)
{
	std::mt19937_64 rng(5);
	for (int trial = 0; trial < 10; ++trial)
	{
		const auto m = oracle::random_network(rng, {2, 2}, {1, 1});
		Fixture f(m, 2, 5);
		const auto resp = response_from_controller(m, random_causal_gain(rng, m.n(), m.p(), 5), 5);
		EXPECT_LE(f.op->residual(resp), 1e-10);
	}
}

TEST(ProjectColumn, MatchesKktOracleOnScalarChain)
{
	Matrix A(3, 3);
	A << 0.8, 0.3, 0.0, 0.2, 0.9, 0.1, 0.0, 0.4, 0.7;
	const auto m = NetworkModel::from_dense(A, Matrix::Identity(3, 3), {1, 1, 1}, {1, 1, 1});
	Fixture f(m, 1, 2);
	std::mt19937_64 rng(6);
	std::normal_distribution<double> normal;
	for (SubsystemId i = 0; i < 3; ++i)
	{
		const auto& s = f.op->slice(i);
		const Matrix V = Matrix::NullaryExpr(s.Z.cols(), s.I.cols(), [&] { return normal(rng); });
		const Matrix P = f.op->project_column(i, V);
		EXPECT_LE((P - oracle::constrained_least_squares(s.Z, s.I, V)).cwiseAbs().maxCoeff(), 1e-9);
	}
}

TEST(ProjectColumn, IdempotentAndMinimumNorm)
{
	const auto s = build_chain_scenario(5, 4, 1, Case::Unconstrained);
	Fixture f(s.model, 1, 4);
	std::mt19937_64 rng(8);
	std::normal_distribution<double> normal;
	for (SubsystemId i = 0; i < 5; ++i)
	{
		const auto& sl = f.op->slice(i);
		const Matrix V = Matrix::NullaryExpr(sl.Z.cols(), sl.I.cols(), [&] { return normal(rng); });
		const Matrix P = f.op->project_column(i, V);
		EXPECT_LE((sl.Z * P - sl.I).cwiseAbs().maxCoeff(), 1e-10);
		EXPECT_LE((f.op->project_column(i, P) - P).cwiseAbs().maxCoeff(), 1e-10);
		const Matrix zero = Matrix::Zero(V.rows(), V.cols());
		EXPECT_LE((f.op->project_column(i, zero) - sl.Z_pinv * sl.I).cwiseAbs().maxCoeff(), 1e-12);
		Matrix out(V.rows(), V.cols()), work;
		work.resize(sl.null_basis.cols(), V.cols());
		f.op->project_column_into(i, V, out, work);
		EXPECT_LE((out - P).cwiseAbs().maxCoeff(), 1e-14);
	}
}

TEST(ProjectColumn, WrongShapeThrows)
{
	const auto s = build_chain_scenario(3, 2, 1, Case::Unconstrained);
	Fixture f(s.model, 1, 2);
	EXPECT_THROW(f.op->project_column(0, Matrix::Zero(1, 1)), std::invalid_argument);
}

TEST(FeasibilityOperator, RejectsInfeasibleLocality)
{
	// Subsystem 0 drives subsystem 1 with no input to cancel it.
	Matrix A(2, 2);
	A << 1.0, 0.0, 1.0, 1.0;
	const auto m = NetworkModel::from_dense(A, Matrix::Zero(2, 2), {1, 1}, {1, 1});
	EXPECT_THROW(FeasibilityOperator(m, 3, build_locality_index(build_graph(m), m, 0, 3)), ModelError);
	EXPECT_NO_THROW(FeasibilityOperator(m, 3, build_locality_index(build_graph(m), m, 3, 3)));

	// With an input on subsystem 1 the coupling can be cancelled inside one extra hop.
	Matrix B = Matrix::Zero(2, 2);
	B(1, 1) = 1.0;
	const auto actuated = NetworkModel::from_dense(A, B, {1, 1}, {1, 1});
	EXPECT_NO_THROW(FeasibilityOperator(actuated, 3, build_locality_index(build_graph(actuated), actuated, 0, 3)));
}
