#include "dlmpc/centralized.hpp"
#include "dlmpc/scenario.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace dlmpc;

namespace
{

DenseQP box_qp(Matrix H, Vector g, Vector lb, Vector ub)
{
	auto qp = DenseQP::unconstrained(std::move(H), std::move(g));
	qp.lb = std::move(lb);
	qp.ub = std::move(ub);
	return qp;
}

MpcProblem unbounded_problem(NetworkModel m, Index T)
{
	MpcProblem p;
	const auto n = m.n(), pu = m.p();
	p.model = std::move(m);
	p.horizon = T;
	p.q = Vector::Ones(n);
	p.q_T = Vector::Ones(n);
	p.r = Vector::Ones(pu);
	p.x_lo = Vector::Constant(n, -kInf);
	p.x_hi = Vector::Constant(n, kInf);
	p.u_lo = Vector::Constant(pu, -kInf);
	p.u_hi = Vector::Constant(pu, kInf);
	return p;
}

// Sparse formulation over z = [x_1..x_T, u_0..u_{T-1}] with dynamics as equalities, solved by the KKT system.
std::pair<Matrix, Matrix> sparse_mpc(const Matrix& A, const Matrix& B, const Vector& q, const Vector& r, const Vector& x0, Index T)
{
	const Index n = A.rows(), p = B.cols();
	const Index nz = n * T + p * T, m = n * T;
	Matrix H = Matrix::Zero(nz, nz);
	for (Index t = 0; t < T; ++t)
	{
		H.block(t * n, t * n, n, n) = 2.0 * q.asDiagonal().toDenseMatrix();
		H.block(n * T + t * p, n * T + t * p, p, p) = 2.0 * r.asDiagonal().toDenseMatrix();
	}
	Matrix E = Matrix::Zero(m, nz);
	Vector e = Vector::Zero(m);
	for (Index t = 0; t < T; ++t)
	{
		E.block(t * n, t * n, n, n).setIdentity();
		if (t > 0)
			E.block(t * n, (t - 1) * n, n, n) = -A;
		else
			e.head(n) = A * x0;
		E.block(t * n, n * T + t * p, n, p) = -B;
	}
	Matrix K = Matrix::Zero(nz + m, nz + m);
	K.topLeftCorner(nz, nz) = H;
	K.topRightCorner(nz, m) = E.transpose();
	K.bottomLeftCorner(m, nz) = E;
	Vector rhs = Vector::Zero(nz + m);
	rhs.tail(m) = e;
	const Vector z = K.partialPivLu().solve(rhs);
	Matrix xs(n, T + 1), us(p, T);
	xs.col(0) = x0;
	for (Index t = 0; t < T; ++t)
	{
		xs.col(t + 1) = z.segment(t * n, n);
		us.col(t) = z.segment(n * T + t * p, p);
	}
	return {xs, us};
}

} // namespace

TEST(SolveQp, IdentityWithBoxIsZero)
{
	const auto r = solve_qp(box_qp(Matrix::Identity(3, 3), Vector::Zero(3), Vector::Constant(3, -1.0), Vector::Ones(3)));
	EXPECT_EQ(r.status, QpStatus::Optimal);
	EXPECT_LE(r.x.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveQp, ClippedScalar)
{
	// min 1/2 x^2 - 2x on [-1, 0.5]
	const auto r = solve_qp(box_qp(Matrix::Identity(1, 1), Vector::Constant(1, -2.0), Vector::Constant(1, -1.0),
	                               Vector::Constant(1, 0.5)));
	EXPECT_EQ(r.status, QpStatus::Optimal);
	EXPECT_NEAR(r.x(0), 0.5, 1e-10);
	EXPECT_NEAR(r.z_hi(0), 1.5, 1e-8);
}

TEST(SolveQp, RandomBoxAgainstProjectedGradient)
{
	std::mt19937_64 rng(21);
	std::normal_distribution<double> normal;
	for (int trial = 0; trial < 20; ++trial)
	{
		const Matrix G = Matrix::NullaryExpr(8, 8, [&] { return normal(rng); });
		const Matrix H = G * G.transpose() + 0.5 * Matrix::Identity(8, 8);
		const Vector g = Vector::NullaryExpr(8, [&] { return 3.0 * normal(rng); });
		Vector lb = Vector::Constant(8, -1.0), ub = Vector::Ones(8);
		if (trial % 3 == 0)
			lb(2) = -kInf;
		const auto qp = box_qp(H, g, lb, ub);
		const auto r = solve_qp(qp);
		ASSERT_EQ(r.status, QpStatus::Optimal);
		EXPECT_LE((r.x - oracle::projected_gradient(H, g, lb, ub)).cwiseAbs().maxCoeff(), 1e-7);
		EXPECT_LE(qp_kkt_residuals(qp, r).max(), 1e-8);
	}
}

TEST(SolveQp, EqualityAndFixedVariables)
{
	// min |x|^2 s.t. x0 + x1 + x2 = 3, x2 fixed at 0.
	auto qp = DenseQP::unconstrained(2.0 * Matrix::Identity(3, 3), Vector::Zero(3));
	qp.A_eq = Matrix::Ones(1, 3);
	qp.b_eq = Vector::Constant(1, 3.0);
	qp.lb(2) = qp.ub(2) = 0.0;
	const auto r = solve_qp(qp);
	ASSERT_EQ(r.status, QpStatus::Optimal);
	EXPECT_NEAR(r.x(0), 1.5, 1e-9);
	EXPECT_NEAR(r.x(1), 1.5, 1e-9);
	EXPECT_NEAR(r.x(2), 0.0, 1e-12);
}

TEST(SolveQp, Errors)
{
	auto qp = box_qp(Matrix::Identity(2, 2), Vector::Zero(2), Vector::Ones(2), Vector::Zero(2));
	EXPECT_EQ(solve_qp(qp).status, QpStatus::Infeasible);
	Matrix H = Matrix::Identity(2, 2);
	H(1, 1) = -1.0;
	EXPECT_THROW(solve_qp(DenseQP::unconstrained(H, Vector::Zero(2))), ModelError);
	EXPECT_THROW(solve_qp(DenseQP::unconstrained(Matrix::Identity(2, 2), Vector::Zero(3))), ModelError);
}

TEST(CentralizedMpc, ZeroStateGivesZeroInput)
{
	auto s = build_chain_scenario(4, 5, 1, Case::Explicit);
	const auto problem = make_problem(s);
	const auto sol = centralized_mpc(problem, Vector::Zero(problem.model.n()));
	EXPECT_LE(sol.us.cwiseAbs().maxCoeff(), 1e-9);
	EXPECT_LE(sol.cost, 1e-12);
}

TEST(CentralizedMpc, UnconstrainedMatchesSparseFormulation)
{
	Matrix A(2, 2);
	A << 1.0, 0.1, -0.3, 0.7;
	Matrix B(2, 1);
	B << 0.0, 0.1;
	const auto m = NetworkModel::from_dense(A, B, {2}, {1});
	auto problem = unbounded_problem(m, 5);
	const Vector x0 = Vector::LinSpaced(2, 0.4, 0.9);
	const auto sol = centralized_mpc(problem, x0);
	const auto [xs, us] = sparse_mpc(A, B, problem.q, problem.r, x0, 5);
	EXPECT_LE((sol.us - us).cwiseAbs().maxCoeff(), 1e-9);
	EXPECT_LE((sol.xs - xs).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CentralizedMpc, RespectsStateBounds)
{
	const auto s = build_chain_scenario(3, 5, 1, Case::Explicit);
	auto problem = make_problem(s);
	problem.x_hi.setConstant(0.3);
	problem.x_lo.setConstant(-0.3);
	const Vector x0 = Vector::Constant(problem.model.n(), 0.25);
	const auto sol = centralized_mpc(problem, x0);
	EXPECT_LE(sol.xs.rightCols(5).maxCoeff(), 0.3 + 1e-8);
	EXPECT_GE(sol.xs.rightCols(5).minCoeff(), -0.3 - 1e-8);
	problem.x_hi.setConstant(0.01);
	problem.x_lo.setConstant(-0.01);
	EXPECT_THROW(centralized_mpc(problem, Vector::Ones(problem.model.n())), InfeasibleProblemError);
}
