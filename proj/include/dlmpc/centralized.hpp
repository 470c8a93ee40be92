#pragma once

#include "dlmpc/mpc_problem.hpp"
#include "dlmpc/qp.hpp"

#include <sstream>

namespace dlmpc
{

struct CentralizedSolution
{
	Vector u0;
	Matrix us; // p x T
	Matrix xs; // n x (T+1)
	double cost = 0.0;
	int iterations = 0;
};

// Condensed prediction x = Sx x0 + Su u with x stacked over t = 0..T and u over t = 0..T-1.
struct CondensedModel
{
	Matrix Sx;
	Matrix Su;

	CondensedModel(const NetworkModel& model, Index horizon)
	{
		const auto n = model.n();
		const auto p = model.p();
		const Matrix A = model.dense_A();
		const Matrix B = model.dense_B();
		Sx = Matrix::Zero(n * (horizon + 1), n);
		Su = Matrix::Zero(n * (horizon + 1), p * horizon);
		Sx.topRows(n).setIdentity();
		for (Index t = 1; t <= horizon; ++t)
		{
			Sx.middleRows(t * n, n) = A * Sx.middleRows((t - 1) * n, n);
			Su.middleRows(t * n, n) = A * Su.middleRows((t - 1) * n, n);
			Su.block(t * n, (t - 1) * p, n, p) = B;
		}
	}
};

// Centralized MPC without locality: condensed QP over the input sequence, with one slack per
// bounded state entry.
inline CentralizedSolution centralized_mpc(const MpcProblem& problem, const Vector& x0, const QpSettings& settings = {})
{
	problem.validate();
	const auto n = problem.model.n();
	const auto p = problem.model.p();
	const auto T = problem.horizon;
	if (x0.size() != n)
		throw std::invalid_argument("state has wrong dimension");
	const CondensedModel cm(problem.model, T);

	Vector qbar(n * (T + 1));
	for (Index t = 0; t < T; ++t)
		qbar.segment(t * n, n) = problem.q;
	qbar.tail(n) = problem.q_T;
	Vector rbar(p * T);
	for (Index t = 0; t < T; ++t)
		rbar.segment(t * p, p) = problem.r;

	IndexList bounded;
	for (Index t = 1; t <= T; ++t)
		for (Index c = 0; c < n; ++c)
			if (std::isfinite(problem.x_lo(c)) || std::isfinite(problem.x_hi(c)))
				bounded.push_back(t * n + c);

	const Index nu = p * T;
	const Index ns = static_cast<Index>(bounded.size());
	const Vector free_x = cm.Sx * x0;

	DenseQP qp;
	qp.H = Matrix::Zero(nu + ns, nu + ns);
	qp.H.topLeftCorner(nu, nu) = 2.0 * (cm.Su.transpose() * qbar.asDiagonal() * cm.Su);
	qp.H.topLeftCorner(nu, nu).diagonal() += 2.0 * rbar;
	qp.g = Vector::Zero(nu + ns);
	qp.g.head(nu) = 2.0 * cm.Su.transpose() * qbar.cwiseProduct(free_x);
	qp.A_eq = Matrix::Zero(ns, nu + ns);
	qp.b_eq = Vector::Zero(ns);
	qp.lb = Vector::Constant(nu + ns, -kInf);
	qp.ub = Vector::Constant(nu + ns, kInf);
	for (Index k = 0; k < nu; ++k)
	{
		qp.lb(k) = problem.u_lo(k % p);
		qp.ub(k) = problem.u_hi(k % p);
	}
	for (Index e = 0; e < ns; ++e)
	{
		const auto row = bounded[static_cast<std::size_t>(e)];
		qp.A_eq.row(e).head(nu) = cm.Su.row(row);
		qp.A_eq(e, nu + e) = -1.0;
		qp.b_eq(e) = -free_x(row);
		qp.lb(nu + e) = problem.x_lo(row % n);
		qp.ub(nu + e) = problem.x_hi(row % n);
	}

	const auto res = solve_qp(qp, settings);
	if (res.status != QpStatus::Optimal)
	{
		std::ostringstream os;
		os << "centralized MPC: QP returned " << to_string(res.status);
		throw InfeasibleProblemError(os.str());
	}

	CentralizedSolution sol;
	const Vector u = res.x.head(nu);
	const Vector x = free_x + cm.Su * u;
	sol.us = u.reshaped(p, T);
	sol.xs = x.reshaped(n, T + 1);
	sol.u0 = sol.us.col(0);
	sol.cost = problem.trajectory_cost(sol.xs, sol.us);
	sol.iterations = res.iterations;
	return sol;
}

} // namespace dlmpc
