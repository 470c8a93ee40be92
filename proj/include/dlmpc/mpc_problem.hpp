#pragma once

#include "dlmpc/topology.hpp"

#include <cmath>

namespace dlmpc
{

// Finite-horizon MPC problem with separable diagonal costs and box constraints.
// State bounds apply to x_1..x_T, input bounds to u_0..u_{T-1}.
struct MpcProblem
{
	NetworkModel model;
	Index horizon = 5;
	int locality = 1;
	Vector q;   // stage state weights, size n
	Vector r;   // stage input weights, size p
	Vector q_T; // terminal state weights, size n
	Vector x_lo, x_hi;
	Vector u_lo, u_hi;

	void validate() const
	{
		model.validate();
		const auto n = model.n();
		const auto p = model.p();
		if (horizon < 1)
			throw ModelError("horizon must be at least 1");
		if (locality < 0)
			throw ModelError("locality radius must be nonnegative");
		if (q.size() != n || q_T.size() != n || r.size() != p)
			throw ModelError("cost weight vectors do not match model dimensions");
		if (x_lo.size() != n || x_hi.size() != n || u_lo.size() != p || u_hi.size() != p)
			throw ModelError("bound vectors do not match model dimensions");
		if ((q.array() < 0).any() || (q_T.array() < 0).any())
			throw ModelError("state weights must be nonnegative");
		if ((r.array() <= 0).any())
			throw ModelError("input weights must be positive");
		for (Index k = 0; k < n; ++k)
			if (!(x_lo(k) <= x_hi(k)))
				throw ModelError("state bound interval is empty");
		for (Index k = 0; k < p; ++k)
			if (!(u_lo(k) <= u_hi(k)))
				throw ModelError("input bound interval is empty");
	}

	bool has_finite_bounds() const
	{
		return x_lo.array().isFinite().any() || x_hi.array().isFinite().any() || u_lo.array().isFinite().any() ||
		       u_hi.array().isFinite().any();
	}

	// Square root of the cost weight multiplying (row * x0)^2.
	double row_weight(const ResponseLayout& L, Index row) const
	{
		const auto t = L.time_of(row);
		const auto c = L.component_of(row);
		if (L.is_state_row(row))
			return std::sqrt(t == horizon ? q_T(c) : q(c));
		return std::sqrt(r(c));
	}

	std::pair<double, double> row_bounds(const ResponseLayout& L, Index row) const
	{
		const auto t = L.time_of(row);
		const auto c = L.component_of(row);
		if (L.is_state_row(row))
			return t == 0 ? std::pair{-kInf, kInf} : std::pair{x_lo(c), x_hi(c)};
		return {u_lo(c), u_hi(c)};
	}

	void drop_bounds()
	{
		x_lo.setConstant(-kInf);
		x_hi.setConstant(kInf);
		u_lo.setConstant(-kInf);
		u_hi.setConstant(kInf);
	}

	// Predicted horizon cost of a trajectory x_0..x_T (columns) and u_0..u_{T-1}.
	double trajectory_cost(const Matrix& xs, const Matrix& us) const
	{
		double cost = 0.0;
		for (Index t = 0; t < horizon; ++t)
			cost += xs.col(t).cwiseProduct(q).dot(xs.col(t)) + us.col(t).cwiseProduct(r).dot(us.col(t));
		cost += xs.col(horizon).cwiseProduct(q_T).dot(xs.col(horizon));
		return cost;
	}
};

} // namespace dlmpc
