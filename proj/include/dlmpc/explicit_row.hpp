#pragma once

#include "dlmpc/types.hpp"

#include <cmath>
#include <sstream>

namespace dlmpc
{

// One row of the row-partition subproblem:
//   min_phi  weight^2 (phi x0)^2 + rho/2 |phi - a|^2   s.t.  lo <= phi x0 <= hi.
struct RowProblem
{
	RowVector a;
	Vector x0;
	double rho = 1.0;
	double lo = -kInf;
	double hi = kInf;
	double weight = 1.0;
};

enum class Region
{
	UpperActive,
	LowerActive,
	Interior,
};

inline const char* to_string(Region r)
{
	switch (r)
	{
	case Region::UpperActive: return "UPPER_ACTIVE";
	case Region::LowerActive: return "LOWER_ACTIVE";
	case Region::Interior: return "INTERIOR";
	}
	return "?";
}

struct RowSolution
{
	RowVector phi;
	double lambda1 = 0.0; // multiplier of phi x0 <= hi
	double lambda2 = 0.0; // multiplier of phi x0 >= lo
	Region region = Region::Interior;
};

// Rank-one inverse M = (2 c^2 x0 x0' + rho I)^{-1} = (I - beta x0 x0') / rho,
// beta = 2c^2 / (rho + 2c^2 |x0|^2). M is never formed.
class ShermanMorrison
{
public:
	ShermanMorrison() = default;

	ShermanMorrison(const Vector& x0, double rho, double weight) : x0_(x0), rho_(rho)
	{
		if (!(rho > 0.0))
			throw std::invalid_argument("rho must be positive");
		const double c2 = 2.0 * weight * weight;
		norm2_ = x0.squaredNorm();
		beta_ = c2 / (rho + c2 * norm2_);
		// x0' M x0 = |x0|^2 (1 - beta |x0|^2) / rho = |x0|^2 / (rho + 2c^2 |x0|^2)
		quad_ = norm2_ / (rho + c2 * norm2_);
		mx0_scale_ = 1.0 / (rho + c2 * norm2_);
	}

	// v * M
	RowVector apply(const RowVector& v) const
	{
		if (v.size() != x0_.size())
			throw std::invalid_argument("row vector and x0 differ in length");
		return (v - (beta_ * v.dot(x0_)) * x0_.transpose()) / rho_;
	}

	// out = v * M; out must not alias v.
	void apply_into(const RowVector& v, RowVector& out) const
	{
		const double c = beta_ * v.dot(x0_);
		out = (v - c * x0_.transpose()) / rho_;
	}

	// v * M * x0 without forming v*M.
	double apply_x0(const RowVector& v) const { return v.dot(x0_) * mx0_scale_; }

	double quad() const noexcept { return quad_; }
	double rho() const noexcept { return rho_; }
	const Vector& x0() const noexcept { return x0_; }
	bool degenerate() const noexcept { return norm2_ == 0.0; }

private:
	Vector x0_;
	double rho_ = 1.0;
	double norm2_ = 0.0;
	double beta_ = 0.0;
	double quad_ = 0.0;
	double mx0_scale_ = 0.0;
};

inline RowVector sherman_morrison_inverse_apply(const Vector& x0, double rho, double weight, const RowVector& v)
{
	return ShermanMorrison(x0, rho, weight).apply(v);
}

namespace detail
{

inline void check_bounds(double lo, double hi, Index row)
{
	if (std::isnan(lo) || std::isnan(hi) || lo > hi)
	{
		std::ostringstream os;
		os << "row " << row << ": empty bound interval [" << lo << ", " << hi << "]";
		throw InfeasibleRowError(os.str(), row);
	}
}

} // namespace detail

// Closed-form solution with the three-region multiplier selection. The factor carries x0, rho
// and the row weight. phi is written in place; work is scratch of the same length.
inline RowSolution solve_row_into(const ShermanMorrison& factor, const RowVector& a, double lo, double hi, Index row,
                                  RowVector& phi, RowVector& work)
{
	detail::check_bounds(lo, hi, row);
	RowSolution sol;
	if (factor.degenerate())
	{
		// The constraint reads lo <= 0 <= hi and the proximal term alone decides.
		if (lo > 0.0 || hi < 0.0)
		{
			std::ostringstream os;
			os << "row " << row << ": x0 = 0 but 0 is outside [" << lo << ", " << hi << "]";
			throw InfeasibleRowError(os.str(), row);
		}
		phi = a;
		return sol;
	}

	const double rho = factor.rho();
	const double s = rho * factor.apply_x0(a); // rho a M x0
	const double q = factor.quad();            // x0' M x0
	double lambda = 0.0;
	if (s - hi > 0.0)
	{
		sol.lambda1 = (s - hi) / q;
		sol.region = Region::UpperActive;
		lambda = sol.lambda1;
	}
	else if (s - lo < 0.0)
	{
		sol.lambda2 = (lo - s) / q;
		sol.region = Region::LowerActive;
		lambda = -sol.lambda2;
	}
	work = rho * a - lambda * factor.x0().transpose();
	factor.apply_into(work, phi);
	return sol;
}

inline RowSolution solve_row(const ShermanMorrison& factor, const RowVector& a, double lo, double hi, Index row = -1)
{
	RowVector phi, work;
	auto sol = solve_row_into(factor, a, lo, hi, row, phi, work);
	sol.phi = std::move(phi);
	return sol;
}

inline RowSolution solve_row(const RowProblem& p, const ShermanMorrison& factor, Index row = -1)
{
	if (p.a.size() != factor.x0().size())
		throw std::invalid_argument("row vector and x0 differ in length");
	return solve_row(factor, p.a, p.lo, p.hi, row);
}

inline RowSolution solve_row(const RowProblem& p)
{
	if (!(p.rho > 0.0))
		throw std::invalid_argument("rho must be positive");
	return solve_row(p, ShermanMorrison(p.x0, p.rho, p.weight));
}

// Solves a block of rows sharing x0 and rho; one rank-one factor per distinct weight.
inline std::vector<RowSolution> solve_row_block(const std::vector<RowProblem>& rows)
{
	std::vector<RowSolution> out;
	out.reserve(rows.size());
	std::vector<std::pair<double, ShermanMorrison>> cache;
	for (std::size_t r = 0; r < rows.size(); ++r)
	{
		const auto& p = rows[r];
		if (r > 0 && (p.x0.size() != rows[0].x0.size() || p.x0 != rows[0].x0 || p.rho != rows[0].rho))
			throw std::invalid_argument("rows in a block must share x0 and rho");
		const ShermanMorrison* factor = nullptr;
		for (const auto& [w, f] : cache)
			if (w == p.weight)
				factor = &f;
		if (!factor)
			factor = &cache.emplace_back(p.weight, ShermanMorrison(p.x0, p.rho, p.weight)).second;
		out.push_back(solve_row(p, *factor, static_cast<Index>(r)));
	}
	return out;
}

struct KktResiduals
{
	double stationarity = 0.0;
	double primal = 0.0;        // bound violation of phi x0
	double complementarity = 0.0;
	double dual_sign = 0.0;     // magnitude of any negative multiplier

	bool ok(double tol_stationarity, double tol_complementarity) const
	{
		return stationarity <= tol_stationarity && primal <= tol_stationarity &&
		       complementarity <= tol_complementarity && dual_sign == 0.0;
	}
};

inline KktResiduals kkt_residuals(const RowProblem& p, const RowSolution& s)
{
	KktResiduals r;
	const double y = s.phi.dot(p.x0);
	const RowVector grad = (2.0 * p.weight * p.weight * y + s.lambda1 - s.lambda2) * p.x0.transpose() + p.rho * (s.phi - p.a);
	r.stationarity = grad.cwiseAbs().maxCoeff();
	r.primal = std::max({0.0, y - p.hi, p.lo - y});
	const double gap_hi = std::isfinite(p.hi) ? std::abs(s.lambda1 * (y - p.hi)) : (s.lambda1 != 0.0 ? kInf : 0.0);
	const double gap_lo = std::isfinite(p.lo) ? std::abs(s.lambda2 * (p.lo - y)) : (s.lambda2 != 0.0 ? kInf : 0.0);
	r.complementarity = std::max({gap_hi, gap_lo, std::abs(s.lambda1 * s.lambda2)});
	r.dual_sign = std::max({0.0, -s.lambda1, -s.lambda2});
	return r;
}

} // namespace dlmpc
