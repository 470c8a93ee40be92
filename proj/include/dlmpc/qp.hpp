#pragma once

#include "dlmpc/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace dlmpc
{

// min 1/2 x'Hx + g'x  s.t.  A_eq x = b_eq,  lb <= x <= ub  (entries of lb/ub may be infinite).
struct DenseQP
{
	Matrix H;
	Vector g;
	Matrix A_eq;
	Vector b_eq;
	Vector lb;
	Vector ub;

	Index variables() const noexcept { return g.size(); }
	Index equalities() const noexcept { return b_eq.size(); }

	// Unbounded problem with n variables and no equalities.
	static DenseQP unconstrained(Matrix H, Vector g)
	{
		DenseQP qp;
		const auto n = g.size();
		qp.H = std::move(H);
		qp.g = std::move(g);
		qp.A_eq = Matrix::Zero(0, n);
		qp.b_eq = Vector::Zero(0);
		qp.lb = Vector::Constant(n, -kInf);
		qp.ub = Vector::Constant(n, kInf);
		return qp;
	}
};

enum class QpStatus
{
	Optimal,
	Infeasible,
	MaxIter,
};

inline const char* to_string(QpStatus s)
{
	switch (s)
	{
	case QpStatus::Optimal: return "optimal";
	case QpStatus::Infeasible: return "infeasible";
	case QpStatus::MaxIter: return "max-iter";
	}
	return "?";
}

// Duals follow H x + g + A_eq' nu - z_lo + z_hi = 0 with z_lo, z_hi >= 0.
struct QpResult
{
	Vector x;
	Vector nu;
	Vector z_lo;
	Vector z_hi;
	QpStatus status = QpStatus::MaxIter;
	int iterations = 0;
	bool polished = false;
};

struct QpSettings
{
	double tol = 1e-10;
	int max_iter = 200;
	bool polish = true;
};

struct QpKkt
{
	double stationarity = 0.0;
	double primal = 0.0;
	double complementarity = 0.0;
	double dual_sign = 0.0;

	double max() const { return std::max({stationarity, primal, complementarity, dual_sign}); }
};

inline QpKkt qp_kkt_residuals(const DenseQP& qp, const QpResult& r)
{
	QpKkt k;
	const Matrix H = 0.5 * (qp.H + qp.H.transpose());
	Vector grad = H * r.x + qp.g - r.z_lo + r.z_hi;
	if (qp.equalities() > 0)
		grad += qp.A_eq.transpose() * r.nu;
	k.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
	if (qp.equalities() > 0)
		k.primal = (qp.A_eq * r.x - qp.b_eq).cwiseAbs().maxCoeff();
	for (Index j = 0; j < qp.variables(); ++j)
	{
		k.primal = std::max({k.primal, qp.lb(j) - r.x(j), r.x(j) - qp.ub(j)});
		if (std::isfinite(qp.lb(j)))
			k.complementarity = std::max(k.complementarity, std::abs(r.z_lo(j) * (r.x(j) - qp.lb(j))));
		else
			k.complementarity = std::max(k.complementarity, std::abs(r.z_lo(j)));
		if (std::isfinite(qp.ub(j)))
			k.complementarity = std::max(k.complementarity, std::abs(r.z_hi(j) * (qp.ub(j) - r.x(j))));
		else
			k.complementarity = std::max(k.complementarity, std::abs(r.z_hi(j)));
		k.dual_sign = std::max({k.dual_sign, -r.z_lo(j), -r.z_hi(j)});
	}
	return k;
}

namespace detail
{

// Solves [Hd  -A'; A  0] [dx; dy] = [r1; r2]. Uses the Schur complement when Hd is positive
// definite and falls back to an LU of the full system otherwise.
class KktSystem
{
public:
	void factor(const Matrix& Hd, const Matrix& A)
	{
		n_ = Hd.rows();
		m_ = A.rows();
		A_ = &A;
		schur_ = false;
		llt_h_.compute(Hd);
		if (llt_h_.info() == Eigen::Success)
		{
			if (m_ == 0)
			{
				schur_ = true;
				return;
			}
			W_ = llt_h_.matrixL().solve(A.transpose());
			llt_s_.compute(W_.transpose() * W_);
			if (llt_s_.info() == Eigen::Success)
			{
				schur_ = true;
				return;
			}
		}
		Matrix K = Matrix::Zero(n_ + m_, n_ + m_);
		K.topLeftCorner(n_, n_) = Hd;
		K.topRightCorner(n_, m_) = -A.transpose();
		K.bottomLeftCorner(m_, n_) = A;
		// Tiny negative diagonal on the multiplier block.
		K.bottomRightCorner(m_, m_).diagonal().setConstant(-1e-14);
		lu_.compute(K);
	}

	void solve(const Vector& r1, const Vector& r2, Vector& dx, Vector& dy) const
	{
		if (schur_)
		{
			if (m_ == 0)
			{
				dx = llt_h_.solve(r1);
				dy.resize(0);
				return;
			}
			const Vector h1 = llt_h_.solve(r1);
			dy = llt_s_.solve(r2 - (*A_) * h1);
			dx = h1 + llt_h_.solve(A_->transpose() * dy);
			return;
		}
		Vector rhs(n_ + m_);
		rhs << r1, r2;
		const Vector sol = lu_.solve(rhs);
		dx = sol.head(n_);
		dy = sol.tail(m_);
	}

private:
	Index n_ = 0;
	Index m_ = 0;
	const Matrix* A_ = nullptr;
	bool schur_ = false;
	Eigen::LLT<Matrix> llt_h_;
	Eigen::LLT<Matrix> llt_s_;
	Matrix W_;
	Eigen::PartialPivLU<Matrix> lu_;
};

inline void check_psd(const Matrix& H)
{
	if (H.rows() == 0)
		return;
	const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
	Eigen::LDLT<Matrix> ldlt(H);
	if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-9 * scale)
		throw ModelError("QP Hessian is not positive semidefinite");
}

// Bound-active-set refinement of an interior-point iterate: solves the equality-constrained QP
// with the guessed active bounds held fixed and accepts it if it is a valid KKT point.
inline bool polish(const DenseQP& qp, const Matrix& H, QpResult& r, double tol)
{
	const auto n = qp.variables();
	const auto m = qp.equalities();
	std::vector<std::pair<Index, bool>> active; // (variable, at upper bound)
	for (Index j = 0; j < n; ++j)
	{
		const bool lo = std::isfinite(qp.lb(j)) && r.z_lo(j) > r.x(j) - qp.lb(j);
		const bool hi = std::isfinite(qp.ub(j)) && r.z_hi(j) > qp.ub(j) - r.x(j);
		if (lo && hi)
			active.emplace_back(j, r.z_hi(j) > r.z_lo(j));
		else if (lo || hi)
			active.emplace_back(j, hi);
	}
	const auto k = static_cast<Index>(active.size());
	Matrix K = Matrix::Zero(n + m + k, n + m + k);
	Vector rhs = Vector::Zero(n + m + k);
	K.topLeftCorner(n, n) = H;
	if (m > 0)
	{
		K.block(0, n, n, m) = qp.A_eq.transpose();
		K.block(n, 0, m, n) = qp.A_eq;
		rhs.segment(n, m) = qp.b_eq;
	}
	rhs.head(n) = -qp.g;
	for (Index a = 0; a < k; ++a)
	{
		const auto [j, upper] = active[static_cast<std::size_t>(a)];
		K(j, n + m + a) = 1.0;
		K(n + m + a, j) = 1.0;
		rhs(n + m + a) = upper ? qp.ub(j) : qp.lb(j);
	}
	const auto before = qp_kkt_residuals(qp, r).max();
	auto attempt = [&](const Vector& sol) {
		if (!sol.allFinite())
			return false;
		QpResult cand;
		cand.x = sol.head(n);
		cand.nu = sol.segment(n, m);
		cand.z_lo = Vector::Zero(n);
		cand.z_hi = Vector::Zero(n);
		for (Index a = 0; a < k; ++a)
		{
			const auto [j, upper] = active[static_cast<std::size_t>(a)];
			// H x + g + A'nu + w e_j = 0 gives z_hi = w at an upper bound and z_lo = -w at a lower one.
			const double w = sol(n + m + a);
			if (upper)
				cand.z_hi(j) = w;
			else
				cand.z_lo(j) = -w;
		}
		if (qp_kkt_residuals(qp, cand).max() > std::max(tol, before))
			return false;
		cand.status = r.status;
		cand.iterations = r.iterations;
		cand.polished = true;
		r = std::move(cand);
		return true;
	};
	if (attempt(Eigen::PartialPivLU<Matrix>(K).solve(rhs)))
		return true;
	if (attempt(Eigen::CompleteOrthogonalDecomposition<Matrix>(K).solve(rhs)))
		return true;
	return false;
}

} // namespace detail

// Primal-dual interior point (Mehrotra predictor-corrector) followed by an active-set polish.
inline QpResult solve_qp(const DenseQP& input, const QpSettings& settings = {})
{
	const auto n = input.variables();
	if (input.H.rows() != n || input.H.cols() != n || input.lb.size() != n || input.ub.size() != n ||
	    input.A_eq.cols() != n || input.A_eq.rows() != input.b_eq.size())
		throw ModelError("QP dimensions are inconsistent");

	DenseQP qp = input;
	qp.H = 0.5 * (input.H + input.H.transpose());
	detail::check_psd(qp.H);

	QpResult r;
	r.x = Vector::Zero(n);
	r.nu = Vector::Zero(qp.equalities());
	r.z_lo = Vector::Zero(n);
	r.z_hi = Vector::Zero(n);

	for (Index j = 0; j < n; ++j)
	{
		if (std::isnan(qp.lb(j)) || std::isnan(qp.ub(j)) || qp.lb(j) > qp.ub(j))
		{
			r.status = QpStatus::Infeasible;
			return r;
		}
	}

	// Fixed variables move into the equality rows.
	std::vector<Index> fixed;
	for (Index j = 0; j < n; ++j)
		if (qp.lb(j) == qp.ub(j))
			fixed.push_back(j);
	Matrix A = qp.A_eq;
	Vector b = qp.b_eq;
	Vector lb = qp.lb;
	Vector ub = qp.ub;
	if (!fixed.empty())
	{
		const auto m0 = A.rows();
		A.conservativeResize(m0 + static_cast<Index>(fixed.size()), n);
		b.conservativeResize(m0 + static_cast<Index>(fixed.size()));
		for (std::size_t f = 0; f < fixed.size(); ++f)
		{
			const auto row = m0 + static_cast<Index>(f);
			A.row(row).setZero();
			A(row, fixed[f]) = 1.0;
			b(row) = qp.lb(fixed[f]);
			lb(fixed[f]) = -kInf;
			ub(fixed[f]) = kInf;
		}
	}
	const auto m = A.rows();

	Eigen::Array<bool, Eigen::Dynamic, 1> has_lo(n), has_hi(n);
	Index n_bounds = 0;
	for (Index j = 0; j < n; ++j)
	{
		has_lo(j) = std::isfinite(lb(j));
		has_hi(j) = std::isfinite(ub(j));
		n_bounds += Index(has_lo(j)) + Index(has_hi(j));
	}

	Vector x(n), y = Vector::Zero(m), zl = Vector::Zero(n), zu = Vector::Zero(n);
	for (Index j = 0; j < n; ++j)
	{
		if (has_lo(j) && has_hi(j))
		{
			const double width = ub(j) - lb(j);
			const double margin = std::min(1.0, 0.25 * width);
			x(j) = std::clamp(0.0, lb(j) + margin, ub(j) - margin);
		}
		else if (has_lo(j))
			x(j) = std::max(0.0, lb(j) + 1.0);
		else if (has_hi(j))
			x(j) = std::min(0.0, ub(j) - 1.0);
		else
			x(j) = 0.0;
		if (has_lo(j))
			zl(j) = 1.0;
		if (has_hi(j))
			zu(j) = 1.0;
	}

	auto slack_lo = [&](const Vector& v) {
		Vector s = Vector::Ones(n);
		for (Index j = 0; j < n; ++j)
			if (has_lo(j))
				s(j) = v(j) - lb(j);
		return s;
	};
	auto slack_hi = [&](const Vector& v) {
		Vector s = Vector::Ones(n);
		for (Index j = 0; j < n; ++j)
			if (has_hi(j))
				s(j) = ub(j) - v(j);
		return s;
	};
	auto mask = [&](Vector v, const Eigen::Array<bool, Eigen::Dynamic, 1>& on) {
		for (Index j = 0; j < n; ++j)
			if (!on(j))
				v(j) = 0.0;
		return v;
	};

	const double scale_b = 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
	const double scale_g = 1.0 + (n ? qp.g.cwiseAbs().maxCoeff() : 0.0);
	detail::KktSystem kkt;
	Vector dx, dy;
	bool converged = false;
	int iter = 0;
	for (; iter < settings.max_iter; ++iter)
	{
		const Vector sl = slack_lo(x);
		const Vector su = slack_hi(x);
		const Vector rd = qp.H * x + qp.g - A.transpose() * y - zl + zu;
		const Vector rp = A * x - b;
		const double mu = n_bounds ? (mask(sl.cwiseProduct(zl), has_lo).sum() + mask(su.cwiseProduct(zu), has_hi).sum()) / double(n_bounds)
		                           : 0.0;
		const double rp_norm = m ? rp.cwiseAbs().maxCoeff() : 0.0;
		const double rd_norm = n ? rd.cwiseAbs().maxCoeff() : 0.0;
		if (rp_norm <= settings.tol * scale_b && rd_norm <= settings.tol * scale_g && mu <= settings.tol * 1e-2)
		{
			converged = true;
			break;
		}

		Vector dl = Vector::Zero(n);
		for (Index j = 0; j < n; ++j)
		{
			if (has_lo(j))
				dl(j) += zl(j) / sl(j);
			if (has_hi(j))
				dl(j) += zu(j) / su(j);
		}
		Matrix Hd = qp.H;
		Hd.diagonal() += dl;
		kkt.factor(Hd, A);

		// cl/cu are the complementarity right-hand sides; see the linearization of s.z = sigma mu.
		auto direction = [&](const Vector& cl, const Vector& cu, Vector& ddx, Vector& ddy, Vector& dzl, Vector& dzu) {
			Vector r1 = -rd;
			for (Index j = 0; j < n; ++j)
			{
				if (has_lo(j))
					r1(j) += cl(j) / sl(j);
				if (has_hi(j))
					r1(j) -= cu(j) / su(j);
			}
			kkt.solve(r1, -rp, ddx, ddy);
			dzl = Vector::Zero(n);
			dzu = Vector::Zero(n);
			for (Index j = 0; j < n; ++j)
			{
				if (has_lo(j))
					dzl(j) = (cl(j) - zl(j) * ddx(j)) / sl(j);
				if (has_hi(j))
					dzu(j) = (cu(j) + zu(j) * ddx(j)) / su(j);
			}
		};
		auto max_step = [&](const Vector& ddx, const Vector& dzl, const Vector& dzu) {
			double alpha = 1.0;
			for (Index j = 0; j < n; ++j)
			{
				if (has_lo(j))
				{
					if (ddx(j) < 0)
						alpha = std::min(alpha, -sl(j) / ddx(j));
					if (dzl(j) < 0)
						alpha = std::min(alpha, -zl(j) / dzl(j));
				}
				if (has_hi(j))
				{
					if (ddx(j) > 0)
						alpha = std::min(alpha, su(j) / ddx(j));
					if (dzu(j) < 0)
						alpha = std::min(alpha, -zu(j) / dzu(j));
				}
			}
			return alpha;
		};

		Vector dzl, dzu;
		const Vector cl_aff = mask(-sl.cwiseProduct(zl), has_lo);
		const Vector cu_aff = mask(-su.cwiseProduct(zu), has_hi);
		direction(cl_aff, cu_aff, dx, dy, dzl, dzu);
		double sigma = 0.0;
		Vector cl = cl_aff, cu = cu_aff;
		if (n_bounds > 0)
		{
			const double a_aff = max_step(dx, dzl, dzu);
			double mu_aff = 0.0;
			for (Index j = 0; j < n; ++j)
			{
				if (has_lo(j))
					mu_aff += (sl(j) + a_aff * dx(j)) * (zl(j) + a_aff * dzl(j));
				if (has_hi(j))
					mu_aff += (su(j) - a_aff * dx(j)) * (zu(j) + a_aff * dzu(j));
			}
			mu_aff /= double(n_bounds);
			sigma = mu > 0 ? std::pow(mu_aff / mu, 3) : 0.0;
			for (Index j = 0; j < n; ++j)
			{
				if (has_lo(j))
					cl(j) += sigma * mu - dx(j) * dzl(j);
				if (has_hi(j))
					cu(j) += sigma * mu + dx(j) * dzu(j);
			}
			direction(cl, cu, dx, dy, dzl, dzu);
		}
		const double alpha = n_bounds > 0 ? std::min(1.0, 0.995 * max_step(dx, dzl, dzu)) : 1.0;
		x += alpha * dx;
		y += alpha * dy;
		zl += alpha * dzl;
		zu += alpha * dzu;
		if (!x.allFinite() || !y.allFinite())
			break;
	}

	r.iterations = iter;
	r.x = x;
	r.nu = -y.head(qp.equalities());
	r.z_lo = zl;
	r.z_hi = zu;
	// Multipliers of fixed variables live in the appended equality rows.
	for (std::size_t f = 0; f < fixed.size(); ++f)
	{
		const double w = -y(qp.equalities() + static_cast<Index>(f));
		if (w >= 0)
			r.z_hi(fixed[f]) = w;
		else
			r.z_lo(fixed[f]) = -w;
	}
	if (converged)
		r.status = QpStatus::Optimal;
	else
	{
		const double rp_norm = m && x.allFinite() ? (A * x - b).cwiseAbs().maxCoeff() : kInf;
		r.status = rp_norm > std::sqrt(settings.tol) * scale_b ? QpStatus::Infeasible : QpStatus::MaxIter;
	}
	if (r.status == QpStatus::Optimal && settings.polish)
		detail::polish(qp, qp.H, r, settings.tol);
	return r;
}

} // namespace dlmpc
