#pragma once

#include "dlmpc/topology.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace dlmpc
{

// First block column of the system response: phi_x stacks Phi_x,t[t] for t = 0..T,
// phi_u stacks Phi_u,t[t] for t = 0..T-1.
struct ResponseColumn
{
	Matrix phi_x;
	Matrix phi_u;

	Matrix stacked() const
	{
		Matrix phi(phi_x.rows() + phi_u.rows(), phi_x.cols());
		phi << phi_x, phi_u;
		return phi;
	}

	static ResponseColumn from_stacked(const Matrix& phi, const ResponseLayout& layout)
	{
		return {phi.topRows(layout.state_rows()), phi.bottomRows(layout.input_rows())};
	}
};

// Full block-lower-triangular responses, used to realize and recover controllers.
struct FullResponse
{
	Matrix phi_x; // n(T+1) x n(T+1)
	Matrix phi_u; // pT x n(T+1)

	ResponseColumn first_column(Index n) const { return {phi_x.leftCols(n), phi_u.leftCols(n)}; }
};

// Z_AB = [I - Z*calA, -Z*calB] restricted to the first block column, plus per-subsystem column slices
// with precomputed pseudo-inverses. Immutable once assembled.
class FeasibilityOperator
{
public:
	struct ColumnSlice
	{
		// Rows of Z_AB touched by the admissible Phi rows of this subsystem's columns.
		IndexList constraint_rows;
		// Z_AB(constraint_rows, col_support).
		Matrix Z;
		Matrix Z_pinv;
		// [I]_{i_c}: first block column of the identity on constraint_rows x c_i.
		Matrix I;
		// Orthonormal basis of ker Z and the minimum-norm solution Z_pinv * I. The
		// projection is null_basis * null_basis' * V + particular.
		Matrix null_basis;
		Matrix particular;
	};

	FeasibilityOperator(const NetworkModel& model, Index horizon, const LocalityIndex& idx)
		: layout_{model.n(), model.p(), horizon}
	{
		if (horizon < 1)
			throw std::invalid_argument("horizon must be at least 1");
		if (idx.layout.n != layout_.n || idx.layout.p != layout_.p || idx.layout.horizon != horizon)
			throw ModelError("locality index layout does not match model and horizon");
		assemble(model);
		build_slices(idx);
	}

	const ResponseLayout& layout() const noexcept { return layout_; }
	const SparseMatrix& Z_AB() const noexcept { return Z_AB_; }
	const ColumnSlice& slice(SubsystemId i) const { return slices_.at(i); }
	std::size_t slice_count() const noexcept { return slices_.size(); }

	// Right-hand side of Z_AB * Phi = I for the first block column.
	Matrix identity_column() const
	{
		Matrix E = Matrix::Zero(layout_.state_rows(), layout_.n);
		E.topRows(layout_.n).setIdentity();
		return E;
	}

	Matrix dense_Z_AB() const { return Matrix(Z_AB_); }

	// max |Z_AB * Phi - I|.
	double residual(const Matrix& phi) const
	{
		if (phi.rows() != layout_.rows() || phi.cols() != layout_.cols())
			throw std::invalid_argument("response has wrong shape");
		return (Z_AB_ * phi - identity_column()).cwiseAbs().maxCoeff();
	}

	double residual(const ResponseColumn& resp) const { return residual(resp.stacked()); }

	// [Psi]_{i_c} = V + pinv(Z_c) * ([I]_{i_c} - Z_c * V), evaluated through the null-space basis.
	Matrix project_column(SubsystemId i, const Matrix& V) const
	{
		const auto& s = slice(i);
		if (V.rows() != s.Z.cols() || V.cols() != s.I.cols())
			throw std::invalid_argument("column slice has wrong shape");
		return s.particular + s.null_basis * (s.null_basis.transpose() * V);
	}

	// Allocation-free variant; work holds the null-space coordinates.
	void project_column_into(SubsystemId i, const Matrix& V, Matrix& out, Matrix& work) const
	{
		const auto& s = slice(i);
		for (Index c = 0; c < V.cols(); ++c)
		{
			work.col(c).noalias() = s.null_basis.transpose() * V.col(c);
			out.col(c) = s.particular.col(c);
			out.col(c).noalias() += s.null_basis * work.col(c);
		}
	}

private:
	void assemble(const NetworkModel& model)
	{
		const auto T = layout_.horizon;
		std::vector<Triplet> triplets;
		for (Index r = 0; r < layout_.state_rows(); ++r)
			triplets.emplace_back(r, r, 1.0);
		for (Index t = 1; t <= T; ++t)
		{
			for (const auto& [key, block] : model.A_blocks)
			{
				const auto r0 = layout_.state_row(t, model.state_offset(key.first));
				const auto c0 = layout_.state_row(t - 1, model.state_offset(key.second));
				for (Index a = 0; a < block.rows(); ++a)
					for (Index b = 0; b < block.cols(); ++b)
						if (block(a, b) != 0.0)
							triplets.emplace_back(r0 + a, c0 + b, -block(a, b));
			}
			for (const auto& [key, block] : model.B_blocks)
			{
				const auto r0 = layout_.state_row(t, model.state_offset(key.first));
				const auto c0 = layout_.input_row(t - 1, model.input_offset(key.second));
				for (Index a = 0; a < block.rows(); ++a)
					for (Index b = 0; b < block.cols(); ++b)
						if (block(a, b) != 0.0)
							triplets.emplace_back(r0 + a, c0 + b, -block(a, b));
			}
		}
		Z_AB_.resize(layout_.state_rows(), layout_.rows());
		Z_AB_.setFromTriplets(triplets.begin(), triplets.end());
	}

	void build_slices(const LocalityIndex& idx)
	{
		const Eigen::SparseMatrix<double, Eigen::ColMajor> by_col = Z_AB_;
		slices_.resize(idx.size());
		for (SubsystemId i = 0; i < idx.size(); ++i)
		{
			const auto& sub = idx.subsystems[i];
			auto& s = slices_[i];
			for (auto phi_row : sub.col_support)
				for (Eigen::SparseMatrix<double, Eigen::ColMajor>::InnerIterator it(by_col, phi_row); it; ++it)
					s.constraint_rows.push_back(it.row());
			std::sort(s.constraint_rows.begin(), s.constraint_rows.end());
			s.constraint_rows.erase(std::unique(s.constraint_rows.begin(), s.constraint_rows.end()), s.constraint_rows.end());

			const auto m = static_cast<Index>(s.constraint_rows.size());
			const auto k = static_cast<Index>(sub.col_support.size());
			s.Z = Matrix::Zero(m, k);
			for (Index c = 0; c < k; ++c)
			{
				for (Eigen::SparseMatrix<double, Eigen::ColMajor>::InnerIterator it(by_col, sub.col_support[static_cast<std::size_t>(c)]); it; ++it)
				{
					const auto pos = std::lower_bound(s.constraint_rows.begin(), s.constraint_rows.end(), it.row()) - s.constraint_rows.begin();
					s.Z(pos, c) = it.value();
				}
			}
			s.I = Matrix::Zero(m, static_cast<Index>(sub.cols.size()));
			for (Index r = 0; r < m; ++r)
				for (Index c = 0; c < s.I.cols(); ++c)
					if (s.constraint_rows[static_cast<std::size_t>(r)] == sub.cols[static_cast<std::size_t>(c)])
						s.I(r, c) = 1.0;

			s.Z_pinv = Eigen::CompleteOrthogonalDecomposition<Matrix>(s.Z).pseudoInverse();
			s.particular = s.Z_pinv * s.I;
			if (m == 0)
				s.null_basis = Matrix::Identity(k, k);
			else
			{
				Eigen::JacobiSVD<Matrix> svd(s.Z, Eigen::ComputeFullV);
				svd.setThreshold(1e-10);
				s.null_basis = svd.matrixV().rightCols(k - svd.rank());
			}
			const double gap = m == 0 ? 0.0 : (s.Z * (s.Z_pinv * s.I) - s.I).cwiseAbs().maxCoeff();
			if (gap > 1e-9)
			{
				std::ostringstream os;
				os << "locality constraint d=" << idx.d << " admits no feasible response for subsystem " << i
				   << " (projection gap " << gap << ")";
				throw ModelError(os.str());
			}
		}
	}

	ResponseLayout layout_;
	SparseMatrix Z_AB_;
	std::vector<ColumnSlice> slices_;
};

inline FeasibilityOperator assemble_feasibility_operator(const NetworkModel& model, Index horizon, const LocalityIndex& idx)
{
	return FeasibilityOperator(model, horizon, idx);
}

namespace detail
{

// Block downshift Z of a signal with `blocks` blocks of size `size`.
inline Matrix downshift(Index blocks, Index size)
{
	Matrix Z = Matrix::Zero(blocks * size, blocks * size);
	for (Index t = 1; t < blocks; ++t)
		Z.block(t * size, (t - 1) * size, size, size).setIdentity();
	return Z;
}

} // namespace detail

// Phi_x = (I - Z(calA + calB K))^{-1}, Phi_u = K Phi_x for a causal K of shape pT x n(T+1).
inline FullResponse full_response_from_controller(const NetworkModel& model, const Matrix& K, Index horizon)
{
	const auto n = model.n();
	const auto p = model.p();
	const auto T = horizon;
	if (K.rows() != p * T || K.cols() != n * (T + 1))
		throw std::invalid_argument("controller has wrong shape");
	for (Index t = 0; t < T && p > 0; ++t)
		if (K.block(t * p, (t + 1) * n, p, (T - t) * n).cwiseAbs().maxCoeff() != 0.0)
			throw ModelError("controller is not causal (block lower triangular)");

	const Matrix A = model.dense_A();
	const Matrix B = model.dense_B();
	Matrix calA = Matrix::Zero(n * (T + 1), n * (T + 1));
	Matrix calB = Matrix::Zero(n * (T + 1), p * T);
	for (Index t = 0; t < T; ++t)
	{
		calA.block(t * n, t * n, n, n) = A;
		calB.block(t * n, t * p, n, p) = B;
	}
	const Matrix Z = detail::downshift(T + 1, n);
	const Matrix closed = Matrix::Identity(n * (T + 1), n * (T + 1)) - Z * (calA + calB * K);
	FullResponse full;
	full.phi_x = closed.triangularView<Eigen::UnitLower>().solve(Matrix::Identity(n * (T + 1), n * (T + 1)));
	full.phi_u = K * full.phi_x;
	return full;
}

inline ResponseColumn response_from_controller(const NetworkModel& model, const Matrix& K, Index horizon)
{
	return full_response_from_controller(model, K, horizon).first_column(model.n());
}

// K = Phi_u Phi_x^{-1}; Phi_x is unit lower triangular for any realizable response.
inline Matrix controller_from_response(const FullResponse& full)
{
	const Matrix lhs = full.phi_x.transpose();
	const Matrix Kt = lhs.triangularView<Eigen::UnitUpper>().solve(full.phi_u.transpose());
	return Kt.transpose();
}

} // namespace dlmpc
