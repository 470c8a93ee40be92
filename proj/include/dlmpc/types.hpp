#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlmpc
{

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Subsystems are numbered 0..N-1 internally.
using SubsystemId = std::size_t;
using IndexList = std::vector<Index>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

// Inconsistent dimensions or an ill-posed model.
class ModelError : public Error
{
public:
	using Error::Error;
};

class InfeasibleRowError : public Error
{
public:
	InfeasibleRowError(const std::string& what, Index row = -1)
		: Error(what), row_(row)
	{
	}

	Index row() const noexcept { return row_; }

private:
	Index row_;
};

class NonConvergenceError : public Error
{
public:
	NonConvergenceError(const std::string& what, std::vector<double> primal, std::vector<double> dual)
		: Error(what), primal_trace_(std::move(primal)), dual_trace_(std::move(dual))
	{
	}

	const std::vector<double>& primal_trace() const noexcept { return primal_trace_; }
	const std::vector<double>& dual_trace() const noexcept { return dual_trace_; }

private:
	std::vector<double> primal_trace_;
	std::vector<double> dual_trace_;
};

// Reading a result that has not been produced by a converged solve.
class StaleStateError : public Error
{
public:
	using Error::Error;
};

class InfeasibleProblemError : public Error
{
public:
	using Error::Error;
};

class IoError : public Error
{
public:
	using Error::Error;
};

} // namespace dlmpc
