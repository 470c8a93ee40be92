#pragma once

#include "dlmpc/topology.hpp"

namespace fixtures
{

// Six scalar subsystems with B = I. Subsystem 5 (index 4) is driven by 3 and 4 (indices 2, 3)
// and drives 4 and 6 (indices 3, 5). The remaining couplings only fill out rows and columns
// that do not involve subsystem 5.
inline dlmpc::NetworkModel six_node_example()
{
	dlmpc::Matrix A = dlmpc::Matrix::Zero(6, 6);
	A.diagonal().setConstant(0.5);
	A(1, 0) = 0.3;
	A(0, 1) = 0.2;
	A(2, 1) = 0.3;
	A(3, 2) = 0.1;
	A(4, 2) = 0.4;
	A(4, 3) = 0.2;
	A(3, 4) = 0.3;
	A(5, 4) = 0.2;
	A(0, 5) = 0.1;
	return dlmpc::NetworkModel::from_dense(A, dlmpc::Matrix::Identity(6, 6), std::vector<dlmpc::Index>(6, 1),
	                                       std::vector<dlmpc::Index>(6, 1));
}

} // namespace fixtures
