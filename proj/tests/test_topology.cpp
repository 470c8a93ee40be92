#include "dlmpc/scenario.hpp"
#include "oracles.hpp"
#include "topology_fixtures.hpp"

#include <gtest/gtest.h>

using namespace dlmpc;

namespace
{

std::set<std::size_t> as_set(const Neighborhood& n) { return {n.begin(), n.end()}; }

} // namespace

TEST(Graph, SixNodeExampleNeighborhoods)
{
	const auto m = fixtures::six_node_example();
	const auto g = build_graph(m);
	// Subsystem 5 in one-based numbering.
	EXPECT_EQ(as_set(d_in_set(g, 4, 1)), (std::set<std::size_t>{2, 3, 4}));
	EXPECT_EQ(as_set(d_out_set(g, 4, 1)), (std::set<std::size_t>{3, 4, 5}));
	EXPECT_TRUE(g.has_edge(2, 4));
	EXPECT_TRUE(g.has_edge(3, 4));
	EXPECT_TRUE(g.has_edge(4, 3));
	EXPECT_TRUE(g.has_edge(4, 5));
}

TEST(Graph, DiagonalSystemHasOnlySelfLoops)
{
	const Matrix A = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
	const Matrix B = Matrix::Identity(4, 4);
	const auto m = NetworkModel::from_dense(A, B, {1, 1, 1, 1}, {1, 1, 1, 1});
	const auto g = build_graph(m);
	EXPECT_EQ(g.edge_count(), 4u);
	for (SubsystemId i = 0; i < 4; ++i)
	{
		EXPECT_TRUE(g.has_edge(i, i));
		EXPECT_EQ(d_in_set(g, i, 3), Neighborhood{i});
	}
}

TEST(Graph, ThreeNodeChain)
{
	const auto g = build_graph(build_chain_model(3));
	EXPECT_EQ(g.edge_count(), 3u + 4u);
	EXPECT_TRUE(g.has_edge(0, 1));
	EXPECT_TRUE(g.has_edge(1, 0));
	EXPECT_TRUE(g.has_edge(1, 2));
	EXPECT_TRUE(g.has_edge(2, 1));
	EXPECT_FALSE(g.has_edge(0, 2));
	EXPECT_FALSE(g.has_edge(2, 0));
}

TEST(Graph, ChainOfTenHasNineCouplings)
{
	const auto m = build_chain_model(10);
	EXPECT_EQ(m.n(), 20);
	EXPECT_EQ(m.p(), 10);
	const auto g = build_graph(m);
	std::size_t undirected = 0;
	for (SubsystemId i = 0; i < 10; ++i)
		for (SubsystemId j = i + 1; j < 10; ++j)
			undirected += g.has_edge(i, j) && g.has_edge(j, i);
	EXPECT_EQ(undirected, 9u);
}

TEST(Graph, RejectsMisshapenBlocks)
{
	NetworkModel m;
	m.state_dims = {2, 1};
	m.input_dims = {1, 1};
	m.A_blocks[{0, 1}] = Matrix::Ones(2, 2);
	EXPECT_THROW(build_graph(m), ModelError);
}

TEST(Neighborhood, ZeroHopsIsSelf)
{
	const auto g = build_graph(fixtures::six_node_example());
	for (SubsystemId i = 0; i < 6; ++i)
		EXPECT_EQ(d_in_set(g, i, 0), Neighborhood{i});
}

TEST(Neighborhood, ChainTwoHops)
{
	const auto g = build_graph(build_chain_model(10));
	// Subsystem 4 (one-based) reaches 2..6 within two hops.
	EXPECT_EQ(as_set(d_in_set(g, 3, 2)), (std::set<std::size_t>{1, 2, 3, 4, 5}));
}

TEST(Neighborhood, BadArguments)
{
	const auto g = build_graph(build_chain_model(3));
	EXPECT_THROW(d_in_set(g, 3, 1), std::out_of_range);
	EXPECT_THROW(d_out_set(g, 0, -1), std::invalid_argument);
}

TEST(Neighborhood, MatchesFloydWarshallOnRandomGraphs)
{
	std::mt19937_64 rng(7);
	for (int trial = 0; trial < 30; ++trial)
	{
		const std::size_t N = 2 + static_cast<std::size_t>(trial % 7);
		const auto m = oracle::random_network(rng, std::vector<Index>(N, 1), std::vector<Index>(N, 1), 0.25);
		const auto g = build_graph(m);
		const auto dist = oracle::hop_distances(m);
		for (SubsystemId i = 0; i < N; ++i)
		{
			for (int d = 0; d <= 4; ++d)
			{
				EXPECT_EQ(as_set(d_in_set(g, i, d)), oracle::in_set(dist, i, d));
				EXPECT_EQ(as_set(d_out_set(g, i, d)), oracle::out_set(dist, i, d));
			}
		}
	}
}

TEST(Neighborhood, InOutDualityAndMonotonicity)
{
	std::mt19937_64 rng(11);
	const auto m = oracle::random_network(rng, std::vector<Index>(8, 1), std::vector<Index>(8, 1), 0.3);
	const auto g = build_graph(m);
	for (SubsystemId i = 0; i < 8; ++i)
	{
		for (int d = 0; d < 4; ++d)
		{
			const auto in = d_in_set(g, i, d);
			EXPECT_TRUE(contains(in, i));
			for (auto v : in)
				EXPECT_TRUE(contains(d_in_set(g, i, d + 1), v));
			for (SubsystemId j = 0; j < 8; ++j)
				EXPECT_EQ(contains(in, j), contains(d_out_set(g, j, d), i));
		}
	}
}

TEST(LocalityIndex, SingleSubsystemOwnsEverything)
{
	Matrix A(2, 2);
	A << 1.0, 0.5, 0.0, 1.0;
	const Matrix B = Matrix::Ones(2, 1);
	const auto m = NetworkModel::from_dense(A, B, {2}, {1});
	const auto idx = build_locality_index(build_graph(m), m, 1, 3);
	const auto& sub = idx.subsystems[0];
	EXPECT_EQ(static_cast<Index>(sub.rows.size()), idx.layout.rows());
	EXPECT_EQ(sub.row_support, (IndexList{0, 1}));
	EXPECT_EQ(static_cast<Index>(sub.col_support.size()), idx.layout.rows());
}

TEST(LocalityIndex, ChainInteriorSupports)
{
	const auto m = build_chain_model(10);
	const auto idx = build_locality_index(build_graph(m), m, 1, 5);
	const auto& sub = idx.subsystems[4];
	// Union over rows: inputs reach two hops.
	EXPECT_EQ(sub.row_support, (IndexList{4, 5, 6, 7, 8, 9, 10, 11, 12, 13}));
	const auto& L = idx.layout;
	for (std::size_t r = 0; r < sub.rows.size(); ++r)
	{
		IndexList cols;
		for (auto pos : sub.row_allowed[r])
			cols.push_back(sub.row_support[static_cast<std::size_t>(pos)]);
		if (L.is_state_row(sub.rows[r]))
			EXPECT_EQ(cols, (IndexList{6, 7, 8, 9, 10, 11}));
		else
			EXPECT_EQ(cols, sub.row_support);
	}
}

TEST(LocalityIndex, RowsAndColumnsPartition)
{
	std::mt19937_64 rng(5);
	const auto m = oracle::random_network(rng, {1, 2, 1, 3}, {1, 0, 2, 1}, 0.4);
	const auto idx = build_locality_index(build_graph(m), m, 1, 3);
	std::vector<int> row_hits(static_cast<std::size_t>(idx.layout.rows()), 0);
	std::vector<int> col_hits(static_cast<std::size_t>(idx.layout.cols()), 0);
	for (const auto& sub : idx.subsystems)
	{
		for (auto r : sub.rows)
			++row_hits[static_cast<std::size_t>(r)];
		for (auto c : sub.cols)
			++col_hits[static_cast<std::size_t>(c)];
	}
	for (int h : row_hits)
		EXPECT_EQ(h, 1);
	for (int h : col_hits)
		EXPECT_EQ(h, 1);
}

TEST(LocalityIndex, SupportsAreUnionsOfMaskEntries)
{
	std::mt19937_64 rng(9);
	const auto m = oracle::random_network(rng, {2, 1, 1, 2, 1}, {1, 1, 1, 1, 1}, 0.3);
	const auto dist = oracle::hop_distances(m);
	const int d = 1;
	const auto idx = build_locality_index(build_graph(m), m, d, 4);
	const auto& L = idx.layout;
	for (SubsystemId i = 0; i < idx.size(); ++i)
	{
		const auto& sub = idx.subsystems[i];
		for (std::size_t r = 0; r < sub.rows.size(); ++r)
		{
			const auto row = sub.rows[r];
			std::set<Index> expect;
			for (Index c = 0; c < L.cols(); ++c)
			{
				const auto j = idx.col_owner(c);
				const int radius = L.is_state_row(row) ? d : d + 1;
				if (dist[i][j] <= radius)
					expect.insert(c);
			}
			std::set<Index> got;
			for (auto pos : sub.row_allowed[r])
				got.insert(sub.row_support[static_cast<std::size_t>(pos)]);
			EXPECT_EQ(got, expect);
		}
		std::set<Index> col_expect;
		for (Index row = 0; row < L.rows(); ++row)
			for (auto c : sub.cols)
				if (idx.allowed(row, c))
					col_expect.insert(row);
		EXPECT_EQ(std::set<Index>(sub.col_support.begin(), sub.col_support.end()), col_expect);
	}
}

TEST(LocalityIndex, DisconnectedComponentsStaySeparate)
{
	Matrix A = Matrix::Zero(4, 4);
	A(0, 0) = A(1, 1) = A(2, 2) = A(3, 3) = 0.5;
	A(0, 1) = A(1, 0) = 0.2;
	A(2, 3) = A(3, 2) = 0.2;
	const auto m = NetworkModel::from_dense(A, Matrix::Identity(4, 4), {1, 1, 1, 1}, {1, 1, 1, 1});
	const auto idx = build_locality_index(build_graph(m), m, 4, 2);
	EXPECT_EQ(idx.subsystems[0].row_support, (IndexList{0, 1}));
	EXPECT_EQ(idx.subsystems[3].row_support, (IndexList{2, 3}));
}

TEST(LocalityIndex, RowOrdering)
{
	const auto m = build_chain_model(3);
	const auto idx = build_locality_index(build_graph(m), m, 1, 2);
	const auto& rows = idx.subsystems[1].rows;
	// States of subsystem 1 at t = 0, 1, 2, then its input at t = 0, 1.
	EXPECT_EQ(rows, (IndexList{2, 3, 8, 9, 14, 15, 19, 22}));
}
