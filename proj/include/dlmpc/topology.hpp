#pragma once

#include "dlmpc/types.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

namespace dlmpc
{

using BlockKey = std::pair<SubsystemId, SubsystemId>;
using Neighborhood = std::vector<SubsystemId>;

// Block-partitioned LTI model x+ = A x + B u. Blocks absent from the maps are zero.
struct NetworkModel
{
	std::vector<Index> state_dims;
	std::vector<Index> input_dims;
	std::map<BlockKey, Matrix> A_blocks;
	std::map<BlockKey, Matrix> B_blocks;

	std::size_t subsystems() const noexcept { return state_dims.size(); }

	Index n() const { return std::accumulate(state_dims.begin(), state_dims.end(), Index{0}); }
	Index p() const { return std::accumulate(input_dims.begin(), input_dims.end(), Index{0}); }

	Index state_offset(SubsystemId i) const
	{
		return std::accumulate(state_dims.begin(), state_dims.begin() + static_cast<std::ptrdiff_t>(i), Index{0});
	}

	Index input_offset(SubsystemId i) const
	{
		return std::accumulate(input_dims.begin(), input_dims.begin() + static_cast<std::ptrdiff_t>(i), Index{0});
	}

	void validate() const
	{
		if (state_dims.size() != input_dims.size())
			throw ModelError("state_dims and input_dims differ in length");
		const auto N = subsystems();
		for (auto d : state_dims)
			if (d <= 0)
				throw ModelError("every subsystem needs at least one state");
		for (auto d : input_dims)
			if (d < 0)
				throw ModelError("negative input dimension");
		auto check = [&](const char* name, const std::map<BlockKey, Matrix>& blocks, const std::vector<Index>& col_dims) {
			for (const auto& [key, block] : blocks)
			{
				const auto [i, j] = key;
				if (i >= N || j >= N)
				{
					std::ostringstream os;
					os << name << " block (" << i << "," << j << ") outside " << N << " subsystems";
					throw ModelError(os.str());
				}
				if (block.rows() != state_dims[i] || block.cols() != col_dims[j])
				{
					std::ostringstream os;
					os << name << " block (" << i << "," << j << ") has shape " << block.rows() << "x" << block.cols()
					   << ", expected " << state_dims[i] << "x" << col_dims[j];
					throw ModelError(os.str());
				}
			}
		};
		check("A", A_blocks, state_dims);
		check("B", B_blocks, input_dims);
	}

	Matrix dense_A() const
	{
		Matrix A = Matrix::Zero(n(), n());
		for (const auto& [key, block] : A_blocks)
			A.block(state_offset(key.first), state_offset(key.second), block.rows(), block.cols()) = block;
		return A;
	}

	Matrix dense_B() const
	{
		Matrix B = Matrix::Zero(n(), p());
		for (const auto& [key, block] : B_blocks)
			B.block(state_offset(key.first), input_offset(key.second), block.rows(), block.cols()) = block;
		return B;
	}

	// Splits dense (A, B) into blocks, keeping only blocks with a nonzero entry.
	static NetworkModel from_dense(const Matrix& A, const Matrix& B, std::vector<Index> state_dims,
	                               std::vector<Index> input_dims)
	{
		NetworkModel m;
		m.state_dims = std::move(state_dims);
		m.input_dims = std::move(input_dims);
		if (A.rows() != m.n() || A.cols() != m.n() || B.rows() != m.n() || B.cols() != m.p())
			throw ModelError("dense A/B shape does not match block dimensions");
		const auto N = m.subsystems();
		for (SubsystemId i = 0; i < N; ++i)
		{
			for (SubsystemId j = 0; j < N; ++j)
			{
				Matrix a = A.block(m.state_offset(i), m.state_offset(j), m.state_dims[i], m.state_dims[j]);
				if ((a.array() != 0.0).any())
					m.A_blocks.emplace(BlockKey{i, j}, std::move(a));
				if (m.input_dims[j] > 0)
				{
					Matrix b = B.block(m.state_offset(i), m.input_offset(j), m.state_dims[i], m.input_dims[j]);
					if ((b.array() != 0.0).any())
						m.B_blocks.emplace(BlockKey{i, j}, std::move(b));
				}
			}
		}
		return m;
	}
};

// Directed interconnection graph. An edge j -> i exists whenever [A]_ij or [B]_ij is nonzero,
// i.e. subsystem j influences subsystem i.
class Graph
{
public:
	explicit Graph(std::size_t vertices = 0) : incoming_(vertices), outgoing_(vertices) {}

	std::size_t vertices() const noexcept { return incoming_.size(); }

	void add_edge(SubsystemId from, SubsystemId to)
	{
		auto insert = [](Neighborhood& list, SubsystemId v) {
			auto it = std::lower_bound(list.begin(), list.end(), v);
			if (it == list.end() || *it != v)
				list.insert(it, v);
		};
		insert(outgoing_.at(from), to);
		insert(incoming_.at(to), from);
	}

	bool has_edge(SubsystemId from, SubsystemId to) const
	{
		const auto& list = outgoing_.at(from);
		return std::binary_search(list.begin(), list.end(), to);
	}

	const Neighborhood& incoming(SubsystemId i) const { return incoming_.at(i); }
	const Neighborhood& outgoing(SubsystemId i) const { return outgoing_.at(i); }

	std::size_t edge_count() const
	{
		std::size_t count = 0;
		for (const auto& list : outgoing_)
			count += list.size();
		return count;
	}

private:
	std::vector<Neighborhood> incoming_;
	std::vector<Neighborhood> outgoing_;
};

inline Graph build_graph(const NetworkModel& model)
{
	model.validate();
	Graph g(model.subsystems());
	auto add_support = [&](const std::map<BlockKey, Matrix>& blocks) {
		for (const auto& [key, block] : blocks)
			if ((block.array() != 0.0).any())
				g.add_edge(key.second, key.first);
	};
	add_support(model.A_blocks);
	add_support(model.B_blocks);
	return g;
}

namespace detail
{

template <typename Next>
Neighborhood bounded_bfs(std::size_t vertices, SubsystemId source, int hops, Next&& next)
{
	if (source >= vertices)
		throw std::out_of_range("subsystem index out of range");
	if (hops < 0)
		throw std::invalid_argument("hop count must be nonnegative");
	std::vector<int> dist(vertices, -1);
	std::deque<SubsystemId> queue{source};
	dist[source] = 0;
	while (!queue.empty())
	{
		const auto v = queue.front();
		queue.pop_front();
		if (dist[v] == hops)
			continue;
		for (auto w : next(v))
		{
			if (dist[w] < 0)
			{
				dist[w] = dist[v] + 1;
				queue.push_back(w);
			}
		}
	}
	Neighborhood out;
	for (SubsystemId v = 0; v < vertices; ++v)
		if (dist[v] >= 0)
			out.push_back(v);
	return out;
}

} // namespace detail

// in_i(d): every j with a directed path j -> i of at most d edges. Always contains i.
inline Neighborhood d_in_set(const Graph& g, SubsystemId i, int d)
{
	return detail::bounded_bfs(g.vertices(), i, d, [&](SubsystemId v) -> const Neighborhood& { return g.incoming(v); });
}

// out_i(d): every j reachable from i in at most d edges. Always contains i.
inline Neighborhood d_out_set(const Graph& g, SubsystemId i, int d)
{
	return detail::bounded_bfs(g.vertices(), i, d, [&](SubsystemId v) -> const Neighborhood& { return g.outgoing(v); });
}

inline bool contains(const Neighborhood& set, SubsystemId v)
{
	return std::binary_search(set.begin(), set.end(), v);
}

// Row layout of the stacked response Phi = [Phi_x; Phi_u] (first block column only).
// State rows: t*n + state_offset(i) + k for t = 0..T. Input rows: n(T+1) + t*p + input_offset(i) + k
// for t = 0..T-1. Columns are the n components of x0.
struct ResponseLayout
{
	Index n = 0;
	Index p = 0;
	Index horizon = 0;

	Index state_rows() const noexcept { return n * (horizon + 1); }
	Index input_rows() const noexcept { return p * horizon; }
	Index rows() const noexcept { return state_rows() + input_rows(); }
	Index cols() const noexcept { return n; }

	Index state_row(Index t, Index component) const noexcept { return t * n + component; }
	Index input_row(Index t, Index component) const noexcept { return state_rows() + t * p + component; }
	bool is_state_row(Index row) const noexcept { return row < state_rows(); }
	// Time step of a row.
	Index time_of(Index row) const noexcept { return is_state_row(row) ? row / n : (row - state_rows()) / p; }
	// Global state or input component of a row.
	Index component_of(Index row) const noexcept { return is_state_row(row) ? row % n : (row - state_rows()) % p; }
};

// Per-subsystem index sets and block sparsity masks for a d-locality constraint:
// Phi_x block (i,j) may be nonzero iff j in in_i(d), Phi_u block (i,j) iff j in in_i(d+1).
struct LocalityIndex
{
	struct Subsystem
	{
		Neighborhood in_d;
		Neighborhood in_d1;
		Neighborhood out_d;
		Neighborhood out_d1;

		// r_i: owned Phi rows, state rows t = 0..T then input rows t = 0..T-1.
		IndexList rows;
		// s_{r_i}: union of admissible columns over rows, ascending.
		IndexList row_support;
		// For every owned row, positions into row_support that may be nonzero.
		std::vector<IndexList> row_allowed;
		// c_i: owned columns.
		IndexList cols;
		// s_{c_i}: rows admissible for the owned columns, ascending.
		IndexList col_support;
	};

	int d = 0;
	ResponseLayout layout;
	std::vector<Index> state_offsets;
	std::vector<Index> state_dims;
	std::vector<Index> input_offsets;
	std::vector<Index> input_dims;
	// Owner subsystem of every global state / input component.
	std::vector<SubsystemId> state_owner;
	std::vector<SubsystemId> input_owner;
	std::vector<std::vector<bool>> mask_x;
	std::vector<std::vector<bool>> mask_u;
	std::vector<Subsystem> subsystems;

	std::size_t size() const noexcept { return subsystems.size(); }

	SubsystemId row_owner(Index row) const
	{
		const auto c = layout.component_of(row);
		return layout.is_state_row(row) ? state_owner[static_cast<std::size_t>(c)] : input_owner[static_cast<std::size_t>(c)];
	}

	SubsystemId col_owner(Index col) const { return state_owner[static_cast<std::size_t>(col)]; }

	bool allowed(Index row, Index col) const
	{
		const auto i = row_owner(row);
		const auto j = col_owner(col);
		return layout.is_state_row(row) ? mask_x[i][j] : mask_u[i][j];
	}

	Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> dense_mask() const
	{
		Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(layout.rows(), layout.cols());
		for (Index r = 0; r < layout.rows(); ++r)
			for (Index c = 0; c < layout.cols(); ++c)
				mask(r, c) = allowed(r, c);
		return mask;
	}
};

inline LocalityIndex build_locality_index(const Graph& g, const NetworkModel& model, int d, Index horizon)
{
	if (d < 0)
		throw std::invalid_argument("locality radius must be nonnegative");
	if (horizon < 1)
		throw std::invalid_argument("horizon must be at least 1");
	model.validate();
	const auto N = model.subsystems();
	if (g.vertices() != N)
		throw ModelError("graph and model disagree on subsystem count");

	LocalityIndex idx;
	idx.d = d;
	idx.layout = ResponseLayout{model.n(), model.p(), horizon};
	idx.state_dims = model.state_dims;
	idx.input_dims = model.input_dims;
	for (SubsystemId i = 0; i < N; ++i)
	{
		idx.state_offsets.push_back(model.state_offset(i));
		idx.input_offsets.push_back(model.input_offset(i));
		for (Index k = 0; k < model.state_dims[i]; ++k)
			idx.state_owner.push_back(i);
		for (Index k = 0; k < model.input_dims[i]; ++k)
			idx.input_owner.push_back(i);
	}

	idx.subsystems.resize(N);
	idx.mask_x.assign(N, std::vector<bool>(N, false));
	idx.mask_u.assign(N, std::vector<bool>(N, false));
	for (SubsystemId i = 0; i < N; ++i)
	{
		auto& s = idx.subsystems[i];
		s.in_d = d_in_set(g, i, d);
		s.in_d1 = d_in_set(g, i, d + 1);
		s.out_d = d_out_set(g, i, d);
		s.out_d1 = d_out_set(g, i, d + 1);
		for (auto j : s.in_d)
			idx.mask_x[i][j] = true;
		for (auto j : s.in_d1)
			idx.mask_u[i][j] = true;
	}

	const auto& L = idx.layout;
	auto state_columns = [&](const Neighborhood& set) {
		IndexList cols;
		for (auto j : set)
			for (Index k = 0; k < idx.state_dims[j]; ++k)
				cols.push_back(idx.state_offsets[j] + k);
		return cols;
	};

	for (SubsystemId i = 0; i < N; ++i)
	{
		auto& s = idx.subsystems[i];
		for (Index t = 0; t <= horizon; ++t)
			for (Index k = 0; k < idx.state_dims[i]; ++k)
				s.rows.push_back(L.state_row(t, idx.state_offsets[i] + k));
		for (Index t = 0; t < horizon; ++t)
			for (Index k = 0; k < idx.input_dims[i]; ++k)
				s.rows.push_back(L.input_row(t, idx.input_offsets[i] + k));

		// in_i(d) is a subset of in_i(d+1); input-row columns cover every row.
		s.row_support = state_columns(s.in_d1);
		for (auto row : s.rows)
		{
			IndexList allowed;
			for (Index pos = 0; pos < static_cast<Index>(s.row_support.size()); ++pos)
				if (idx.allowed(row, s.row_support[static_cast<std::size_t>(pos)]))
					allowed.push_back(pos);
			s.row_allowed.push_back(std::move(allowed));
		}

		s.cols = state_columns(Neighborhood{i});
		for (Index t = 0; t <= horizon; ++t)
			for (auto j : s.out_d)
				for (Index k = 0; k < idx.state_dims[j]; ++k)
					s.col_support.push_back(L.state_row(t, idx.state_offsets[j] + k));
		for (Index t = 0; t < horizon; ++t)
			for (auto j : s.out_d1)
				for (Index k = 0; k < idx.input_dims[j]; ++k)
					s.col_support.push_back(L.input_row(t, idx.input_offsets[j] + k));
		std::sort(s.col_support.begin(), s.col_support.end());
	}
	return idx;
}

} // namespace dlmpc
