#pragma once

#include "dlmpc/explicit_row.hpp"
#include "dlmpc/mpc_problem.hpp"
#include "dlmpc/qp.hpp"
#include "dlmpc/sls.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <thread>

namespace dlmpc
{

enum class RowSolver
{
	ClosedForm, // unconstrained closed form; bounds must all be infinite
	Explicit,   // three-region explicit solution
	Qp,         // generic QP solve per row
};

inline const char* to_string(RowSolver s)
{
	switch (s)
	{
	case RowSolver::ClosedForm: return "closed-form";
	case RowSolver::Explicit: return "explicit";
	case RowSolver::Qp: return "qp";
	}
	return "?";
}

struct AdmmSettings
{
	double rho = 1.0;
	double eps_p = 1e-4;
	double eps_d = 1e-4;
	int max_iters = 10000;
	bool warm_start = true;
	// Number of worker threads for the per-subsystem phases; 1 runs sequentially.
	std::size_t workers = 1;
};

enum class Phase
{
	Measurement,
	RowBlocks,
	ColumnBlocks,
};

inline const char* to_string(Phase p)
{
	switch (p)
	{
	case Phase::Measurement: return "MEASUREMENT";
	case Phase::RowBlocks: return "ROW_BLOCKS";
	case Phase::ColumnBlocks: return "COLUMN_BLOCKS";
	}
	return "?";
}

// A message between two subsystems. Entry e carries payload[e] for global coordinate coords[e]
// (row, column of Phi; for measurements the row is -1 and the column is the state component).
struct ExchangePacket
{
	SubsystemId sender = 0;
	SubsystemId receiver = 0;
	Phase phase = Phase::Measurement;
	std::vector<std::pair<Index, Index>> coords;
	std::vector<double> payload;
};

// Measurements and column blocks flow from a subsystem to its (d+1)-outgoing set; row blocks flow
// back to the owners of the columns they touch, i.e. the sender's (d+1)-incoming set.
inline bool packet_is_local(const LocalityIndex& idx, const ExchangePacket& pkt)
{
	const auto& s = idx.subsystems.at(pkt.sender);
	if (pkt.phase == Phase::RowBlocks)
		return contains(s.in_d1, pkt.receiver);
	return contains(s.out_d1, pkt.receiver);
}

struct SubsystemState
{
	// Row partition over rows r_i and columns s_{r_i}.
	Matrix phi_r, psi_r, lambda_r, psi_r_prev;
	// Column partition over rows s_{c_i} and columns c_i.
	Matrix phi_c, psi_c, lambda_c;
	// x0 restricted to s_{r_i}, assembled from measurement packets.
	Vector x0;
	double primal_residual = kInf;
	double dual_residual = kInf;
	double seconds = 0.0;
};

struct MpcStepStats
{
	int iterations = 0;
	bool converged = false;
	double primal_residual = 0.0; // max over subsystems
	double dual_residual = 0.0;
	std::vector<double> subsystem_seconds;
	std::vector<double> primal_trace;
	std::vector<double> dual_trace;
};

class AdmmEngine;
using IterationObserver = std::function<void(const AdmmEngine&, int iteration)>;
using PacketObserver = std::function<void(const ExchangePacket&)>;

// Bulk-synchronous simulation of the distributed ADMM iteration. Each subsystem owns its
// SubsystemState; exchange phases are the only points where state crosses subsystems.
class AdmmEngine
{
public:
	AdmmEngine(MpcProblem problem, AdmmSettings settings = {})
		: problem_(std::move(problem)), settings_(settings)
	{
		problem_.validate();
		if (!(settings_.rho > 0))
			throw std::invalid_argument("rho must be positive");
		graph_ = build_graph(problem_.model);
		index_ = build_locality_index(graph_, problem_.model, problem_.locality, problem_.horizon);
		op_ = std::make_unique<FeasibilityOperator>(problem_.model, problem_.horizon, index_);
		build_rows();
		build_routes();
		reset();
	}

	const MpcProblem& problem() const noexcept { return problem_; }
	const AdmmSettings& settings() const noexcept { return settings_; }
	AdmmSettings& settings() noexcept { return settings_; }
	const Graph& graph() const noexcept { return graph_; }
	const LocalityIndex& index() const noexcept { return index_; }
	const FeasibilityOperator& op() const noexcept { return *op_; }
	const SubsystemState& state(SubsystemId i) const { return states_.at(i); }
	std::size_t subsystems() const noexcept { return states_.size(); }
	bool converged() const noexcept { return converged_; }
	int iteration() const noexcept { return iteration_; }

	void set_iteration_observer(IterationObserver obs, int every = 1)
	{
		iteration_observer_ = std::move(obs);
		observe_every_ = std::max(1, every);
	}
	void set_packet_observer(PacketObserver obs) { packet_observer_ = std::move(obs); }

	// Cold start: Psi = Lambda = 0.
	void reset()
	{
		states_.assign(index_.size(), {});
		for (SubsystemId i = 0; i < index_.size(); ++i)
		{
			const auto& sub = index_.subsystems[i];
			auto& s = states_[i];
			const auto R = static_cast<Index>(sub.rows.size());
			const auto C = static_cast<Index>(sub.row_support.size());
			s.phi_r = s.psi_r = s.lambda_r = s.psi_r_prev = Matrix::Zero(R, C);
			const auto CR = static_cast<Index>(sub.col_support.size());
			const auto CC = static_cast<Index>(sub.cols.size());
			s.phi_c = s.psi_c = s.lambda_c = Matrix::Zero(CR, CC);
			s.x0 = Vector::Zero(C);
		}
		converged_ = false;
		started_ = false;
		iteration_ = 0;
	}

	// Every subsystem shares its measured state with its (d+1)-outgoing set, then
	// rebuilds the rank-one factors that depend on x0.
	void share_measurement(const Vector& x)
	{
		if (x.size() != index_.layout.n)
			throw std::invalid_argument("state has wrong dimension");
		for (auto& route : measurement_routes_)
		{
			auto& pkt = route.packet;
			for (std::size_t e = 0; e < route.from.size(); ++e)
				pkt.payload[e] = x(route.from[e]);
			deliver(pkt);
			auto& dst = states_[pkt.receiver].x0;
			for (std::size_t e = 0; e < route.to.size(); ++e)
				dst(route.to[e]) = pkt.payload[e];
		}
		converged_ = false;
		timed_phase([&](SubsystemId i) { build_factors(i); });
	}

	// Row update for subsystem i.
	void row_step(SubsystemId i, RowSolver solver)
	{
		auto& s = states_[i];
		auto& scratch = scratch_[i];
		const auto& rows = rows_[i];
		const auto& sub = index_.subsystems[i];
		for (std::size_t r = 0; r < rows.size(); ++r)
		{
			const auto& info = rows[r];
			const auto& allowed = sub.row_allowed[r];
			const auto k = static_cast<Index>(allowed.size());
			const auto rr = static_cast<Index>(r);
			auto& a = scratch.a[info.group];
			auto& phi = scratch.phi[info.group];
			for (Index e = 0; e < k; ++e)
				a(e) = s.psi_r(rr, allowed[e]) - s.lambda_r(rr, allowed[e]);
			const auto& factor = factors_[i][info.factor];
			switch (solver)
			{
			case RowSolver::ClosedForm:
				if (factor.degenerate())
					phi = a;
				else
				{
					scratch.work[info.group] = factor.rho() * a;
					factor.apply_into(scratch.work[info.group], phi);
				}
				break;
			case RowSolver::Explicit:
				solve_row_into(factor, a, info.lo, info.hi, sub.rows[r], phi, scratch.work[info.group]);
				break;
			case RowSolver::Qp:
				phi = qp_row(a, factor.x0(), info, sub.rows[r]);
				break;
			}
			for (Index e = 0; e < k; ++e)
				s.phi_r(rr, allowed[e]) = phi(e);
		}
	}

	// Column projection for subsystem i.
	void column_step(SubsystemId i)
	{
		auto& s = states_[i];
		auto& scratch = scratch_[i];
		scratch.v = s.phi_c + s.lambda_c;
		op_->project_column_into(i, scratch.v, s.psi_c, scratch.w);
	}

	// Multiplier update for subsystem i. Both partitions apply the same update to the same values.
	void multiplier_step(SubsystemId i)
	{
		auto& s = states_[i];
		s.lambda_r += s.phi_r - s.psi_r;
		s.lambda_c += s.phi_c - s.psi_c;
	}

	// Stopping test for subsystem i, residuals on the row partition.
	bool check_convergence(SubsystemId i)
	{
		auto& s = states_[i];
		s.primal_residual = (s.phi_r - s.psi_r).norm();
		s.dual_residual = (s.psi_r - s.psi_r_prev).norm();
		return s.primal_residual <= settings_.eps_p && s.dual_residual <= settings_.eps_d;
	}

	// Row blocks of Phi to the column owners.
	void exchange_rows()
	{
		for (auto& route : row_routes_)
		{
			auto& pkt = route.packet;
			const auto& src = states_[pkt.sender].phi_r;
			for (std::size_t e = 0; e < route.from.size(); ++e)
				pkt.payload[e] = src(route.from[e].first, route.from[e].second);
			deliver(pkt);
			auto& dst = states_[pkt.receiver].phi_c;
			for (std::size_t e = 0; e < route.to.size(); ++e)
				dst(route.to[e].first, route.to[e].second) = pkt.payload[e];
		}
	}

	// Column blocks of Psi back to the row owners.
	void exchange_columns()
	{
		for (auto& s : states_)
			s.psi_r_prev = s.psi_r;
		for (auto& route : col_routes_)
		{
			auto& pkt = route.packet;
			const auto& src = states_[pkt.sender].psi_c;
			for (std::size_t e = 0; e < route.from.size(); ++e)
				pkt.payload[e] = src(route.from[e].first, route.from[e].second);
			deliver(pkt);
			auto& dst = states_[pkt.receiver].psi_r;
			for (std::size_t e = 0; e < route.to.size(); ++e)
				dst(route.to[e].first, route.to[e].second) = pkt.payload[e];
		}
	}

	// One full ADMM iteration across all subsystems. Returns true once every subsystem converged.
	bool iterate(RowSolver solver)
	{
		timed_phase([&](SubsystemId i) { row_step(i, solver); });
		exchange_rows();
		timed_phase([&](SubsystemId i) { column_step(i); });
		exchange_columns();
		std::vector<char> done(states_.size(), 0);
		timed_phase([&](SubsystemId i) {
			multiplier_step(i);
			done[i] = check_convergence(i) ? 1 : 0;
		});
		++iteration_;
		if (iteration_observer_ && iteration_ % observe_every_ == 0)
			iteration_observer_(*this, iteration_);
		converged_ = std::all_of(done.begin(), done.end(), [](char c) { return c != 0; });
		return converged_;
	}

	// One MPC step, iterated to convergence. Returns the global input to apply.
	Vector run_mpc_step(const Vector& x, RowSolver solver, MpcStepStats* stats = nullptr)
	{
		if (solver == RowSolver::ClosedForm && problem_.has_finite_bounds())
			throw std::invalid_argument("closed-form row step requires an unconstrained problem");
		if (!settings_.warm_start || !started_)
			reset();
		started_ = true;
		for (auto& s : states_)
			s.seconds = 0.0;
		share_measurement(x);
		MpcStepStats local;
		iteration_ = 0;
		bool done = false;
		while (!done)
		{
			if (iteration_ >= settings_.max_iters)
			{
				std::ostringstream os;
				os << "ADMM did not converge within " << settings_.max_iters << " iterations (primal "
				   << max_primal() << ", dual " << max_dual() << ")";
				throw NonConvergenceError(os.str(), local.primal_trace, local.dual_trace);
			}
			done = iterate(solver);
			local.primal_trace.push_back(max_primal());
			local.dual_trace.push_back(max_dual());
		}
		Vector u(index_.layout.p);
		for (SubsystemId i = 0; i < states_.size(); ++i)
		{
			const Vector ui = extract_control(i);
			u.segment(index_.input_offsets[i], ui.size()) = ui;
		}
		if (stats)
		{
			local.iterations = iteration_;
			local.converged = true;
			local.primal_residual = max_primal();
			local.dual_residual = max_dual();
			for (const auto& s : states_)
				local.subsystem_seconds.push_back(s.seconds);
			*stats = std::move(local);
		}
		return u;
	}

	// [u_0]_i = [Phi_u,0[0]]_{i_r} [x0]_{s_{r_i}}.
	Vector extract_control(SubsystemId i) const
	{
		if (!converged_)
			throw StaleStateError("control requested before ADMM converged");
		const auto& sub = index_.subsystems[i];
		const auto& s = states_[i];
		const auto n_states = static_cast<std::size_t>(index_.state_dims[i] * (index_.layout.horizon + 1));
		Vector u(index_.input_dims[i]);
		for (Index k = 0; k < u.size(); ++k)
		{
			const auto r = n_states + static_cast<std::size_t>(k);
			double v = 0.0;
			for (auto pos : sub.row_allowed[r])
				v += s.phi_r(static_cast<Index>(r), pos) * s.x0(pos);
			u(k) = v;
		}
		return u;
	}

	// Global Phi (or Psi, Lambda) assembled from the row partitions.
	enum class Variable
	{
		Phi,
		Psi,
		Lambda
	};

	Matrix assemble(Variable which) const
	{
		Matrix out = Matrix::Zero(index_.layout.rows(), index_.layout.cols());
		for (SubsystemId i = 0; i < states_.size(); ++i)
		{
			const auto& sub = index_.subsystems[i];
			const auto& s = states_[i];
			const Matrix& m = which == Variable::Phi ? s.phi_r : which == Variable::Psi ? s.psi_r : s.lambda_r;
			for (std::size_t r = 0; r < sub.rows.size(); ++r)
				for (std::size_t c = 0; c < sub.row_support.size(); ++c)
					out(sub.rows[r], sub.row_support[c]) = m(static_cast<Index>(r), static_cast<Index>(c));
		}
		return out;
	}

	// Count of entries outside the locality masks that are not exactly zero, over both partitions.
	std::size_t locality_violations() const
	{
		std::size_t bad = 0;
		for (SubsystemId i = 0; i < states_.size(); ++i)
		{
			const auto& sub = index_.subsystems[i];
			const auto& s = states_[i];
			for (std::size_t r = 0; r < sub.rows.size(); ++r)
			{
				for (std::size_t c = 0; c < sub.row_support.size(); ++c)
				{
					if (index_.allowed(sub.rows[r], sub.row_support[c]))
						continue;
					const auto rr = static_cast<Index>(r);
					const auto cc = static_cast<Index>(c);
					bad += (s.phi_r(rr, cc) != 0.0) + (s.psi_r(rr, cc) != 0.0) + (s.lambda_r(rr, cc) != 0.0);
				}
			}
			for (std::size_t r = 0; r < sub.col_support.size(); ++r)
			{
				for (std::size_t c = 0; c < sub.cols.size(); ++c)
				{
					if (index_.allowed(sub.col_support[r], sub.cols[c]))
						continue;
					const auto rr = static_cast<Index>(r);
					const auto cc = static_cast<Index>(c);
					bad += (s.phi_c(rr, cc) != 0.0) + (s.psi_c(rr, cc) != 0.0) + (s.lambda_c(rr, cc) != 0.0);
				}
			}
		}
		return bad;
	}

	double max_primal() const
	{
		double v = 0.0;
		for (const auto& s : states_)
			v = std::max(v, s.primal_residual);
		return v;
	}

	double max_dual() const
	{
		double v = 0.0;
		for (const auto& s : states_)
			v = std::max(v, s.dual_residual);
		return v;
	}

	// Predicted horizon cost sum_rows weight^2 (row x0)^2 of the current Phi.
	double predicted_cost() const
	{
		double cost = 0.0;
		for (SubsystemId i = 0; i < states_.size(); ++i)
		{
			const auto& sub = index_.subsystems[i];
			const auto& s = states_[i];
			for (std::size_t r = 0; r < sub.rows.size(); ++r)
			{
				const double y = s.phi_r.row(static_cast<Index>(r)).dot(s.x0);
				cost += rows_[i][r].weight * rows_[i][r].weight * y * y;
			}
		}
		return cost;
	}

private:
	struct RowInfo
	{
		double lo = -kInf;
		double hi = kInf;
		double weight = 1.0;
		std::size_t factor = 0; // index into factors_[i]
		std::size_t group = 0;  // rows sharing the same allowed column set
	};

	template <typename From, typename To>
	struct Route
	{
		ExchangePacket packet;
		std::vector<From> from;
		std::vector<To> to;
	};
	using Entry = std::pair<Index, Index>;

	// Per-subsystem buffers reused across iterations, one row buffer per allowed-column group.
	struct Scratch
	{
		std::vector<RowVector> a, phi, work;
		Matrix v, w;
	};

	void build_rows()
	{
		const auto& L = index_.layout;
		rows_.resize(index_.size());
		factor_keys_.resize(index_.size());
		factors_.resize(index_.size());
		scratch_.resize(index_.size());
		for (SubsystemId i = 0; i < index_.size(); ++i)
		{
			const auto& sub = index_.subsystems[i];
			std::vector<IndexList> groups;
			for (std::size_t r = 0; r < sub.rows.size(); ++r)
			{
				RowInfo info;
				std::tie(info.lo, info.hi) = problem_.row_bounds(L, sub.rows[r]);
				info.weight = problem_.row_weight(L, sub.rows[r]);
				auto g = std::find(groups.begin(), groups.end(), sub.row_allowed[r]);
				if (g == groups.end())
					g = groups.insert(groups.end(), sub.row_allowed[r]);
				info.group = static_cast<std::size_t>(g - groups.begin());
				auto& keys = factor_keys_[i];
				const auto key = std::pair{info.group, info.weight};
				auto f = std::find(keys.begin(), keys.end(), key);
				if (f == keys.end())
					f = keys.insert(keys.end(), key);
				info.factor = static_cast<std::size_t>(f - keys.begin());
				rows_[i].push_back(info);
			}
			auto& scratch = scratch_[i];
			for (const auto& g : groups)
			{
				const auto k = static_cast<Index>(g.size());
				scratch.a.emplace_back(k);
				scratch.phi.emplace_back(k);
				scratch.work.emplace_back(k);
			}
			const auto& slice = op_->slice(i);
			scratch.v.resize(static_cast<Index>(sub.col_support.size()), static_cast<Index>(sub.cols.size()));
			scratch.w.resize(slice.null_basis.cols(), static_cast<Index>(sub.cols.size()));
			groups_.push_back(std::move(groups));
		}
	}

	void build_factors(SubsystemId i)
	{
		auto& out = factors_[i];
		out.clear();
		const auto& x0 = states_[i].x0;
		for (const auto& [group, weight] : factor_keys_[i])
		{
			const auto& positions = groups_[i][group];
			Vector slice(static_cast<Index>(positions.size()));
			for (std::size_t e = 0; e < positions.size(); ++e)
				slice(static_cast<Index>(e)) = x0(positions[e]);
			out.emplace_back(slice, settings_.rho, weight);
		}
	}

	void build_routes()
	{
		const auto N = index_.size();
		// Measurements: component k of subsystem j goes to every i whose row support holds it.
		for (SubsystemId i = 0; i < N; ++i)
		{
			const auto& sub = index_.subsystems[i];
			std::map<SubsystemId, Route<Index, Index>> by_sender;
			for (std::size_t pos = 0; pos < sub.row_support.size(); ++pos)
			{
				const auto col = sub.row_support[pos];
				const auto j = index_.col_owner(col);
				auto& route = by_sender[j];
				route.packet.coords.emplace_back(-1, col);
				route.from.push_back(col);
				route.to.push_back(static_cast<Index>(pos));
			}
			for (auto& [j, route] : by_sender)
			{
				route.packet.sender = j;
				route.packet.receiver = i;
				route.packet.phase = Phase::Measurement;
				measurement_routes_.push_back(std::move(route));
			}
		}

		// Row blocks: admissible entry (row of i, column of j) goes into j's column partition.
		std::map<std::pair<SubsystemId, SubsystemId>, Route<Entry, Entry>> rows;
		for (SubsystemId i = 0; i < N; ++i)
		{
			const auto& sub = index_.subsystems[i];
			for (std::size_t r = 0; r < sub.rows.size(); ++r)
			{
				for (auto pos : sub.row_allowed[r])
				{
					const auto row = sub.rows[r];
					const auto col = sub.row_support[static_cast<std::size_t>(pos)];
					const auto j = index_.col_owner(col);
					const auto& dst = index_.subsystems[j];
					const auto rr = std::lower_bound(dst.col_support.begin(), dst.col_support.end(), row) - dst.col_support.begin();
					if (rr == static_cast<Index>(dst.col_support.size()) || dst.col_support[static_cast<std::size_t>(rr)] != row)
						throw ModelError("column partition is missing an admissible row");
					auto& route = rows[{i, j}];
					route.packet.coords.emplace_back(row, col);
					route.from.emplace_back(static_cast<Index>(r), pos);
					route.to.emplace_back(rr, col - index_.state_offsets[j]);
				}
			}
		}
		for (auto& [key, route] : rows)
		{
			route.packet.sender = key.first;
			route.packet.receiver = key.second;
			route.packet.phase = Phase::RowBlocks;
			Route<Entry, Entry> back;
			back.packet.sender = key.second;
			back.packet.receiver = key.first;
			back.packet.phase = Phase::ColumnBlocks;
			back.packet.coords = route.packet.coords;
			back.from = route.to;
			back.to = route.from;
			row_routes_.push_back(std::move(route));
			col_routes_.push_back(std::move(back));
		}

		auto size_payload = [&](auto& routes) {
			for (auto& route : routes)
			{
				route.packet.payload.assign(route.from.size(), 0.0);
				if (!packet_is_local(index_, route.packet))
					throw ModelError("exchange route violates the communication locality");
			}
		};
		size_payload(measurement_routes_);
		size_payload(row_routes_);
		size_payload(col_routes_);
	}

	void deliver(const ExchangePacket& pkt) const
	{
		if (packet_observer_)
			packet_observer_(pkt);
	}

	template <typename Fn>
	void timed_phase(Fn&& fn)
	{
		const auto N = states_.size();
		auto run = [&](SubsystemId i) {
			const auto start = std::chrono::steady_clock::now();
			fn(i);
			states_[i].seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
		};
		const auto workers = std::min<std::size_t>(settings_.workers, N);
		if (workers <= 1)
		{
			for (SubsystemId i = 0; i < N; ++i)
				run(i);
			return;
		}
		std::vector<std::exception_ptr> errors(workers);
		{
			std::vector<std::jthread> pool;
			for (std::size_t w = 0; w < workers; ++w)
			{
				pool.emplace_back([&, w] {
					try
					{
						for (SubsystemId i = w; i < N; i += workers)
							run(i);
					}
					catch (...)
					{
						errors[w] = std::current_exception();
					}
				});
			}
		}
		for (auto& e : errors)
			if (e)
				std::rethrow_exception(e);
	}

	Vector qp_row(const RowVector& a, const Vector& x0, const RowInfo& info, Index row) const
	{
		const auto k = a.size();
		const bool bounded = std::isfinite(info.lo) || std::isfinite(info.hi);
		const Index nv = bounded ? k + 1 : k;
		DenseQP qp;
		qp.H = Matrix::Zero(nv, nv);
		qp.H.topLeftCorner(k, k) = 2.0 * info.weight * info.weight * x0 * x0.transpose();
		qp.H.topLeftCorner(k, k).diagonal().array() += settings_.rho;
		qp.g = Vector::Zero(nv);
		qp.g.head(k) = -settings_.rho * a.transpose();
		qp.lb = Vector::Constant(nv, -kInf);
		qp.ub = Vector::Constant(nv, kInf);
		if (bounded)
		{
			qp.A_eq = Matrix::Zero(1, nv);
			qp.A_eq.row(0).head(k) = x0.transpose();
			qp.A_eq(0, k) = -1.0;
			qp.b_eq = Vector::Zero(1);
			qp.lb(k) = info.lo;
			qp.ub(k) = info.hi;
		}
		else
		{
			qp.A_eq = Matrix::Zero(0, nv);
			qp.b_eq = Vector::Zero(0);
		}
		const auto res = solve_qp(qp);
		if (res.status != QpStatus::Optimal)
		{
			std::ostringstream os;
			os << "row " << row << ": QP row step returned " << to_string(res.status);
			throw InfeasibleRowError(os.str(), row);
		}
		return res.x.head(k);
	}

	MpcProblem problem_;
	AdmmSettings settings_;
	Graph graph_;
	LocalityIndex index_;
	std::unique_ptr<FeasibilityOperator> op_;
	std::vector<std::vector<RowInfo>> rows_;
	std::vector<std::vector<IndexList>> groups_;
	std::vector<std::vector<std::pair<std::size_t, double>>> factor_keys_;
	std::vector<std::vector<ShermanMorrison>> factors_;
	std::vector<Scratch> scratch_;
	std::vector<Route<Index, Index>> measurement_routes_;
	std::vector<Route<Entry, Entry>> row_routes_;
	std::vector<Route<Entry, Entry>> col_routes_;
	std::vector<SubsystemState> states_;
	IterationObserver iteration_observer_;
	PacketObserver packet_observer_;
	int observe_every_ = 1;
	int iteration_ = 0;
	bool converged_ = false;
	bool started_ = false;
};

} // namespace dlmpc
