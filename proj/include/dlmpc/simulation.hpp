#pragma once

#include "dlmpc/centralized.hpp"
#include "dlmpc/scenario.hpp"

namespace dlmpc
{

struct StepRecord
{
	int iterations = 0;
	double primal_residual = 0.0;
	double dual_residual = 0.0;
	std::vector<double> subsystem_seconds;
};

struct RunReport
{
	std::size_t N = 0;
	std::string case_name;
	bool warm_start = true;
	std::uint64_t seed = 0;
	std::vector<StepRecord> steps;
	Matrix xs; // n x (steps + 1)
	Matrix us; // p x steps
	double cost = 0.0;
	double baseline_cost = 0.0;
	double relative_error = 0.0;

	// Mean over subsystems and MPC steps of the per-step subsystem wall time.
	double mean_subsystem_seconds() const
	{
		double sum = 0.0;
		std::size_t count = 0;
		for (const auto& s : steps)
		{
			for (double v : s.subsystem_seconds)
				sum += v;
			count += s.subsystem_seconds.size();
		}
		return count ? sum / static_cast<double>(count) : 0.0;
	}

	double mean_iterations() const
	{
		if (steps.empty())
			return 0.0;
		double sum = 0.0;
		for (const auto& s : steps)
			sum += s.iterations;
		return sum / static_cast<double>(steps.size());
	}

	int max_iterations() const
	{
		int m = 0;
		for (const auto& s : steps)
			m = std::max(m, s.iterations);
		return m;
	}
};

// Closed-loop cost sum_t x'Qx + u'Ru over the simulated steps plus x'Q_T x at the final state.
inline double closed_loop_cost(const MpcProblem& p, const Matrix& xs, const Matrix& us)
{
	double cost = 0.0;
	for (Index t = 0; t < us.cols(); ++t)
		cost += xs.col(t).cwiseProduct(p.q).dot(xs.col(t)) + us.col(t).cwiseProduct(p.r).dot(us.col(t));
	if (xs.cols() > 0)
		cost += xs.col(xs.cols() - 1).cwiseProduct(p.q_T).dot(xs.col(xs.cols() - 1));
	return cost;
}

inline double relative_cost_error(double cost, double baseline)
{
	return baseline > 0.0 ? std::abs(cost - baseline) / baseline : std::abs(cost - baseline);
}

struct Trajectory
{
	Matrix xs;
	Matrix us;
	double cost = 0.0;
};

namespace detail
{

template <typename Controller>
Trajectory simulate(const MpcProblem& p, const Vector& x0, int steps, Controller&& controller)
{
	const Matrix A = p.model.dense_A();
	const Matrix B = p.model.dense_B();
	Trajectory tr;
	tr.xs = Matrix::Zero(p.model.n(), steps + 1);
	tr.us = Matrix::Zero(p.model.p(), steps);
	tr.xs.col(0) = x0;
	for (int t = 0; t < steps; ++t)
	{
		Vector u;
		try
		{
			u = controller(t, Vector(tr.xs.col(t)));
		}
		catch (const NonConvergenceError& e)
		{
			throw NonConvergenceError("step " + std::to_string(t) + ": " + e.what(), e.primal_trace(), e.dual_trace());
		}
		catch (const InfeasibleProblemError& e)
		{
			throw InfeasibleProblemError("step " + std::to_string(t) + ": " + e.what());
		}
		catch (const InfeasibleRowError& e)
		{
			throw InfeasibleRowError("step " + std::to_string(t) + ": " + e.what(), e.row());
		}
		tr.us.col(t) = u;
		tr.xs.col(t + 1) = A * tr.xs.col(t) + B * u;
	}
	tr.cost = closed_loop_cost(p, tr.xs, tr.us);
	return tr;
}

} // namespace detail

inline Trajectory run_centralized_closed_loop(const Scenario& s)
{
	const auto p = make_problem(s);
	return detail::simulate(p, initial_state(s), s.config.sim_steps,
	                        [&](int, const Vector& x) { return centralized_mpc(p, x).u0; });
}

struct RunOptions
{
	bool baseline = true;
	IterationObserver observer;
	int observe_every = 1;
	PacketObserver packets;
};

inline RunReport run_closed_loop(const Scenario& s, const RunOptions& opt = {})
{
	const auto p = make_problem(s);
	AdmmEngine engine(p, s.config.admm());
	if (opt.observer)
		engine.set_iteration_observer(opt.observer, opt.observe_every);
	if (opt.packets)
		engine.set_packet_observer(opt.packets);
	const auto solver = row_solver(s.config.case_);

	RunReport rep;
	rep.N = s.model.subsystems();
	rep.case_name = to_string(s.config.case_);
	rep.warm_start = s.config.warm_start;
	rep.seed = s.config.seed;
	const auto tr = detail::simulate(p, initial_state(s), s.config.sim_steps, [&](int, const Vector& x) {
		MpcStepStats stats;
		Vector u = engine.run_mpc_step(x, solver, &stats);
		rep.steps.push_back({stats.iterations, stats.primal_residual, stats.dual_residual, stats.subsystem_seconds});
		return u;
	});
	rep.xs = tr.xs;
	rep.us = tr.us;
	rep.cost = tr.cost;
	if (opt.baseline)
	{
		rep.baseline_cost = run_centralized_closed_loop(s).cost;
		rep.relative_error = relative_cost_error(rep.cost, rep.baseline_cost);
	}
	return rep;
}

struct SweepRow
{
	std::size_t N = 0;
	std::string case_name;
	bool warm_start = true;
	double mean_subsystem_seconds = 0.0;
	double mean_iterations = 0.0;
	int max_iterations = 0;
};

// Per-subsystem runtime of one case across network sizes, starting from a template config.
inline std::vector<SweepRow> run_scaling_sweep(const std::vector<std::size_t>& sizes, Case c,
                                               const ScenarioConfig& base = {})
{
	std::vector<SweepRow> out;
	for (auto N : sizes)
	{
		auto s = build_chain_scenario(N, base.T, base.d, c);
		const auto bounds = s.config.bounds;
		s.config = base;
		s.config.N = N;
		s.config.case_ = c;
		s.config.bounds = c == Case::Unconstrained ? std::vector<BoxSpec>{} : (base.bounds.empty() ? bounds : base.bounds);
		RunOptions opt;
		opt.baseline = false;
		const auto rep = run_closed_loop(s, opt);
		out.push_back({N, rep.case_name, rep.warm_start, rep.mean_subsystem_seconds(), rep.mean_iterations(),
		               rep.max_iterations()});
	}
	return out;
}

} // namespace dlmpc
