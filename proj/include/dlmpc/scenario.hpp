#pragma once

#include "dlmpc/admm.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>

namespace dlmpc
{

enum class Case
{
	Unconstrained, // no bounds, closed-form row step
	Solver,        // bounds, QP row step
	Explicit,      // bounds, explicit row step
};

inline const char* to_string(Case c)
{
	switch (c)
	{
	case Case::Unconstrained: return "UNCONSTRAINED";
	case Case::Solver: return "SOLVER";
	case Case::Explicit: return "EXPLICIT";
	}
	return "?";
}

inline Case parse_case(const std::string& s)
{
	std::string u;
	for (char ch : s)
		u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
	if (u == "UNCONSTRAINED" || u == "1")
		return Case::Unconstrained;
	if (u == "SOLVER" || u == "QP" || u == "2")
		return Case::Solver;
	if (u == "EXPLICIT" || u == "3")
		return Case::Explicit;
	throw std::invalid_argument("unknown case '" + s + "'");
}

inline RowSolver row_solver(Case c)
{
	switch (c)
	{
	case Case::Unconstrained: return RowSolver::ClosedForm;
	case Case::Solver: return RowSolver::Qp;
	case Case::Explicit: return RowSolver::Explicit;
	}
	return RowSolver::Explicit;
}

// Box on one component of a subsystem's state or input. An empty subsystem list means all.
struct BoxSpec
{
	enum class Variable
	{
		State,
		Input
	};
	Variable variable = Variable::State;
	Index component = 0;
	double lo = -kInf;
	double hi = kInf;
	std::vector<SubsystemId> subsystems;
};

struct ScenarioConfig
{
	std::size_t N = 10;
	Index T = 5;
	int d = 1;
	double rho = 1.0;
	double eps_p = 1e-4;
	double eps_d = 1e-4;
	int max_iters = 10000;
	int sim_steps = 20;
	Case case_ = Case::Explicit;
	std::vector<BoxSpec> bounds;
	std::uint64_t seed = 0;
	std::optional<Vector> x0;
	// Diagonal weights per subsystem component; an empty vector means all ones. When the
	// subsystems differ in size, each subsystem uses the leading entries.
	Vector q, r, q_T;
	std::string model = "chain";
	std::string matrix_file;
	bool warm_start = true;
	std::size_t workers = 1;

	AdmmSettings admm() const
	{
		AdmmSettings s;
		s.rho = rho;
		s.eps_p = eps_p;
		s.eps_d = eps_d;
		s.max_iters = max_iters;
		s.warm_start = warm_start;
		s.workers = workers;
		return s;
	}
};

struct Scenario
{
	ScenarioConfig config;
	NetworkModel model;
};

inline NetworkModel build_chain_model(std::size_t N)
{
	if (N < 2)
		throw std::invalid_argument("chain scenario needs at least two subsystems");
	NetworkModel m;
	m.state_dims.assign(N, 2);
	m.input_dims.assign(N, 1);
	Matrix Aii(2, 2), Aij(2, 2), Bii(2, 1);
	Aii << 1.0, 0.1, -0.3, 0.7;
	Aij << 0.0, 0.0, 0.1, 0.1;
	Bii << 0.0, 0.1;
	for (SubsystemId i = 0; i < N; ++i)
	{
		m.A_blocks[{i, i}] = Aii;
		m.B_blocks[{i, i}] = Bii;
		if (i > 0)
			m.A_blocks[{i, i - 1}] = Aij;
		if (i + 1 < N)
			m.A_blocks[{i, i + 1}] = Aij;
	}
	return m;
}

inline std::vector<BoxSpec> chain_bounds()
{
	BoxSpec b;
	b.component = 0;
	b.lo = -0.2;
	b.hi = 1.2;
	return {b};
}

inline Scenario build_chain_scenario(std::size_t N, Index T, int d, Case c)
{
	Scenario s;
	s.config.N = N;
	s.config.T = T;
	s.config.d = d;
	s.config.case_ = c;
	if (c != Case::Unconstrained)
		s.config.bounds = chain_bounds();
	s.model = build_chain_model(N);
	return s;
}

namespace detail
{

inline Vector per_subsystem(const Vector& w, const std::vector<Index>& dims, const char* what)
{
	Index total = 0;
	for (auto k : dims)
		total += k;
	Vector out = Vector::Ones(total);
	if (w.size() == 0)
		return out;
	if (w.size() == total)
		return w;
	Index off = 0;
	for (auto k : dims)
	{
		if (k > w.size())
			throw ModelError(std::string(what) + " weights are shorter than a subsystem");
		out.segment(off, k) = w.head(k);
		off += k;
	}
	return out;
}

} // namespace detail

inline MpcProblem make_problem(const Scenario& s)
{
	const auto& c = s.config;
	s.model.validate();
	if (s.model.subsystems() != c.N)
		throw ModelError("model size does not match the scenario subsystem count");
	MpcProblem p;
	p.model = s.model;
	p.horizon = c.T;
	p.locality = c.d;
	p.q = detail::per_subsystem(c.q, s.model.state_dims, "state");
	p.r = detail::per_subsystem(c.r, s.model.input_dims, "input");
	p.q_T = detail::per_subsystem(c.q_T, s.model.state_dims, "terminal");
	const auto n = s.model.n();
	const auto m = s.model.p();
	p.x_lo = Vector::Constant(n, -kInf);
	p.x_hi = Vector::Constant(n, kInf);
	p.u_lo = Vector::Constant(m, -kInf);
	p.u_hi = Vector::Constant(m, kInf);
	if (c.case_ != Case::Unconstrained)
	{
		for (const auto& b : c.bounds)
		{
			const bool state = b.variable == BoxSpec::Variable::State;
			const auto& dims = state ? s.model.state_dims : s.model.input_dims;
			auto targets = b.subsystems;
			if (targets.empty())
				for (SubsystemId i = 0; i < c.N; ++i)
					targets.push_back(i);
			for (auto i : targets)
			{
				if (i >= c.N || b.component < 0 || b.component >= dims[i])
					throw ModelError("bound refers to a missing subsystem component");
				const auto k = (state ? s.model.state_offset(i) : s.model.input_offset(i)) + b.component;
				auto& lo = state ? p.x_lo : p.u_lo;
				auto& hi = state ? p.x_hi : p.u_hi;
				lo(k) = std::max(lo(k), b.lo);
				hi(k) = std::min(hi(k), b.hi);
			}
		}
	}
	p.validate();
	return p;
}

// Initial state: the explicit one when given, otherwise uniform in [0, 1] from the seed.
inline Vector initial_state(const Scenario& s)
{
	const auto n = s.model.n();
	if (s.config.x0)
	{
		if (s.config.x0->size() != n)
			throw ModelError("initial state has wrong dimension");
		return *s.config.x0;
	}
	std::mt19937_64 rng(s.config.seed);
	std::uniform_real_distribution<double> dist(0.0, 1.0);
	Vector x(n);
	for (Index k = 0; k < n; ++k)
		x(k) = dist(rng);
	return x;
}

// Dense matrix file:
//   blocks N
//   state_dims n_1 ... n_N
//   input_dims p_1 ... p_N
//   A
//   <n rows of n values>
//   B
//   <n rows of p values>
// Lines starting with '#' are ignored.
inline NetworkModel read_matrix_file(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot open matrix file " + path);
	std::stringstream body;
	std::string line;
	while (std::getline(in, line))
	{
		const auto first = line.find_first_not_of(" \t\r");
		if (first != std::string::npos && line[first] != '#')
			body << line << '\n';
	}
	auto fail = [&](const std::string& msg) { throw IoError(path + ": " + msg); };
	auto expect = [&](const char* word) {
		std::string w;
		if (!(body >> w) || w != word)
			fail(std::string("expected '") + word + "'");
	};
	std::size_t N = 0;
	expect("blocks");
	if (!(body >> N) || N == 0)
		fail("bad block count");
	NetworkModel probe;
	probe.state_dims.resize(N);
	probe.input_dims.resize(N);
	expect("state_dims");
	for (auto& k : probe.state_dims)
		if (!(body >> k) || k < 0)
			fail("bad state dimension");
	expect("input_dims");
	for (auto& k : probe.input_dims)
		if (!(body >> k) || k < 0)
			fail("bad input dimension");
	const auto n = probe.n();
	const auto p = probe.p();
	auto read_dense = [&](const char* name, Index rows, Index cols) {
		expect(name);
		Matrix M(rows, cols);
		for (Index a = 0; a < rows; ++a)
			for (Index b = 0; b < cols; ++b)
				if (!(body >> M(a, b)))
					fail(std::string("short matrix ") + name);
		return M;
	};
	const Matrix A = read_dense("A", n, n);
	const Matrix B = read_dense("B", n, p);
	std::string extra;
	if (body >> extra)
		fail("unexpected trailing token '" + extra + "'");
	return NetworkModel::from_dense(A, B, probe.state_dims, probe.input_dims);
}

inline void write_matrix_file(const std::string& path, const NetworkModel& model)
{
	std::ofstream out(path);
	if (!out)
		throw IoError("cannot write matrix file " + path);
	out.precision(17);
	out << "blocks " << model.subsystems() << "\nstate_dims";
	for (auto k : model.state_dims)
		out << ' ' << k;
	out << "\ninput_dims";
	for (auto k : model.input_dims)
		out << ' ' << k;
	auto dump = [&](const char* name, const Matrix& M) {
		out << '\n' << name << '\n';
		for (Index a = 0; a < M.rows(); ++a)
		{
			for (Index b = 0; b < M.cols(); ++b)
				out << (b ? " " : "") << M(a, b);
			out << '\n';
		}
	};
	dump("A", model.dense_A());
	dump("B", model.dense_B());
	if (!out)
		throw IoError("failed writing matrix file " + path);
}

// JSON config (schema in README). Missing keys keep their defaults.
inline ScenarioConfig config_from_json(const nlohmann::json& j)
{
	ScenarioConfig c;
	auto get = [&](const nlohmann::json& obj, const char* key, auto& dst) {
		if (obj.contains(key))
			obj.at(key).get_to(dst);
	};
	auto get_vec = [&](const nlohmann::json& obj, const char* key, Vector& dst) {
		if (!obj.contains(key))
			return;
		const auto v = obj.at(key).get<std::vector<double>>();
		dst = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
	};
	auto number = [](const nlohmann::json& v) {
		if (v.is_string())
		{
			const auto s = v.get<std::string>();
			if (s == "inf" || s == "+inf")
				return kInf;
			if (s == "-inf")
				return -kInf;
			throw std::invalid_argument("bad bound '" + s + "'");
		}
		return v.get<double>();
	};

	if (j.contains("network"))
	{
		const auto& n = j.at("network");
		get(n, "N", c.N);
		get(n, "model", c.model);
		get(n, "matrix_file", c.matrix_file);
	}
	if (j.contains("mpc"))
	{
		const auto& m = j.at("mpc");
		get(m, "T", c.T);
		get(m, "d", c.d);
		get(m, "sim_steps", c.sim_steps);
		if (m.contains("case"))
			c.case_ = parse_case(m.at("case").get<std::string>());
		if (m.contains("weights"))
		{
			const auto& w = m.at("weights");
			get_vec(w, "Q", c.q);
			get_vec(w, "R", c.r);
			get_vec(w, "Q_T", c.q_T);
		}
	}
	if (j.contains("admm"))
	{
		const auto& a = j.at("admm");
		get(a, "rho", c.rho);
		get(a, "eps_p", c.eps_p);
		get(a, "eps_d", c.eps_d);
		get(a, "max_iters", c.max_iters);
		get(a, "warm_start", c.warm_start);
		get(a, "workers", c.workers);
	}
	if (j.contains("initial_state"))
	{
		const auto& s = j.at("initial_state");
		get(s, "seed", c.seed);
		if (s.contains("x0"))
		{
			Vector x;
			get_vec(s, "x0", x);
			c.x0 = x;
		}
	}
	if (j.contains("bounds"))
	{
		c.bounds.clear();
		for (const auto& b : j.at("bounds"))
		{
			BoxSpec box;
			const auto var = b.value("variable", std::string("x"));
			if (var == "x" || var == "state")
				box.variable = BoxSpec::Variable::State;
			else if (var == "u" || var == "input")
				box.variable = BoxSpec::Variable::Input;
			else
				throw std::invalid_argument("bound variable must be 'x' or 'u'");
			box.component = b.value("component", Index{0});
			box.lo = b.contains("lo") && !b.at("lo").is_null() ? number(b.at("lo")) : -kInf;
			box.hi = b.contains("hi") && !b.at("hi").is_null() ? number(b.at("hi")) : kInf;
			if (b.contains("subsystems"))
				box.subsystems = b.at("subsystems").get<std::vector<SubsystemId>>();
			c.bounds.push_back(box);
		}
	}
	else if (c.model == "chain" && c.case_ != Case::Unconstrained)
	{
		c.bounds = chain_bounds();
	}
	return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c)
{
	using nlohmann::json;
	auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
	auto bound = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
	json j;
	j["network"] = {{"N", c.N}, {"model", c.model}};
	if (!c.matrix_file.empty())
		j["network"]["matrix_file"] = c.matrix_file;
	j["mpc"] = {{"T", c.T}, {"d", c.d}, {"sim_steps", c.sim_steps}, {"case", to_string(c.case_)}};
	json w = json::object();
	if (c.q.size())
		w["Q"] = vec(c.q);
	if (c.r.size())
		w["R"] = vec(c.r);
	if (c.q_T.size())
		w["Q_T"] = vec(c.q_T);
	j["mpc"]["weights"] = w;
	j["admm"] = {{"rho", c.rho}, {"eps_p", c.eps_p}, {"eps_d", c.eps_d}, {"max_iters", c.max_iters},
	             {"warm_start", c.warm_start}, {"workers", c.workers}};
	j["initial_state"] = {{"seed", c.seed}};
	if (c.x0)
		j["initial_state"]["x0"] = vec(*c.x0);
	json bounds = json::array();
	for (const auto& b : c.bounds)
	{
		json e = {{"variable", b.variable == BoxSpec::Variable::State ? "x" : "u"},
		          {"component", b.component},
		          {"lo", bound(b.lo)},
		          {"hi", bound(b.hi)}};
		if (!b.subsystems.empty())
			e["subsystems"] = b.subsystems;
		bounds.push_back(e);
	}
	j["bounds"] = bounds;
	return j;
}

inline ScenarioConfig load_config(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot open config " + path);
	nlohmann::json j;
	try
	{
		in >> j;
	}
	catch (const nlohmann::json::exception& e)
	{
		throw IoError(path + ": " + e.what());
	}
	return config_from_json(j);
}

// Builds the model named by the config.
inline Scenario make_scenario(const ScenarioConfig& c)
{
	Scenario s;
	s.config = c;
	if (c.model == "chain")
		s.model = build_chain_model(c.N);
	else if (c.model == "file")
	{
		if (c.matrix_file.empty())
			throw ModelError("model 'file' needs a matrix_file");
		s.model = read_matrix_file(c.matrix_file);
		s.config.N = s.model.subsystems();
	}
	else
		throw ModelError("unknown model '" + c.model + "'");
	return s;
}

} // namespace dlmpc
