#pragma once

#include "dlmpc/simulation.hpp"

#include <filesystem>

namespace dlmpc
{

enum class ReportFormat
{
	Csv,
	Json,
};

namespace detail
{

inline std::string fmt(double v)
{
	std::ostringstream os;
	os.precision(17);
	os << v;
	return os.str();
}

inline double parse_double(const std::string& s)
{
	if (s == "inf")
		return kInf;
	if (s == "-inf")
		return -kInf;
	std::size_t used = 0;
	const double v = std::stod(s, &used);
	if (used != s.size())
		throw std::invalid_argument("bad number '" + s + "'");
	return v;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',')
{
	std::vector<std::string> out;
	std::string cell;
	std::istringstream in(line);
	while (std::getline(in, cell, sep))
		out.push_back(cell);
	if (!line.empty() && line.back() == sep)
		out.emplace_back();
	return out;
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
	std::ofstream out(path);
	if (!out)
		throw IoError("cannot write " + path.string());
	return out;
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const std::string& header)
{
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot open " + path.string());
	std::string line;
	if (!std::getline(in, line) || line != header)
		throw IoError(path.string() + ": unexpected header");
	std::vector<std::vector<std::string>> rows;
	while (std::getline(in, line))
		if (!line.empty())
			rows.push_back(split(line));
	return rows;
}

inline nlohmann::json matrix_json(const Matrix& m)
{
	auto j = nlohmann::json::array();
	for (Index c = 0; c < m.cols(); ++c)
		j.push_back(std::vector<double>(m.col(c).data(), m.col(c).data() + m.rows()));
	return j;
}

inline Matrix matrix_from_json(const nlohmann::json& j, Index rows)
{
	Matrix m(rows, static_cast<Index>(j.size()));
	for (Index c = 0; c < m.cols(); ++c)
	{
		const auto col = j.at(static_cast<std::size_t>(c)).get<std::vector<double>>();
		if (static_cast<Index>(col.size()) != rows)
			throw IoError("trajectory column has wrong length");
		for (Index r = 0; r < rows; ++r)
			m(r, c) = col[static_cast<std::size_t>(r)];
	}
	return m;
}

} // namespace detail

inline nlohmann::json report_to_json(const RunReport& r)
{
	using nlohmann::json;
	json steps = json::array();
	for (const auto& s : r.steps)
		steps.push_back({{"iterations", s.iterations},
		                 {"primal_residual", s.primal_residual},
		                 {"dual_residual", s.dual_residual},
		                 {"subsystem_seconds", s.subsystem_seconds}});
	return {{"N", r.N},
	        {"case", r.case_name},
	        {"warm_start", r.warm_start},
	        {"seed", r.seed},
	        {"n", r.xs.rows()},
	        {"p", r.us.rows()},
	        {"cost", r.cost},
	        {"baseline_cost", r.baseline_cost},
	        {"relative_error", r.relative_error},
	        {"mean_subsystem_seconds", r.mean_subsystem_seconds()},
	        {"mean_iterations", r.mean_iterations()},
	        {"steps", steps},
	        {"x", detail::matrix_json(r.xs)},
	        {"u", detail::matrix_json(r.us)}};
}

inline RunReport report_from_json(const nlohmann::json& j)
{
	RunReport r;
	try
	{
		r.N = j.at("N").get<std::size_t>();
		r.case_name = j.at("case").get<std::string>();
		r.warm_start = j.at("warm_start").get<bool>();
		r.seed = j.at("seed").get<std::uint64_t>();
		r.cost = j.at("cost").get<double>();
		r.baseline_cost = j.at("baseline_cost").get<double>();
		r.relative_error = j.at("relative_error").get<double>();
		for (const auto& s : j.at("steps"))
			r.steps.push_back({s.at("iterations").get<int>(), s.at("primal_residual").get<double>(),
			                   s.at("dual_residual").get<double>(), s.at("subsystem_seconds").get<std::vector<double>>()});
		r.xs = detail::matrix_from_json(j.at("x"), j.at("n").get<Index>());
		r.us = detail::matrix_from_json(j.at("u"), j.at("p").get<Index>());
	}
	catch (const nlohmann::json::exception& e)
	{
		throw IoError(std::string("malformed report: ") + e.what());
	}
	return r;
}

// CSV layout: <stem>_summary.csv, <stem>_steps.csv, <stem>_timings.csv, <stem>_trajectory.csv.
inline constexpr const char* kSummaryHeader = "key,value";
inline constexpr const char* kStepsHeader = "step,iterations,primal_residual,dual_residual";
inline constexpr const char* kTimingsHeader = "step,subsystem,seconds";
inline constexpr const char* kTrajectoryHeader = "t,variable,component,value";
inline constexpr const char* kSweepHeader = "N,case,warm_start,mean_subsystem_seconds,mean_iterations,max_iterations";

inline std::vector<std::filesystem::path> write_report_csv(const RunReport& r, const std::filesystem::path& dir,
                                                           const std::string& stem = "run")
{
	std::filesystem::create_directories(dir);
	std::vector<std::filesystem::path> files;
	auto open = [&](const char* suffix, const char* header) {
		files.push_back(dir / (stem + suffix));
		auto out = detail::open_out(files.back());
		out << header << '\n';
		return out;
	};
	{
		auto out = open("_summary.csv", kSummaryHeader);
		out << "N," << r.N << "\ncase," << r.case_name << "\nwarm_start," << (r.warm_start ? 1 : 0) << "\nseed," << r.seed
		    << "\nn," << r.xs.rows() << "\np," << r.us.rows() << "\ncost," << detail::fmt(r.cost) << "\nbaseline_cost,"
		    << detail::fmt(r.baseline_cost) << "\nrelative_error," << detail::fmt(r.relative_error)
		    << "\nmean_subsystem_seconds," << detail::fmt(r.mean_subsystem_seconds()) << "\nmean_iterations,"
		    << detail::fmt(r.mean_iterations()) << '\n';
	}
	{
		auto out = open("_steps.csv", kStepsHeader);
		for (std::size_t k = 0; k < r.steps.size(); ++k)
			out << k << ',' << r.steps[k].iterations << ',' << detail::fmt(r.steps[k].primal_residual) << ','
			    << detail::fmt(r.steps[k].dual_residual) << '\n';
	}
	{
		auto out = open("_timings.csv", kTimingsHeader);
		for (std::size_t k = 0; k < r.steps.size(); ++k)
			for (std::size_t i = 0; i < r.steps[k].subsystem_seconds.size(); ++i)
				out << k << ',' << i << ',' << detail::fmt(r.steps[k].subsystem_seconds[i]) << '\n';
	}
	{
		auto out = open("_trajectory.csv", kTrajectoryHeader);
		for (Index t = 0; t < r.xs.cols(); ++t)
		{
			for (Index c = 0; c < r.xs.rows(); ++c)
				out << t << ",x," << c << ',' << detail::fmt(r.xs(c, t)) << '\n';
			if (t < r.us.cols())
				for (Index c = 0; c < r.us.rows(); ++c)
					out << t << ",u," << c << ',' << detail::fmt(r.us(c, t)) << '\n';
		}
	}
	for (const auto& f : files)
		if (!std::filesystem::exists(f))
			throw IoError("failed writing " + f.string());
	return files;
}

inline RunReport read_report_csv(const std::filesystem::path& dir, const std::string& stem = "run")
{
	RunReport r;
	Index n = 0, p = 0;
	try
	{
		for (const auto& row : detail::read_csv(dir / (stem + "_summary.csv"), kSummaryHeader))
		{
			if (row.size() != 2)
				throw IoError("summary row needs two cells");
			const auto& k = row[0];
			const auto& v = row[1];
			if (k == "N")
				r.N = std::stoul(v);
			else if (k == "case")
				r.case_name = v;
			else if (k == "warm_start")
				r.warm_start = v == "1";
			else if (k == "seed")
				r.seed = std::stoull(v);
			else if (k == "n")
				n = std::stol(v);
			else if (k == "p")
				p = std::stol(v);
			else if (k == "cost")
				r.cost = detail::parse_double(v);
			else if (k == "baseline_cost")
				r.baseline_cost = detail::parse_double(v);
			else if (k == "relative_error")
				r.relative_error = detail::parse_double(v);
		}
		for (const auto& row : detail::read_csv(dir / (stem + "_steps.csv"), kStepsHeader))
		{
			if (row.size() != 4 || std::stoul(row[0]) != r.steps.size())
				throw IoError("steps rows out of order");
			r.steps.push_back({std::stoi(row[1]), detail::parse_double(row[2]), detail::parse_double(row[3]), {}});
		}
		for (const auto& row : detail::read_csv(dir / (stem + "_timings.csv"), kTimingsHeader))
		{
			const auto k = std::stoul(row.at(0));
			if (k >= r.steps.size())
				throw IoError("timing refers to a missing step");
			r.steps[k].subsystem_seconds.push_back(detail::parse_double(row.at(2)));
		}
		const auto rows = detail::read_csv(dir / (stem + "_trajectory.csv"), kTrajectoryHeader);
		Index x_cols = 0;
		for (const auto& row : rows)
			if (row.at(1) == "x")
				x_cols = std::max<Index>(x_cols, std::stol(row.at(0)) + 1);
		r.xs = Matrix::Zero(n, x_cols);
		r.us = Matrix::Zero(p, static_cast<Index>(r.steps.size()));
		for (const auto& row : rows)
		{
			const auto t = std::stol(row.at(0));
			const auto c = std::stol(row.at(2));
			Matrix& m = row.at(1) == "x" ? r.xs : r.us;
			if (t >= m.cols() || c >= m.rows())
				throw IoError("trajectory entry out of range");
			m(c, t) = detail::parse_double(row.at(3));
		}
	}
	catch (const std::logic_error& e)
	{
		throw IoError("malformed report in " + dir.string() + ": " + e.what());
	}
	return r;
}

inline std::filesystem::path write_report_json(const RunReport& r, const std::filesystem::path& dir,
                                               const std::string& stem = "run")
{
	std::filesystem::create_directories(dir);
	const auto path = dir / (stem + ".json");
	auto out = detail::open_out(path);
	out << report_to_json(r).dump(2) << '\n';
	if (!out)
		throw IoError("failed writing " + path.string());
	return path;
}

inline RunReport read_report_json(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot open " + path.string());
	nlohmann::json j;
	try
	{
		in >> j;
	}
	catch (const nlohmann::json::exception& e)
	{
		throw IoError(path.string() + ": " + e.what());
	}
	return report_from_json(j);
}

inline std::vector<std::filesystem::path> emit_report(const RunReport& r, ReportFormat format,
                                                      const std::filesystem::path& dir, const std::string& stem = "run")
{
	if (format == ReportFormat::Json)
		return {write_report_json(r, dir, stem)};
	return write_report_csv(r, dir, stem);
}

inline std::filesystem::path write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path)
{
	if (path.has_parent_path())
		std::filesystem::create_directories(path.parent_path());
	auto out = detail::open_out(path);
	out << kSweepHeader << '\n';
	for (const auto& r : rows)
		out << r.N << ',' << r.case_name << ',' << (r.warm_start ? 1 : 0) << ',' << detail::fmt(r.mean_subsystem_seconds)
		    << ',' << detail::fmt(r.mean_iterations) << ',' << r.max_iterations << '\n';
	if (!out)
		throw IoError("failed writing " + path.string());
	return path;
}

inline std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path)
{
	std::vector<SweepRow> rows;
	try
	{
		for (const auto& row : detail::read_csv(path, kSweepHeader))
		{
			if (row.size() != 6)
				throw IoError("sweep row needs six cells");
			rows.push_back({std::stoul(row[0]), row[1], row[2] == "1", detail::parse_double(row[3]),
			                detail::parse_double(row[4]), std::stoi(row[5])});
		}
	}
	catch (const std::logic_error& e)
	{
		throw IoError("malformed sweep table " + path.string() + ": " + e.what());
	}
	return rows;
}

} // namespace dlmpc
