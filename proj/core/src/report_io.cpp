#include "cmot/report_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmot/envelope.hpp"
#include "cmot/monotone.hpp"
#include "coupling_lp.hpp"
#include "json.hpp"

namespace cmot {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// canonical serialization: sorted keys (nlohmann objects are std::map backed)
// and %.12g floats, so corpus diffs are reproducible
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    if (!std::isfinite(v)) throw IoError("emit: non-finite number; use the \"infinite\" marker");
    if (v == 0.0) return "0";  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void dump_canonical(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump_canonical(it.value(), out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                dump_canonical(j[i], out);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float: out += format_double(j.get<double>()); break;
        case json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
        case json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
        case json::value_t::string: out += j.dump(); break;
        case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        default: out += "null"; break;
    }
}

std::string dump_canonical(const json& j) {
    std::string out;
    dump_canonical(j, out);
    return out;
}

// ---------------------------------------------------------------------------
// scenario parsing
// ---------------------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw SchemaViolationError("at " + path + ": " + message);
}

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) fail(path + "/" + key, "missing field");
    return j.at(key);
}

double as_number(const json& j, const std::string& path) {
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinite"))
        return std::numeric_limits<double>::infinity();
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

Point parse_point(const json& j, const std::string& path) {
    if (j.is_number()) return Point(j.get<double>());
    if (j.is_array() && j.size() >= 1 && j.size() <= 3) {
        if (j.size() == 1) return Point(as_number(j[0], path));
        if (j.size() == 2) return Point(as_number(j[0], path), as_number(j[1], path));
        return Point(as_number(j[0], path), as_number(j[1], path), as_number(j[2], path));
    }
    fail(path, "expected a number or an array of 1-3 coordinates");
}

std::vector<Point> parse_points(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of points");
    std::vector<Point> pts;
    pts.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        pts.push_back(parse_point(j[i], path + "/" + std::to_string(i)));
    return pts;
}

std::vector<double> parse_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], path + "/" + std::to_string(i)));
    return v;
}

DiscreteMeasure parse_measure(const json& j, const std::string& path,
                              std::vector<std::string>& warnings) {
    std::vector<Point> atoms = parse_points(require(j, "atoms", path), path + "/atoms");
    std::vector<double> weights = parse_numbers(require(j, "weights", path), path + "/weights");
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (std::abs(sum - 1.0) > 1e-12 && sum > 0.0)
        warnings.push_back(path + ": weights sum to " + format_double(sum) + "; normalized");
    try {
        return DiscreteMeasure(std::move(atoms), std::move(weights));
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    std::vector<double> first = parse_numbers(j[0], path + "/0");
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(first.size()));
    for (Eigen::Index r = 0; r < rows; ++r) {
        std::vector<double> row = parse_numbers(j[static_cast<std::size_t>(r)],
                                                path + "/" + std::to_string(r));
        if (row.size() != static_cast<std::size_t>(m.cols())) fail(path, "ragged matrix");
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

RadiusTable parse_radius(const json& j, const std::string& path) {
    if (j.is_number() || j.is_string()) return RadiusTable::uniform(as_number(j, path));
    if (j.is_object()) {
        std::vector<Point> pts = parse_points(require(j, "points", path), path + "/points");
        std::vector<double> vals = parse_numbers(require(j, "values", path), path + "/values");
        try {
            return RadiusTable::table(std::move(pts), std::move(vals));
        } catch (const Error& e) {
            fail(path, e.what());
        }
    }
    fail(path, "expected a number or {points, values}");
}

ConstraintSpec parse_constraint(const json& j, const std::string& path,
                                const DiscreteMeasure& target_default) {
    std::string kind = require(j, "kind", path).get<std::string>();
    std::vector<Point> targets = j.contains("targets")
                                     ? parse_points(j.at("targets"), path + "/targets")
                                     : target_default.atoms();
    try {
        if (kind == "martingale_ball")
            return ConstraintSpec::martingale_ball(
                parse_radius(require(j, "radius", path), path + "/radius"), std::move(targets));
        if (kind == "martingale") return ConstraintSpec::martingale(std::move(targets));
        if (kind == "unconstrained") return ConstraintSpec::unconstrained(std::move(targets));
        if (kind == "capacity")
            return ConstraintSpec::capacity_bound(
                parse_matrix(require(j, "reference", path), path + "/reference"),
                parse_matrix(require(j, "bound", path), path + "/bound"), std::move(targets));
    } catch (const SchemaViolationError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
    fail(path + "/kind", "unknown constraint kind '" + kind + "'");
}

CostSpec parse_cost(const json& j, const std::string& path, const DiscreteMeasure& source,
                    const std::vector<Point>& targets) {
    std::string kind = require(j, "kind", path).get<std::string>();
    try {
        if (kind == "table")
            return CostSpec::table(source.atoms(), targets,
                                   parse_matrix(require(j, "values", path), path + "/values"));
        if (kind == "difference") {
            std::string h = require(j, "h", path).get<std::string>();
            if (h == "exp") return CostSpec::exp_difference();
            if (h == "power")
                return CostSpec::power_difference(as_number(require(j, "p", path), path + "/p"));
            if (h == "samples")
                return CostSpec::sampled_difference(
                    parse_numbers(require(j, "offsets", path), path + "/offsets"),
                    parse_numbers(require(j, "values", path), path + "/values"));
            fail(path + "/h", "unknown difference function '" + h + "'");
        }
    } catch (const SchemaViolationError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
    fail(path + "/kind", "unknown cost kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// report bodies
// ---------------------------------------------------------------------------

json point_to_json(const Point& p) {
    if (p.dim() == 1) return p.scalar();
    json a = json::array();
    for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
    return a;
}

json points_to_json(const std::vector<Point>& pts) {
    json a = json::array();
    for (const Point& p : pts) a.push_back(point_to_json(p));
    return a;
}

json measure_to_json(const DiscreteMeasure& m) {
    return json{{"atoms", points_to_json(m.atoms())}, {"weights", m.weights()}};
}

json coupling_to_json(const Coupling& c) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.matrix().rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < c.matrix().cols(); ++j) row.push_back(c.matrix()(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"source_atoms", points_to_json(c.source().atoms())},
                {"target_atoms", points_to_json(c.targets())},
                {"matrix", std::move(rows)}};
}

json certificate_to_json(const ViolatingFunction& vf, const std::vector<Point>& targets) {
    json out{{"points", points_to_json(targets)}, {"values", vf.values}};
    if (vf.gap_infinite)
        out["gap"] = "infinite";
    else
        out["gap"] = vf.gap;
    return out;
}

json feasibility_body(const FeasibilityReport& report, const ConstraintSpec& constraint) {
    json body;
    body["feasible"] = report.feasible;
    if (report.witness) body["witness"] = coupling_to_json(*report.witness);
    if (report.certificate)
        body["violating_function"] = certificate_to_json(*report.certificate, constraint.targets());
    body["source_admissible"] = report.source_admissible;
    if (report.marginal) body["marginal"] = true;
    return body;
}

Coupling align_plan(const Coupling& plan, const ConstraintSpec& constraint) {
    if (plan.targets() == constraint.targets()) return plan;
    const auto& targets = constraint.targets();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(plan.matrix().rows(),
                                              static_cast<Eigen::Index>(targets.size()));
    for (std::size_t j = 0; j < plan.targets().size(); ++j) {
        auto it = std::lower_bound(targets.begin(), targets.end(), plan.targets()[j]);
        if (it == targets.end() || !(*it == plan.targets()[j]))
            throw TargetsOutsideCandidatesError("plan: target not in candidate set");
        m.col(it - targets.begin()) = plan.matrix().col(static_cast<Eigen::Index>(j));
    }
    return Coupling(plan.source(), targets, std::move(m));
}

}  // namespace

std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::Feasibility: return "feasibility";
        case ProblemKind::Solve: return "solve";
        case ProblemKind::Multiperiod: return "multiperiod";
        case ProblemKind::Capacity: return "capacity";
        case ProblemKind::Skorokhod: return "skorokhod";
        case ProblemKind::Envelope: return "envelope";
        case ProblemKind::Monotone: return "monotone";
    }
    return "unknown";
}

std::string digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaViolationError(std::string("at /: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaViolationError("at /: expected an object");

    Scenario s;
    s.canonical = dump_canonical(j);
    std::string problem = require(j, "problem", "").get<std::string>();
    if (problem == "feasibility") s.problem = ProblemKind::Feasibility;
    else if (problem == "solve") s.problem = ProblemKind::Solve;
    else if (problem == "multiperiod") s.problem = ProblemKind::Multiperiod;
    else if (problem == "capacity") s.problem = ProblemKind::Capacity;
    else if (problem == "skorokhod") s.problem = ProblemKind::Skorokhod;
    else if (problem == "envelope") s.problem = ProblemKind::Envelope;
    else if (problem == "monotone") s.problem = ProblemKind::Monotone;
    else fail("/problem", "unknown problem kind '" + problem + "'");

    if (j.contains("options")) {
        const json& o = j.at("options");
        if (o.contains("tol")) s.options.tol = as_number(o.at("tol"), "/options/tol");
        if (o.contains("kappa")) s.options.kappa = as_number(o.at("kappa"), "/options/kappa");
        if (o.contains("sigma")) s.options.sigma = as_number(o.at("sigma"), "/options/sigma");
        if (o.contains("steps")) s.options.steps = o.at("steps").get<int>();
        if (o.contains("seed")) s.options.seed = o.at("seed").get<unsigned>();
        if (o.contains("dual")) s.options.dual = o.at("dual").get<bool>();
    }

    switch (s.problem) {
        case ProblemKind::Multiperiod: {
            const json& times = require(j, "times", "");
            const json& marg = require(j, "marginals", "");
            const json& radii = require(j, "radii", "");
            if (!times.is_array() || !marg.is_array() || !radii.is_array())
                fail("/times", "times, marginals and radii must be arrays");
            for (std::size_t i = 0; i < times.size(); ++i)
                s.curve.times.push_back(times[i].get<int>());
            for (std::size_t i = 0; i < marg.size(); ++i)
                s.curve.marginals.push_back(
                    parse_measure(marg[i], "/marginals/" + std::to_string(i), s.warnings));
            for (std::size_t i = 0; i < radii.size(); ++i)
                s.curve.radii.push_back(parse_radius(radii[i], "/radii/" + std::to_string(i)));
            try {
                s.curve.validate();
            } catch (const Error& e) {
                fail("/times", e.what());
            }
            return s;
        }
        case ProblemKind::Capacity: {
            s.capacity.alpha = parse_measure(require(j, "source", ""), "/source", s.warnings);
            s.capacity.beta = parse_measure(require(j, "target", ""), "/target", s.warnings);
            s.capacity.reference = parse_matrix(require(j, "reference", ""), "/reference");
            const json& bound = require(j, "bound", "");
            if (bound.is_number() || bound.is_string()) {
                double b = as_number(bound, "/bound");
                s.capacity.bound = Eigen::MatrixXd::Constant(s.capacity.reference.rows(),
                                                             s.capacity.reference.cols(), b);
            } else {
                s.capacity.bound = parse_matrix(bound, "/bound");
            }
            s.capacity.cost = parse_cost(require(j, "cost", ""), "/cost", s.capacity.alpha,
                                         s.capacity.beta.atoms());
            s.has_cost = true;
            try {
                (void)s.capacity.constraint();
            } catch (const Error& e) {
                fail("/reference", e.what());
            }
            return s;
        }
        default: break;
    }

    s.source = parse_measure(require(j, "source", ""), "/source", s.warnings);
    if (s.problem != ProblemKind::Envelope)
        s.target = parse_measure(require(j, "target", ""), "/target", s.warnings);
    else if (j.contains("target"))
        s.target = parse_measure(j.at("target"), "/target", s.warnings);

    if (s.problem != ProblemKind::Skorokhod) {
        const DiscreteMeasure& target_default = s.target.size() ? s.target : s.source;
        s.constraint = parse_constraint(require(j, "constraint", ""), "/constraint", target_default);
    }

    if (j.contains("cost")) {
        s.cost = parse_cost(j.at("cost"), "/cost", s.source,
                            s.problem == ProblemKind::Skorokhod ? s.target.atoms()
                                                                : s.constraint.targets());
        s.has_cost = true;
    }
    if (s.problem == ProblemKind::Solve && !s.has_cost) fail("/cost", "missing field");

    if (s.problem == ProblemKind::Envelope) {
        if (j.contains("grids")) {
            const json& grids = j.at("grids");
            if (!grids.is_array() || grids.size() < 2) fail("/grids", "need at least two grids");
            for (std::size_t i = 0; i < grids.size(); ++i)
                s.envelope_grids.push_back(parse_points(grids[i], "/grids/" + std::to_string(i)));
            const json& radii = require(j, "radii", "");
            for (std::size_t i = 0; i < radii.size(); ++i)
                s.envelope_radii.push_back(parse_radius(radii[i], "/radii/" + std::to_string(i)));
            s.multi_envelope = true;
            s.payoff = parse_numbers(require(j, "payoff", ""), "/payoff");
            if (s.payoff.size() != s.envelope_grids.back().size())
                fail("/payoff", "payoff must match the terminal grid");
        } else {
            const json& payoff = require(j, "payoff", "");
            if (payoff.is_object()) {
                std::vector<Point> pts = parse_points(require(payoff, "points", "/payoff"),
                                                      "/payoff/points");
                std::vector<double> vals = parse_numbers(require(payoff, "values", "/payoff"),
                                                         "/payoff/values");
                if (pts.size() != vals.size()) fail("/payoff", "points/values length mismatch");
                s.payoff.assign(s.constraint.targets().size(), 0.0);
                std::vector<bool> seen(s.payoff.size(), false);
                for (std::size_t k = 0; k < pts.size(); ++k) {
                    const auto& ts = s.constraint.targets();
                    auto it = std::lower_bound(ts.begin(), ts.end(), pts[k]);
                    if (it == ts.end() || !(*it == pts[k]))
                        fail("/payoff/points", "point not among candidate targets");
                    s.payoff[static_cast<std::size_t>(it - ts.begin())] = vals[k];
                    seen[static_cast<std::size_t>(it - ts.begin())] = true;
                }
                for (bool b : seen)
                    if (!b) fail("/payoff", "payoff missing for some candidate target");
            } else {
                s.payoff = parse_numbers(payoff, "/payoff");
                if (s.payoff.size() != s.constraint.targets().size())
                    fail("/payoff", "payoff must match the candidate targets");
            }
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace {

struct RunBody {
    std::string status;
    int exit_code = 0;
    json body;
};

RunBody run_feasibility(const Scenario& s) {
    FeasibilityReport report =
        check_feasibility(s.source, s.target, s.constraint, s.options.lp());
    RunBody out;
    out.body = feasibility_body(report, s.constraint);
    out.status = report.feasible ? "feasible" : "infeasible";
    out.exit_code = report.feasible ? 0 : 2;
    return out;
}

json solve_report_body(const SolveReport& report, bool dual) {
    json body;
    body["primal_value"] = report.primal_value;
    body["coupling"] = coupling_to_json(report.coupling);
    body["unique_hint"] = report.unique_hint;
    if (dual) {
        body["phi"] = report.phi;
        body["dual_potential"] = report.dual_potential;
        body["dual_value"] = report.dual_value;
        body["gap"] = report.gap;
    }
    return body;
}

RunBody run_solve(const Scenario& s) {
    RunBody out;
    try {
        SolveReport report = s.options.dual
                                 ? solve_dual(s.source, s.target, s.constraint, s.cost, s.options.lp())
                                 : solve_primal(s.source, s.target, s.constraint, s.cost, s.options.lp());
        out.body = solve_report_body(report, s.options.dual);
        out.status = "optimal";
    } catch (const InfeasibleInstanceError& e) {
        out.body = feasibility_body(e.report(), s.constraint);
        out.status = "infeasible";
        out.exit_code = 2;
    }
    return out;
}

RunBody run_capacity(const Scenario& s) {
    RunBody out;
    try {
        SolveReport report = solve_capacity(s.capacity, s.options.lp());
        out.body = solve_report_body(report, true);
        ExtremalityReport ext = check_extremality(s.capacity, report.coupling);
        json e;
        e["extreme"] = ext.extreme;
        e["interior_mass"] = ext.interior_mass;
        json sat = json::array();
        for (auto [i, jj] : ext.saturated_cells) sat.push_back(json::array({i, jj}));
        json inter = json::array();
        for (auto [i, jj] : ext.interior_cells) inter.push_back(json::array({i, jj}));
        e["saturated_cells"] = std::move(sat);
        e["interior_cells"] = std::move(inter);
        e["ties_possible"] = !report.unique_hint;
        out.body["extremality"] = std::move(e);
        out.status = "optimal";
    } catch (const InfeasibleInstanceError& e) {
        out.body = feasibility_body(e.report(), s.capacity.constraint());
        out.status = "infeasible";
        out.exit_code = 2;
    }
    return out;
}

RunBody run_envelope(const Scenario& s) {
    RunBody out;
    json xs = json::array();
    json values = json::array();
    if (s.multi_envelope) {
        MultiPeriodEnvelope env = f_gamma_multiperiod(s.payoff, s.envelope_radii, s.envelope_grids,
                                                      s.constraint.kind());
        for (const Point& x : s.envelope_grids.front()) xs.push_back(point_to_json(x));
        for (const EnvelopeResult& r : env.stages.front())
            values.push_back(r.finite ? json(r.value) : json("infinite"));
    } else {
        for (const Point& x : s.source.atoms()) {
            EnvelopeResult r = f_gamma(s.payoff, x, s.constraint);
            xs.push_back(point_to_json(x));
            values.push_back(r.finite ? json(r.value) : json("infinite"));
        }
    }
    out.body["xs"] = std::move(xs);
    out.body["g0"] = std::move(values);
    out.status = "optimal";
    return out;
}

RunBody run_multiperiod(const Scenario& s, PathMeasure* out_path) {
    MultiMarginalReport report = check_multimarginal(s.curve, s.options.lp());
    RunBody out;
    out.body["feasible"] = report.feasible;
    json intervals = json::array();
    for (std::size_t i = 0; i < report.intervals.size(); ++i) {
        ConstraintSpec step =
            ConstraintSpec::martingale_ball(s.curve.radii[i], s.curve.marginals[i + 1].atoms());
        intervals.push_back(feasibility_body(report.intervals[i], step));
    }
    out.body["intervals"] = std::move(intervals);
    if (report.first_infeasible >= 0) out.body["first_infeasible"] = report.first_infeasible;
    if (report.feasible) {
        std::vector<Coupling> witnesses;
        for (const FeasibilityReport& fr : report.intervals) witnesses.push_back(*fr.witness);
        PathMeasure path = paste(witnesses);
        out.body["pasted_marginals_verified"] = verify_marginals(path, s.curve);
        if (out_path) *out_path = std::move(path);
    }
    out.status = report.feasible ? "feasible" : "infeasible";
    out.exit_code = report.feasible ? 0 : 2;
    return out;
}

RunBody run_skorokhod(const Scenario& s, PathMeasure* out_path) {
    if (s.options.sigma <= 0.0 || s.options.steps < 1)
        throw SchemaViolationError("skorokhod: sigma and steps must be set (options or flags)");
    SkorokhodOptions opt;
    opt.kappa = s.options.kappa;
    opt.lp = s.options.lp();
    PathMeasure path;
    FeasibilityReport report = skorokhod_discrete(s.source, s.target, s.options.sigma,
                                                  s.options.steps, opt, &path);
    RunBody out;
    out.body["feasible"] = report.feasible;
    out.body["per_step_bound"] = s.options.kappa * std::sqrt(s.options.sigma / s.options.steps);
    out.body["analogue_note"] =
        "discrete-time analogue: n-step martingale with bounded increments, free intermediate laws";
    if (report.witness) out.body["witness"] = coupling_to_json(*report.witness);
    if (report.certificate) {
        json cert;
        cert["points"] = points_to_json(path.grids.back());
        cert["values"] = report.certificate->values;
        cert["gap"] = report.certificate->gap_infinite ? json("infinite")
                                                       : json(report.certificate->gap);
        out.body["violating_function"] = std::move(cert);
    }
    if (report.feasible && out_path) *out_path = std::move(path);
    out.status = report.feasible ? "feasible" : "infeasible";
    out.exit_code = report.feasible ? 0 : 2;
    return out;
}

RunBody run_monotone(const Scenario& s, const Coupling* plan) {
    if (!plan) throw SchemaViolationError("monotone: a plan file is required");
    if (s.constraint.kind() == ConstraintKind::CapacityBound)
        throw SchemaViolationError("monotone: left-monotonicity is defined for martingale kinds");
    Coupling aligned = align_plan(*plan, s.constraint);
    RadiusTable radius = s.constraint.kind() == ConstraintKind::MartingaleBall
                             ? s.constraint.radius()
                             : RadiusTable::uniform(std::numeric_limits<double>::infinity());

    MonotoneReport triple = check_gamma_left_monotone(aligned, radius);
    RunBody out;
    out.body["gamma_left_monotone"] = triple.passes;
    if (triple.triple) {
        out.body["violating_triple"] = json{{"x", triple.triple->x},
                                            {"y_minus", triple.triple->y_minus},
                                            {"y_plus", triple.triple->y_plus},
                                            {"x_prime", triple.triple->x_prime},
                                            {"y_prime", triple.triple->y_prime}};
    }

    detail::CouplingCheck check =
        detail::verify_coupling(aligned, s.source, s.target, s.constraint, 1e-9);
    out.body["admissible"] = check.ok;
    out.body["constraint_check"] = json{{"max_row_error", check.max_row_error},
                                        {"max_column_error", check.max_column_error},
                                        {"max_barycenter_error", check.max_barycenter_error},
                                        {"mass_outside_ball", check.mass_outside_ball}};

    if (s.has_cost) {
        out.body["guaranteed"] = s.cost.strictly_convex_marginal();
        try {
            MonotoneReport comp = competitor_check_all_pairs(aligned, s.constraint, s.cost,
                                                             s.options.lp());
            out.body["competitor_passes"] = comp.passes;
            if (comp.competitor) {
                out.body["competitor_violation"] =
                    json{{"row_i", static_cast<int>(comp.competitor->row_i)},
                         {"row_j", static_cast<int>(comp.competitor->row_j)},
                         {"improvement", comp.competitor->improvement}};
            }
        } catch (const NoAdmissibleExchangeError&) {
            out.body["competitor_passes"] = false;
            out.body["competitor_note"] = "incumbent kernels violate the constraint";
        }
    }
    bool passes = triple.passes && check.ok;
    out.status = passes ? "passes" : "fails";
    return out;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const Coupling* plan, PathMeasure* out_path) {
    RunBody rb;
    switch (scenario.problem) {
        case ProblemKind::Feasibility: rb = run_feasibility(scenario); break;
        case ProblemKind::Solve: rb = run_solve(scenario); break;
        case ProblemKind::Multiperiod: rb = run_multiperiod(scenario, out_path); break;
        case ProblemKind::Capacity: rb = run_capacity(scenario); break;
        case ProblemKind::Skorokhod: rb = run_skorokhod(scenario, out_path); break;
        case ProblemKind::Envelope: rb = run_envelope(scenario); break;
        case ProblemKind::Monotone: rb = run_monotone(scenario, plan); break;
    }
    if (!scenario.warnings.empty()) rb.body["warnings"] = scenario.warnings;

    RunReport report;
    report.tool_version = kToolVersion;
    report.scenario_digest = digest(scenario.canonical);
    report.problem = to_string(scenario.problem);
    report.status = rb.status;
    report.exit_code = rb.exit_code;
    report.body = dump_canonical(rb.body);
    return report;
}

std::string emit_report(const RunReport& report, ReportFormat format, bool include_timings) {
    json body = json::parse(report.body);
    if (format == ReportFormat::Csv) {
        std::string csv;
        if (body.contains("xs") && body.contains("g0")) {
            csv = "x,g0\n";
            for (std::size_t i = 0; i < body["xs"].size(); ++i) {
                const json& x = body["xs"][i];
                csv += x.is_number() ? format_double(x.get<double>()) : dump_canonical(x);
                csv += ',';
                const json& v = body["g0"][i];
                csv += v.is_number() ? format_double(v.get<double>()) : "inf";
                csv += '\n';
            }
            return csv;
        }
        const char* key = body.contains("coupling") ? "coupling"
                          : body.contains("witness") ? "witness"
                                                     : nullptr;
        if (!key) throw IoError("csv output needs a coupling or an envelope table");
        const json& c = body[key];
        csv = "x,y,mass\n";
        for (std::size_t i = 0; i < c["source_atoms"].size(); ++i) {
            for (std::size_t j = 0; j < c["target_atoms"].size(); ++j) {
                double mass = c["matrix"][i][j].get<double>();
                if (mass == 0.0) continue;
                csv += dump_canonical(c["source_atoms"][i]) + "," +
                       dump_canonical(c["target_atoms"][j]) + "," + format_double(mass) + "\n";
            }
        }
        return csv;
    }
    json out;
    out["tool"] = report.tool_version;
    out["digest"] = report.scenario_digest;
    out["problem"] = report.problem;
    out["status"] = report.status;
    out["exit_code"] = report.exit_code;
    out["body"] = std::move(body);
    if (include_timings) out["elapsed_ms"] = report.elapsed_ms;
    return dump_canonical(out) + "\n";
}

RunReport parse_report(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::exception& e) {
        throw SchemaViolationError(std::string("report: not valid JSON: ") + e.what());
    }
    RunReport r;
    r.tool_version = j.at("tool").get<std::string>();
    r.scenario_digest = j.at("digest").get<std::string>();
    r.problem = j.at("problem").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.exit_code = j.at("exit_code").get<int>();
    r.body = dump_canonical(j.at("body"));
    if (j.contains("elapsed_ms")) r.elapsed_ms = j.at("elapsed_ms").get<double>();
    return r;
}

std::string plan_to_csv(const Coupling& coupling) {
    std::string csv = "x,y,mass\n";
    for (Eigen::Index i = 0; i < coupling.matrix().rows(); ++i) {
        for (Eigen::Index j = 0; j < coupling.matrix().cols(); ++j) {
            double mass = coupling.matrix()(i, j);
            if (mass == 0.0) continue;
            csv += dump_canonical(point_to_json(coupling.source().atoms()[static_cast<std::size_t>(i)]));
            csv += ',';
            csv += dump_canonical(point_to_json(coupling.targets()[static_cast<std::size_t>(j)]));
            csv += ',';
            csv += format_double(mass);
            csv += '\n';
        }
    }
    return csv;
}

Coupling plan_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> xs, ys, masses;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("x,", 0) == 0) continue;  // header
        }
        std::istringstream row(line);
        std::string fx, fy, fm;
        if (!std::getline(row, fx, ',') || !std::getline(row, fy, ',') || !std::getline(row, fm))
            throw SchemaViolationError("plan csv: expected x,y,mass rows");
        try {
            xs.push_back(std::stod(fx));
            ys.push_back(std::stod(fy));
            masses.push_back(std::stod(fm));
        } catch (const std::exception&) {
            throw SchemaViolationError("plan csv: malformed number in '" + line + "'");
        }
    }
    if (xs.empty()) throw SchemaViolationError("plan csv: no rows");

    double total = 0.0;
    for (double m : masses) total += m;
    if (total <= 0.0) throw SchemaViolationError("plan csv: total mass must be positive");

    std::vector<double> sx = xs, sy = ys;
    std::sort(sx.begin(), sx.end());
    sx.erase(std::unique(sx.begin(), sx.end()), sx.end());
    std::sort(sy.begin(), sy.end());
    sy.erase(std::unique(sy.begin(), sy.end()), sy.end());

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sx.size()),
                                              static_cast<Eigen::Index>(sy.size()));
    for (std::size_t k = 0; k < xs.size(); ++k) {
        auto i = std::lower_bound(sx.begin(), sx.end(), xs[k]) - sx.begin();
        auto j = std::lower_bound(sy.begin(), sy.end(), ys[k]) - sy.begin();
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += masses[k] / total;
    }
    std::vector<Point> source_atoms, target_atoms;
    for (double v : sx) source_atoms.emplace_back(v);
    for (double v : sy) target_atoms.emplace_back(v);
    std::vector<double> source_weights;
    for (Eigen::Index i = 0; i < m.rows(); ++i) source_weights.push_back(m.row(i).sum());
    return Coupling(DiscreteMeasure(source_atoms, source_weights), target_atoms, std::move(m));
}

std::string path_to_json(const PathMeasure& path) {
    json j;
    j["initial"] = measure_to_json(path.initial);
    json grids = json::array();
    for (const auto& g : path.grids) grids.push_back(points_to_json(g));
    j["grids"] = std::move(grids);
    json kernels = json::array();
    for (const Eigen::MatrixXd& k : path.kernels) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < k.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < k.cols(); ++c) row.push_back(k(r, c));
            rows.push_back(std::move(row));
        }
        kernels.push_back(std::move(rows));
    }
    j["kernels"] = std::move(kernels);
    return dump_canonical(j) + "\n";
}

}  // namespace cmot
