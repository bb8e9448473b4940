#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmot/capacity.hpp"
#include "cmot/measures.hpp"
#include "cmot/multiperiod.hpp"

namespace cmot {

inline constexpr const char* kToolVersion = "cmot 0.1.0";

enum class ProblemKind { Feasibility, Solve, Multiperiod, Capacity, Skorokhod, Envelope, Monotone };

std::string to_string(ProblemKind k);

struct SolverOptions {
    double tol = 1e-9;
    double kappa = 3.0;   // skorokhod per-step bound multiplier
    double sigma = 0.0;   // skorokhod quadratic budget
    int steps = 0;        // skorokhod step count
    unsigned seed = 0;
    bool dual = false;    // solve: include the dual side

    LpOptions lp() const {
        LpOptions o;
        o.feasibility_tol = tol;
        o.optimality_tol = tol;
        return o;
    }
};

/// A parsed scenario file. Which fields are meaningful depends on `problem`;
/// load_scenario validates presence and shape and reports violations with a
/// JSON-pointer-style path.
struct Scenario {
    ProblemKind problem = ProblemKind::Feasibility;
    DiscreteMeasure source;
    DiscreteMeasure target;
    ConstraintSpec constraint;
    CostSpec cost;
    bool has_cost = false;
    std::vector<double> payoff;  // envelope: values on constraint.targets()
    bool multi_envelope = false;
    std::vector<std::vector<Point>> envelope_grids;
    std::vector<RadiusTable> envelope_radii;
    MarginalCurve curve;          // multiperiod
    CapacityInstance capacity;    // capacity
    SolverOptions options;
    std::string canonical;        // canonical bytes used for the digest
    std::vector<std::string> warnings;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

struct RunReport {
    std::string tool_version;
    std::string scenario_digest;
    std::string problem;
    std::string status;  // feasible | infeasible | optimal | passes | fails
    int exit_code = 0;   // 0 solved/feasible, 2 infeasible with certificate
    std::string body;    // canonical JSON payload
    double elapsed_ms = 0.0;

    friend bool operator==(const RunReport& a, const RunReport& b) {
        return a.tool_version == b.tool_version && a.scenario_digest == b.scenario_digest &&
               a.problem == b.problem && a.status == b.status && a.exit_code == b.exit_code &&
               a.body == b.body;
    }
};

/// Runs the scenario through the library. `plan` supplies the coupling for
/// monotone checks; `out_path` receives the path measure for multiperiod and
/// skorokhod runs when requested.
RunReport run_scenario(const Scenario& scenario, const Coupling* plan = nullptr,
                       PathMeasure* out_path = nullptr);

enum class ReportFormat { Json, Csv };

/// Deterministic bytes: object keys sorted, floats rendered with %.12g.
/// Timings are excluded unless explicitly requested, so identical results
/// give identical bytes across runs. CSV is available for reports carrying a
/// coupling (header x,y,mass) or an envelope table (header x,g0).
std::string emit_report(const RunReport& report, ReportFormat format = ReportFormat::Json,
                        bool include_timings = false);

RunReport parse_report(const std::string& bytes);

std::string plan_to_csv(const Coupling& coupling);
Coupling plan_from_csv(const std::string& text);

std::string path_to_json(const PathMeasure& path);

/// FNV-1a 64-bit digest of the canonical scenario bytes, as 16 hex chars.
std::string digest(const std::string& canonical_bytes);

}  // namespace cmot
