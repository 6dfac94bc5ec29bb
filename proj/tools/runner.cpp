#include "runner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <tbb/info.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "pelllab/hess.hpp"
#include "pelllab/pell.hpp"
#include "pelllab/semigroup.hpp"

namespace pelllab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::pair<ScenarioKind, const char*> kKinds[] = {
    {ScenarioKind::class_check, "class_check"},     {ScenarioKind::convexity, "convexity"},
    {ScenarioKind::cutoff_audit, "cutoff_audit"},   {ScenarioKind::contractivity, "contractivity"},
    {ScenarioKind::flow, "flow"},                   {ScenarioKind::bilinear, "bilinear"},
    {ScenarioKind::truncation, "truncation"},
};

const std::pair<Status, const char*> kStatuses[] = {
    {Status::pass, "pass"}, {Status::fail, "fail"}, {Status::not_refuted, "not_refuted"}};

// Inputs each kind needs.
std::vector<std::string> required_inputs(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::cutoff_audit: return {};
        case ScenarioKind::class_check:
        case ScenarioKind::contractivity:
        case ScenarioKind::truncation: return {"a"};
        default: return {"a", "b"};
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json_file(const fs::path& path) { return parse_json_text(read_file(path), path.string()); }

// An input is a problem object, a path to one, or {"problem": <either>, "rotate", "adjoint",
// "singular_potential"}. Paths are replaced by the file contents.
json resolve_input(const json& in, const fs::path& base) {
    if (in.is_string()) return load_json_file(base / in.get<std::string>());
    if (in.is_object() && in.contains("problem")) {
        json out = in;
        if (in["problem"].is_string()) out["problem"] = load_json_file(base / in["problem"].get<std::string>());
        return out;
    }
    return in;
}

Problem input_problem(const json& in) {
    if (!in.contains("problem")) return problem_from_json(in);
    Problem pr = problem_from_json(in.at("problem"));
    if (in.contains("singular_potential")) {
        const auto& sp = in["singular_potential"];
        const auto& x0 = sp.at("x0");
        std::array<double, 2> c{x0.at(0).get<double>(), x0.size() > 1 ? x0[1].get<double>() : 0.0};
        const auto V = singular_profile(pr.domain, sp.at("c").get<double>(), sp.at("s").get<double>(),
                                        c, sp.value("sub", 32));
        const auto base = pr.tuple.expanded();
        std::vector<Cell> cells = base.stored();
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i].V = -V[i];
        pr.tuple = CoefficientTuple(std::move(cells), base.n_cells());
    }
    if (in.value("adjoint", false)) pr.tuple = adjoint(pr.tuple);
    if (in.contains("rotate")) pr.tuple = rotate(pr.tuple, in["rotate"].get<double>());
    return pr;
}

std::vector<double> number_list(const json& params, const char* key, std::vector<double> def) {
    if (!params.contains(key)) return def;
    const auto& v = params[key];
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();
}

std::vector<double> doubling_list(double from, double to) {
    std::vector<double> out;
    for (double n = from; n <= to; n *= 2) out.push_back(n);
    return out;
}

SubcriticalityCert cert_from_json(const json& j) {
    SubcriticalityCert c{j.value("alpha", 0.0), j.value("sigma", 0.0)};
    c.validate();
    return c;
}

// A probe spec, or {"sum": [spec + "coef": [re, im], …]}. Random probes without their own seed
// take the scenario seed.
CVec probe_vector(const json& j, const DiscreteForm& F, std::uint64_t seed) {
    if (j.contains("sum")) {
        CVec u = CVec::Zero(F.n_dofs());
        for (const auto& term : j["sum"]) {
            const cplx coef = term.contains("coef") ? complex_from_json(term["coef"]) : cplx(1.0);
            u += coef * probe_vector(term, F, seed);
        }
        return u;
    }
    ProbeSpec spec = ProbeSpec::from_json(j);
    if (spec.type == "random" && !(j.contains("params") && j["params"].contains("seed")))
        spec.seed = static_cast<unsigned>(seed);
    return make_probe(spec, F);
}

json probe_or(const json& params, const char* key) {
    return params.value(key, json{{"type", "eigenmode"}, {"params", {{"mode", 1}}}});
}

void run_class_check(const Scenario& s, ScenarioResult& r) {
    const Problem pr = input_problem(s.inputs.at("a"));
    const ClassName cls = class_from_string(s.params.value("class", std::string("B_p")));
    const bool expect = s.params.value("expect_member", true);
    const bool perturbed = cls == ClassName::WP_p || cls == ClassName::SP_p || cls == ClassName::BP_p;
    json reports = json::array();
    bool ok = true;
    for (double p : number_list(s.params, "p", {2.0})) {
        const ClassReport cr =
            perturbed ? check_perturbed_class(pr.tuple, p, pr.domain, SearchGrid::standard(), cls,
                                              s.params.value("n_probes", 32))
                      : check_class(pr.tuple, p, cls);
        ok = ok && cr.member == expect;
        reports.push_back(to_json(cr));
    }
    r.metrics = {{"class", to_string(cls)}, {"expect_member", expect}, {"reports", reports}};
    r.status = ok ? Status::pass : Status::fail;
}

void run_convexity(const Scenario& s, ScenarioResult& r) {
    const Cell a = input_problem(s.inputs.at("a")).tuple.at(0);
    const Cell b = input_problem(s.inputs.at("b")).tuple.at(0);
    ConvexityOptions opt;
    opt.mode = s.params.value("mode", std::string("plain")) == "perturbed" ? ConvexityMode::perturbed
                                                                            : ConvexityMode::plain;
    opt.n_samples = s.params.value("n_samples", 100000);
    opt.seed = static_cast<unsigned>(s.seed);
    if (s.params.contains("delta")) opt.delta = s.params["delta"].get<double>();
    opt.max_k = s.params.value("max_k", opt.max_k);
    opt.r_min = s.params.value("r_min", opt.r_min);
    opt.r_max = s.params.value("r_max", opt.r_max);
    if (s.params.contains("cert_a")) opt.cert_a = cert_from_json(s.params["cert_a"]);
    if (s.params.contains("cert_b")) opt.cert_b = cert_from_json(s.params["cert_b"]);
    const ConvexityReport cr = verify_convexity(a, b, s.params.value("p", 2.0), opt);
    r.metrics = to_json(cr);
    r.status = cr.passed ? Status::pass : Status::fail;

    Table t{{"log10_slack_lo", "log10_slack_hi"}, {}};
    for (const auto& reg : cr.regions) t.header.push_back(reg.region);
    const double w = (kSlackLogMax - kSlackLogMin) / kSlackBins;
    for (int k = 0; k < kSlackBins; ++k) {
        std::vector<double> row{kSlackLogMin + k * w, kSlackLogMin + (k + 1) * w};
        for (const auto& reg : cr.regions) row.push_back(reg.histogram.at(k));
        t.rows.push_back(row);
    }
    r.tables["slack_histogram"] = t;
}

void run_cutoff_audit(const Scenario& s, ScenarioResult& r) {
    const double p = s.params.value("p", 3.0);
    std::optional<double> kappa;
    if (s.params.contains("kappa")) kappa = s.params["kappa"].get<double>();
    const auto cp = CutoffParams::make(p, kappa, s.params.value("quad_order", 8));
    const Cutoff cut(cp);
    const auto n_list = number_list(s.params, "n_list", {1, 10, 100, 1000});
    const auto seed = static_cast<unsigned>(s.seed);
    const CutoffAudit audit = audit_cutoff(cut, n_list, s.params.value("n_per_region", 300),
                                           s.params.value("tol", 1e-6), seed);
    bool ok = audit.passed;
    json comp = json::array();
    for (double n : n_list) {
        const auto c = check_comparability(cp, n, s.params.value("comparability_samples", 2000), seed);
        ok = ok && c.passed;
        comp.push_back(to_json(c));
    }
    r.metrics = {{"p", cp.p}, {"kappa", cp.kappa}, {"audit", to_json(audit)}, {"comparability", comp}};
    if (s.params.value("admissible", false)) {
        const auto ad = check_admissible(cut, n_list, s.params.value("admissible_samples", 2000), seed);
        ok = ok && ad.passed;
        r.metrics["admissible"] = to_json(ad);
    }
    // Optional E.T. and first-order domination for cells a, b (first stored cell of each input).
    if (s.params.contains("domination")) {
        const auto& d = s.params["domination"];
        const Cell a = s.inputs.contains("a") ? input_problem(s.inputs["a"]).tuple.at(0)
                                              : Cell{CMat::Identity(1, 1), CVec::Zero(1), CVec::Zero(1), 1.0};
        const Cell b = s.inputs.contains("b") ? input_problem(s.inputs["b"]).tuple.at(0) : a;
        const double delta = d.value("delta", 0.25);
        const int n_samples = d.value("n_samples", 10000);
        const auto et = check_et_domination(cp, delta, a, b, number_list(d, "nu_list", {0.2, 0.1}),
                                            number_list(d, "n_list", {1, 10, 100}), n_samples, seed);
        const auto hb = check_hbc_uniform(cp.p, delta, a, b, number_list(d, "hbc_nu_list", {0.2, 0.1, 0.05}),
                                          n_samples, seed + 1);
        ok = ok && et.passed && hb.passed;
        r.metrics["et_domination"] = to_json(et);
        r.metrics["hbc_uniform"] = to_json(hb);
    }
    r.status = ok ? Status::pass : Status::fail;

    Table t{{"n", "zeta", "eta", "zeta_zeta", "eta_eta", "zeta_eta"}, {}};
    for (std::size_t i = 0; i < audit.n_list.size(); ++i) {
        std::vector<double> row{audit.n_list[i]};
        row.insert(row.end(), audit.constants[i].begin(), audit.constants[i].end());
        t.rows.push_back(row);
    }
    r.tables["derivative_constants"] = t;
    r.region_map = cp;
}

std::vector<double> time_grid(const json& params, std::vector<double> def) {
    return number_list(params, "t_grid", std::move(def));
}

void run_contractivity(const Scenario& s, ScenarioResult& r) {
    const Problem pr = input_problem(s.inputs.at("a"));
    const DiscreteForm F = assemble(pr.tuple, pr.domain);
    std::vector<CVec> probes;
    if (s.params.contains("probes")) {
        for (const auto& j : s.params["probes"]) probes.push_back(probe_vector(j, F, s.seed));
    } else {
        for (const auto& spec : standard_probes(4, static_cast<unsigned>(s.seed)))
            probes.push_back(make_probe(spec, F));
    }
    const auto cr = check_contractivity(pr.tuple, s.params.value("p", 2.0), pr.domain,
                                        s.params.value("theta", 0.0), probes,
                                        time_grid(s.params, {0.01, 0.1, 0.5}),
                                        s.params.value("eps_h", 1e-3), s.params.value("dt_max", 1e-2),
                                        s.params.value("class_check", true));
    r.metrics = to_json(cr);
    r.status = status_from_string(cr.status);
}

void run_flow(const Scenario& s, ScenarioResult& r) {
    const Problem a = input_problem(s.inputs.at("a"));
    const Problem b = input_problem(s.inputs.at("b"));
    const DiscreteForm F = assemble(a.tuple, a.domain);
    const CVec f = probe_vector(probe_or(s.params, "f"), F, s.seed);
    const CVec g = probe_vector(probe_or(s.params, "g"), F, s.seed + 1);
    std::vector<double> def;
    for (int k = 0; k <= 10; ++k) def.push_back(0.05 * k);
    FlowOptions opt;
    opt.delta = s.params.value("delta", opt.delta);
    opt.dt_max = s.params.value("dt_max", opt.dt_max);
    opt.c_flow = s.params.value("c_flow", opt.c_flow);
    opt.check_class = s.params.value("check_class", opt.check_class);
    const auto fr = flow_monotonicity(a.tuple, b.tuple, s.params.value("p", 2.0), f, g, a.domain,
                                      time_grid(s.params, def), opt);
    r.metrics = to_json(fr);
    r.status = fr.passed ? Status::pass : Status::fail;

    Table t{{"t", "E"}, {}};
    for (const auto& [key, _] : fr.lp_norms) t.header.push_back("norm_" + key);
    for (std::size_t k = 0; k < fr.times.size(); ++k) {
        std::vector<double> row{fr.times[k], fr.flow_E[k]};
        for (const auto& [_, v] : fr.lp_norms) row.push_back(v[k]);
        t.rows.push_back(row);
    }
    r.tables["flow"] = t;
}

void run_bilinear(const Scenario& s, ScenarioResult& r) {
    const Problem a = input_problem(s.inputs.at("a"));
    const Problem b = input_problem(s.inputs.at("b"));
    const DiscreteForm F = assemble(a.tuple, a.domain);
    const CVec f = probe_vector(probe_or(s.params, "f"), F, s.seed);
    const CVec g = probe_vector(probe_or(s.params, "g"), F, s.seed + 1);
    const auto br = bilinear_functional(a.tuple, b.tuple, f, g, a.domain, s.params.value("T_max", 20.0),
                                        s.params.value("n_nodes", 200), s.params.value("dt_max", 1e-2),
                                        s.params.value("tail_tol", 1e-2));
    r.metrics = to_json(br);
    bool ok = true;
    if (s.params.contains("expected")) {
        const double e = s.params["expected"].get<double>();
        const double rel = std::abs(br.value - e) / std::abs(e);
        r.metrics["expected"] = e;
        r.metrics["rel_error"] = rel;
        ok = rel <= s.params.value("rel_tol", 0.02);
    }
    if (s.params.contains("p")) {
        const double p = s.params["p"].get<double>();
        const double ratio = br.value / (lp_norm(f, p, F) * lp_norm(g, conjugate_exponent(p), F));
        r.metrics["p"] = p;
        r.metrics["ratio"] = ratio;
        if (s.params.contains("ratio_bound")) ok = ok && ratio <= s.params["ratio_bound"].get<double>();
    }
    r.status = ok ? Status::pass : Status::fail;
}

void run_truncation(const Scenario& s, ScenarioResult& r) {
    const Problem a = input_problem(s.inputs.at("a"));
    const DiscreteForm F = assemble(a.tuple, a.domain);
    const CVec f = probe_vector(probe_or(s.params, "f"), F, s.seed);
    const bool lower = s.params.value("lower_bounds", false);
    const auto tr = check_truncation_convergence(a.tuple, a.domain, f, s.params.value("z", 0.5),
                                                 number_list(s.params, "n_list", doubling_list(1, 256)),
                                                 s.params.value("dt_max", 1e-2), lower);
    r.metrics = to_json(tr);
    bool ok = tr.passed;
    if (s.params.contains("min_lower_bound"))
        for (double c : tr.lower_bound_constants) ok = ok && c >= s.params["min_lower_bound"].get<double>();
    r.status = ok ? Status::pass : Status::fail;

    Table t{{"n", "grad_error", "potential_error"}, {}};
    if (lower) t.header.push_back("lower_bound_constant");
    for (std::size_t k = 0; k < tr.n_list.size(); ++k) {
        std::vector<double> row{tr.n_list[k], tr.grad_errors[k], tr.potential_errors[k]};
        if (lower) row.push_back(tr.lower_bound_constants[k]);
        t.rows.push_back(row);
    }
    r.tables["truncation"] = t;
}

std::string safe_name(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    return out;
}

void write_table(const fs::path& path, const Table& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n' << std::setprecision(12);
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

}  // namespace

std::string to_string(ScenarioKind k) {
    for (const auto& [v, s] : kKinds)
        if (v == k) return s;
    throw std::invalid_argument("unknown scenario kind");
}

ScenarioKind kind_from_string(const std::string& s) {
    for (const auto& [v, n] : kKinds)
        if (s == n) return v;
    throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

std::string to_string(Status s) {
    for (const auto& [v, n] : kStatuses)
        if (v == s) return n;
    throw std::invalid_argument("unknown status");
}

Status status_from_string(const std::string& s) {
    for (const auto& [v, n] : kStatuses)
        if (s == n) return v;
    throw std::invalid_argument("unknown status '" + s + "'");
}

ConfigError::ConfigError(const std::string& what, std::string file, std::size_t line,
                         std::size_t column)
    : std::runtime_error(what), file_(std::move(file)), line_(line), column_(column) {}

json parse_json_text(const std::string& text, const std::string& file) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is the 1-based offset of the offending character.
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(e.what(), file, line, col);
    }
}

Config parse_config(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion)
        throw ConfigError("unsupported schema_version");
    Config cfg;
    cfg.emit_plots = j.value("emit_plots_data", true);
    const std::uint64_t default_seed = j.value("seed", std::uint64_t{1});
    const auto scenarios = j.value("scenarios", json::array());
    if (!scenarios.is_array()) throw ConfigError("'scenarios' must be an array");
    std::set<std::string> names;
    static const std::set<std::string> allowed{"name", "kind", "inputs", "params", "seed"};
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto& sj = scenarios[i];
        const std::string where = "scenario " + std::to_string(i);
        try {
            if (!sj.is_object()) throw ConfigError(where + ": must be an object");
            for (const auto& [key, _] : sj.items())
                if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
            Scenario s;
            s.name = sj.at("name").get<std::string>();
            if (!names.insert(s.name).second) throw ConfigError(where + ": duplicate name '" + s.name + "'");
            s.kind = kind_from_string(sj.at("kind").get<std::string>());
            s.params = sj.value("params", json::object());
            s.seed = sj.value("seed", default_seed);
            const auto inputs = sj.value("inputs", json::object());
            for (const auto& key : required_inputs(s.kind))
                if (!inputs.contains(key)) throw ConfigError(where + ": missing input '" + key + "'");
            for (const auto& [key, value] : inputs.items()) {
                s.inputs[key] = resolve_input(value, base_dir);
                input_problem(s.inputs[key]);
            }
            cfg.scenarios.push_back(std::move(s));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return cfg;
}

Config load_config(const fs::path& path) {
    return parse_config(load_json_file(path), path.parent_path());
}

int RunReport::exit_code() const {
    for (const auto& s : scenarios)
        if (s.status == Status::fail) return 1;
    return 0;
}

ScenarioResult run_scenario(const Scenario& s) {
    ScenarioResult r;
    r.name = s.name;
    r.kind = s.kind;
    r.seed = s.seed;
    try {
        switch (s.kind) {
            case ScenarioKind::class_check: run_class_check(s, r); break;
            case ScenarioKind::convexity: run_convexity(s, r); break;
            case ScenarioKind::cutoff_audit: run_cutoff_audit(s, r); break;
            case ScenarioKind::contractivity: run_contractivity(s, r); break;
            case ScenarioKind::flow: run_flow(s, r); break;
            case ScenarioKind::bilinear: run_bilinear(s, r); break;
            case ScenarioKind::truncation: run_truncation(s, r); break;
        }
    } catch (const std::exception& e) {
        r.status = Status::fail;
        r.error = e.what();
        r.tables.clear();
        r.region_map.reset();
    }
    return r;
}

RunReport run(const Config& cfg, int threads, std::optional<std::uint64_t> seed_override) {
    std::vector<Scenario> scenarios = cfg.scenarios;
    if (seed_override)
        for (auto& s : scenarios) s.seed = *seed_override;
    RunReport rep;
    rep.scenarios.resize(scenarios.size());
    tbb::task_arena arena(std::clamp(threads, 1, std::max(1, tbb::info::default_concurrency())));
    arena.execute([&] {
        tbb::parallel_for(std::size_t{0}, scenarios.size(),
                          [&](std::size_t i) { rep.scenarios[i] = run_scenario(scenarios[i]); });
    });
    return rep;
}

json to_json(const RunReport& r) {
    json sc = json::array();
    int counts[3] = {0, 0, 0};
    for (const auto& s : r.scenarios) {
        ++counts[static_cast<int>(s.status)];
        sc.push_back({{"name", s.name},
                      {"kind", to_string(s.kind)},
                      {"seed", s.seed},
                      {"status", to_string(s.status)},
                      {"metrics", s.metrics},
                      {"error", s.error},
                      {"artifacts", s.artifacts}});
    }
    return {{"schema_version", kSchemaVersion},
            {"summary",
             {{"n_scenarios", r.scenarios.size()},
              {"pass", counts[0]},
              {"fail", counts[1]},
              {"not_refuted", counts[2]},
              {"exit_code", r.exit_code()}}},
            {"scenarios", sc}};
}

void validate_report(const json& j) {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("report schema: " + what);
    };
    need(j.is_object(), "top level must be an object");
    need(j.value("schema_version", -1) == kSchemaVersion, "schema_version");
    need(j.contains("scenarios") && j["scenarios"].is_array(), "scenarios array");
    need(j.contains("summary") && j["summary"].is_object(), "summary object");
    std::set<std::string> names;
    int counts[3] = {0, 0, 0};
    for (const auto& s : j["scenarios"]) {
        need(s.is_object(), "scenario must be an object");
        need(s.contains("name") && s["name"].is_string(), "scenario name");
        need(names.insert(s["name"].get<std::string>()).second, "duplicate scenario name");
        need(s.contains("kind") && s["kind"].is_string(), "scenario kind");
        kind_from_string(s["kind"].get<std::string>());
        need(s.contains("seed") && s["seed"].is_number_unsigned(), "scenario seed");
        need(s.contains("status") && s["status"].is_string(), "scenario status");
        ++counts[static_cast<int>(status_from_string(s["status"].get<std::string>()))];
        need(s.contains("metrics") && s["metrics"].is_object(), "scenario metrics");
        need(s.contains("error") && s["error"].is_string(), "scenario error");
        need(s.contains("artifacts") && s["artifacts"].is_array(), "scenario artifacts");
        for (const auto& a : s["artifacts"]) need(a.is_string(), "artifact path");
    }
    const auto& sum = j["summary"];
    need(sum.value("n_scenarios", -1) == static_cast<int>(j["scenarios"].size()), "summary count");
    need(sum.value("pass", -1) == counts[0] && sum.value("fail", -1) == counts[1] &&
             sum.value("not_refuted", -1) == counts[2],
         "summary status counts");
    need(sum.value("exit_code", -1) == (counts[1] > 0 ? 1 : 0), "summary exit_code");
}

RunReport report_from_json(const json& j) {
    validate_report(j);
    RunReport r;
    for (const auto& s : j["scenarios"]) {
        ScenarioResult x;
        x.name = s["name"].get<std::string>();
        x.kind = kind_from_string(s["kind"].get<std::string>());
        x.seed = s["seed"].get<std::uint64_t>();
        x.status = status_from_string(s["status"].get<std::string>());
        x.metrics = s["metrics"];
        x.error = s["error"].get<std::string>();
        x.artifacts = s["artifacts"].get<std::vector<std::string>>();
        r.scenarios.push_back(std::move(x));
    }
    return r;
}

std::string dump_report(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

std::vector<fs::path> emit_plots_data(RunReport& r, const fs::path& out_dir) {
    std::vector<fs::path> written;
    for (auto& s : r.scenarios) {
        if (s.tables.empty() && !s.region_map) continue;
        fs::create_directories(out_dir);
        const std::string base = safe_name(s.name);
        if (s.region_map) {
            const std::string rel = "region_map_" + base + ".csv";
            std::ofstream os(out_dir / rel);
            if (!os) throw std::runtime_error("cannot write " + (out_dir / rel).string());
            write_region_csv(os, *s.region_map);
            s.artifacts.push_back(rel);
            written.push_back(out_dir / rel);
        }
        for (const auto& [key, t] : s.tables) {
            const std::string rel = base + "_" + key + ".csv";
            write_table(out_dir / rel, t);
            s.artifacts.push_back(rel);
            written.push_back(out_dir / rel);
        }
    }
    return written;
}

}  // namespace pelllab::cli
