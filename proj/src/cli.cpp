#include "nucleon/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "nucleon/errors.hpp"
#include "nucleon/io.hpp"
#include "nucleon/linearization.hpp"
#include "nucleon/sector_spectra.hpp"
#include "nucleon/sigma_omega.hpp"

namespace nucleon {

namespace {

using io::json;

json nls_defaults() {
    return {{"a", 4.0},
            {"b", 1.0},
            {"d", 3},
            {"controls",
             {{"rel_tol", 1e-10}, {"abs_tol", 1e-12}, {"r_start", 1e-4}, {"r_max", 0.0}, {"h_max", 0.05},
              {"bisect_tol", 1e-12}}}};
}

json command_defaults(const std::string& cmd) {
    json d;
    if (cmd == "continue") {
        d = {{"C", 1.0},
             {"D", 1.0},
             {"theta", 1.0},
             {"lambda", 2.0},
             {"mu", 0.5},
             {"eps_list", {0.0, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1}},
             {"grid", {{"N", 4000}, {"R", 0.0}}},
             {"tolerances", {{"newton_tol", 1e-10}, {"max_iter", 50}}}};
    } else if (cmd == "check-F") {
        d = {{"a", 4.0}, {"b", 1.0}, {"d", 3}, {"samples", 1000}, {"lambda", 3.0}};
    } else {
        d = nls_defaults();
        if (cmd == "shoot") d["y"] = 1.0;
        if (cmd == "portrait") d["samples"] = 50;
        if (cmd == "linearize") d["y"] = 0.0;
        if (cmd == "spectrum") {
            d["operator"] = "all";
            d["ell_max"] = 3;
            d["k"] = 3;
            d["kernel_tol"] = kDefaultKernelTol;
            d["grid"] = {{"N", static_cast<long long>(kDefaultSectorN)}, {"R", 0.0}};
        }
    }
    d["output_dir"] = "nucleon_out";
    return d;
}

/// Flag name -> JSON pointer into the command config.
const std::map<std::string, std::string>& flag_table() {
    static const std::map<std::string, std::string> t = {
        {"a", "/a"},
        {"b", "/b"},
        {"d", "/d"},
        {"y", "/y"},
        {"samples", "/samples"},
        {"rtol", "/controls/rel_tol"},
        {"atol", "/controls/abs_tol"},
        {"r-start", "/controls/r_start"},
        {"r-max", "/controls/r_max"},
        {"h-max", "/controls/h_max"},
        {"bisect-tol", "/controls/bisect_tol"},
        {"operator", "/operator"},
        {"ell-max", "/ell_max"},
        {"k", "/k"},
        {"kernel-tol", "/kernel_tol"},
        {"N", "/grid/N"},
        {"R", "/grid/R"},
        {"lambda", "/lambda"},
        {"C", "/C"},
        {"D", "/D"},
        {"theta", "/theta"},
        {"mu", "/mu"},
        {"eps-list", "/eps_list"},
        {"newton-tol", "/tolerances/newton_tol"},
        {"max-iter", "/tolerances/max_iter"},
    };
    return t;
}

double parse_double(const std::string& field, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + s + "'");
    }
}

json parse_flag(const std::string& field, const json& like, const std::string& s) {
    if (like.is_string()) return s;
    if (like.is_number_integer()) {
        const double v = parse_double(field, s);
        if (v != std::floor(v)) throw ConfigError(field, "expected an integer, got '" + s + "'");
        return static_cast<long long>(v);
    }
    if (like.is_array()) {
        json a = json::array();
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) a.push_back(parse_double(field, item));
        return a;
    }
    return parse_double(field, s);
}

void merge_config(json& base, const json& in, const std::string& path) {
    if (!in.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
    for (auto it = in.begin(); it != in.end(); ++it) {
        const std::string field = path + "/" + it.key();
        if (!base.contains(it.key())) throw ConfigError(field, "unknown key");
        json& slot = base[it.key()];
        const json& v = it.value();
        if (slot.is_object()) {
            merge_config(slot, v, field);
        } else if (slot.is_array()) {
            if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
            for (const json& x : v)
                if (!x.is_number()) throw ConfigError(field, "expected an array of numbers");
            slot = v;
        } else if (slot.is_string()) {
            if (!v.is_string()) throw ConfigError(field, "expected a string");
            slot = v;
        } else if (slot.is_number_integer()) {
            if (!v.is_number() || v.get<double>() != std::floor(v.get<double>()))
                throw ConfigError(field, "expected an integer");
            slot = static_cast<long long>(v.get<double>());
        } else {
            if (!v.is_number()) throw ConfigError(field, "expected a number");
            slot = v.get<double>();
        }
    }
}

Params params_of(const json& c) {
    return Params::make(c["a"].get<double>(), c["b"].get<double>(), static_cast<int>(c["d"].get<long long>()));
}

ShootControls controls_of(const json& c) {
    ShootControls sc;
    const json& k = c["controls"];
    sc.rel_tol = k["rel_tol"].get<double>();
    sc.abs_tol = k["abs_tol"].get<double>();
    sc.r_start = k["r_start"].get<double>();
    sc.r_max = k["r_max"].get<double>();
    sc.h_max = k["h_max"].get<double>();
    sc.bisect_tol = k["bisect_tol"].get<double>();
    sc.validate();
    return sc;
}

void write_trajectory(io::RunArtifacts& art, const std::string& name, const std::vector<double>& r,
                      const std::vector<double>& u, const std::vector<double>& du, const std::vector<double>& H) {
    io::CsvWriter w(art.add(name, "trajectory"), {"r", "u", "du", "H"});
    for (std::size_t i = 0; i < r.size(); ++i) w.cell(r[i]).cell(u[i]).cell(du[i]).cell(H[i]).end_row();
}

json ground_state_doc(const GroundState& gs) {
    return {{"y_bar", gs.y_bar},
            {"y_lo", gs.y_lo},
            {"y_hi", gs.y_hi},
            {"bracket_width", gs.bracket_width()},
            {"threshold_angle", gs.params.threshold_angle()},
            {"r_reliable", gs.r_reliable},
            {"r_fit_limit", gs.r_fit_limit},
            {"tail_amplitude", gs.tail_amplitude},
            {"decay",
             {{"C", gs.decay.C},
              {"rate", gs.decay.rate},
              {"sqrt_b", std::sqrt(gs.params.b)},
              {"r_lo", gs.decay.r_lo},
              {"r_hi", gs.decay.r_hi},
              {"samples", gs.decay.samples}}}};
}

int cmd_shoot(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const Params p = params_of(cfg);
    const ShootControls c = controls_of(cfg);
    const ShotResult s = shoot(cfg["y"].get<double>(), p, c);
    write_trajectory(art, "trajectory.csv", s.traj.r, s.traj.u, s.traj.du, s.traj.H);
    art.write_json("shot.json", "shot",
                   {{"y", s.traj.y},
                    {"verdict", verdict_name(s.cls.tag)},
                    {"r_event", io::number(s.cls.r_event)},
                    {"certificate", io::number(s.cls.certificate)},
                    {"note", s.cls.note},
                    {"samples", s.traj.size()}});
    out << "verdict " << verdict_name(s.cls.tag) << " at r = " << io::format_number(s.cls.r_event) << '\n';
    return kExitOk;
}

int cmd_ground_state(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const Params p = params_of(cfg);
    const GroundState gs = find_ground_state(p, controls_of(cfg));
    std::vector<double> H(gs.grid.size());
    for (std::size_t i = 0; i < H.size(); ++i) H[i] = hamiltonian(gs.Q[i], gs.dQ[i], p);
    write_trajectory(art, "ground_state.csv", gs.grid, gs.Q, gs.dQ, H);
    json doc = ground_state_doc(gs);
    const MassEnergy me = mass_and_energy(gs);
    doc["mass"] = me.mass;
    doc["energy"] = me.energy;
    art.write_json("ground_state.json", "ground_state", doc);
    out << "y_bar " << io::format_number(gs.y_bar) << " bracket width " << io::format_number(gs.bracket_width())
        << '\n';
    return kExitOk;
}

int cmd_portrait(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const Params p = params_of(cfg);
    const long long n = cfg["samples"].get<long long>();
    if (n < 1) throw ConfigError("/samples", "need at least one sample");
    std::vector<double> ys(static_cast<std::size_t>(n));
    for (long long k = 0; k < n; ++k) ys[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n) * kHalfPi;
    const auto shots = classify_portrait(p, ys, controls_of(cfg));
    io::CsvWriter w(art.add("portrait.csv", "portrait"), {"y", "tag", "r_event"});
    std::map<std::string, int> counts{{"SPlus", 0}, {"SZero", 0}, {"SMinus", 0}, {"Unresolved", 0}};
    json files = json::array();
    for (std::size_t k = 0; k < shots.size(); ++k) {
        const ShotResult& s = shots[k];
        w.cell(s.traj.y).cell(verdict_name(s.cls.tag)).cell(s.cls.r_event).end_row();
        ++counts[verdict_name(s.cls.tag)];
        char name[40];
        std::snprintf(name, sizeof name, "trajectory_%03zu.csv", k);
        write_trajectory(art, name, s.traj.r, s.traj.u, s.traj.du, s.traj.H);
        files.push_back(name);
    }
    art.write_json("portrait.json", "portrait_summary",
                   {{"samples", n},
                    {"counts", counts},
                    {"ground_state_regime", p.ground_state_regime()},
                    {"trajectories", files}});
    out << "SPlus " << counts["SPlus"] << " SMinus " << counts["SMinus"] << " SZero " << counts["SZero"]
        << " Unresolved " << counts["Unresolved"] << '\n';
    return kExitOk;
}

int cmd_linearize(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const Params p = params_of(cfg);
    const ShootControls c = controls_of(cfg);
    double y = cfg["y"].get<double>();
    double r_stop = c.resolved_r_max(p);
    if (y == 0.0) {
        const GroundState gs = find_ground_state(p, c);
        y = gs.y_bar;
        r_stop = gs.r_fit_limit;
    }
    const LinearizedSolution ls = solve_linearized(y, r_stop, p, c);
    io::CsvWriter w(art.add("linearized.csv", "linearized"), {"r", "v", "dv", "rescale_count"});
    for (std::size_t i = 0; i < ls.r.size(); ++i)
        w.cell(ls.r[i]).cell(ls.v[i]).cell(ls.dv[i]).cell(static_cast<long long>(ls.rescale_count[i])).end_row();
    art.write_json("linearized.json", "linearized_summary",
                   {{"y", y},
                    {"sign_change_radii", io::numbers(ls.sign_change_radii)},
                    {"dv_at_zeros", io::numbers(ls.dv_at_zeros)},
                    {"growth_rate", io::number(ls.growth_rate)},
                    {"divergence_flag", ls.divergence_flag},
                    {"wronskian_drift", io::number(ls.wronskian_drift)},
                    {"log_scale", ls.log_scale},
                    {"certificate", ls.certificate}});
    out << "sign changes " << ls.sign_change_radii.size() << " divergence " << (ls.divergence_flag ? "yes" : "no")
        << '\n';
    return kExitOk;
}

int cmd_wronskian(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const GroundState gs = find_ground_state(params_of(cfg), controls_of(cfg));
    const WronskianReport rep = wronskian_checks(gs);
    json ids = json::array();
    for (const IdentityResidual& r : rep.identities)
        ids.push_back({{"name", r.name}, {"relative_error", r.relative_error}, {"pass", r.pass}});
    art.write_json("wronskian.json", "wronskian",
                   {{"r_lo", rep.r_lo}, {"r_hi", rep.r_hi}, {"threshold", rep.threshold}, {"identities", ids},
                    {"all_pass", rep.all_pass()}});
    out << "identities " << (rep.all_pass() ? "pass" : "FAIL") << '\n';
    return rep.all_pass() ? kExitOk : kExitNumerical;
}

int cmd_spectrum(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const Params p = params_of(cfg);
    const std::string which = cfg["operator"].get<std::string>();
    if (which != "A" && which != "L1" && which != "L2" && which != "all")
        throw ConfigError("/operator", "operator must be A, L1, L2 or all");
    const long long ell_max_in = cfg["ell_max"].get<long long>();
    const long long k = cfg["k"].get<long long>();
    const long long N = cfg["grid"]["N"].get<long long>();
    if (ell_max_in < 0) throw ConfigError("/ell_max", "must be >= 0");
    if (k < 1) throw ConfigError("/k", "must be >= 1");
    if (N < 16) throw ConfigError("/grid/N", "must be >= 16");
    const int ell_max = p.d == 1 ? static_cast<int>(std::min<long long>(ell_max_in, 1)) : static_cast<int>(ell_max_in);
    const double kernel_tol = cfg["kernel_tol"].get<double>();
    const GroundState gs = find_ground_state(p, controls_of(cfg));
    const double R = cfg["grid"]["R"].get<double>() > 0.0 ? cfg["grid"]["R"].get<double>() : default_sector_radius(p);
    const std::size_t n = static_cast<std::size_t>(N);

    io::CsvWriter w(art.add("spectrum.csv", "spectrum"), {"operator", "ell", "index", "eigenvalue"});
    json sectors = json::array();
    auto run = [&](const SectorOperator& op, std::span<const double> ref) {
        const SpectralReport rep = lowest_eigenpairs(op, static_cast<int>(k), kernel_tol, ref);
        for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
            w.cell(op.name).cell(static_cast<long long>(op.ell)).cell(static_cast<long long>(i))
                .cell(rep.eigenvalues[i]).end_row();
        const std::string vname = "eigenvector_" + op.name + "_l" + std::to_string(op.ell) + ".csv";
        io::CsvWriter v(art.add(vname, "eigenvector"), {"r", "value"});
        for (std::size_t i = 0; i < op.N; ++i) v.cell(op.r[i]).cell(rep.eigenvectors[0][i]).end_row();
        json kc = json::array();
        for (std::size_t c : rep.kernel_candidates) kc.push_back(c);
        sectors.push_back({{"operator", op.name},
                           {"ell", op.ell},
                           {"eigenvalues", io::numbers(rep.eigenvalues)},
                           {"negative_count", rep.negative_count},
                           {"kernel_candidates", kc},
                           {"correlations", io::numbers(rep.correlations)},
                           {"warnings", op.warnings}});
    };

    json conj = json::array();
    for (int ell = 0; ell <= ell_max; ++ell) {
        std::optional<SectorOperator> A;
        if (which == "A" || which == "all" || which == "L1") A = assemble_sector_A(gs, ell, n, R);
        if (which == "A" || which == "all") run(*A, ell == 1 ? std::span<const double>(A->dQ) : std::span<const double>());
        if (which == "L1" || which == "all") {
            const SectorOperator L1 = assemble_L1_direct(gs, ell, n, R);
            std::vector<double> ref;
            if (ell == 1)
                for (std::size_t i = 0; i < n; ++i) ref.push_back(std::cos(L1.Q[i]) * L1.dQ[i]);
            run(L1, ref);
            conj.push_back({{"ell", ell}, {"relative_entry_deviation", relative_entry_deviation(L1, conjugate_by_cos(*A))}});
        }
    }
    if (which == "L2" || which == "all") {
        const SectorOperator L2 = assemble_L2_direct(gs, n, R);
        std::vector<double> ref(n);
        for (std::size_t i = 0; i < n; ++i) ref[i] = std::sin(L2.Q[i]);
        run(L2, ref);
    }
    art.write_json("spectrum.json", "spectrum_summary",
                   {{"N", N}, {"R", R}, {"sectors", sectors}, {"conjugation", conj}});
    out << "sectors " << sectors.size() << '\n';
    return kExitOk;
}

int cmd_energy(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const GroundState gs = find_ground_state(params_of(cfg), controls_of(cfg));
    const MassEnergy me = mass_and_energy(gs);
    const UnitMass um = rescale_to_unit_mass(gs);
    const MassEnergy mu = mass_and_energy(um.gs);
    art.write_json("energy.json", "energy",
                   {{"mass", me.mass},
                    {"energy", me.energy},
                    {"energy_raw", me.energy_raw},
                    {"unit_mass",
                     {{"lambda", um.lambda},
                      {"a", um.params.a},
                      {"b", um.params.b},
                      {"mass", mu.mass},
                      {"energy", mu.energy}}}});
    out << "mass " << io::format_number(me.mass) << " energy " << io::format_number(me.energy) << '\n';
    return kExitOk;
}

int cmd_check_F(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    const Params p = params_of(cfg);
    const long long n = cfg["samples"].get<long long>();
    const double lambda = cfg["lambda"].get<double>();
    if (n < 2) throw ConfigError("/samples", "need at least two samples");
    if (!(lambda > 1.0)) throw ConfigError("/lambda", "lambda must exceed 1");
    const double xs = p.stationary_angle();
    io::CsvWriter w(art.add("check_F.csv", "check_F"), {"x", "F", "Fprime", "Fsecond", "I"});
    bool sign_ok = true;
    for (long long k = 1; k < n; ++k) {
        const double x = kHalfPi * static_cast<double>(k) / static_cast<double>(n);
        const double f = eval_F(x, p);
        if (std::abs(x - xs) > 1e-9 && ((x < xs && f >= 0.0) || (x > xs && f <= 0.0))) sign_ok = false;
        w.cell(x).cell(f).cell(eval_Fprime(x, p)).cell(eval_Fsecond(x, p)).cell(eval_I(x, lambda, p)).end_row();
    }
    json doc = {{"stationary_angle", xs},
                {"Fprime_0", eval_Fprime(0.0, p)},
                {"Fprime_half_pi", eval_Fprime(kHalfPi, p)},
                {"Fprime_stationary", eval_Fprime(xs, p)},
                {"sign_pattern_ok", sign_ok},
                {"lambda", lambda}};
    if (p.ground_state_regime()) {
        const double root = root_of_I(lambda, p);
        doc["threshold_angle"] = p.threshold_angle();
        doc["root_of_I"] = root;
        doc["Iprime_at_root"] = eval_Iprime(root, lambda, p);
    }
    art.write_json("check_F.json", "check_F_summary", doc);
    out << "sign pattern " << (sign_ok ? "ok" : "VIOLATED") << '\n';
    return sign_ok ? kExitOk : kExitNumerical;
}

json state_doc(const SigmaOmegaState& s) {
    return {{"eps", s.eps},
            {"residual_norm", s.residual_norm},
            {"r", s.r},
            {"phi", s.phi},
            {"chi", s.chi},
            {"wplus", s.wplus},
            {"wminus", s.wminus}};
}

int cmd_continue(const json& cfg, io::RunArtifacts& art, std::ostream& out) {
    ContinuationParams cp;
    cp.C = cfg["C"].get<double>();
    cp.D = cfg["D"].get<double>();
    cp.theta = cfg["theta"].get<double>();
    cp.lambda = cfg["lambda"].get<double>();
    cp.mu = cfg["mu"].get<double>();
    cp.validate();
    const std::vector<double> eps = cfg["eps_list"].get<std::vector<double>>();
    SigmaOmegaGrid grid;
    const long long N = cfg["grid"]["N"].get<long long>();
    if (N < 8) throw ConfigError("/grid/N", "must be >= 8");
    grid.N = static_cast<std::size_t>(N);
    grid.R = cfg["grid"]["R"].get<double>();
    NewtonOptions opt;
    opt.tol = cfg["tolerances"]["newton_tol"].get<double>();
    opt.max_iter = static_cast<int>(cfg["tolerances"]["max_iter"].get<long long>());
    if (!(opt.tol > 0.0)) throw ConfigError("/tolerances/newton_tol", "must be positive");
    if (opt.max_iter < 1) throw ConfigError("/tolerances/max_iter", "must be >= 1");

    const SigmaOmegaState guess = limit_state(cp, grid);
    const Branch br = continue_branch(eps, cp, guess, opt);

    io::CsvWriter w(art.add("branch.csv", "branch"),
                    {"eps", "newton_iters", "residual", "distance_to_limit", "phi_at_0", "chi_peak"});
    json pts = json::array();
    for (std::size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& bp = br.points[i];
        w.cell(bp.eps).cell(static_cast<long long>(bp.newton_iters)).cell(bp.state.residual_norm)
            .cell(bp.distance_to_limit).cell(bp.phi_at_0()).cell(bp.chi_peak()).end_row();
        const std::string name = "state_" + std::to_string(i) + ".json";
        art.write_json(name, "state", state_doc(bp.state));
        json pj = {{"eps", bp.eps}, {"state", name}};
        if (bp.eps > 0.0 && cp.theta / bp.eps > cp.lambda) {
            const double m = 1.0 / bp.eps;
            const PhysicalCouplings pc = physical_parameters(cp, m);
            pj["physical"] = {{"m", m},
                              {"m_sigma", pc.m_sigma},
                              {"m_omega", pc.m_omega},
                              {"g_sigma", pc.g_sigma},
                              {"g_omega", pc.g_omega},
                              {"mu", pc.mu},
                              {"residual", physical_residual(unscale_state(bp.state, cp, m), cp).max()}};
        }
        pts.push_back(pj);
    }
    art.write_json("branch.json", "branch_summary",
                   {{"truncated", br.truncated}, {"diagnostics", br.diagnostics}, {"points", pts}});
    out << "branch points " << br.points.size() << (br.truncated ? " (truncated: " + br.diagnostics + ")" : "")
        << '\n';
    return br.truncated ? kExitNumerical : kExitOk;
}

using Handler = int (*)(const json&, io::RunArtifacts&, std::ostream&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h = {
        {"shoot", cmd_shoot},         {"ground-state", cmd_ground_state}, {"portrait", cmd_portrait},
        {"linearize", cmd_linearize}, {"wronskian", cmd_wronskian},       {"spectrum", cmd_spectrum},
        {"continue", cmd_continue},   {"energy", cmd_energy},             {"check-F", cmd_check_F}};
    return h;
}

void diagnostic(std::ostream& err, const std::string& kind, const std::string& message, const std::string& field = {}) {
    json d = {{"status", "error"}, {"kind", kind}, {"message", message}};
    if (!field.empty()) d["field"] = field;
    err << d.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Radial ground states of the nuclear NLS equation and the sigma-omega branch", "nucleon"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        std::optional<std::string> config, out_dir;
        std::map<std::string, std::optional<std::string>> flags;
    };
    std::map<std::string, Sub> subs;
    for (const auto& [name, handler] : handlers()) {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name);
        s.app->add_option("--config", s.config, "JSON config file");
        s.app->add_option("--out", s.out_dir, "output directory");
        const json defaults = command_defaults(name);
        for (const auto& [flag, pointer] : flag_table()) {
            if (!defaults.contains(json::json_pointer(pointer))) continue;
            const json& v = defaults[json::json_pointer(pointer)];
            const char* kind = v.is_array() ? "LIST" : v.is_string() ? "TEXT" : v.is_number_integer() ? "INT" : "FLOAT";
            s.app->add_option("--" + flag, s.flags[flag], "sets " + pointer.substr(1) + " (default " + v.dump() + ")")
                ->option_text(kind);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        diagnostic(err, "validation", e.what());
        return kExitValidation;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        for (auto& [name, s] : subs) {
            if (!s.app->parsed()) continue;
            json cfg = command_defaults(name);
            if (s.config) {
                std::ifstream in(*s.config);
                if (!in) throw ConfigError("--config", "cannot read " + *s.config);
                json file;
                try {
                    file = json::parse(in);
                } catch (const json::parse_error& e) {
                    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
                }
                merge_config(cfg, file, "");
            }
            for (const auto& [flag, value] : s.flags) {
                if (!value) continue;
                const json::json_pointer ptr(flag_table().at(flag));
                cfg[ptr] = parse_flag("--" + flag, cfg[ptr], *value);
            }
            std::string out_dir = cfg["output_dir"].get<std::string>();
            if (const char* env = std::getenv("NUCLEON_NLS_OUT"); env && *env) out_dir = env;
            if (s.out_dir) out_dir = *s.out_dir;
            cfg.erase("output_dir");

            io::RunArtifacts art(out_dir, name, cfg);
            const int code = handlers().at(name)(cfg, art, out);
            art.write_manifest(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            return code;
        }
    } catch (const ConfigError& e) {
        diagnostic(err, "validation", e.what(), e.field());
        return kExitValidation;
    } catch (const ParameterError& e) {
        diagnostic(err, "validation", e.what());
        return kExitValidation;
    } catch (const DomainError& e) {
        diagnostic(err, "validation", e.what());
        return kExitValidation;
    } catch (const RegimeError& e) {
        diagnostic(err, "regime", e.what());
        return kExitNumerical;
    } catch (const CertificateError& e) {
        diagnostic(err, "certificate", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        diagnostic(err, "numerical", e.what());
        return kExitNumerical;
    }
    return kExitValidation;
}

}  // namespace nucleon
