#include <friedrichs/harness.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

using namespace friedrichs;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail_validation("file_not_found", "cannot open " + path);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        fail_runtime("write_failed", "cannot write " + path);
    out << text;
}

// stdout for "" or "-"
void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_file(path, text);
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

// rows of "weight,value"; a leading non-numeric line is a header
void read_weighted(const std::string& path, std::vector<double>& w, std::vector<double>& v)
{
    std::istringstream in(read_file(path));
    std::string        line;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        const auto a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos)
            continue;
        if (std::isalpha(static_cast<unsigned char>(line[a])) && w.empty())
            continue;
        const auto c = line.find(',');
        if (c == std::string::npos)
            fail_validation("bad_profile_file", "rows must read weight,value");
        w.push_back(detail::parse_num(line.substr(0, c)));
        v.push_back(detail::parse_num(line.substr(c + 1)));
    }
    if (w.empty())
        fail_validation("bad_profile_file", path + " holds no rows");
}

std::vector<double> numbers(const std::string& s)
{
    std::vector<double> out;
    std::stringstream   ss(s);
    std::string         cell;
    while (std::getline(ss, cell, ','))
        out.push_back(detail::parse_num(cell));
    return out;
}

template <std::size_t N>
std::array<double, N> point(const std::string& s, const char* what)
{
    const auto v = numbers(s);
    if (v.size() != N)
        fail_validation("bad_point", std::string(what) + " needs " + std::to_string(N) + " coordinates");
    std::array<double, N> p{};
    std::copy(v.begin(), v.end(), p.begin());
    return p;
}

template <std::size_t N>
ojson to_json(const std::array<double, N>& a)
{
    ojson j = ojson::array();
    for (double x : a)
        j.push_back(x);
    return j;
}

std::string spec_text(const std::string& arg)
{
    if (arg.find('=') == std::string::npos)
        return read_file(arg);
    return arg;
}

std::string usage(const CLI::App& app) { return app.help(); }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sobolev trace inequality laboratory", "friedrichs_lab"};
    app.require_subcommand(0, 1);
    app.option_defaults()->always_capture_default();
    unsigned threads = 0;
    bool     dry     = false;
    app.add_option("--threads", threads, "worker threads (0: FRIEDRICHS_LAB_THREADS or hardware)")->envname("FRIEDRICHS_LAB_THREADS");
    app.add_flag("--dry-run", dry, "print the resolved configuration and stop");

    // rearrange
    auto*       c_rearr = app.add_subcommand("rearrange", "decreasing rearrangement of weighted values");
    std::string r_input, r_space, r_values, r_out;
    auto*       o_input = c_rearr->add_option("--input", r_input, "CSV rows weight,value")->check(CLI::ExistingFile);
    auto*       o_space = c_rearr->add_option("--space", r_space, "atom file, rows id,weight[,x,y[,z]]")->check(CLI::ExistingFile);
    auto*       o_vals  = c_rearr->add_option("--values", r_values, "CSV rows id,value")->check(CLI::ExistingFile);
    o_space->needs(o_vals)->excludes(o_input);
    o_vals->needs(o_space);
    c_rearr->add_option("--out", r_out, "profile CSV (default stdout)");

    // norm
    auto*       c_norm = app.add_subcommand("norm", "rearrangement-invariant norm of a weighted profile");
    std::string n_spec, n_profile;
    double      n_mass = 0.0;
    c_norm->add_option("--spec", n_spec, "Lp(p) | Lorentz(p,sigma) | LZ(p,sigma,theta) | expL(gamma) | Linf")->required();
    c_norm->add_option("--profile", n_profile, "profile CSV, rows t_break,value")->required()->check(CLI::ExistingFile);
    c_norm->add_option("--mass", n_mass, "log/Orlicz mass (default: total weight)");

    // hardy
    auto*                    c_hardy = app.add_subcommand("hardy", "lower bounds for one-dimensional kernel inequalities");
    std::string              h_problem, h_template, h_src, h_tgt;
    std::vector<std::string> h_params;
    int                      h_levels = 3;
    std::size_t              h_grid   = 16;
    int                      h_restarts = 8;
    std::uint64_t            h_seed     = 1;
    c_hardy->add_option("--problem", h_problem, "problem file (key = value)")->check(CLI::ExistingFile);
    c_hardy->add_option("--template", h_template, "template name");
    c_hardy->add_option("--param", h_params, "template parameter key=value (repeatable)");
    c_hardy->add_option("--source", h_src, "source norm");
    c_hardy->add_option("--target", h_tgt, "target norm");
    c_hardy->add_option("--levels", h_levels, "refinement levels")->check(CLI::Range(1, 8));
    c_hardy->add_option("--grid", h_grid, "base grid size");
    c_hardy->add_option("--restarts", h_restarts, "random restarts per level");
    c_hardy->add_option("--seed", h_seed, "search seed");

    // raycast
    auto*       c_ray = app.add_subcommand("raycast", "first boundary hit of a ray");
    std::string y_domain, y_from, y_dir;
    c_ray->add_option("--domain", y_domain, "file or builtin:square|disk512|lshape|comb:k,a,eps|cube|ball")->required();
    c_ray->add_option("--from", y_from, "origin x,y[,z]")->required();
    c_ray->add_option("--dir", y_dir, "direction x,y[,z]")->required();

    // hajlasz
    auto*       c_haj = app.add_subcommand("hajlasz", "minimal Hajlasz upper gradient of a boundary trace");
    std::string j_trace, j_obj = "sup", j_norm, j_out;
    std::size_t j_points = 2000;
    c_haj->add_option("--trace", j_trace, "CSV rows x,y[,z],weight,value")->required()->check(CLI::ExistingFile);
    c_haj->add_option("--objective", j_obj, "sup | int");
    c_haj->add_option("--normspec", j_norm, "seminorm to report");
    c_haj->add_option("--out", j_out, "gradient CSV");
    c_haj->add_option("--lp-points", j_points, "LP size budget");

    // check-pointwise
    auto*       c_pw = app.add_subcommand("check-pointwise", "empirical constant of a pointwise potential estimate");
    std::string p_order = "first", p_domain, p_u;
    double      p_h = 0.0, p_eval = 0.0;
    int         p_mdirs = 0, p_levels = 2;
    c_pw->set_help_flag("--help", "print this help message and exit");
    c_pw->add_option("--order", p_order, "first | second-u | second-grad | symmetric");
    c_pw->add_option("--domain", p_domain, "domain")->required();
    c_pw->add_option("--u", p_u, "trial family:params")->required();
    c_pw->add_option("--h", p_h, "interior spacing");
    c_pw->add_option("--mdirs", p_mdirs, "angular directions");
    c_pw->add_option("--eval-spacing", p_eval, "evaluation lattice spacing");
    c_pw->add_option("--levels", p_levels, "mesh halvings in the refinement table")->check(CLI::Range(1, 4));

    // check-inequality
    auto*       c_ineq = app.add_subcommand("check-inequality", "evaluate a trace inequality or a corpus");
    std::string i_spec, i_domain, i_u, i_corpus, i_out, i_csv, i_plot;
    std::uint64_t i_seed = 7;
    bool        i_timings = false;
    auto*       o_seed = c_ineq->add_option("--seed", i_seed, "corpus seed");
    c_ineq->add_option("--spec", i_spec, "spec file or inline key=value;... text");
    c_ineq->add_option("--domain", i_domain, "domain");
    c_ineq->add_option("--u", i_u, "trial family:params");
    c_ineq->add_option("--corpus", i_corpus, "default | corpus file");
    c_ineq->add_option("--out", i_out, "report JSON (default stdout)");
    c_ineq->add_option("--csv", i_csv, "report CSV");
    c_ineq->add_option("--emit-plot", i_plot, "plot-ready ratio CSV");
    c_ineq->add_flag("--timings", i_timings, "include wall times in the JSON");

    // sharp-const
    auto*  c_sharp = app.add_subcommand("sharp-const", "isoperimetric equality case on a discretised ball");
    int    s_n = 2, s_mesh = 512;
    double s_R = 1.0, s_amp = 1.0;
    c_sharp->add_option("--n", s_n, "dimension (2 or 3)");
    c_sharp->add_option("--R", s_R, "radius");
    c_sharp->add_option("--mesh", s_mesh, "polygon vertices (2-D) or voxels across (3-D)");
    c_sharp->add_option("--amplitude", s_amp, "constant value of u");

    // report
    auto*       c_rep = app.add_subcommand("report", "convert a saved report JSON");
    std::string e_input, e_csv, e_plot;
    c_rep->add_option("--input", e_input, "report JSON")->required()->check(CLI::ExistingFile);
    c_rep->add_option("--csv", e_csv, "report CSV (default stdout)");
    c_rep->add_option("--emit-plot", e_plot, "plot-ready ratio CSV");

    if (argc <= 1) {
        std::cerr << usage(app);
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error_code=bad_arguments " << e.what() << "\n";
        return 1;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << usage(app);
        return 1;
    }
    CLI::App* sub = app.get_subcommands().front();
    if (dry) {
        std::cout << "command = \"" << sub->get_name() << "\"\n"
                  << "threads = " << resolve_threads(threads) << "\n"
                  << sub->config_to_str(true, false);
        return 0;
    }

    try {
        const std::string cmd = sub->get_name();
        if (cmd == "rearrange") {
            std::optional<RearrangementProfile> prof;
            if (!r_space.empty()) {
                auto space = std::make_shared<const SampledMeasureSpace>(
                    load_text<SampledMeasureSpace>(r_space, [](std::istream& in) { return parse_atom_file(in); }));
                prof = rearrange(load_text<SampledFunction>(
                    r_values, [&](std::istream& in) { return parse_values_file(in, space); }));
            } else {
                if (r_input.empty())
                    fail_validation("bad_arguments", "rearrange needs --input or --space with --values");
                std::vector<double> w, v;
                read_weighted(r_input, w, v);
                prof = rearrange(w, v);
            }
            emit(r_out, profile_csv(*prof));
        } else if (cmd == "norm") {
            const auto prof =
                load_text<RearrangementProfile>(n_profile, [](std::istream& in) { return parse_profile_csv(in); });
            const NormSpec spec = with_mass(parse_norm_spec(n_spec), n_mass > 0.0 ? n_mass : prof.domain_length());
            std::cout << detail::fmt_num(norm_eval(spec, prof)) << "\n";
        } else if (cmd == "hardy") {
            HardyJob job;
            if (!h_problem.empty()) {
                job = load_hardy_problem(h_problem);
            } else {
                if (h_template.empty())
                    fail_validation("bad_arguments", "hardy needs --problem or --template");
                ParamMap P;
                for (const auto& kv : h_params) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos)
                        fail_validation("bad_arguments", "--param expects key=value");
                    P[kv.substr(0, eq)] = detail::parse_num(kv.substr(eq + 1));
                }
                std::optional<NormSpec> X, Y;
                if (!h_src.empty())
                    X = parse_norm_spec(h_src);
                if (!h_tgt.empty())
                    Y = parse_norm_spec(h_tgt);
                job.problem = make_template(h_template, P, X, Y);
                job.levels  = h_levels;
                job.base_grid = h_grid;
                job.search.restarts = h_restarts;
                job.search.seed     = h_seed;
            }
            job.search.threads = threads;
            ojson j;
            j["problem"] = job.problem.name;
            if (job.levels < 3) {
                const auto bc = best_constant_lower(job.problem, job.base_grid, job.search);
                j["grid"]     = bc.grid;
                j["estimate"] = bc.estimate;
            } else {
                const auto st     = refine_study(job.problem, job.levels, job.base_grid, job.search);
                j["grids"]        = st.grids;
                j["estimates"]    = st.estimates;
                j["ratios"]       = st.ratios;
                j["classification"] = to_string(st.classification);
            }
            std::cout << dump(j);
        } else if (cmd == "raycast") {
            const Domain dom = load_domain(y_domain);
            std::visit(
                [&](const auto& d) {
                    constexpr std::size_t N = std::decay_t<decltype(d)>::dim;
                    const auto            r = d.ray_first_hit(point<N>(y_from, "--from"), point<N>(y_dir, "--dir"));
                    ojson                 j{{"hit", r.hit}};
                    if (r.hit) {
                        j["point"] = to_json(r.point);
                        j["t"]     = r.t;
                        j["patch"] = r.patch;
                    }
                    std::cout << dump(j);
                },
                dom);
        } else if (cmd == "hajlasz") {
            const auto tf  = load_trace_csv(j_trace);
            const auto obj = parse_objective(j_obj);
            auto       run = [&](const auto& tr) {
                const LpBudget budget{j_points, threads};
                const auto     g = minimal_upper_gradient(tr, obj, budget);
                ojson          j{{"objective", j_obj == "int" ? "integral" : j_obj},
                                 {"value", g.objective},
                                 {"gap", g.gap},
                                 {"min_slack", g.min_slack},
                                 {"pivots", g.pivots},
                                 {"samples", tr.size()}};
                if (!j_norm.empty()) {
                    const NormSpec spec = with_mass(parse_norm_spec(j_norm), pairwise_sum(tr.weights));
                    const auto     s    = seminorm(tr, spec, budget);
                    j["seminorm"]       = {{"norm", to_string(spec)},
                                           {"value", s.value},
                                           {"objective", s.used == GradientObjective::sup ? "sup" : "integral"}};
                }
                std::ostringstream o;
                o << (tr.points.front().size() == 2 ? "x,y,g\n" : "x,y,z,g\n");
                for (std::size_t i = 0; i < tr.size(); ++i) {
                    for (double c : tr.points[i])
                        o << detail::fmt_num(c) << ',';
                    o << detail::fmt_num(g.g[i]) << '\n';
                }
                if (j_out.empty())
                    j["g"] = g.g;
                else
                    write_file(j_out, o.str());
                std::cout << dump(j);
            };
            if (tf.dim == 2)
                run(tf.t2);
            else
                run(tf.t3);
        } else if (cmd == "check-pointwise") {
            const auto   order = parse_order(p_order);
            const Domain dom   = load_domain(p_domain);
            std::visit(
                [&](const auto& d) {
                    constexpr std::size_t N = std::decay_t<decltype(d)>::dim;
                    const Trial<N>        u = parse_trial<N>(p_u);
                    PointwiseOptions      o;
                    o.h            = p_h > 0.0 ? p_h : d.diameter() / (N == 2 ? 64.0 : 16.0);
                    o.mdirs        = p_mdirs;
                    o.eval_spacing = p_eval;
                    o.threads      = threads;
                    ojson table    = ojson::array();
                    double c0 = 0.0, last = 0.0;
                    for (int l = 0; l < p_levels; ++l) {
                        const auto r = check_pointwise(order, u, d, o);
                        if (l == 0)
                            c0 = r.c_emp;
                        last = r.c_emp;
                        table.push_back({{"h", r.h},
                                         {"C_emp", r.c_emp},
                                         {"evaluated", r.evaluated},
                                         {"degenerate", r.degenerate},
                                         {"violations", r.violations},
                                         {"argmax", to_json(r.argmax)}});
                        o.h *= 0.5;
                    }
                    ojson j{{"order", to_string(order)}, {"domain", p_domain}, {"u", p_u}, {"C_emp", c0}};
                    j["drift"]      = c0 > 0.0 ? std::abs(last - c0) / c0 : 0.0;
                    j["refinement"] = std::move(table);
                    std::cout << dump(j);
                },
                dom);
        } else if (cmd == "check-inequality") {
            std::vector<ExperimentReport> reports;
            std::string                   json;
            if (!i_corpus.empty()) {
                CorpusConfig cfg = i_corpus == "default" ? CorpusConfig{} : parse_corpus_config(read_file(i_corpus));
                if (*o_seed)
                    cfg.seed = i_seed;
                if (!i_spec.empty())
                    cfg.specs = {parse_inequality_spec(spec_text(i_spec))};
                if (!i_domain.empty())
                    cfg.domains = {i_domain};
                cfg.threads = threads;
                const auto res = corpus_run(cfg);
                json           = corpus_json(res, i_timings);
                for (const auto& c : res.cases)
                    if (c.report)
                        reports.push_back(*c.report);
            } else {
                if (i_spec.empty() || i_domain.empty() || i_u.empty())
                    fail_validation("bad_arguments", "check-inequality needs --spec, --domain and --u, or --corpus");
                InequalitySpec spec = parse_inequality_spec(spec_text(i_spec));
                spec.mesh.threads   = threads;
                const Domain dom    = load_domain(i_domain);
                std::visit(
                    [&](const auto& d) {
                        constexpr std::size_t N = std::decay_t<decltype(d)>::dim;
                        auto                  r = evaluate_inequality(spec, parse_trial<N>(i_u), d, domain_label(i_domain));
                        r.case_id               = domain_label(i_domain) + "/" + i_u + "/" + spec.theorem;
                        r.trial                 = i_u;
                        reports.push_back(r);
                    },
                    dom);
                json = dump(to_json(reports.front(), i_timings));
            }
            emit(i_out, json);
            if (!i_csv.empty())
                write_file(i_csv, report_csv(reports));
            if (!i_plot.empty())
                write_file(i_plot, ratio_plot_csv(reports));
        } else if (cmd == "sharp-const") {
            const auto s = sharp_constant_check(s_n, s_R, s_mesh, s_amp);
            ojson      j{{"n", s.n},
                         {"R", s.R},
                         {"mesh", s.mesh},
                         {"constant", s.constant},
                         {"volume", s.volume},
                         {"surface", s.surface},
                         {"lhs", s.lhs},
                         {"gradient", s.gradient},
                         {"boundary", s.boundary},
                         {"ratio", s.ratio},
                         {"exact_ratio", s.exact_ratio},
                         {"degenerate", s.degenerate}};
            std::cout << dump(j);
        } else if (cmd == "report") {
            ojson j;
            try {
                j = ojson::parse(read_file(e_input));
            } catch (const nlohmann::json::exception& e) {
                fail_validation("bad_report", e.what());
            }
            const ojson cases = j.contains("cases") ? j["cases"] : ojson::array({j});
            std::vector<ExperimentReport> reports;
            for (const auto& c : cases) {
                if (!c.contains("lhs"))
                    continue;
                ExperimentReport r;
                r.case_id = c.value("case", "");
                r.theorem = c.value("theorem", "");
                r.domain  = c.value("domain", "");
                r.trial   = c.value("trial", "");
                r.lhs     = c["lhs"]["value"].get<double>();
                r.h       = c["mesh"]["h"].get<double>();
                r.ratio   = c["ratio"].is_string() ? inf : c["ratio"].get<double>();
                for (const auto& t : c["terms"]) {
                    TermValue tv;
                    tv.value      = t["value"].get<double>();
                    tv.coef.value = t["coef"].get<double>();
                    r.terms.push_back(tv);
                }
                reports.push_back(std::move(r));
            }
            emit(e_csv, report_csv(reports));
            if (!e_plot.empty())
                write_file(e_plot, ratio_plot_csv(reports));
        }
    } catch (const Error& e) {
        std::cerr << "error_code=" << e.code() << " " << e.what() << "\n";
        return e.kind() == ErrorKind::validation ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error_code=internal " << e.what() << "\n";
        return 2;
    }
    return 0;
}
