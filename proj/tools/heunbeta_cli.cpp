// Command-line surface: build series, evaluate solutions on grids, search
// termination loci, and verify solutions against the Runge-Kutta oracle.
//
// Exit codes: 0 success, 2 constraint/domain/parse problem, 3 no termination
// within --n-max, 4 oracle failure. Output is deterministic: fixed formatting
// with 17 significant digits and sorted root ordering.

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "heunbeta/heunbeta.hpp"

namespace {

using namespace heunbeta;

constexpr int kExitOk = 0;
constexpr int kExitConstraint = 2;
constexpr int kExitNoTermination = 3;
constexpr int kExitOracle = 4;

struct CommonOpts {
    std::string params_path;
    std::string family_flag;
    int max_terms = 200;
    double tail_tol = 1e-12;
};

ParamsFileData load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open parameter file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_params_text(buf.str());
}

Family resolve_family(const CommonOpts& opts, const ParamsFileData& file) {
    if (!opts.family_flag.empty()) {
        const auto f = parse_family(opts.family_flag);
        if (!f) throw ParseError("unknown family '" + opts.family_flag + "'");
        return *f;
    }
    if (file.family) return *file.family;
    throw ParseError("family required (set \"family\" in the parameter file or pass --family)");
}

void print_params_header(std::ostream& os, const CheParams& P) {
    os << "# p: " << format_complex(P.p) << "  alpha: " << format_complex(P.alpha)
       << "  gamma: " << format_complex(P.gamma) << "  delta: " << format_complex(P.delta)
       << "  sigma: " << format_complex(P.sigma) << "\n";
}

BetaSeries build_from(const ParamsFileData& file, Family family, const CommonOpts& opts) {
    const int max_terms = file.max_terms.value_or(opts.max_terms);
    const double tail_tol = file.tail_tol.value_or(opts.tail_tol);
    return build_series(family, file.params, file.delta0, max_terms, tail_tol);
}

int cmd_series(const CommonOpts& opts) {
    const ParamsFileData file = load_params(opts.params_path);
    const Family family = resolve_family(opts, file);
    const BetaSeries s = build_from(file, family, opts);

    std::cout << "# heunbeta series report\n";
    std::cout << "# family: " << family_name(family) << "\n";
    print_params_header(std::cout, s.params);
    std::cout << "# max_terms: " << file.max_terms.value_or(opts.max_terms)
              << "  tail_tol: " << format_g17(file.tail_tol.value_or(opts.tail_tol))
              << "  eq_tol: " << format_g17(kEqTol) << "\n";
    std::cout << "mode: " << (s.mode == TermMode::Single ? "single" : "difference") << "\n";
    std::cout << "gamma0: " << format_complex(s.gamma0) << "\n";
    std::cout << "delta0: " << format_complex(s.delta0) << "\n";
    std::cout << "s: " << format_complex(s.s) << "\n";
    std::cout << "terminated: " << (s.terminated ? "true" : "false") << "\n";
    if (s.terminated) std::cout << "N: " << s.coeffs.size() - 1 << "\n";
    std::cout << "coefficients: " << s.coeffs.size() << "\n";
    const std::size_t shown = std::min<std::size_t>(s.coeffs.size(), 50);
    for (std::size_t i = 0; i < shown; ++i)
        std::cout << "a[" << i << "] = " << format_complex(s.coeffs[i]) << "\n";
    if (shown < s.coeffs.size())
        std::cout << "... (" << s.coeffs.size() - shown << " more coefficients)\n";
    if (!s.terminated && s.coeffs.size() >= 50) {
        const auto d = convergence_diagnostics(s, Complex(0.5));
        std::cout << "coeff_ratio_tail_end: " << format_complex(d.coeff_ratio_tail.back()) << "\n";
        std::cout << "term_ratio_tail_end(z=0.5): " << format_g17(d.term_ratio_tail.back()) << "\n";
        std::cout << "estimated_limit: " << format_g17(d.estimated_limit) << "\n";
    }
    return kExitOk;
}

struct GridSpec {
    double lo = 0.05, hi = 0.95;
    int n = 33;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ParseError("grid must be lo:hi:count");
    try {
        g.lo = std::stod(text.substr(0, c1));
        g.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        g.n = std::stoi(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ParseError("grid must be lo:hi:count");
    }
    if (!(g.n >= 2) || !(g.lo <= g.hi) || g.lo < 0.0 || g.hi > 1.0)
        throw ParseError("grid must satisfy 0 <= lo <= hi <= 1 and count >= 2");
    return g;
}

int cmd_eval(const CommonOpts& opts, const std::string& grid_text, const std::string& format,
             const std::string& out_path) {
    if (format != "csv" && format != "json") throw ParseError("format must be csv or json");
    const ParamsFileData file = load_params(opts.params_path);
    const Family family = resolve_family(opts, file);
    const BetaSeries s = build_from(file, family, opts);
    const GridSpec grid = parse_grid(grid_text);

    std::vector<EvalRow> rows(grid.n);
    std::vector<std::optional<SolutionJet>> jets(grid.n);
    double scale = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.lo + (grid.hi - grid.lo) * double(i) / double(grid.n - 1);
        const Complex z(x, 0.0);
        rows[i].z = z;
        if (x <= 0.0) {
            rows[i].u = 0.0;
        } else if (x >= 1.0) {
            rows[i].u = evaluate(s, z).u;
        } else {
            const SeriesJet jet = evaluate_with_derivatives(s, z);
            rows[i].u = jet.u;
            jets[i] = jet.jet();
            scale = std::max({scale, std::abs(jet.u), std::abs(jet.du), std::abs(jet.d2u)});
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < grid.n; ++i) {
        if (jets[i]) {
            rows[i].residual_abs = std::abs(che_residual(s.params, *jets[i], rows[i].z));
            rows[i].residual_rel = scale > 0.0 ? rows[i].residual_abs / scale : rows[i].residual_abs;
        } else {
            rows[i].residual_abs = nan; // equation residual undefined at z = 0, 1
            rows[i].residual_rel = nan;
        }
    }

    std::ofstream file_out;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file_out.open(out_path, std::ios::binary);
        if (!file_out) throw ParseError("cannot open output file '" + out_path + "'");
        os = &file_out;
    }
    if (format == "csv")
        write_eval_csv(*os, rows);
    else
        write_eval_json(*os, rows);
    return kExitOk;
}

void print_closed_form(std::ostream& os, const FiniteBetaSum& sum, const std::string& indent) {
    for (std::size_t i = 0; i < sum.series.coeffs.size(); ++i)
        os << indent << "a[" << i << "] = " << format_complex(sum.series.coeffs[i]) << "\n";
    const ElementarySolution el = reduce_to_elementary(sum);
    os << indent << "elementary A = " << format_complex(el.A_const) << "\n";
    if (el.phi.is_zero()) {
        os << indent << "elementary phi = 0\n";
    } else {
        for (std::size_t i = 0; i < el.phi.coeffs().size(); ++i)
            os << indent << "elementary phi[" << i << "] = " << format_complex(el.phi.coeffs()[i]) << "\n";
    }
}

int cmd_terminate(const CommonOpts& opts, int n_max) {
    const ParamsFileData file = load_params(opts.params_path);
    const Family family = resolve_family(opts, file);
    const CheParams& P = file.params;
    P.validate();

    std::cout << "# heunbeta terminate report\n";
    std::cout << "# family: " << family_name(family) << "  n-max: " << n_max
              << "  eq_tol: " << format_g17(kEqTol) << "\n";
    print_params_header(std::cout, P);

    if (family == Family::E) {
        std::cerr << "family E series do not terminate; sigma is pinned by the pretransform quadratic\n";
        return kExitNoTermination;
    }

    if (family == Family::D) {
        const auto [defect, relation] = family_constraint_defect(Family::D, P);
        if (defect > kEqTol) throw ConstraintViolation(std::string("family D: ") + relation);
        std::cout << "relation: delta0 = gamma - 2 - N\n";
        bool any = false;
        const int n_lo = file.N.value_or(0);
        const int n_hi = file.N.value_or(std::min(n_max, 1));
        for (int N = n_lo; N <= n_hi; ++N) {
            const auto sols = solve_family_d(P, N);
            std::cout << "solutions (N=" << N << "): " << sols.size() << "\n";
            for (const auto& ds : sols) {
                any = true;
                std::cout << "delta = " << format_complex(ds.delta)
                          << "  sigma = " << format_complex(ds.sigma);
                CheParams q = P;
                q.delta = ds.delta;
                q.sigma = ds.sigma;
                if (const auto tc = detect_termination(q, Family::A, N + 2))
                    std::cout << "  family A termination: N' = " << tc->N;
                std::cout << "\n";
                print_closed_form(std::cout, closed_form_solution(q, Family::D, N), "  ");
            }
        }
        if (n_max > 1) std::cout << "note: family D search is limited to N <= 1\n";
        if (!any) {
            std::cerr << "no family D termination found\n";
            return kExitNoTermination;
        }
        return kExitOk;
    }

    const auto tc = detect_termination(P, family, n_max);
    if (!tc) {
        std::cerr << "no termination: the family " << family_name(family)
                  << " integer relation has no solution with N <= " << n_max << "\n";
        return kExitNoTermination;
    }
    std::cout << "relation: " << relation_text(tc->relation) << "\n";
    std::cout << "N: " << tc->N << "\n";

    const SigmaPolynomial sp = sigma_polynomial(P, family, tc->N);
    if (family == Family::A) {
        std::cout << "sigma_polynomial degree: " << sp.coeffs.size() - 1 << "\n";
        for (std::size_t i = 0; i < sp.coeffs.size(); ++i)
            std::cout << "c[" << i << "] = " << format_complex(sp.coeffs[i]) << "\n";
        const auto roots = poly_roots(sp.coeffs);
        std::cout << "roots: " << roots.size() << "\n";
        for (std::size_t i = 0; i < roots.size(); ++i) {
            std::cout << "root[" << i << "] = " << format_complex(roots[i]) << "\n";
            CheParams q = P;
            q.sigma = roots[i];
            print_closed_form(std::cout, closed_form_solution(q, family, tc->N), "  ");
        }
        return kExitOk;
    }

    // B and C: sigma is fixed; report the scalar condition instead.
    const Complex condition = sp.coeffs.front();
    const bool satisfied = std::abs(condition) <= 1e-10;
    std::cout << "condition value: " << format_complex(condition) << "\n";
    std::cout << "satisfied: " << (satisfied ? "true" : "false") << "\n";
    if (family == Family::B && tc->N == 0)
        std::cout << "note: N = 0 requires p = 0, a degenerate specialization of the trivial case\n";
    if (!satisfied) {
        std::cerr << "the scalar termination condition does not vanish\n";
        return kExitNoTermination;
    }
    print_closed_form(std::cout, closed_form_solution(P, family, tc->N), "  ");
    return kExitOk;
}

int cmd_verify(const CommonOpts& opts, double z0, double z1, double tol) {
    const ParamsFileData file = load_params(opts.params_path);
    const Family family = resolve_family(opts, file);
    const BetaSeries s = build_from(file, family, opts);
    if (!(z0 > 0.0 && z0 < 1.0 && z1 > 0.0 && z1 < 1.0))
        throw ParseError("verify: [z0, z1] must lie inside (0, 1)");

    std::cout << "# heunbeta verify report\n";
    std::cout << "# family: " << family_name(family) << "  z0: " << format_g17(z0)
              << "  z1: " << format_g17(z1) << "  tol: " << format_g17(tol)
              << "  max_terms: " << file.max_terms.value_or(opts.max_terms)
              << "  tail_tol: " << format_g17(file.tail_tol.value_or(opts.tail_tol)) << "\n";
    print_params_header(std::cout, s.params);

    const SeriesJet start = evaluate_with_derivatives(s, z0);
    IntegrationResult rk;
    try {
        rk = integrate_che(s.params, z0, start.u, start.du, z1, tol);
    } catch (const Error& e) {
        std::cerr << "oracle failure: " << e.what() << "\n";
        return kExitOracle;
    }
    const SeriesJet end = evaluate_with_derivatives(s, z1);
    const double dev_u = std::abs(rk.u - end.u);
    const double dev_du = std::abs(rk.du - end.du);
    const double threshold = 10.0 * tol;
    std::cout << "deviation_u: " << format_g17(dev_u) << "\n";
    std::cout << "deviation_du: " << format_g17(dev_du) << "\n";
    std::cout << "tail_bound(z1): " << format_g17(end.tail_bound) << "\n";
    std::cout << "threshold: " << format_g17(threshold) << "\n";
    const bool pass = std::max(dev_u, dev_du) <= threshold;
    std::cout << "result: " << (pass ? "pass" : "fail") << "\n";
    return pass ? kExitOk : kExitOracle;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"incomplete-Beta series solutions of the confluent Heun equation"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string grid_text = "0.05:0.95:33";
    std::string format = "csv";
    std::string out_path;
    int n_max = 10;
    double z0 = 0.1, z1 = 0.9, tol = 1e-10;

    const auto add_common = [&](CLI::App* sub, bool series_controls) {
        sub->add_option("--params", opts.params_path, "JSON parameter file")->required();
        sub->add_option("--family", opts.family_flag, "expansion family A|B|C|D|E (overrides the file)");
        if (series_controls) {
            sub->add_option("--max-terms", opts.max_terms, "maximum number of stored coefficients");
            sub->add_option("--tail-tol", opts.tail_tol, "tail bound at which generation stops");
        }
    };

    CLI::App* series = app.add_subcommand("series", "build a series and print its summary");
    add_common(series, true);

    CLI::App* eval = app.add_subcommand("eval", "evaluate a solution on a real grid");
    add_common(eval, true);
    eval->add_option("--grid", grid_text, "grid as lo:hi:count (default 0.05:0.95:33)");
    eval->add_option("--format", format, "output format: csv or json");
    eval->add_option("--out", out_path, "output file (default: stdout)");

    CLI::App* term = app.add_subcommand("terminate", "search the termination locus");
    add_common(term, false);
    term->add_option("--n-max", n_max, "largest N to consider");

    CLI::App* verify = app.add_subcommand("verify", "compare a series against the integration oracle");
    add_common(verify, true);
    verify->add_option("--z0", z0, "launch point in (0,1)");
    verify->add_option("--z1", z1, "comparison point in (0,1)");
    verify->add_option("--tol", tol, "integrator local tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConstraint;
    }

    try {
        if (series->parsed()) return cmd_series(opts);
        if (eval->parsed()) return cmd_eval(opts, grid_text, format, out_path);
        if (term->parsed()) return cmd_terminate(opts, n_max);
        if (verify->parsed()) return cmd_verify(opts, z0, z1, tol);
    } catch (const StepSizeError& e) {
        std::cerr << "oracle failure: " << e.what() << "\n";
        return kExitOracle;
    } catch (const NotTerminating& e) {
        std::cerr << e.what() << "\n";
        return kExitNoTermination;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitConstraint;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
