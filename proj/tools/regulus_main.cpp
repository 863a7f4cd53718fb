// command-line front end: surface catalogue, single computations, and full
// verification runs with report emission.  exit codes: 0 success, 1 persistent
// check failures, 2 usage or input errors (usage text goes to stderr).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regulus/regulus.hpp"

namespace {

using namespace regulus;

// fixed 6-decimal text formatting; snprintf in the untouched C locale always
// uses '.' as the radix
std::string fnum(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

Point2 parse_point(const std::string& s) {
    const std::size_t comma = s.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= s.size())
        throw parameter_error("expected a point as 'x,y', got '" + s + "'");
    const auto num = [&s](std::size_t begin, std::size_t end) {
        const std::string part = s.substr(begin, end - begin);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            throw parameter_error("bad coordinate '" + part + "'");
        }
        if (used != part.size()) throw parameter_error("bad coordinate '" + part + "'");
        return v;
    };
    return {num(0, comma), num(comma + 1, s.size())};
}

struct Options {
    std::string surface;
    std::vector<double> params;
    double R = 1.0;
    double k = 1.0;
    double a = 0.005;
    double w = 1.0;
    double alpha = 0.5;
    std::string p0 = "0,0";
    std::string at = "0,0";
    std::string from = "0,0";
    std::string to;
    double delta = 0.0;
    std::size_t rays = 64;
    std::size_t radial = 64;
    std::size_t grid_n = 200;
    double tol = 1e-3;
    double cap = 50.0;
    double bound = 1.0;
    std::uint64_t seed = kDefaultSeed;
    std::string kind = "curvature";
    std::string suite = "all";
    std::string out;
    std::string format;
    std::string in_path;
};

void validate_common(const Options& o) {
    if (!(o.alpha > 0.0) || !(o.alpha <= 1.0)) throw parameter_error("alpha must lie in (0, 1]");
    if (o.rays < 8 || o.radial < 8 || o.grid_n < 8)
        throw parameter_error("sampling counts must be at least 8");
    if (!(o.tol > 0.0) || !(o.tol < 0.1)) throw parameter_error("tol must lie in (0, 0.1)");
}

std::vector<double> surface_params(const Options& o, const CLI::App* sub) {
    if (sub->count("--param")) return o.params;
    if (o.surface == "sphere") return {o.R};
    if (o.surface == "hyperbolic") return {o.k};
    if (o.surface == "perturbed-flat") return {o.a, o.w};
    return {};
}

MetricChart make_chart(const Options& o, const CLI::App* sub) {
    if (o.surface.empty()) throw parameter_error("--surface is required for this command");
    return builtin_surface(o.surface, surface_params(o, sub));
}

RegularityQuery make_query(const Options& o, const CLI::App* sub) {
    RegularityQuery q;
    q.chart = make_chart(o, sub);
    q.p0 = parse_point(o.p0);
    q.alpha = o.alpha;
    q.n_rays = o.rays;
    q.n_radial = o.radial;
    q.tol = o.tol;
    q.cap = o.cap;
    q.seed = o.seed;
    return q;
}

// ---- report rendering ----------------------------------------------------------

std::string render_text(const RegularityReport& rep) {
    std::ostringstream os;
    const HarnessConfig& c = rep.environment.config;
    os << "verification report " << rep.environment.version << "\n";
    os << "alpha=" << fnum(rep.environment.alpha) << "  rays=" << c.n_rays
       << "  radial=" << c.n_radial << "  seed=" << c.seed << "  base-delta=" << fnum(c.base_delta)
       << "\n\n";
    std::size_t passed = 0, failed = 0, skipped = 0;
    for (const CheckCase& k : rep.cases) {
        const char* verdict = k.skipped ? "skip" : (k.pass ? "pass" : "FAIL");
        if (k.skipped) ++skipped;
        else if (k.pass) ++passed;
        else ++failed;
        char head[160];
        std::snprintf(head, sizeof head, "[%s] %-22s %-28s delta=%s res=%d", verdict,
                      k.check_id.c_str(), k.surface.c_str(), fnum(k.delta).c_str(), k.resolution);
        os << head << "\n";
        if (!k.measured.empty() || !k.bound.empty()) {
            os << "       measured:";
            for (const double m : k.measured) os << " " << fnum(m);
            os << " | bound:";
            for (const double b : k.bound) os << " " << fnum(b);
            os << "\n";
        }
        if (!k.note.empty()) os << "       note: " << k.note << "\n";
    }
    if (!rep.ratios.empty()) {
        os << "\nradius ratios:\n";
        for (const SurfaceRatios& r : rep.ratios) {
            const auto cappedstr = [](const Capped& v) {
                return fnum(v.value) + (v.capped ? " (capped)" : "");
            };
            const auto ratiostr = [](const RatioValue& v) -> std::string {
                if (v.kind == RatioKind::finite) return fnum(v.value);
                return ratio_kind_name(v.kind);
            };
            os << "  " << r.surface << ": rho-int=" << cappedstr(r.intrinsic)
               << " rho-ext=" << cappedstr(r.extrinsic);
            if (!r.winner.empty()) os << " (" << r.winner << " chart)";
            os << " int/ext=" << ratiostr(r.int_over_ext) << " ext/int=" << ratiostr(r.ext_over_int)
               << "\n";
        }
        os << "minimum finite ratio: "
           << (rep.min_ratio_defined ? fnum(rep.min_ratio) : std::string("undefined")) << "\n";
    }
    if (!rep.notes.empty()) {
        os << "\nnotes:\n";
        for (const std::string& n : rep.notes) os << "  - " << n << "\n";
    }
    os << "\nsummary: " << rep.cases.size() << " cases, " << passed << " passed, " << failed
       << " failed, " << skipped << " skipped\n";
    return os.str();
}

std::string serialize_report(const RegularityReport& rep, const std::string& format) {
    if (format == "json") return report_json(rep).dump(2) + "\n";
    if (format == "csv") return report_csv(rep);
    if (format == "text") return render_text(rep);
    throw parameter_error("unknown format '" + format + "' (expected json, csv, or text)");
}

std::string format_for(const Options& o) {
    if (!o.format.empty()) return o.format;
    if (o.out.size() >= 5 && o.out.rfind(".json") == o.out.size() - 5) return "json";
    if (o.out.size() >= 4 && o.out.rfind(".csv") == o.out.size() - 4) return "csv";
    return "text";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw parameter_error("cannot open output path: " + path);
    f << content;
    if (!f) throw parameter_error("failed writing output path: " + path);
}

// ---- command handlers ------------------------------------------------------------

int cmd_surfaces() {
    std::printf("%-16s %-32s %s\n", "name", "parameters", "description");
    std::printf("%-16s %-32s %s\n", "flat", "none", "Euclidean plane");
    std::printf("%-16s %-32s %s\n", "sphere", "R > 0 (default 1)",
                "round sphere of radius R, stereographic chart");
    std::printf("%-16s %-32s %s\n", "hyperbolic", "k > 0 (default 1)",
                "constant curvature -k, Poincare disc chart");
    std::printf("%-16s %-32s %s\n", "polar-flat", "none",
                "flat metric in polar-style coordinates");
    std::printf("%-16s %-32s %s\n", "perturbed-flat", "a >= 0, w > 0 (default 0.005 1)",
                "flat metric with one compact bump on g11");
    return 0;
}

int cmd_curvature(const Options& o, const CLI::App* sub) {
    validate_common(o);
    const MetricChart chart = make_chart(o, sub);
    const Point2 p = parse_point(o.at);
    const double K = gauss_curvature(chart, p);
    if (format_for(o) == "json") {
        nlohmann::ordered_json j{{"surface", chart.label}, {"at", {p.x1, p.x2}}, {"curvature", K}};
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s\n", fnum(K).c_str());
    }
    return 0;
}

int cmd_norm(const Options& o, const CLI::App* sub) {
    validate_common(o);
    if (!sub->count("--delta")) throw parameter_error("norm needs --delta");
    if (!(o.delta > 0.0)) throw parameter_error("--delta must be positive");
    const MetricChart chart = make_chart(o, sub);
    const Point2 p0 = parse_point(o.p0);

    double value = 0.0;
    if (o.kind == "curvature") {
        const GeodesicBall ball = geodesic_ball(chart, p0, o.delta, o.rays, o.radial);
        const std::vector<double> K = curvature_values(chart, ball.points);
        value = curvature_norm(ball.points, K, o.delta, o.alpha, ball_pair_distance(ball), o.seed)
                    .value;
    } else if (o.kind == "native-deviation" || o.kind == "isothermal-deviation") {
        const bool iso = o.kind == "isothermal-deviation";
        value = chart_certificate(chart, p0, o.delta, o.alpha, iso, o.rays, o.radial, 1.0, o.seed)
                    .max_norm();
    } else {
        throw parameter_error(
            "unknown norm kind '" + o.kind +
            "' (expected curvature, native-deviation, or isothermal-deviation)");
    }
    if (format_for(o) == "json") {
        nlohmann::ordered_json j{{"surface", chart.label},
                                 {"kind", o.kind},
                                 {"delta", o.delta},
                                 {"alpha", o.alpha},
                                 {"value", value}};
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s\n", fnum(value).c_str());
    }
    return 0;
}

int cmd_distance(const Options& o, const CLI::App* sub) {
    validate_common(o);
    const MetricChart chart = make_chart(o, sub);
    const double d = chart.pair_distance(parse_point(o.from), parse_point(o.to));
    if (format_for(o) == "json") {
        nlohmann::ordered_json j{{"surface", chart.label}, {"distance", d}};
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s\n", fnum(d).c_str());
    }
    return 0;
}

int cmd_rho_int(const Options& o, const CLI::App* sub) {
    validate_common(o);
    const Capped r = rho_int(make_query(o, sub));
    if (format_for(o) == "json") {
        nlohmann::ordered_json j{{"rho_int", {{"value", r.value}, {"capped", r.capped}}},
                                 {"method", "bisection, predicate monotone-checked"}};
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s  (%sbisection, predicate monotone-checked)\n", fnum(r.value).c_str(),
                    r.capped ? "capped at search limit; " : "");
    }
    return 0;
}

int cmd_rho_ext(const Options& o, const CLI::App* sub) {
    validate_common(o);
    const ExtCertification ext = certify_rho_ext(make_query(o, sub), o.bound);
    if (format_for(o) == "json") {
        nlohmann::ordered_json cands = nlohmann::ordered_json::array();
        for (const CandidateResult& c : ext.candidates) {
            nlohmann::ordered_json cj{{"construction", c.construction},
                                      {"supported", c.supported},
                                      {"value", c.value.value},
                                      {"capped", c.value.capped},
                                      {"note", c.note}};
            if (c.certificate) {
                cj["certificate"] = {{"max_norm", c.certificate->max_norm()},
                                     {"diam", c.certificate->diam},
                                     {"n_points", c.certificate->n_points}};
            }
            cands.push_back(cj);
        }
        nlohmann::ordered_json j{
            {"rho_ext", {{"value", ext.value.value}, {"capped", ext.value.capped}}},
            {"bound", o.bound},
            {"winner", ext.winner},
            {"candidates", cands}};
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s  (%scertified via %s chart, deviation bound %s)\n",
                    fnum(ext.value.value).c_str(), ext.value.capped ? "capped at search limit; " : "",
                    ext.winner.empty() ? "no" : ext.winner.c_str(), fnum(o.bound).c_str());
        for (const CandidateResult& c : ext.candidates) {
            std::printf("  %-12s %s%s%s\n", c.construction.c_str(),
                        c.supported ? fnum(c.value.value).c_str() : "unsupported",
                        c.value.capped ? " (capped)" : "", c.note.empty() ? "" : (" - " + c.note).c_str());
        }
    }
    return 0;
}

int cmd_verify(const Options& o, const CLI::App* sub) {
    validate_common(o);
    HarnessConfig hc;
    if (sub->count("--rays")) hc.n_rays = o.rays;
    if (sub->count("--radial")) hc.n_radial = o.radial;
    if (sub->count("--grid-n")) hc.grid_n = o.grid_n;
    hc.tol = o.tol;
    hc.cap = o.cap;
    hc.seed = o.seed;
    if (sub->count("--delta")) {
        if (!(o.delta > 0.0)) throw parameter_error("--delta must be positive");
        hc.base_delta = o.delta;
    }

    std::vector<CorpusEntry> corpus;
    if (sub->count("--surface")) corpus.push_back({make_chart(o, sub), parse_point(o.p0)});
    else corpus = default_corpus();

    RegularityReport rep;
    if (o.suite == "all") rep = run_all_checks(corpus, o.alpha, hc);
    else if (o.suite == "ratios" || o.suite == "thm-ratios")
        rep = verify_theorem_ratios(corpus, o.alpha, hc);
    else rep = run_all_checks(corpus, o.alpha, hc, o.suite);

    std::size_t failed = 0, skipped = 0;
    for (const CheckCase& k : rep.cases) {
        if (k.skipped) ++skipped;
        else if (!k.pass) ++failed;
    }

    if (!o.out.empty()) {
        write_file(o.out, serialize_report(rep, format_for(o)));
        for (const CheckCase& k : rep.cases) {
            if (!k.pass && !k.skipped)
                std::printf("FAIL %s on %s (delta=%s)\n", k.check_id.c_str(), k.surface.c_str(),
                            fnum(k.delta).c_str());
        }
        std::printf("%zu cases: %zu passed, %zu failed, %zu skipped\n", rep.cases.size(),
                    rep.cases.size() - failed - skipped, failed, skipped);
        std::printf("report written to %s\n", o.out.c_str());
    } else {
        std::fputs(serialize_report(rep, format_for(o)).c_str(), stdout);
    }
    return failed > 0 ? 1 : 0;
}

int cmd_report(const Options& o) {
    std::ifstream f(o.in_path, std::ios::binary);
    if (!f) throw parameter_error("cannot open report file: " + o.in_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("report file is not valid JSON: ") + e.what());
    }
    const RegularityReport rep = report_from_json(j);
    const std::string body = serialize_report(rep, o.format.empty() ? "text" : o.format);
    if (!o.out.empty()) write_file(o.out, body);
    else std::fputs(body.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regularity radii of 2-d riemannian metrics: chart certificates, intrinsic and "
                 "extrinsic radius searches, and a quantitative verification suite"};
    app.require_subcommand(1);

    Options o;
    int rc = 0;

    const auto add_surface = [&o](CLI::App* sub) {
        sub->add_option("--surface,-s", o.surface, "builtin surface name (see `surfaces`)");
        sub->add_option("--param", o.params,
                        "surface parameters in catalogue order (overrides named parameter flags)");
        sub->add_option("--R", o.R, "sphere radius");
        sub->add_option("--k", o.k, "hyperbolic curvature magnitude");
        sub->add_option("--a", o.a, "perturbed-flat bump amplitude");
        sub->add_option("--w", o.w, "perturbed-flat bump width");
    };
    const auto add_alpha = [&o](CLI::App* sub) {
        sub->add_option("--alpha", o.alpha, "Holder exponent")->capture_default_str();
    };
    const auto add_sampling = [&o](CLI::App* sub) {
        sub->add_option("--rays", o.rays, "geodesic rays per ball")->capture_default_str();
        sub->add_option("--radial", o.radial, "radial samples per ray")->capture_default_str();
        sub->add_option("--grid-n", o.grid_n, "residual lattice resolution")->capture_default_str();
        sub->add_option("--tol", o.tol, "relative search tolerance")->capture_default_str();
        sub->add_option("--cap", o.cap, "radius search ceiling")->capture_default_str();
        sub->add_option("--seed", o.seed, "seed for all randomized subsampling")
            ->capture_default_str();
    };
    const auto add_format = [&o](CLI::App* sub) {
        sub->add_option("--format", o.format, "output format")
            ->check(CLI::IsMember({"json", "csv", "text"}));
    };

    app.add_subcommand("surfaces", "list the builtin surface catalogue");

    CLI::App* sc_curv = app.add_subcommand("curvature", "Gauss curvature at a point");
    add_surface(sc_curv);
    sc_curv->add_option("--at", o.at, "evaluation point as x,y")->capture_default_str();
    add_format(sc_curv);

    CLI::App* sc_norm = app.add_subcommand(
        "norm", "scaled Holder norm of curvature or of a chart deviation on a geodesic ball");
    add_surface(sc_norm);
    sc_norm->add_option("--kind", o.kind,
                        "curvature | native-deviation | isothermal-deviation")
        ->capture_default_str();
    sc_norm->add_option("--delta", o.delta, "geodesic ball radius");
    sc_norm->add_option("--p0", o.p0, "ball center as x,y")->capture_default_str();
    add_alpha(sc_norm);
    add_sampling(sc_norm);
    add_format(sc_norm);

    CLI::App* sc_dist = app.add_subcommand("distance", "Riemannian distance between two points");
    add_surface(sc_dist);
    sc_dist->add_option("--from", o.from, "start point as x,y")->capture_default_str();
    sc_dist->add_option("--to", o.to, "end point as x,y")->required();
    add_format(sc_dist);

    CLI::App* sc_rint = app.add_subcommand("rho-int", "intrinsic regularity radius");
    add_surface(sc_rint);
    sc_rint->add_option("--p0", o.p0, "base point as x,y")->capture_default_str();
    add_alpha(sc_rint);
    add_sampling(sc_rint);
    add_format(sc_rint);

    CLI::App* sc_rext = app.add_subcommand("rho-ext", "certified extrinsic regularity radius");
    add_surface(sc_rext);
    sc_rext->add_option("--p0", o.p0, "base point as x,y")->capture_default_str();
    sc_rext->add_option("--bound", o.bound, "chart deviation bound")->capture_default_str();
    add_alpha(sc_rext);
    add_sampling(sc_rext);
    add_format(sc_rext);

    CLI::App* sc_verify = app.add_subcommand(
        "verify", "run the verification suite and emit a report");
    add_surface(sc_verify);
    sc_verify->add_option("--suite", o.suite, "all | ratios | one check id")
        ->capture_default_str();
    sc_verify->add_option("--p0", o.p0, "base point as x,y")->capture_default_str();
    sc_verify->add_option("--delta", o.delta, "base radius for fixed-radius checks");
    add_alpha(sc_verify);
    add_sampling(sc_verify);
    sc_verify->add_option("--out", o.out, "report output path");
    add_format(sc_verify);

    CLI::App* sc_report = app.add_subcommand("report", "re-render a stored JSON report");
    sc_report->add_option("--in", o.in_path, "stored JSON report")->required();
    sc_report->add_option("--out", o.out, "output path (default: stdout)");
    add_format(sc_report);

    try {
        app.parse(argc, argv);

        if (app.got_subcommand("surfaces")) rc = cmd_surfaces();
        else if (app.got_subcommand(sc_curv)) rc = cmd_curvature(o, sc_curv);
        else if (app.got_subcommand(sc_norm)) rc = cmd_norm(o, sc_norm);
        else if (app.got_subcommand(sc_dist)) rc = cmd_distance(o, sc_dist);
        else if (app.got_subcommand(sc_rint)) rc = cmd_rho_int(o, sc_rint);
        else if (app.got_subcommand(sc_rext)) rc = cmd_rho_ext(o, sc_rext);
        else if (app.got_subcommand(sc_verify)) rc = cmd_verify(o, sc_verify);
        else if (app.got_subcommand(sc_report)) rc = cmd_report(o);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help family
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    return rc;
}
