// command-line front end: density solves, singularity classification, flow
// tracking, kernel evaluation, Monte-Carlo verification suites
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "cusp/ensemble.hpp"
#include "cusp/flow.hpp"
#include "cusp/io.hpp"
#include "cusp/numerics.hpp"
#include "cusp/tuning.hpp"
#include "cusp/verify.hpp"

using namespace cusp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Range {
    double lo = 0, hi = 0;
    int steps = 0;
};

Range parse_range(const std::string& text, bool with_steps) {
    Range r;
    std::stringstream ss(text);
    std::string part;
    std::vector<double> vals;
    while (std::getline(ss, part, ':')) vals.push_back(std::stod(part));
    if ((with_steps && vals.size() != 3) || (!with_steps && vals.size() != 2))
        throw DomainError("range must be lo:hi" + std::string(with_steps ? ":steps" : ""));
    r.lo = vals[0];
    r.hi = vals[1];
    if (with_steps) r.steps = static_cast<int>(vals[2]);
    return r;
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

void write_manifest(const std::string& dir, const std::string& command, const json& params,
                    std::uint64_t seed) {
    if (dir.empty()) return;
    io::write_text(dir + "/manifest.json", io::manifest_json(command, params.dump(), seed));
}

EnsembleConfig load_ensemble_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config " + path);
    json doc;
    in >> doc;
    EnsembleConfig cfg;
    cfg.model = io::model_from_json_text(doc.at("model").dump());
    cfg.trials = doc.value("trials", 20);
    cfg.base_seed = doc.value("base_seed", 1ULL);
    const std::string law = doc.value("entry_law", "gaussian");
    if (law == "gaussian") cfg.entry_law = EntryLaw::Gaussian;
    else if (law == "rademacher-like") cfg.entry_law = EntryLaw::RademacherLike;
    else throw DomainError("unknown entry_law " + law);
    cfg.gue_time = doc.value("gue_time", 0.0);
    cfg.epsilon_exp = doc.value("epsilon_exp", 0.1);
    cfg.keep_vectors = doc.value("keep_vectors", false);
    return cfg;
}

json report_to_json(const SingularityReport& rep) {
    json out;
    out["kind"] = rep.kind == SingKind::Edge ? "edge"
                 : rep.kind == SingKind::Cusp ? "cusp" : "minimum";
    out["location"] = rep.location;
    out["gap"] = rep.gap;
    out["rho_min"] = rep.rho_min;
    out["gamma"] = rep.gamma;
    out["base_point"] = rep.base_point;
    out["t_rho"] = rep.t_rho;
    out["fit_residual"] = rep.fit_residual;
    out["exponent"] = rep.exponent;
    return out;
}

int run_solve(const std::string& model_path, const std::string& range_text, double eta,
              double resolution, const std::string& out_dir) {
    const ModelSpec model = io::load_model(model_path);
    const Range range = parse_range(range_text, false);
    const DensityProfile profile = density_grid(model, range.lo, range.hi, resolution, eta);
    ensure_dir(out_dir);
    const std::string out = out_dir.empty() ? "density.csv" : out_dir + "/density.csv";
    io::write_profile_csv(out, profile);
    json params = {{"model", model_path}, {"tau_range", range_text}, {"eta", eta},
                   {"resolution", resolution}};
    write_manifest(out_dir, "solve", params, 0);
    std::printf("wrote %s (%zu points, mass %.6f)\n", out.c_str(), profile.grid.size(),
                profile.integral());
    return 0;
}

int run_classify(const std::string& model_path, double near, const std::string& out_dir) {
    const ModelSpec model = io::load_model(model_path);
    const DensityProfile profile = density_grid(model, near - 3.5, near + 3.5, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(model, tau, 1e-6); };
    const SupportMap support = find_support(profile, 1e-4, rho);
    SingularityReport rep;
    try {
        rep = classify(model, profile, support, near);
    } catch (const UnclassifiableError& e) {
        rep = e.report;
        std::fprintf(stderr, "warning: %s\n", e.what());
    }
    ensure_dir(out_dir);
    const std::string base = out_dir.empty() ? "." : out_dir;
    json out = report_to_json(rep);
    {
        const auto sol = solve_point(model, {rep.base_point, 1e-5});
        out["sigma"] = compute_sigma(sol).sigma;
        const long n_for_scale = model.n;
        out["eta_f"] = compute_eta_f(profile, support, rep.base_point, n_for_scale).eta_f;
        out["beta"] = std::abs(stability_spectrum(model, sol, StabilityVariant::SqS).beta);
    }
    io::write_text(base + "/classify_report.json", out.dump(2));

    // fitted-vs-observed density near the feature
    std::vector<std::vector<double>> rows;
    const double span = (rep.kind == SingKind::Edge) ? 10.0 * std::min(rep.gap, 0.1) : 1e-2;
    for (double x = -span; x <= span; x += span / 60.0) {
        double law = 0.0;
        if (rep.kind == SingKind::Cusp) {
            law = std::sqrt(3.0) * std::pow(rep.gamma, 4.0 / 3.0) / (2.0 * kPi) *
                  std::cbrt(std::abs(x));
        } else if (rep.kind == SingKind::Edge) {
            const double delta = rep.gap;
            const double off = std::abs(x) - 0.5 * delta;
            law = (off <= 0.0) ? 0.0
                               : std::sqrt(3.0) * std::pow(2.0 * rep.gamma, 4.0 / 3.0) *
                                     std::cbrt(delta) / (2.0 * kPi) * psi_edge(off / delta);
        } else {
            law = rep.rho_min *
                  (1.0 + psi_min(3.0 * std::sqrt(3.0) * std::pow(rep.gamma, 4.0) * x /
                                 (2.0 * std::pow(kPi * rep.rho_min, 3.0))));
        }
        rows.push_back({rep.base_point + x, rho(rep.base_point + x), law});
    }
    io::write_csv(base + "/classify_fit.csv", {"tau", "rho", "law"}, rows);
    json params = {{"model", model_path}, {"near", near}};
    write_manifest(out_dir, "classify", params, 0);
    std::printf("%s\n", out.dump(2).c_str());
    return 0;
}

int run_flow(const std::string& model_path, const std::string& srange_text,
             const std::string& bracket_text, const std::string& out_dir) {
    const ModelSpec model = io::load_model(model_path);
    const Range srange = parse_range(srange_text, true);
    const Range bracket = parse_range(bracket_text, false);
    DysonEvaluator eval(model);
    std::vector<double> times;
    for (int i = 0; i <= srange.steps; ++i)
        times.push_back(srange.lo + (srange.hi - srange.lo) * i /
                        std::max(1, srange.steps));
    if (times.front() <= 0.0) times.front() = 1e-8;
    const auto states = flow_trajectory(eval, times, bracket.lo, bracket.hi);

    ensure_dir(out_dir);
    const std::string base = out_dir.empty() ? "." : out_dir;
    std::vector<std::vector<double>> rows;
    bool saw_gap = false, saw_min = false;
    double s_gap_hi = 0.0, s_min_lo = 0.0;
    for (const auto& st : states) {
        double em = 0, ep = 0, gap = 0, mloc = 0, mrho = 0;
        if (st.edges) {
            em = st.edges->e_minus;
            ep = st.edges->e_plus;
            gap = *st.gap;
            saw_gap = true;
            s_gap_hi = st.s;
        }
        if (st.minimum) {
            mloc = st.minimum->location;
            mrho = st.minimum->rho;
            if (!saw_min) s_min_lo = st.s;
            saw_min = true;
        }
        rows.push_back({st.s, em, ep, gap, mloc, mrho});
    }
    io::write_csv(base + "/flow.csv", {"s", "e_minus", "e_plus", "gap", "m_min", "rho_min"},
                  rows);

    json summary;
    if (saw_gap && saw_min) {
        const double t_star =
            find_cusp_time(eval, s_gap_hi, s_min_lo, bracket.lo, bracket.hi);
        summary["t_star"] = t_star;
        std::vector<double> dist, gaps;
        for (const auto& st : states)
            if (st.gap && st.s < 0.97 * t_star && st.s > 0.3 * t_star) {
                dist.push_back(t_star - st.s);
                gaps.push_back(*st.gap);
            }
        if (dist.size() >= 3) {
            const auto fit = fit_power_law(dist, gaps);
            summary["gap_exponent"] = fit.exponent;
            summary["gap_prefactor"] = fit.prefactor;
        }
    }
    io::write_text(base + "/flow_summary.json", summary.dump(2));
    json params = {{"model", model_path}, {"s_range", srange_text}, {"bracket", bracket_text}};
    write_manifest(out_dir, "flow", params, 0);
    std::printf("wrote %s/flow.csv (%zu rows)\n", base.c_str(), rows.size());
    return 0;
}

int run_kernel_pearcey(double alpha, const std::string& grid_text, const std::string& out_dir,
                       bool svg) {
    const Range grid = parse_range(grid_text, true);
    ensure_dir(out_dir);
    const std::string base = out_dir.empty() ? "." : out_dir;
    std::vector<std::vector<double>> rows;
    std::vector<double> xs, diag;
    for (int i = 0; i <= grid.steps; ++i) {
        const double x = grid.lo + (grid.hi - grid.lo) * i / std::max(1, grid.steps);
        const auto k = pearcey_kernel(x, x, alpha);
        rows.push_back({x, k.value, k.abs_error_estimate});
        xs.push_back(x);
        diag.push_back(k.value);
    }
    io::write_csv(base + "/kernel_diag.csv", {"x", "k_diag", "abs_error"}, rows);
    if (svg)
        io::write_svg_curves(base + "/kernel_diag.svg", "one-point density", xs,
                             {{"K(x,x)", diag}});
    json params = {{"alpha", alpha}, {"grid", grid_text}};
    write_manifest(out_dir, "kernel pearcey", params, 0);
    std::printf("wrote %s/kernel_diag.csv\n", base.c_str());
    return 0;
}

int run_kernel_finite(const std::string& spectrum_path, double ct, double xi, double gamma,
                      double base_point, const std::string& grid_text,
                      const std::string& out_dir) {
    FiniteKernelInput input;
    input.eigenvalues = io::read_csv_column(spectrum_path, 0);
    std::sort(input.eigenvalues.begin(), input.eigenvalues.end());
    input.ct = ct;
    input.xi = xi;
    input.gamma = gamma;
    input.base_point = base_point;
    const FiniteKernelEvaluator kernel(input);
    const Range grid = parse_range(grid_text, true);
    ensure_dir(out_dir);
    const std::string base = out_dir.empty() ? "." : out_dir;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i <= grid.steps; ++i) {
        const double x = grid.lo + (grid.hi - grid.lo) * i / std::max(1, grid.steps);
        rows.push_back({x, kernel.rescaled(x, x)});
    }
    io::write_csv(base + "/finite_kernel_diag.csv", {"x", "k_rescaled"}, rows);
    json params = {{"spectrum", spectrum_path}, {"ct", ct}, {"xi", xi}};
    write_manifest(out_dir, "kernel finite", params, 0);
    std::printf("wrote %s/finite_kernel_diag.csv\n", base.c_str());
    return 0;
}

int run_ensemble(const std::string& config_path, const std::string& suite,
                 const std::string& out_dir) {
    const EnsembleConfig cfg = load_ensemble_config(config_path);
    ensure_dir(out_dir);
    const std::string base = out_dir.empty() ? "." : out_dir;

    EnsembleConfig run_cfg = cfg;
    if (suite == "locallaw" || suite == "deloc") run_cfg.keep_vectors = true;
    const auto samples = run_trials(run_cfg);

    // per-trial spectra
    for (std::size_t t = 0; t < samples.size(); ++t) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index k = 0; k < samples[t].eigenvalues.size(); ++k)
            rows.push_back({samples[t].eigenvalues(k)});
        io::write_csv(base + "/spectrum_" + std::to_string(t) + ".csv", {"lambda"}, rows);
    }

    const DensityProfile profile = density_grid(cfg.model, -3.5, 3.5, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(cfg.model, tau, 1e-6); };
    const SupportMap support = find_support(profile, 1e-4, rho);

    // pooled eigenvalue histogram across trials
    {
        double lo = 1e300, hi = -1e300;
        for (const auto& smp : samples) {
            lo = std::min(lo, smp.eigenvalues.minCoeff());
            hi = std::max(hi, smp.eigenvalues.maxCoeff());
        }
        const int bins = 120;
        const double bw = (hi - lo) / bins * (1.0 + 1e-12);
        std::vector<double> counts(bins, 0.0);
        for (const auto& smp : samples)
            for (Eigen::Index k = 0; k < smp.eigenvalues.size(); ++k) {
                const int bin = static_cast<int>((smp.eigenvalues(k) - lo) / bw);
                counts[std::min(std::max(bin, 0), bins - 1)] += 1.0;
            }
        std::vector<std::vector<double>> rows;
        std::vector<double> centers, emp, ref;
        for (int i = 0; i < bins; ++i) {
            const double x = lo + (i + 0.5) * bw;
            const double density =
                counts[i] / (static_cast<double>(samples.size()) * cfg.model.n * bw);
            centers.push_back(x);
            emp.push_back(density);
            ref.push_back(profile.interp(x));
            rows.push_back({x, density, ref.back()});
        }
        io::write_csv(base + "/spectrum_histogram.csv", {"tau", "empirical", "scdos"}, rows);
        io::write_svg_curves(base + "/spectrum_histogram.svg", "spectral density", centers,
                             {{"empirical", emp}, {"scdos", ref}});
    }

    json stats_out;
    auto dump_stats = [&](const VerificationStats& st, const std::string& name) {
        json entry;
        for (const auto& c : st.checks) {
            json cj = {{"pass_fraction", c.pass_fraction}, {"threshold", c.threshold},
                       {"max", c.max_stat},               {"mean", c.mean_stat},
                       {"count", c.count}};
            entry[c.name] = cj;
        }
        stats_out[name] = entry;
    };

    if (suite.empty() || suite == "rigidity") {
        dump_stats(verify_rigidity(samples, profile), "rigidity");
    }
    if (suite == "locallaw") {
        dump_stats(verify_local_law(samples, cfg.model, profile, support), "locallaw");
    }
    if (suite == "deloc") {
        dump_stats(verify_delocalization(samples), "deloc");
    }
    if (suite == "cusp") {
        SingularityReport rep = classify(cfg.model, profile, support, 0.0);
        const auto st = cusp_statistics(samples, rep, cfg.gue_time);
        dump_stats(st, "cusp");
        stats_out["cusp"]["l1_distance"] = st.l1_distance;
        stats_out["cusp"]["alpha"] = st.alpha;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < st.hist_centers.size(); ++i)
            rows.push_back({st.hist_centers[i], st.hist_density[i], st.kernel_reference[i]});
        io::write_csv(base + "/cusp_histogram.csv", {"x", "empirical", "kernel"}, rows);
        io::write_svg_curves(base + "/cusp_histogram.svg", "rescaled density",
                             st.hist_centers,
                             {{"empirical", st.hist_density},
                              {"kernel", st.kernel_reference}});
    }
    io::write_text(base + "/stats.json", stats_out.dump(2));
    json params = {{"config", config_path}, {"suite", suite}};
    write_manifest(out_dir, "ensemble", params, cfg.base_seed);
    std::printf("wrote %s/stats.json\n", base.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"computational toolkit for spectral densities of Wigner-type matrix "
                 "models: self-consistent solves, cusp classification, semicircular "
                 "flow, determinantal kernels, Monte-Carlo verification"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "density profile over an energy window");
    std::string model_path, range_text = "-3:3", out_dir;
    double eta = 1e-6, resolution = 0.01;
    solve->add_option("--model", model_path)->required();
    solve->add_option("--tau-range", range_text);
    solve->add_option("--eta", eta);
    solve->add_option("--resolution", resolution);
    solve->add_option("--out", out_dir);

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "classify the nearest density feature");
    std::string cls_model, cls_out;
    double near = 0.0;
    classify_cmd->add_option("--model", cls_model)->required();
    classify_cmd->add_option("--near", near)->required();
    classify_cmd->add_option("--out", cls_out);

    // flow
    auto* flow_cmd = app.add_subcommand("flow", "track gap and minimum along the flow");
    std::string flow_model, srange = "0:0.1:20", bracket = "-0.5:0.5", flow_out;
    flow_cmd->add_option("--model", flow_model)->required();
    flow_cmd->add_option("--s-range", srange);
    flow_cmd->add_option("--bracket", bracket);
    flow_cmd->add_option("--out", flow_out);

    // kernel
    auto* kernel_cmd = app.add_subcommand("kernel", "determinantal kernel evaluation");
    auto* pearcey_cmd = kernel_cmd->add_subcommand("pearcey", "limiting kernel diagonal");
    double alpha = 0.0;
    std::string kgrid = "-4:4:64", kernel_out;
    bool svg = false;
    pearcey_cmd->add_option("--alpha", alpha);
    pearcey_cmd->add_option("--grid", kgrid);
    pearcey_cmd->add_option("--out", kernel_out);
    pearcey_cmd->add_flag("--svg", svg);
    auto* finite_cmd = kernel_cmd->add_subcommand("finite", "finite-N rescaled kernel");
    std::string spectrum_path;
    double ct = 0.1, xi = 0.0, kgamma = 1.0, kbase = 0.0;
    finite_cmd->add_option("--spectrum", spectrum_path)->required();
    finite_cmd->add_option("--ct", ct)->required();
    finite_cmd->add_option("--xi", xi)->required();
    finite_cmd->add_option("--gamma", kgamma);
    finite_cmd->add_option("--base", kbase);
    finite_cmd->add_option("--grid", kgrid);
    finite_cmd->add_option("--out", kernel_out);

    // ensemble
    auto* ens_cmd = app.add_subcommand("ensemble", "Monte-Carlo ensembles");
    auto* ens_run = ens_cmd->add_subcommand("run", "sample and write spectra plus stats");
    std::string ens_config, ens_out = "ensemble_out", ens_suite;
    ens_run->add_option("--config", ens_config)->required();
    ens_run->add_option("--out", ens_out);
    auto* ens_verify = ens_cmd->add_subcommand("verify", "run one verification suite");
    ens_verify->add_option("--config", ens_config)->required();
    ens_verify->add_option("--suite", ens_suite)
        ->check(CLI::IsMember({"rigidity", "locallaw", "deloc", "cusp"}))
        ->required();
    ens_verify->add_option("--out", ens_out);

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
    bool quick = false;
    std::string criteria_text, verify_out;
    verify_cmd->add_flag("--quick", quick);
    verify_cmd->add_option("--criteria", criteria_text, "comma-separated criterion ids");
    verify_cmd->add_option("--out", verify_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return run_solve(model_path, range_text, eta, resolution, out_dir);
        if (*classify_cmd) return run_classify(cls_model, near, cls_out);
        if (*flow_cmd) return run_flow(flow_model, srange, bracket, flow_out);
        if (*pearcey_cmd) return run_kernel_pearcey(alpha, kgrid, kernel_out, svg);
        if (*finite_cmd)
            return run_kernel_finite(spectrum_path, ct, xi, kgamma, kbase, kgrid, kernel_out);
        if (*ens_run) return run_ensemble(ens_config, "", ens_out);
        if (*ens_verify) return run_ensemble(ens_config, ens_suite, ens_out);
        if (*verify_cmd) {
            AcceptanceOptions opts;
            opts.quick = quick;
            opts.out_dir = verify_out;
            if (!verify_out.empty()) std::filesystem::create_directories(verify_out);
            if (!criteria_text.empty()) {
                std::stringstream ss(criteria_text);
                std::string tok;
                while (std::getline(ss, tok, ',')) opts.criteria.push_back(std::stoi(tok));
            }
            const auto results = run_acceptance(opts);
            for (const auto& res : results)
                if (!res.pass) return 3;
            return 0;
        }
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    }
    return 1;
}
