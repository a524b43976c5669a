// Scenario-driven front end: one JSON scenario in, report.json plus CSV curves out.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "threshold/config.hpp"
#include "threshold/critical_channel.hpp"
#include "threshold/grushin_core.hpp"
#include "threshold/kernels.hpp"
#include "threshold/model_setup.hpp"
#include "threshold/parallel.hpp"
#include "threshold/resolvent_expansion.hpp"
#include "threshold/scattering_threshold.hpp"
#include "threshold/threshold_classifier.hpp"

using namespace thr;
using config::Json;
namespace fs = std::filesystem;

namespace {

struct Context {
    Json scenario;
    fs::path base;
    fs::path out;
    std::uint64_t seed = 1;
    bool verbose = false;
    bool numerical_failure = false;
};

void log(const Context& ctx, const std::string& msg) {
    if (ctx.verbose) std::cerr << "[threshold-toolkit] " << msg << "\n";
}

Json cjson(cdouble z) { return Json::array({z.real(), z.imag()}); }

Json mat_json(const MatC& M) {
    Json rows = Json::array();
    for (int i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(cjson(M(i, j)));
        rows.push_back(row);
    }
    return rows;
}

Json vec3_json(const Eigen::Vector3d& v) { return Json::array({v[0], v[1], v[2]}); }

// CSV with a header naming units; values in round-trip precision.
class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw ValidationError("cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << "\n" << std::setprecision(17);
    }
    void row(const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

// ---- lattice ----------------------------------------------------------------

Json run_lattice(Context& ctx) {
    const Json& s = ctx.scenario;
    const ParticleSystem sys = config::parse_system(config::require(s, "system", ""), "system");
    const ClusterLattice lat = build_lattice(sys);
    const LatticeCheck chk = check_lattice(lat);
    Json decs = Json::array();
    for (std::size_t a = 0; a < lat.decompositions.size(); ++a) {
        const auto& d = lat.decompositions[a];
        decs.push_back({{"index", a}, {"label", d.label()}, {"rank", d.rank}, {"sharp", d.sharp}});
    }
    Json rep = {{"model", sys.nuclei ? "fixed_nuclei" : "dynamic"},
                {"particles", sys.N()},
                {"dim", sys.dim},
                {"decompositions", decs},
                {"index_max", lat.index_max},
                {"index_min", lat.index_min},
                {"two_cluster", lat.two_cluster()},
                {"checks",
                 {{"max_sum", chk.max_sum},
                  {"max_orth", chk.max_orth},
                  {"max_idempotent", chk.max_idempotent},
                  {"max_selfadjoint", chk.max_selfadjoint},
                  {"order_matches_inclusion", chk.order_matches_inclusion},
                  {"rank_property", chk.rank_property},
                  {"tolerance", 1e-10}}}};
    const double worst = std::max({chk.max_sum, chk.max_orth, chk.max_idempotent, chk.max_selfadjoint});
    if (worst > 1e-10 || !chk.order_matches_inclusion) ctx.numerical_failure = true;
    if (s.contains("channels")) {
        const auto channels = config::parse_channels(s["channels"], "channels", ctx.base);
        const ChannelClassification cls = classify_channels(sys, channels);
        Json chans = Json::array();
        for (std::size_t k = 0; k < channels.size(); ++k) {
            const EffectiveMultipole em = effective_multipole(sys, channels[k]);
            Json dm = Json::array();
            for (const auto& row : em.dipole_matrix) {
                Json r = Json::array();
                for (const auto& d : row) r.push_back(vec3_json(d));
                dm.push_back(r);
            }
            chans.push_back({{"index", k},
                             {"lambda0", channels[k].lambda0},
                             {"multiplicity", channels[k].multiplicity()},
                             {"coulomb", em.coulomb},
                             {"dipole", vec3_json(em.dipole)},
                             {"dipole_matrix", dm},
                             {"remainder_order", em.remainder_order},
                             {"case", to_string(em.kase)},
                             {"class", to_string(cls.labels[k])}});
        }
        rep["channels"] = chans;
        rep["channel_sets"] = {{"A1", cls.A1}, {"A2", cls.A2}, {"A3cd", cls.A3cd}, {"A3fd", cls.A3fd}};
        rep["channel_tolerances"] = {{"coulomb_zero", "1e-10 * charge_scale^2"},
                                     {"dipole_zero", "1e-10 * charge_scale^2 * length_scale"}};
    }
    return rep;
}

// ---- grushin-verify ---------------------------------------------------------

Json run_grushin(Context& ctx) {
    const Json p = ctx.scenario.value("grushin", Json::object());
    const int trials = config::integer_or(p, "trials", 50, "grushin");
    const int max_dim = config::integer_or(p, "max_dim", 40, "grushin");
    const int max_rank = config::integer_or(p, "max_rank", 5, "grushin");
    if (trials < 1 || max_dim < 2 || max_dim > kMaxModelDim || max_rank < 1 || max_rank >= max_dim)
        throw ValidationError("config grushin: need trials >= 1, 2 <= max_dim <= 512, 1 <= max_rank < max_dim");
    const GrushinSuiteReport r = grushin_suite(ctx.seed, trials, max_dim, max_rank);
    log(ctx, "grushin suite finished in " + std::to_string(r.seconds) + " s");
    std::cout << "max identity residual " << std::scientific << std::setprecision(3) << r.max_identity << "\n";
    const bool ok = r.max_identity <= 1e-10 && r.min_herglotz >= -1e-12 && r.max_nilpotent <= 1e-12 &&
                    r.max_roundtrip <= 1e-10 && r.kernel_dims_match;
    if (!ok) ctx.numerical_failure = true;
    return {{"trials", r.trials},
            {"max_dim", max_dim},
            {"max_rank", max_rank},
            {"max_identity_residual", {{"value", r.max_identity}, {"tolerance", 1e-10}}},
            {"min_herglotz_margin", {{"value", r.min_herglotz}, {"tolerance", -1e-12}}},
            {"max_nilpotent_B3", {{"value", r.max_nilpotent}, {"tolerance", 1e-12}}},
            {"max_adjoint", r.max_adjoint},
            {"max_T_identity", r.max_T_identity},
            {"max_projection", r.max_projection},
            {"max_eigentransform_roundtrip", {{"value", r.max_roundtrip}, {"tolerance", 1e-10}}},
            {"kernel_dims_match", r.kernel_dims_match},
            {"passed", ok}};
}

// ---- classify ---------------------------------------------------------------

Json report_json(const EffectiveOperator& op, const ThresholdReport& rep) {
    Json tails = Json::array();
    for (const auto& t : rep.tail_coefficients) tails.push_back(t);
    return {{"case", to_string(rep.kase)},
            {"mu", rep.mu},
            {"kappa", rep.kappa},
            {"m", rep.m},
            {"grid_nodes", op.n()},
            {"decay_class", to_string(op.decay)},
            {"c_matrix", mat_json(rep.c_matrix)},
            {"normalized_c", mat_json(rep.normalized_c)},
            {"tail_coefficients", tails},
            {"near_threshold", rep.near_threshold},
            {"ill_conditioned_c", rep.ill_conditioned_c},
            {"tail_estimate", rep.tail_estimate},
            {"tolerances",
             {{"null_space_cutoff", "1e-6 * sigma_max(1 + K)"},
              {"near_threshold_band", "[1e-6, 1e-5] * sigma_max"},
              {"c_rank_cutoff", "1e-6 * |U v| scale"},
              {"tail_truncation", 1e-6}}}};
}

Json run_classify(Context& ctx) {
    const EffectiveOperator op = config::parse_operator(config::require(ctx.scenario, "operator", ""), "operator");
    const ThresholdReport rep = classify(op);
    Json out = report_json(op, rep);
    out["bound_states"] = op.W.empty() && op.profiles.cols() == 0 ? 0 : bound_state_count(op);
    Json lengths = Json::array();
    for (int ch = 0; ch < op.m; ++ch) {
        const ScatteringLength s = scattering_length(op, ch);
        lengths.push_back({{"channel", ch},
                           {"s_lnt", cjson(s.s)},
                           {"sigma0", s.sigma0},
                           {"condition", s.condition},
                           {"near_resonant", s.near_resonant}});
    }
    out["scattering_length"] = lengths;
    out["scattering_length_valid"] = rep.kase == ThresholdCase::Regular;
    Json tails = Json::array();
    for (int j = 0; j < rep.normalized.cols(); ++j) {
        const TailFit tf = verify_tail(op, rep.normalized.col(j));
        tails.push_back({{"fitted", tf.fitted}, {"predicted", tf.predicted}, {"r2", tf.r2},
                         {"max_rel_error", tf.max_rel_error}, {"poor_fit", tf.poor_fit}});
    }
    out["tail_fits"] = tails;
    if (rep.kappa > 0) {
        const ThresholdSMatrix S = levinson_limit(rep);
        out["levinson"] = {{"A", mat_json(S.A)}, {"elastic_defect", S.elastic_defect},
                           {"unitarity_defect", S.unitarity_defect}, {"maximal", S.maximal}};
    }
    return out;
}

// ---- critical ---------------------------------------------------------------

Json run_critical(Context& ctx) {
    const Json& c = config::require(ctx.scenario, "critical", "");
    AngularOperator ang;
    if (c.contains("multipole")) {
        const Json& mp = c["multipole"];
        const ParticleSystem sys = config::parse_system(config::require(mp, "system", "critical.multipole"),
                                                        "critical.multipole.system");
        const auto channels = config::parse_channels(config::require(mp, "channels", "critical.multipole"),
                                                     "critical.multipole.channels", ctx.base);
        const int idx = config::integer_or(mp, "channel", 0, "critical.multipole");
        if (idx < 0 || idx >= static_cast<int>(channels.size()))
            throw ValidationError("config critical.multipole.channel: out of range");
        const EffectiveMultipole em = effective_multipole(sys, channels[idx]);
        ang = angular_from_multipole(em, config::number_or(mp, "factor", 1.0, "critical.multipole"));
    } else {
        ang = config::parse_angular(c, "critical");
    }
    const int max_degree = config::integer_or(c, "max_degree", 40, "critical");
    const NuSpectrum sp = angular_spectrum(ang, max_degree);
    const ResonanceBound rb = resonance_bound(sp);
    Json entries = Json::array();
    Csv csv(ctx.out / "nu_spectrum.csv", {"mu_dimensionless", "re_nu_dimensionless", "im_nu_dimensionless",
                                          "multiplicity"});
    for (const auto& e : sp.entries) {
        entries.push_back({{"mu", e.mu}, {"nu", cjson(e.nu)}, {"multiplicity", e.multiplicity}});
        csv.row({e.mu, e.nu.real(), e.nu.imag(), static_cast<double>(e.multiplicity)});
    }
    Json out = {{"n", sp.n},
                {"m", sp.m},
                {"entries", entries},
                {"nu0", sp.nu0},
                {"s_a", sp.s_a},
                {"sigma_plus", sp.sigma_plus},
                {"d_a", sp.d_a},
                {"hardy_ok", sp.hardy_ok},
                {"borderline", sp.borderline},
                {"basis_degree", sp.basis_degree},
                {"cutoff_complete", sp.cutoff_complete},
                {"resonance_bound", {{"s_a", rb.s_a}, {"d_a", rb.d_a}, {"statement", rb.statement}}},
                {"tolerances", {{"eigenvalue_grouping", 1e-8}, {"galerkin_convergence", 1e-8}}}};
    if (!sp.cutoff_complete) ctx.numerical_failure = true;
    if (config::text_or(c, "parametrix", "on", "critical") == "on" && !sp.entries.empty()) {
        const Parametrix p = parametrix_assemble(sp, config::integer_or(c, "parametrix_nodes", 200, "critical"));
        out["parametrix"] = {{"sectors", p.nus.size()},
                             {"partition_residual", p.partition_residual},
                             {"min_im", p.min_im},
                             {"min_im_exterior", p.min_im_exterior},
                             {"omitted_sector_norm", p.omitted_sector_norm},
                             {"positivity_tolerance", -1e-12}};
    }
    return out;
}

// ---- expand -----------------------------------------------------------------

VecC probe_vector(const EffectiveOperator& op, const Json& j) {
    const double decay = config::number_or(j, "decay", 1.0, "expand.probe");
    const double power = config::number_or(j, "power", 0.0, "expand.probe");
    const int ch = config::integer_or(j, "channel", 0, "expand.probe");
    if (ch < 0 || ch >= op.m) throw ValidationError("config expand.probe.channel: out of range");
    if (!(decay > 0.0)) throw ValidationError("config expand.probe.decay: must be > 0");
    VecC f = VecC::Zero(op.dim());
    for (int i = 0; i < op.n(); ++i) f[ch * op.n() + i] = std::pow(op.grid.r()[i], power) * std::exp(-decay * op.grid.r()[i]);
    return f;
}

Json run_expand(Context& ctx) {
    const Json& s = ctx.scenario;
    const EffectiveOperator op = config::parse_operator(config::require(s, "operator", ""), "operator");
    const Json e = s.value("expand", Json::object());
    const double tmin = config::number_or(e, "tmin", 1e-10, "expand");
    const double tmax = config::number_or(e, "tmax", 1e-6, "expand");
    const int samples = config::integer_or(e, "samples", 5, "expand");
    if (!(tmin > 0.0 && tmax > tmin) || samples < 2) throw ValidationError("config expand: need 0 < tmin < tmax, samples >= 2");
    const VecC f = probe_vector(op, e.value("probe", Json::object()));
    const ThresholdReport rep = classify(op);
    Json out = report_json(op, rep);
    const LeadingTerm lead = leading_resolvent(op, rep);
    const PowerFit fit = fit_power(op, f, tmin, tmax, samples);
    const cdouble z = tmin * std::polar(1.0, 0.75 * kPi);
    const double err = leading_error(op, lead, z, f);
    const double expected = lead.power;
    Csv csv(ctx.out / "power_fit.csv", {"abs_z_energy", "norm_weighted_L2"});
    for (std::size_t k = 0; k < fit.abs_z.size(); ++k) csv.row({fit.abs_z[k], fit.norms[k]});
    const MatC r1 = eh_inverse(op, z, 1), r2 = eh_inverse(op, z, 2);
    out["leading"] = {{"power", lead.power},
                      {"fitted_power", {{"value", fit.power}, {"tolerance", 0.02}, {"ray", "arg z = 3 pi / 4"},
                                        {"tmin", tmin}, {"tmax", tmax}, {"samples", samples}}},
                      {"leading_error", {{"value", err}, {"abs_z", tmin}, {"tolerance", 0.05}}},
                      {"route_agreement", (r1 - r2).norm() / r1.norm()}};
    if (std::abs(fit.power - expected) > 0.02 || err > 0.05) ctx.numerical_failure = true;
    if (rep.mu > 0) {
        const InnerGrushin in = inner_grushin(op, rep);
        const LeadingMatrices L = leading_e_minus_plus(op, in);
        out["inner_grushin"] = {{"gram_min_eigenvalue", in.gram_min_eigenvalue},
                                {"orthonormality", in.orthonormality},
                                {"idempotency", in.idempotency},
                                {"E1", mat_json(L.E1)},
                                {"E2", mat_json(L.E2)},
                                {"B0_min_eigenvalue", L.B0_min_eigenvalue},
                                {"E2_min_eigenvalue", L.E2_min_eigenvalue},
                                {"off_corner", L.off_corner},
                                {"positivity_violation", L.positivity_violation}};
        if (L.positivity_violation) ctx.numerical_failure = true;
    }
    return out;
}

// ---- scatter ----------------------------------------------------------------

std::vector<double> lambda_list(const Json& j) {
    if (j.is_array()) {
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number() || !(j[i].get<double>() > 0.0))
                throw ValidationError("config scatter.lambdas[" + std::to_string(i) + "]: expected a positive number");
            out.push_back(j[i].get<double>());
        }
        return out;
    }
    const double lo = config::number(j, "min", "scatter.lambdas"), hi = config::number(j, "max", "scatter.lambdas");
    const int n = config::integer(j, "count", "scatter.lambdas");
    if (!(lo > 0.0 && hi > lo) || n < 2) throw ValidationError("config scatter.lambdas: need 0 < min < max, count >= 2");
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1));
    return out;
}

Json run_scatter(Context& ctx) {
    const Json& s = ctx.scenario;
    const Json sc = s.value("scatter", Json::object());
    Json out;
    if (s.contains("operator")) {
        const EffectiveOperator op = config::parse_operator(s["operator"], "operator");
        const int ch = config::integer_or(sc, "channel", 0, "scatter");
        const std::vector<double> lambdas =
            lambda_list(sc.contains("lambdas") ? sc["lambdas"] : Json{{"min", 1e-6}, {"max", 1e-4}, {"count", 5}});
        const ThresholdReport rep = classify(op);
        const ScatteringLength sl = scattering_length(op, ch);
        std::vector<CrossSection> cs(lambdas.size());
        parallel_for(lambdas.size(), [&](std::size_t k) { cs[k] = optical_cross_section(op, lambdas[k], ch); });
        Csv csv(ctx.out / "cross_section.csv",
                {"lambda_energy", "sigma_area", "lambda_sigma_over_4pi_dimensionless", "extrapolation_change"});
        std::vector<double> lx, ly;
        Json samples = Json::array();
        bool nonconvergent = false, negative = false;
        for (const auto& c : cs) {
            csv.row({c.lambda, c.sigma, c.lambda * c.sigma / (4.0 * kPi), c.extrapolation_change});
            samples.push_back({{"lambda", c.lambda}, {"sigma", c.sigma}, {"extrapolation_change", c.extrapolation_change},
                               {"nonconvergent", c.nonconvergent}});
            nonconvergent = nonconvergent || c.nonconvergent;
            negative = negative || c.sigma < 0.0;
            if (c.sigma > 0.0) {
                lx.push_back(std::log(c.lambda));
                ly.push_back(std::log(c.sigma));
            }
        }
        double slope = 0.0, icpt = 0.0;
        if (lx.size() >= 2) fit_line(lx, ly, slope, icpt);
        const double expected = rep.kappa > 0 ? -1.0 : 0.0;
        out = {{"case", to_string(rep.kase)},
               {"mu", rep.mu},
               {"kappa", rep.kappa},
               {"channel", ch},
               {"scattering_length", {{"s_lnt", cjson(sl.s)}, {"sigma0", sl.sigma0}, {"condition", sl.condition},
                                      {"near_resonant", sl.near_resonant},
                                      {"valid", rep.kase == ThresholdCase::Regular}}},
               {"samples", samples},
               {"fit", {{"power", slope}, {"expected", expected}, {"tolerance", 0.05},
                        {"model", "log sigma = power * log lambda + c"}}},
               {"boundary_value", {{"eps", "lambda * 10^-j, j = 4..7"}, {"extrapolation", "Richardson"},
                                   {"nonconvergence_tolerance", 1e-3}}},
               {"herglotz_positive", !negative}};
        if (rep.kappa > 0) {
            const ThresholdSMatrix S = levinson_limit(rep);
            out["levinson"] = {{"A", mat_json(S.A)}, {"elastic_defect", S.elastic_defect},
                               {"unitarity_defect", S.unitarity_defect}, {"maximal", S.maximal}};
        }
        if (nonconvergent || negative || std::abs(slope - expected) > 0.05) ctx.numerical_failure = true;
    }
    if (sc.contains("mixing")) {
        const Json& mx = sc["mixing"];
        const double theta = config::number(mx, "theta", "scatter.mixing");
        const bool adapted = mx.value("adapted", false);
        const TransmissionReport tr = transmission_diagnostic(two_channel_mixing(theta, adapted));
        const double closed = adapted ? 0.0 : 4.0 * std::pow(std::cos(theta) * std::sin(theta), 2);
        out["transmission"] = {{"theta", theta}, {"adapted", adapted}, {"defects", tr.defects},
                               {"transmits", tr.transmits}, {"closed_form", closed}, {"tolerance", 1e-12}};
    }
    if (sc.contains("eikonal")) {
        const Json& ek = sc["eikonal"];
        const auto w = config::parse_profile(config::require(ek, "potential", "scatter.eikonal"), "scatter.eikonal.potential");
        const double E = config::number(ek, "energy", "scatter.eikonal");
        const double R0 = config::number(ek, "R0", "scatter.eikonal");
        const std::vector<double> radii = config::numbers(ek, "radii", "scatter.eikonal");
        Csv csv(ctx.out / "eikonal.csv", {"r_length", "phase_dimensionless", "residual_energy"});
        double worst = 0.0;
        for (double r : radii) {
            const double ph = eikonal_phase(w, E, R0, r);
            const double res = eikonal_residual(w, E, R0, r);
            worst = std::max(worst, res);
            csv.row({r, ph, res});
        }
        out["eikonal"] = {{"max_residual", worst}, {"tolerance", 1e-8}, {"points", radii.size()}};
        if (worst > 1e-8) ctx.numerical_failure = true;
    }
    if (out.is_null()) throw ValidationError("config scatter: needs an operator, scatter.mixing or scatter.eikonal");
    return out;
}

// ---- flow -------------------------------------------------------------------

Json run_flow(Context& ctx) {
    const Json& f = config::require(ctx.scenario, "flow", "");
    const std::vector<double> x = config::numbers(f, "xhat", "flow"), c = config::numbers(f, "cbar", "flow");
    if (x.size() != c.size()) throw ValidationError("config flow: xhat and cbar differ in length");
    const VecR xv = Eigen::Map<const VecR>(x.data(), x.size()), cv = Eigen::Map<const VecR>(c.data(), c.size());
    const FlowResult fr = reduced_flow(xv, cv, config::number(f, "b", "flow"), config::number_or(f, "rho", 1.0, "flow"),
                                       config::number_or(f, "tau_end", 20.0, "flow"),
                                       config::integer_or(f, "samples", 200, "flow"));
    std::vector<std::string> header{"tau_dimensionless"};
    for (std::size_t i = 0; i < x.size(); ++i) header.push_back("xhat" + std::to_string(i) + "_dimensionless");
    for (std::size_t i = 0; i < x.size(); ++i) header.push_back("cbar" + std::to_string(i) + "_dimensionless");
    header.insert(header.end(), {"b_dimensionless", "a_dimensionless"});
    Csv csv(ctx.out / "trajectory.csv", header);
    for (const auto& s : fr.samples) {
        std::vector<double> row{s.tau};
        for (int i = 0; i < s.xhat.size(); ++i) row.push_back(s.xhat[i]);
        for (int i = 0; i < s.cbar.size(); ++i) row.push_back(s.cbar[i]);
        row.push_back(s.b);
        row.push_back(s.a);
        csv.row(row);
    }
    if (fr.max_a_drift > 1e-8 || fr.max_b_error > 1e-6) ctx.numerical_failure = true;
    return {{"samples", fr.samples.size()},
            {"fixed_point", fr.fixed_point},
            {"max_a_drift", {{"value", fr.max_a_drift}, {"tolerance", 1e-8}}},
            {"max_b_error", {{"value", fr.max_b_error}, {"tolerance", 1e-6}}},
            {"integrator", {{"scheme", "dopri5"}, {"abs_tol", 1e-12}, {"rel_tol", 1e-12}}}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"threshold-toolkit: two-cluster threshold analysis from a JSON scenario"};
    std::string config_path, out_dir = "threshold_out";
    std::uint64_t seed = 1;
    bool verbose = false;
    app.add_option("--config", config_path, "scenario file (JSON)")->required();
    app.add_option("--seed", seed, "seed for randomized suites");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--verbose", verbose, "progress on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    Context ctx;
    ctx.seed = seed;
    ctx.verbose = verbose;
    ctx.out = out_dir;
    try {
        ctx.scenario = config::load(config_path);
        ctx.base = fs::absolute(config_path).parent_path();
        const std::string command = config::text_or(ctx.scenario, "command", "", "");
        fs::create_directories(ctx.out);
        log(ctx, "command " + command + ", backend " + kernels::backend_name(kernels::active_backend()) + ", " +
                     std::to_string(thread_count()) + " thread(s)");
        Json result;
        if (command == "lattice")
            result = run_lattice(ctx);
        else if (command == "grushin-verify")
            result = run_grushin(ctx);
        else if (command == "classify")
            result = run_classify(ctx);
        else if (command == "critical")
            result = run_critical(ctx);
        else if (command == "expand")
            result = run_expand(ctx);
        else if (command == "scatter")
            result = run_scatter(ctx);
        else if (command == "flow")
            result = run_flow(ctx);
        else
            throw ValidationError("config command: expected one of lattice, grushin-verify, classify, critical, "
                                  "expand, scatter, flow");
        const Json report = {{"command", command},
                             {"seed", seed},
                             {"scenario", fs::path(config_path).filename().string()},
                             {"numerical_flags", ctx.numerical_failure},
                             {"result", result}};
        std::ofstream rep(ctx.out / "report.json");
        rep << std::setprecision(17) << report.dump(2) << "\n";
        if (!rep) throw ValidationError("cannot write " + (ctx.out / "report.json").string());
        log(ctx, "wrote " + (ctx.out / "report.json").string());
        if (ctx.numerical_failure) {
            std::cerr << "threshold-toolkit: numerical checks flagged, see report.json\n";
            return 3;
        }
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "threshold-toolkit: " << e.what() << "\n";
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "threshold-toolkit: config: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "threshold-toolkit: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "threshold-toolkit: " << e.what() << "\n";
        return 2;
    }
}
