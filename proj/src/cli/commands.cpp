#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "qbm/calibration.hpp"
#include "qbm/market.hpp"
#include "qbm/model.hpp"
#include "qbm/moments.hpp"
#include "qbm/monte_carlo.hpp"
#include "qbm/phase_space.hpp"
#include "qbm/presets.hpp"

namespace qbm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string& Run::read_input(const std::string& path) {
    input_bytes_.push_back(read_file(path));
    inputs_.emplace_back(path, sha256_hex(input_bytes_.back()));
    return input_bytes_.back();
}

std::string Run::config_digest() const {
    json j = json::object();
    for (const auto& [k, v] : cfg.values)
        if (k != "out" && k != "out-dir" && k != "manifest" && k != "threads") j[k] = v;
    return sha256_hex(command + "\n" + j.dump());
}

std::string Run::header() const {
    std::string h = std::string("qbm ") + kVersion + " " + command + " config-sha256=" + config_digest();
    for (const auto& in : inputs_) h += " input-sha256=" + in.second;
    return h;
}

void Run::finish() {
    if (!cfg.has("manifest")) {
        const std::string path = cfg.has("out-dir") ? (fs::path(cfg.text("out-dir")) / "manifest.json").string()
                                                    : cfg.text("out") + ".manifest.json";
        cfg.set("manifest", path);
    }
    json m;
    m["tool"] = "qbm";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = cfg.values;
    m["config_sha256"] = config_digest();
    m["inputs"] = json::array();
    for (const auto& [path, digest] : inputs_) m["inputs"].push_back({{"path", path}, {"sha256", digest}});
    m["outputs"] = json::array();
    for (const auto& f : outputs_.files()) m["outputs"].push_back(f.first);
    outputs_.add(cfg.text("manifest"), m.dump(2) + "\n");
    outputs_.commit();
    for (const auto& f : outputs_.files()) progress << "wrote " << f.first << "\n";
}

namespace {

// ---- shared flag sets and readers ----

FlagSpec out_flag(const std::string& what) { return {"out", "", "path", what, {}, false, true}; }
FlagSpec manifest_flag() {
    return {"manifest", "", "path", "run manifest (default: next to the output)"};
}

std::vector<FlagSpec> model_flags(const ModelParams& p) {
    return {
        {"M", format_number(p.M), "dimensionless", "index inertia M"},
        {"gamma", format_number(p.gamma), "1/time", "dissipation rate gamma"},
        {"kT", format_number(p.kT), "dimensionless", "fluctuation strength kT"},
        {"hbar", format_number(p.hbar), "dimensionless", "irrationality scale hbar"},
    };
}

std::vector<FlagSpec> nm_flags(bool with_defaults) {
    const auto nm = presets::kAcfPeriods[0].nm;
    const auto d = [&](double v) { return with_defaults ? format_number(v) : std::string(); };
    return {
        {"xi", d(nm.xi), "ln S/minute", "autocorrelation intensity xi"},
        {"eta", d(nm.eta), "1/minute", "autocorrelation decay eta"},
        {"Omega", d(nm.Omega), "rad/minute", "market periodicity Omega"},
    };
}

ModelParams model_from(const Config& c) {
    ModelParams p{c.number("M"), c.number("gamma"), c.number("kT"), c.number("hbar")};
    p.validate();
    return p;
}

NonMarkovParams nm_from(const Config& c) {
    NonMarkovParams nm{c.number("xi"), c.number("eta"), c.number("Omega")};
    nm.validate();
    return nm;
}

template <typename... Lists>
std::vector<FlagSpec> concat(Lists&&... lists) {
    std::vector<FlagSpec> out;
    (out.insert(out.end(), lists.begin(), lists.end()), ...);
    return out;
}

std::uint64_t resolve_seed(Config& c) {
    if (!c.has("seed")) {
        const char* env = std::getenv("QBM_SEED");
        if (env == nullptr || *env == '\0')
            throw std::invalid_argument("a seed is required: pass --seed or set QBM_SEED");
        c.set("seed", env);
    }
    return c.unsigned_integer("seed");
}

std::vector<std::string> moment_columns(const std::string& prefix = "") {
    std::vector<std::string> cols;
    for (int n = 1; n <= kMaxMomentOrder; ++n)
        for (int k = 0; k <= n; ++k) cols.push_back(prefix + "m" + std::to_string(n - k) + std::to_string(k));
    return cols;
}

void append_moments(std::vector<double>& row, const MomentVector<double>& m) {
    for (int i = 1; i < kMomentCount; ++i) row.push_back(m[i]);
}

// ---- eval ----

void cmd_eval(Run& run) {
    Config& c = run.cfg;
    const std::string f = c.text("formula");
    const ModelParams p = model_from(c);
    const NonMarkovParams nm = nm_from(c);
    if (!c.has("sp2")) c.set("sp2", format_number(minimal_uncertainty_momentum(p, c.number("sx2"))));
    if (!c.has("end")) c.set("end", f == "acf" ? "480" : f == "spectral-density" ? "1" : "10");
    const double start = c.number("start"), end = c.number("end");
    require(start < end, "--start must be < --end");
    if (!c.has("step")) c.set("step", f == "acf" ? "5" : format_number((end - start) / 100.0));
    const double step = c.number("step");
    require(step > 0, "--step must be > 0");
    const double intervals = std::floor((end - start) / step * (1.0 + 1e-12));
    require(intervals < 1e7, "range holds too many points");

    const SecondMomentInit init{c.number("sx2"), c.number("sp2"), c.number("spx")};
    const BathSpectrum spec{parse_spectrum_kind(c.text("spectrum")), c.number("cutoff"), nm};
    std::string axis = "t", column = f;
    std::function<double(double)> value;
    if (f == "variance") {
        init.validate();
        value = [&](double t) { return variance_closed_form(p, init, t); };
    } else if (f == "variance-short") {
        value = [&](double t) { return variance_short_time(p, init.sx2_0, t); };
        column = "variance";
    } else if (f == "classical") {
        value = [&](double t) { return classical_variance(p, t); };
        column = "variance";
    } else if (f == "delta") {
        value = [&](double t) { return delta_coefficient(p, nm, t); };
    } else if (f == "lambda") {
        value = [&](double t) { return lambda_coefficient(p, nm, t); };
    } else if (f == "acf") {
        value = [&](double tau) { return acf_model(nm, tau); };
        axis = "lag";
    } else {
        spec.validate();
        value = [&](double w) { return spectral_density(p, spec, w); };
        axis = "omega";
        column = "J";
    }
    CsvWriter csv(run.header());
    csv.header({axis, column});
    for (long i = 0; i <= long(intervals); ++i) {
        const double x = std::min(start + double(i) * step, end);
        csv.row(std::vector<double>{x, value(x)});
    }
    run.stage(c.text("out"), csv.str());
    run.finish();
}

// ---- simulate ----

void cmd_simulate(Run& run) {
    Config& c = run.cfg;
    const std::string mode = c.text("mode");
    const ModelParams p = model_from(c);
    const KernelKind kind = parse_kernel_kind(c.text("kernel"));
    const KernelSchedule schedule =
        kind == KernelKind::markov ? KernelSchedule::markov(p) : KernelSchedule::non_markov(p, nm_from(c));
    MomentState init = MomentState::gaussian(c.number("sx2"), c.number("sp2"), 0.5 * c.number("spx"));
    if (!c.has("x4")) c.set("x4", format_number(init(4, 0)));
    const bool gaussian = c.number("x4") == init(4, 0);
    init(4, 0) = c.number("x4");
    init.validate();
    const double t_end = c.number("t-end");
    const auto records = c.integer("records");
    require(records >= 2 && records <= 1'000'000, "--records must be in [2, 1e6]");
    const Potential potential =
        c.text("potential") == "harmonic" ? Potential::harmonic(c.number("omega0")) : Potential{};
    require(mode == "pde" || potential.kind == PotentialKind::none,
            "--potential harmonic is available in pde mode only");

    std::vector<std::string> cols{"t"};
    for (const auto& name : moment_columns()) cols.push_back(name);
    cols.push_back("kurtosis");

    if (mode == "moments") {
        const auto traj = evolve_moments(init, schedule, uniform_grid(t_end, std::size_t(records)));
        CsvWriter csv(run.header());
        csv.header(cols);
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            std::vector<double> row{traj.times[i]};
            append_moments(row, traj.states[i].vector());
            row.push_back(traj.states[i].kurtosis());
            csv.row(row);
        }
        run.stage(c.text("out"), csv.str());
    } else if (mode == "sde") {
        require(kind == KernelKind::markov, "sde mode supports only --kernel markov");
        McOptions o;
        o.n_paths = std::size_t(c.integer("paths"));
        o.dt = c.number("dt");
        o.record_times = uniform_grid(t_end, std::size_t(records));
        o.seed = resolve_seed(c);
        o.threads = unsigned(c.integer("threads"));
        const auto e = simulate_sde_markov(p, InitSampler::matching(init), o);
        for (const auto& name : moment_columns("se_")) cols.push_back(name);
        CsvWriter csv(run.header());
        csv.header(cols);
        for (std::size_t i = 0; i < e.times.size(); ++i) {
            std::vector<double> row{e.times[i]};
            append_moments(row, e.mean[i].vector());
            row.push_back(e.mean[i].kurtosis());
            append_moments(row, e.std_error[i]);
            csv.row(row);
        }
        run.stage(c.text("out"), csv.str());
    } else {
        require(gaussian, "pde mode starts from a Gaussian state; leave --x4 at 3 sx2^2");
        const auto nx = c.integer("nx"), np = c.integer("np");
        require(nx >= 16 && np >= 16 && nx <= 4096 && np <= 4096, "--nx and --np must be in [16, 4096]");
        const auto grid = auto_gaussian_grid(init, schedule, potential, t_end, int(nx), int(np), c.number("n-sigma"));
        PdeOptions o;
        o.dt = c.number("pde-dt");
        o.records = int(records);
        const auto tr = evolve_wigner_pde(grid, schedule, potential, t_end, o);
        cols.push_back("mass");
        cols.push_back("negativity");
        CsvWriter csv(run.header());
        csv.header(cols);
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            std::vector<double> row{tr.times[i]};
            append_moments(row, tr.moments[i].vector());
            row.push_back(tr.moments[i].kurtosis());
            row.push_back(tr.mass[i]);
            row.push_back(tr.negativity[i]);
            csv.row(row);
        }
        run.progress << "pde: " << tr.steps << " steps of dt = " << tr.dt << ", mass drift " << tr.mass_drift()
                     << "\n";
        if (tr.negativity_exceeded)
            run.progress << "warning: negative density reached " << tr.max_negativity
                         << " of the peak (reported, not clipped)\n";
        run.stage(c.text("out"), csv.str());
    }
    run.finish();
}

// ---- analyze ----

void cmd_analyze(Run& run) {
    Config& c = run.cfg;
    const std::string& bytes = run.read_input(c.text("input"));
    std::istringstream in(bytes);
    const PriceSeries s = load_prices(in);
    const SessionPolicy policy = parse_session_policy(c.text("policy"));
    const auto taus = c.integer_list("taus");
    if (!c.has("kurtosis-taus")) c.set("kurtosis-taus", c.text("taus"));
    const auto kurtosis_taus = c.integer_list("kurtosis-taus");
    const auto hist_taus = c.integer_list("hist-taus");
    if (!c.has("acf-tau")) c.set("acf-tau", std::to_string(s.base_minutes));
    const Minute acf_tau = c.integer("acf-tau");
    const Minute max_lag = c.integer("max-lag");
    const auto bins = c.integer("bins");
    require(bins >= 0 && bins <= 100000, "--bins must be in [0, 1e5]");

    const fs::path dir = c.text("out-dir");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    const std::string head = run.header();
    json summary;
    summary["series"] = {{"rows", s.size()}, {"sessions", s.sessions.size()}, {"base_minutes", s.base_minutes}};

    const auto sc = drift_vol_scaling(s, taus, policy);
    CsvWriter scaling(head);
    scaling.header({"tau", "mu", "sigma", "n"});
    for (std::size_t i = 0; i < sc.taus.size(); ++i)
        scaling.row(std::vector<double>{sc.taus[i], sc.mu[i], sc.sigma[i], double(sc.counts[i])});
    json js{{"diagnostic", sc.diagnostic}};
    if (sc.sigma_fit) {
        js["sigma_exponent"] = sc.sigma_fit->exponent;
        js["sigma_exponent_se"] = sc.sigma_fit->exponent_se;
        js["sigma_prefactor"] = sc.sigma_fit->prefactor;
        js["sigma_r2"] = sc.sigma_fit->r2;
    }
    if (sc.mu_fit) {
        js["mu_slope"] = sc.mu_fit->slope;
        js["mu_slope_se"] = sc.mu_fit->slope_se;
        js["mu_intercept"] = sc.mu_fit->intercept;
        js["mu_r2"] = sc.mu_fit->r2;
    }
    summary["scaling"] = js;

    CsvWriter hist(head);
    hist.header({"tau", "center", "density", "reference", "count"});
    summary["histogram"] = json::array();
    for (Minute tau : hist_taus) {
        const auto h = return_histogram(log_returns(s, tau, policy), int(bins));
        for (std::size_t i = 0; i < h.centers.size(); ++i)
            hist.row(std::vector<double>{double(tau), h.centers[i], h.density[i], h.reference[i], double(h.counts[i])});
        const auto t = h.tail_test();
        summary["histogram"].push_back({{"tau", tau},
                                        {"n", h.n},
                                        {"mean", h.mean},
                                        {"sd", h.sd},
                                        {"bins", h.centers.size()},
                                        {"tail_observed", t.observed},
                                        {"tail_expected", t.expected},
                                        {"tail_z", t.z},
                                        {"fat_tailed", h.fat_tailed()}});
    }

    const auto acf = empirical_acf(log_returns(s, acf_tau, policy, true), max_lag);
    CsvWriter acf_csv(head);
    acf_csv.header({"lag", "acf", "count"});
    for (std::size_t i = 0; i < acf.lags.size(); ++i)
        acf_csv.row(std::vector<double>{acf.lags[i], acf.values[i], double(acf.counts[i])});
    summary["acf"] = {{"tau", acf_tau}, {"max_lag", max_lag}, {"omitted_lags", acf.omitted_lags}};

    const auto k = empirical_kurtosis(s, kurtosis_taus, policy);
    CsvWriter kurt(head);
    kurt.header({"tau", "kurtosis", "n"});
    for (std::size_t i = 0; i < k.taus.size(); ++i)
        kurt.row(std::vector<double>{k.taus[i], k.kurtosis[i], double(k.counts[i])});
    summary["kurtosis"] = {{"diagnostics", k.diagnostics}};
    summary["version"] = kVersion;
    summary["input_sha256"] = sha256_hex(bytes);

    run.stage((dir / "scaling.csv").string(), scaling.str());
    run.stage((dir / "histogram.csv").string(), hist.str());
    run.stage((dir / "acf.csv").string(), acf_csv.str());
    run.stage((dir / "kurtosis.csv").string(), kurt.str());
    run.stage((dir / "summary.json").string(), summary.dump(2) + "\n");
    run.finish();
}

// ---- fit ----

std::vector<double> required_column(const NumericTable& t, std::initializer_list<const char*> names) {
    for (const char* n : names)
        if (auto i = t.find(n)) return t.column(*i);
    throw DataError(std::string("missing column '") + *names.begin() + "'");
}

void cmd_fit(Run& run) {
    Config& c = run.cfg;
    const std::string& bytes = run.read_input(c.text("input"));
    const NumericTable table = parse_numeric_table(bytes);
    if (c.text("kind") == "auto") {
        if (table.find("acf"))
            c.set("kind", "acf");
        else if (table.find("kurtosis"))
            c.set("kind", "kurtosis");
        else
            throw DataError("cannot infer the fit kind: need an 'acf' or 'kurtosis' column");
    }
    json r;
    r["kind"] = c.text("kind");
    if (c.text("kind") == "acf") {
        AcfEstimate a;
        a.lags = required_column(table, {"lag", "tau"});
        a.values = required_column(table, {"acf"});
        if (auto i = table.find("count"))
            for (double v : table.column(*i)) a.counts.push_back(std::size_t(std::max(0.0, v)));
        else
            a.counts.assign(a.lags.size(), 1);
        AcfFitOptions o;
        const int guesses = int(c.has("xi")) + int(c.has("eta")) + int(c.has("Omega"));
        require(guesses == 0 || guesses == 3, "a starting guess needs all of --xi, --eta and --Omega");
        if (guesses == 3) o.guess = nm_from(c);
        o.weights = parse_acf_weights(c.text("weights"));
        o.base_minutes = c.number("base");
        o.max_iterations = int(c.integer("max-iter"));
        const AcfFit f = fit_acf(a, o);
        r["converged"] = f.converged;
        r["degenerate"] = f.degenerate;
        r["grid_fallback"] = f.grid_fallback;
        r["xi"] = f.nm.xi;
        r["eta"] = f.nm.eta;
        r["Omega"] = f.nm.Omega;
        r["std_error"] = {{"xi", f.std_error[0]}, {"eta", f.std_error[1]}, {"Omega", f.std_error[2]}};
        r["residual"] = f.residual;
        r["initial_residual"] = f.initial_residual;
        r["iterations"] = f.iterations;
        r["points"] = f.points;
        r["diagnostic"] = f.diagnostic;
    } else {
        const auto tau = required_column(table, {"tau"});
        const auto kappa = required_column(table, {"kurtosis"});
        const double lo = c.has("tau-min") ? c.number("tau-min") : -INFINITY;
        const double hi = c.has("tau-max") ? c.number("tau-max") : INFINITY;
        std::vector<double> x, y;
        for (std::size_t i = 0; i < tau.size(); ++i)
            if (tau[i] >= lo && tau[i] <= hi) {
                x.push_back(tau[i]);
                y.push_back(kappa[i]);
            }
        const DecayFit f = fit_kurtosis_decay(x, y);
        r["converged"] = f.converged;
        r["amplitude"] = f.amplitude;
        r["rate"] = f.rate;
        r["rate_se"] = f.rate_se;
        r["residual"] = f.residual;
        r["r2"] = f.r2;
        r["used"] = f.used;
        r["excluded_taus"] = f.excluded_taus;
        r["diagnostic"] = f.diagnostic;
    }
    r["version"] = kVersion;
    r["input_sha256"] = sha256_hex(bytes);
    r["config_sha256"] = run.config_digest();
    if (!r["converged"].get<bool>()) run.progress << "fit did not converge: " << r["diagnostic"].get<std::string>() << "\n";
    run.stage(c.text("out"), r.dump(2) + "\n");
    run.finish();
}

// ---- synth ----

void cmd_synth(Run& run) {
    Config& c = run.cfg;
    const std::uint64_t seed = resolve_seed(c);
    const auto n = c.integer("n");
    require(n >= 2 && n <= 100'000'000, "--n must be in [2, 1e8]");
    const Minute dt = c.integer("dt");
    require(dt >= 1, "--dt must be >= 1");
    const double s0 = c.number("s0");
    PriceSeries s;
    if (c.text("kind") == "gbm")
        s = synth_gbm(c.number("mu"), c.number("sigma"), std::size_t(n), dt, seed, s0);
    else
        s = prices_from_returns(synth_colored(nm_from(c), std::size_t(n), dt, c.number("noise"), seed), s0);
    CsvWriter csv(run.header());
    csv.header({"timestamp", "close"});
    for (std::size_t i = 0; i < s.size(); ++i)
        csv.row(std::vector<std::string>{format_timestamp(s.timestamps[i]), format_number(s.close[i])});
    run.stage(c.text("out"), csv.str());
    run.finish();
}

}  // namespace

const std::vector<CommandSpec>& command_specs() {
    static const std::vector<CommandSpec> specs = [] {
        const auto var = presets::variance_params();
        std::vector<CommandSpec> v;
        v.push_back({"eval",
                     "Tabulate a closed-form quantity over a grid of t, lag or omega",
                     concat(std::vector<FlagSpec>{{"formula", "", "name", "quantity to tabulate",
                                                   {"variance", "variance-short", "classical", "delta", "lambda",
                                                    "acf", "spectral-density"},
                                                   true, true}},
                            model_flags(var), nm_flags(true),
                            std::vector<FlagSpec>{
                                {"sx2", format_number(presets::kVarianceSx2), "(ln S)^2", "initial variance sigma_x^2(0)"},
                                {"sp2", "", "dimensionless", "initial sigma_p^2(0) (default: minimal uncertainty)"},
                                {"spx", "0", "ln S", "initial cross moment <XP + PX>"},
                                {"spectrum", "ohmic", "name", "bath spectral density", {"ohmic", "ohmic-lorentz", "composite"}},
                                {"cutoff", "0", "1/time", "Lorentz cutoff of ohmic-lorentz"},
                                {"start", "0", "time | minutes | 1/time", "first grid point (t, lag or omega)"},
                                {"end", "", "time | minutes | 1/time", "last grid point (default 10; acf 480; spectral-density 1)"},
                                {"step", "", "time | minutes | 1/time", "grid spacing (default: 100 intervals; acf 5)"},
                                out_flag("output CSV"), manifest_flag()}),
                     cmd_eval});
        v.push_back({"simulate",
                     "Evolve the phase-space moments by ODE, Monte Carlo or the Wigner PDE",
                     concat(std::vector<FlagSpec>{{"mode", "", "name", "solver", {"moments", "sde", "pde"}, true, true}},
                            model_flags(presets::kKurtosisParams),
                            std::vector<FlagSpec>{{"kernel", "markov", "name", "diffusion schedule", {"markov", "non-markov"}}},
                            nm_flags(true),
                            std::vector<FlagSpec>{
                                {"sx2", "0.5", "(ln S)^2", "initial <X^2>"},
                                {"sp2", "0.5", "dimensionless", "initial <P^2>"},
                                {"spx", "0", "ln S", "initial <XP + PX>"},
                                {"x4", "", "(ln S)^4", "initial <X^4> (default: Gaussian 3 sx2^2)"},
                                {"t-end", "10", "time", "final time"},
                                {"records", "101", "count", "output rows, uniformly spaced including 0 and t-end"},
                                {"paths", "20000", "count", "sde: ensemble size"},
                                {"dt", "0.001", "time", "sde: Euler-Maruyama step"},
                                {"seed", "", "integer", "sde: RNG seed (fallback: QBM_SEED)"},
                                {"threads", "0", "count", "sde: worker threads, 0 for all cores (results do not depend on it)"},
                                {"nx", "128", "count", "pde: cells along x"},
                                {"np", "128", "count", "pde: cells along p"},
                                {"n-sigma", "8", "standard deviations", "pde: half-width of the grid"},
                                {"pde-dt", "0", "time", "pde: time step, 0 for the stability bound"},
                                {"potential", "none", "name", "pde: external potential", {"none", "harmonic"}},
                                {"omega0", "0", "1/time", "pde: harmonic frequency"},
                                out_flag("trajectory CSV"), manifest_flag()}),
                     cmd_simulate});
        v.push_back({"analyze",
                     "Empirical statistics of a price series: scaling, histograms, ACF and kurtosis",
                     {{"input", "", "path", "prices CSV (timestamp,close[,session])", {}, true, true},
                      {"out-dir", "", "path", "directory for the statistics files", {}, false, true},
                      {"taus", "5:100:5", "minutes", "horizons for mu and sigma (list a,b,c or range start:stop:step)"},
                      {"kurtosis-taus", "", "minutes", "horizons for the kurtosis (default: --taus)"},
                      {"hist-taus", "5,20,60", "minutes", "horizons for the return histograms"},
                      {"bins", "0", "count", "histogram bins, 0 for the Freedman-Diaconis width"},
                      {"acf-tau", "", "minutes", "return horizon of the ACF (default: bar spacing)"},
                      {"max-lag", "480", "minutes", "largest ACF lag"},
                      {"policy", "intraday", "name", "returns across session gaps", {"intraday", "contiguous"}},
                      manifest_flag()},
                     cmd_analyze});
        v.push_back({"fit",
                     "Fit the ACF model or the kurtosis decay to an estimator CSV",
                     concat(std::vector<FlagSpec>{
                                {"input", "", "path", "acf CSV (lag,acf[,count]) or kurtosis CSV (tau,kurtosis[,n])", {}, true, true},
                                {"kind", "auto", "name", "estimator type, auto reads the header", {"auto", "acf", "kurtosis"}}},
                            nm_flags(false),
                            std::vector<FlagSpec>{
                                {"weights", "uniform", "name", "acf: residual weights", {"uniform", "count-weighted"}},
                                {"base", "0", "minutes", "acf: lag sampling step, 0 for the smallest spacing"},
                                {"max-iter", "200", "count", "acf: iteration cap"},
                                {"tau-min", "", "time", "kurtosis: window start"},
                                {"tau-max", "", "time", "kurtosis: window end"},
                                out_flag("fit report JSON"), manifest_flag()}),
                     cmd_fit});
        v.push_back({"synth",
                     "Generate a synthetic minute price series",
                     concat(std::vector<FlagSpec>{{"kind", "", "name", "generator", {"gbm", "colored"}, true, true},
                                                  {"seed", "", "integer", "RNG seed (fallback: QBM_SEED)"},
                                                  {"n", "100000", "count", "number of prices"},
                                                  {"dt", "1", "minutes", "bar spacing"},
                                                  {"s0", "100", "price", "first price"},
                                                  {"mu", "0", "1/minute", "gbm: drift"},
                                                  {"sigma", "0.001", "1/sqrt(minute)", "gbm: volatility"},
                                                  {"noise", "0", "ln S/minute", "colored: white-noise standard deviation"}},
                            nm_flags(true), std::vector<FlagSpec>{out_flag("prices CSV"), manifest_flag()}),
                     cmd_synth});
        return v;
    }();
    return specs;
}

}  // namespace qbm::cli
