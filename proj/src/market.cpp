#include "qbm/market.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/rng.hpp"

namespace qbm {

std::optional<Minute> parse_timestamp(const std::string& text) {
    int y, mo, d, h, mi, s = 0, used = 0;
    char sep;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &used) != 6) return {};
    if (sep != 'T' && sep != ' ') return {};
    std::size_t pos = std::size_t(used);
    if (pos < text.size() && text[pos] == ':') {
        int more = 0;
        if (std::sscanf(text.c_str() + pos, ":%2d%n", &s, &more) != 1 || more != 3) return {};
        pos += 3;
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) return {};
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || s != 0) return {};
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(d)}};
    if (!ymd.ok()) return {};
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return Minute(days) * 1440 + h * 60 + mi;
}

std::string format_timestamp(Minute t) {
    using namespace std::chrono;
    Minute days = t >= 0 ? t / 1440 : -((-t + 1439) / 1440);
    const Minute rem = t - days * 1440;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()), int(rem / 60), int(rem % 60));
    return buf;
}

std::vector<int> PriceSeries::session_of_rows() const {
    std::vector<int> out(size(), -1);
    for (std::size_t s = 0; s < sessions.size(); ++s)
        for (std::size_t i = sessions[s].first; i <= sessions[s].last; ++i) out[i] = int(s);
    return out;
}

void PriceSeries::validate() const {
    if (close.empty()) throw DataError("PriceSeries: empty");
    if (timestamps.size() != close.size()) throw DataError("PriceSeries: timestamp and price counts differ");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!(close[i] > 0) || !std::isfinite(close[i]))
            throw DataError("PriceSeries: non-positive price at row " + std::to_string(i));
        if (i > 0 && timestamps[i] <= timestamps[i - 1])
            throw DataError("PriceSeries: timestamps not strictly increasing at row " + std::to_string(i));
    }
    std::size_t next = 0;
    for (const auto& s : sessions) {
        if (s.first != next || s.last < s.first || s.last >= size())
            throw DataError("PriceSeries: sessions do not tile the rows");
        next = s.last + 1;
    }
    if (next != size()) throw DataError("PriceSeries: sessions do not cover every row");
}

PriceSeries make_price_series(std::vector<Minute> timestamps, std::vector<double> close,
                              std::vector<std::string> session_labels) {
    PriceSeries s;
    s.timestamps = std::move(timestamps);
    s.close = std::move(close);
    if (s.close.empty()) throw DataError("PriceSeries: empty");
    if (!session_labels.empty() && session_labels.size() != s.close.size())
        throw DataError("PriceSeries: session labels do not match rows");

    Minute base = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const Minute d = s.timestamps[i] - s.timestamps[i - 1];
        if (d > 0 && (base == 0 || d < base)) base = d;
    }
    s.base_minutes = base > 0 ? base : 1;

    std::size_t first = 0;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        bool cut = i == s.size();
        if (!cut) {
            cut = session_labels.empty()
                      ? s.timestamps[i] - s.timestamps[i - 1] > kSessionGapFactor * s.base_minutes
                      : session_labels[i] != session_labels[i - 1];
        }
        if (cut) {
            s.sessions.push_back({first, i - 1, s.timestamps[first], s.timestamps[i - 1]});
            first = i;
        }
    }
    s.validate();
    return s;
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
    throw DataError("line " + std::to_string(line) + ": " + what);
}

}  // namespace

PriceSeries load_prices(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false, with_session = false;
    std::vector<Minute> ts;
    std::vector<double> close;
    std::vector<std::string> labels;
    std::vector<std::size_t> lines;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_csv(line);
        if (!have_header) {
            if (fields.size() < 2 || fields.size() > 3 || fields[0] != "timestamp" || fields[1] != "close" ||
                (fields.size() == 3 && fields[2] != "session"))
                fail_line(line_no, "expected header 'timestamp,close[,session]', got '" + line + "'");
            with_session = fields.size() == 3;
            have_header = true;
            continue;
        }
        if (fields.size() != (with_session ? 3u : 2u))
            fail_line(line_no, "expected " + std::to_string(with_session ? 3 : 2) + " fields, got " +
                                   std::to_string(fields.size()));
        const auto t = parse_timestamp(fields[0]);
        if (!t) fail_line(line_no, "invalid timestamp '" + fields[0] + "'");
        double price = 0;
        const auto& f = fields[1];
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), price);
        if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(price))
            fail_line(line_no, "invalid price '" + f + "'");
        if (!(price > 0)) fail_line(line_no, "price must be positive, got " + f);
        if (!ts.empty()) {
            if (*t == ts.back()) fail_line(line_no, "duplicate timestamp " + fields[0]);
            if (*t < ts.back())
                fail_line(line_no, "timestamp " + fields[0] + " is out of order (previous row at line " +
                                       std::to_string(lines.back()) + ")");
        }
        ts.push_back(*t);
        close.push_back(price);
        lines.push_back(line_no);
        if (with_session) {
            if (fields[2].empty()) fail_line(line_no, "empty session label");
            labels.push_back(fields[2]);
        }
    }
    if (!have_header) throw DataError("empty file: no header");
    if (ts.empty()) throw DataError("empty file: no data rows");
    return make_price_series(std::move(ts), std::move(close), std::move(labels));
}

PriceSeries load_prices_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return load_prices(in);
}

SessionPolicy parse_session_policy(const std::string& name) {
    if (name == "intraday" || name == "intraday-only") return SessionPolicy::intraday;
    if (name == "contiguous") return SessionPolicy::contiguous;
    throw std::invalid_argument("unknown session policy '" + name + "' (intraday | contiguous)");
}

Sampling parse_sampling(const std::string& name) {
    if (name == "overlapping") return Sampling::overlapping;
    if (name == "non-overlapping") return Sampling::non_overlapping;
    throw std::invalid_argument("unknown sampling '" + name + "' (overlapping | non-overlapping)");
}

double ReturnSeries::mean() const {
    double s = 0;
    for (double v : values) s += v;
    return values.empty() ? 0.0 : s / double(values.size());
}

double ReturnSeries::variance() const {
    const double m = mean();
    double s = 0;
    for (double v : values) s += (v - m) * (v - m);
    return values.empty() ? 0.0 : s / double(values.size());
}

ReturnSeries remove_drift(ReturnSeries returns) {
    const double m = returns.mean();
    for (double& v : returns.values) v -= m;
    returns.drift_removed = true;
    return returns;
}

ReturnSeries log_returns(const PriceSeries& series, Minute tau, SessionPolicy policy, bool remove,
                         Sampling sampling) {
    require(tau > 0, "log_returns: tau must be positive");
    require(tau % series.base_minutes == 0, "log_returns: tau must be a multiple of the base resolution (" +
                                                std::to_string(series.base_minutes) + " min)");
    ReturnSeries out;
    out.tau_minutes = tau;
    out.base_minutes = series.base_minutes;
    const bool intraday = policy == SessionPolicy::intraday;
    const auto row_session = series.session_of_rows();
    const auto& ts = series.timestamps;

    std::size_t j = 0;
    Minute last_end = std::numeric_limits<Minute>::min();
    int last_session = -2;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Minute target = ts[i] + tau;
        j = std::max(j, i + 1);
        while (j < series.size() && ts[j] < target) ++j;
        if (j >= series.size() || ts[j] != target) continue;
        if (intraday && row_session[i] != row_session[j]) continue;
        const int session = intraday ? row_session[i] : -1;
        if (sampling == Sampling::non_overlapping) {
            if (session != last_session) last_end = std::numeric_limits<Minute>::min();
            if (ts[i] < last_end) continue;
            last_end = target;
            last_session = session;
        }
        out.values.push_back((std::log(series.close[j]) - std::log(series.close[i])) / double(tau));
        out.starts.push_back(ts[i]);
        out.sessions.push_back(session);
    }
    if (out.values.empty())
        throw DataError("log_returns: no admissible pairs at tau = " + std::to_string(tau) + " min" +
                        (intraday ? " (tau exceeds every session)" : ""));
    return remove ? remove_drift(std::move(out)) : out;
}

ScalingResult drift_vol_scaling(const PriceSeries& series, const std::vector<Minute>& taus, SessionPolicy policy) {
    ScalingResult r;
    // Increments below this are log round-off of an exactly exponential path.
    double log_scale = 1.0;
    for (double c : series.close) log_scale = std::max(log_scale, std::abs(std::log(c)));
    const double sigma_floor = 64.0 * std::numeric_limits<double>::epsilon() * log_scale;
    for (Minute tau : taus) {
        const ReturnSeries ret = log_returns(series, tau, policy, false);
        const double n = double(ret.size());
        double mean = 0;
        for (double v : ret.values) mean += v * double(tau);
        mean /= n;
        double ss = 0;
        for (double v : ret.values) ss += (v * double(tau) - mean) * (v * double(tau) - mean);
        r.taus.push_back(double(tau));
        r.mu.push_back(mean);
        const double sd = ret.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        r.sigma.push_back(sd > sigma_floor ? sd : 0.0);
        r.counts.push_back(ret.size());
    }
    if (taus.size() < 3) {
        r.diagnostic = "fewer than 3 horizons: fits refused";
        return r;
    }
    r.mu_fit = fit_linear(r.taus, r.mu);
    const bool sigma_positive = std::all_of(r.sigma.begin(), r.sigma.end(), [](double s) { return s > 0; });
    if (sigma_positive)
        r.sigma_fit = fit_power_law(r.taus, r.sigma);
    else
        r.diagnostic = "sigma(tau) is zero at some horizon: power-law fit refused";
    return r;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double Histogram::reference_error(std::size_t i) const {
    const double p = normal_cdf((edges[i + 1] - mean) / sd) - normal_cdf((edges[i] - mean) / sd);
    return std::sqrt(double(n) * p * (1.0 - p)) / (double(n) * width());
}

std::vector<std::size_t> Histogram::fat_tail_bins(double k, double z) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (std::abs(centers[i] - mean) <= k * sd) continue;
        const double err = reference_error(i);
        if (density[i] - reference[i] > z * err && counts[i] > 0) out.push_back(i);
    }
    return out;
}

Histogram::TailTest Histogram::tail_test(double k) const {
    TailTest t;
    std::size_t inside = 0, tail = 0;
    double p = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        inside += counts[i];
        if (std::abs(centers[i] - mean) <= k * sd) continue;
        tail += counts[i];
        p += normal_cdf((edges[i + 1] - mean) / sd) - normal_cdf((edges[i] - mean) / sd);
    }
    tail += n - inside;
    p += 2.0 * normal_cdf(-6.0);
    t.observed = double(tail) / double(n);
    t.expected = p;
    t.z = (t.observed - p) / std::sqrt(p * (1.0 - p) / double(n));
    return t;
}

Histogram return_histogram(const ReturnSeries& returns, int bins) {
    require(bins >= 0, "return_histogram: bins must be >= 0");
    const std::size_t n = returns.size();
    if (n < 100) throw DataError("return_histogram: need at least 100 samples, got " + std::to_string(n));
    Histogram h;
    h.n = n;
    h.mean = returns.mean();
    h.sd = std::sqrt(returns.variance());
    if (!(h.sd > 0)) throw DataError("return_histogram: degenerate variance (all samples equal)");

    if (bins == 0) {
        std::vector<double> v = returns.values;
        const auto q = [&](double f) {
            auto it = v.begin() + std::ptrdiff_t(f * double(n - 1));
            std::nth_element(v.begin(), it, v.end());
            return *it;
        };
        const double iqr = q(0.75) - q(0.25);
        const double cube = std::cbrt(double(n));
        const double width = iqr > 0 ? 2.0 * iqr / cube : 3.49 * h.sd / cube;
        bins = int(std::clamp(std::ceil(12.0 * h.sd / width), 10.0, 2000.0));
    }
    const double lo = h.mean - 6.0 * h.sd, hi = h.mean + 6.0 * h.sd;
    const double w = (hi - lo) / bins;
    h.counts.assign(std::size_t(bins), 0);
    for (double v : returns.values) {
        if (v < lo || v > hi) continue;
        const auto b = std::min<std::size_t>(std::size_t((v - lo) / w), std::size_t(bins - 1));
        ++h.counts[b];
    }
    const double norm = 1.0 / (h.sd * std::sqrt(2.0 * std::numbers::pi));
    for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + b * w);
    for (int b = 0; b < bins; ++b) {
        const double c = lo + (b + 0.5) * w;
        const double z = (c - h.mean) / h.sd;
        h.centers.push_back(c);
        h.density.push_back(double(h.counts[std::size_t(b)]) / (double(n) * w));
        h.reference.push_back(norm * std::exp(-0.5 * z * z));
    }
    return h;
}

AcfEstimate empirical_acf(const ReturnSeries& returns, Minute max_lag) {
    require(max_lag >= 0, "empirical_acf: max_lag must be >= 0");
    const std::size_t n = returns.size();
    if (n == 0) throw DataError("empirical_acf: empty return series");
    require(max_lag < returns.starts.back() - returns.starts.front() + returns.base_minutes,
            "empirical_acf: max_lag must be below the sample span");
    const ReturnSeries r = returns.drift_removed ? returns : remove_drift(returns);
    const auto& st = r.starts;

    AcfEstimate acf;
    const Minute step = r.base_minutes;
    for (Minute lag = 0; lag <= max_lag; lag += step) {
        double sum = 0;
        std::size_t count = 0, b = 0;
        for (std::size_t a = 0; a < n; ++a) {
            const Minute target = st[a] + lag;
            b = std::max(b, a);
            while (b < n && st[b] < target) ++b;
            if (b >= n) break;
            if (st[b] != target || r.sessions[a] != r.sessions[b]) continue;
            sum += r.values[a] * r.values[b];
            ++count;
        }
        if (count == 0) {
            acf.omitted_lags.push_back(double(lag));
            continue;
        }
        acf.lags.push_back(double(lag));
        acf.values.push_back(sum / double(n));
        acf.counts.push_back(count);
    }
    return acf;
}

AcfEstimate normalized_acf(const AcfEstimate& acf) {
    if (acf.lags.empty() || acf.lags.front() != 0.0 || !(acf.values.front() > 0))
        throw DataError("normalized_acf: needs a positive lag-0 value");
    AcfEstimate out = acf;
    for (double& v : out.values) v /= acf.values.front();
    return out;
}

KurtosisEstimate empirical_kurtosis(const PriceSeries& series, const std::vector<Minute>& taus,
                                    SessionPolicy policy) {
    KurtosisEstimate k;
    for (Minute tau : taus) {
        ReturnSeries r;
        try {
            r = log_returns(series, tau, policy, true, Sampling::non_overlapping);
        } catch (const DataError& e) {
            k.diagnostics.push_back("tau = " + std::to_string(tau) + ": " + e.what());
            continue;
        }
        if (r.size() < kMinKurtosisSamples) {
            k.diagnostics.push_back("tau = " + std::to_string(tau) + ": only " + std::to_string(r.size()) +
                                    " samples (need " + std::to_string(kMinKurtosisSamples) + ")");
            continue;
        }
        double m2 = 0, m4 = 0;
        for (double v : r.values) {
            const double v2 = v * v;
            m2 += v2;
            m4 += v2 * v2;
        }
        m2 /= double(r.size());
        m4 /= double(r.size());
        if (!(m2 > 0)) {
            k.diagnostics.push_back("tau = " + std::to_string(tau) + ": zero variance");
            continue;
        }
        k.taus.push_back(double(tau));
        k.kurtosis.push_back(m4 / (m2 * m2) - 3.0);
        k.counts.push_back(r.size());
    }
    return k;
}

Minute synthetic_epoch() { return *parse_timestamp("2000-01-03T09:30"); }

PriceSeries synth_gbm(double mu, double sigma, std::size_t n, Minute dt, std::uint64_t seed, double s0) {
    require(n >= 2, "synth_gbm: need n >= 2");
    require(dt >= 1, "synth_gbm: dt must be a positive number of minutes");
    require(sigma >= 0 && std::isfinite(mu), "synth_gbm: need sigma >= 0 and finite mu");
    require(s0 > 0, "synth_gbm: s0 must be positive");
    Engine rng = make_engine(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double h = double(dt);
    const double drift = (mu - 0.5 * sigma * sigma) * h, vol = sigma * std::sqrt(h);
    std::vector<Minute> ts(n);
    std::vector<double> close(n);
    double lnS = std::log(s0);
    const Minute t0 = synthetic_epoch();
    for (std::size_t k = 0; k < n; ++k) {
        ts[k] = t0 + Minute(k) * dt;
        close[k] = std::exp(lnS);
        lnS += drift + vol * normal(rng);
    }
    return make_price_series(std::move(ts), std::move(close));
}

ReturnSeries synth_colored(const NonMarkovParams& nm, std::size_t n, Minute dt, double base_noise,
                           std::uint64_t seed) {
    nm.validate();
    require(dt >= 1, "synth_colored: dt must be a positive number of minutes");
    require(base_noise >= 0, "synth_colored: base_noise must be >= 0");
    require(nm.eta * double(dt) <= 0.5, "synth_colored: filter unstable, need eta * dt <= 0.5");
    require(double(n) >= 10.0 / (nm.eta * double(dt)), "synth_colored: need n >= 10 / (eta dt)");

    Engine rng = make_engine(seed, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double h = double(dt);
    const double phi = std::exp(-nm.eta * h);
    const double half_var = 0.5 * nm.xi * nm.xi;
    const double innov = std::sqrt(half_var * (1.0 - phi * phi));
    const double cr = phi * std::cos(2.0 * nm.Omega * h), ci = phi * std::sin(2.0 * nm.Omega * h);

    double a = std::sqrt(half_var) * normal(rng);
    double re = std::sqrt(half_var) * normal(rng), im = std::sqrt(half_var) * normal(rng);
    ReturnSeries out;
    out.tau_minutes = dt;
    out.base_minutes = dt;
    out.values.resize(n);
    out.starts.resize(n);
    out.sessions.assign(n, 0);
    const Minute t0 = synthetic_epoch();
    for (std::size_t k = 0; k < n; ++k) {
        out.starts[k] = t0 + Minute(k) * dt;
        out.values[k] = base_noise * normal(rng) + a + re;
        const double ea = normal(rng), er = normal(rng), ei = normal(rng);
        a = phi * a + innov * ea;
        const double re_next = cr * re - ci * im + innov * er;
        im = ci * re + cr * im + innov * ei;
        re = re_next;
    }
    return out;
}

PriceSeries prices_from_returns(const ReturnSeries& returns, double s0) {
    require(s0 > 0, "prices_from_returns: s0 must be positive");
    const std::size_t n = returns.size();
    require(n > 0, "prices_from_returns: empty return series");
    for (std::size_t k = 1; k < n; ++k)
        require(returns.starts[k] - returns.starts[k - 1] == returns.tau_minutes,
                "prices_from_returns: returns must be contiguous and non-overlapping");
    std::vector<Minute> ts(n + 1);
    std::vector<double> close(n + 1);
    double lnS = std::log(s0);
    for (std::size_t k = 0; k <= n; ++k) {
        ts[k] = k < n ? returns.starts[k] : returns.starts[n - 1] + returns.tau_minutes;
        close[k] = std::exp(lnS);
        if (k < n) lnS += returns.values[k] * double(returns.tau_minutes);
    }
    return make_price_series(std::move(ts), std::move(close));
}

}  // namespace qbm
