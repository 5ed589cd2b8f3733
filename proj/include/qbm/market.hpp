#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qbm/fit.hpp"
#include "qbm/params.hpp"

namespace qbm {

/// Minutes since 1970-01-01T00:00 (UTC, no leap seconds).
using Minute = std::int64_t;

/// Parses `YYYY-MM-DDTHH:MM[:SS][Z]` (a space may replace `T`). Seconds must be zero.
std::optional<Minute> parse_timestamp(const std::string& text);
std::string format_timestamp(Minute t);

/// Trading window, as inclusive row range and timestamps.
struct Session {
    std::size_t first = 0;
    std::size_t last = 0;
    Minute open = 0;
    Minute close = 0;
};

struct PriceSeries {
    std::vector<Minute> timestamps;
    std::vector<double> close;
    std::vector<Session> sessions;
    Minute base_minutes = 1;  // bar spacing

    std::size_t size() const { return close.size(); }
    /// Session index of each row.
    std::vector<int> session_of_rows() const;
    /// Throws DataError on an invariant violation.
    void validate() const;
};

/// Gaps longer than this multiple of the base spacing start a new session
/// when the input has no session column.
inline constexpr int kSessionGapFactor = 5;

/// Reads `timestamp,close[,session]` CSV. Lines starting with `#` and blank
/// lines are skipped. Errors are DataError with the offending line number.
PriceSeries load_prices(std::istream& in);
PriceSeries load_prices_file(const std::string& path);

/// Builds a series from timestamps and prices, inferring sessions from gaps.
PriceSeries make_price_series(std::vector<Minute> timestamps, std::vector<double> close,
                              std::vector<std::string> session_labels = {});

enum class SessionPolicy { intraday, contiguous };
enum class Sampling { overlapping, non_overlapping };

SessionPolicy parse_session_policy(const std::string& name);
Sampling parse_sampling(const std::string& name);

struct ReturnSeries {
    Minute tau_minutes = 1;
    std::vector<double> values;    // [ln S(t + tau) - ln S(t)] / tau
    std::vector<Minute> starts;    // t of each sample
    std::vector<int> sessions;     // session of each sample, -1 under the contiguous policy
    bool drift_removed = false;
    Minute base_minutes = 1;

    std::size_t size() const { return values.size(); }
    double mean() const;
    /// Second central moment (divide by n).
    double variance() const;
};

ReturnSeries log_returns(const PriceSeries& series, Minute tau, SessionPolicy policy = SessionPolicy::intraday,
                         bool remove_drift = false, Sampling sampling = Sampling::overlapping);

/// Subtracts the sample mean.
ReturnSeries remove_drift(ReturnSeries returns);

struct ScalingResult {
    std::vector<double> taus;
    std::vector<double> mu;     // mean of ln S(t + tau) - ln S(t)
    std::vector<double> sigma;  // standard deviation of the same increments
    std::vector<std::size_t> counts;
    std::optional<PowerLawFit> sigma_fit;
    std::optional<LinearFit> mu_fit;
    std::string diagnostic;  // why a fit was refused
};

/// Un-normalized increments at each horizon; sigma is fitted as a power law,
/// mu as a straight line in tau.
ScalingResult drift_vol_scaling(const PriceSeries& series, const std::vector<Minute>& taus,
                                SessionPolicy policy = SessionPolicy::intraday);

struct Histogram {
    std::vector<double> edges;      // bins + 1
    std::vector<double> centers;
    std::vector<double> density;    // count / (n * width)
    std::vector<std::size_t> counts;
    std::vector<double> reference;  // matched Gaussian density at the centers
    std::size_t n = 0;              // all samples, including those outside the range
    double mean = 0.0;
    double sd = 0.0;

    double width() const { return edges[1] - edges[0]; }
    /// Binomial standard error of the density in bin i under the reference.
    double reference_error(std::size_t i) const;
    /// Bins beyond k standard deviations whose density exceeds the reference
    /// by more than z binomial errors.
    std::vector<std::size_t> fat_tail_bins(double k = 3.0, double z = 3.0) const;

    struct TailTest {
        double observed = 0.0;  // fraction of samples beyond k sd (including outside the range)
        double expected = 0.0;  // Gaussian probability of the same region
        double z = 0.0;         // binomial z-score of observed - expected
    };
    /// Pooled test over every bin whose center lies beyond k sd.
    TailTest tail_test(double k = 3.0) const;
    bool fat_tailed(double k = 3.0, double z = 4.0) const { return tail_test(k).z > z; }
};

/// Density histogram over mean +- 6 sd. `bins` = 0 picks the Freedman-Diaconis width.
Histogram return_histogram(const ReturnSeries& returns, int bins = 0);

struct AcfEstimate {
    std::vector<double> lags;  // minutes
    std::vector<double> values;
    std::vector<std::size_t> counts;
    std::vector<double> omitted_lags;  // lags with no admissible pair
};

/// Biased product-moment estimator (sum over pairs divided by n) of the
/// drift-removed returns, lags stepping at the base resolution.
AcfEstimate empirical_acf(const ReturnSeries& returns, Minute max_lag);
/// Same, divided by the lag-0 value.
AcfEstimate normalized_acf(const AcfEstimate& acf);

struct KurtosisEstimate {
    std::vector<double> taus;
    std::vector<double> kurtosis;  // excess
    std::vector<std::size_t> counts;
    std::vector<std::string> diagnostics;
};

inline constexpr std::size_t kMinKurtosisSamples = 1000;

/// Excess kurtosis of drift-removed, non-overlapping tau-returns.
KurtosisEstimate empirical_kurtosis(const PriceSeries& series, const std::vector<Minute>& taus,
                                    SessionPolicy policy = SessionPolicy::intraday);

/// Origin used for synthetic timestamps (2000-01-03T09:30).
Minute synthetic_epoch();

/// Exact geometric Brownian motion sampled every `dt` minutes, one session.
PriceSeries synth_gbm(double mu, double sigma, std::size_t n, Minute dt, std::uint64_t seed, double s0 = 100.0);

/// Returns whose population autocovariance is base_noise^2 at lag 0 plus
/// acf_model(nm, tau) at every lag: white noise plus an AR(1) envelope term
/// and a damped rotation at 2 Omega.
ReturnSeries synth_colored(const NonMarkovParams& nm, std::size_t n, Minute dt, double base_noise,
                           std::uint64_t seed);

/// Integrates tau-normalized returns back to prices (s0 at the first start).
PriceSeries prices_from_returns(const ReturnSeries& returns, double s0 = 100.0);

}  // namespace qbm
