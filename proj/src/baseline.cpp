#include "dcfl/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dcfl/errors.hpp"

namespace dcfl::baseline {

namespace {

double variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / v.size();
}

// least-squares linear detrend; returns residuals
std::vector<double> detrend(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int t = 0; t < n; ++t) {
        sx += t;
        sy += v[t];
        sxx += static_cast<double>(t) * t;
        sxy += t * v[t];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / n;
    std::vector<double> out(n);
    for (int t = 0; t < n; ++t) out[t] = v[t] - (intercept + slope * t);
    return out;
}

}  // namespace

FeatureVector extract_features(const data::TimeSeriesSample& series, int seasonal_period) {
    const auto& v = series.values;
    const int n = static_cast<int>(v.size());
    if (n < 2) throw StructuralError("extract_features: series too short");
    if (seasonal_period < 1)
        throw StructuralError("extract_features: seasonal_period must be positive");

    FeatureVector f{};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    f[0] = mean;

    const double var = variance(v);
    f[1] = std::sqrt(var);

    // lag-1 autocorrelation; 0 for constant series
    if (var > 0.0) {
        double num = 0.0;
        for (int t = 0; t + 1 < n; ++t) num += (v[t] - mean) * (v[t + 1] - mean);
        f[2] = num / (var * n);
    }

    const auto resid = detrend(v);
    const double var_resid = variance(resid);
    f[3] = var > 0.0 ? std::max(0.0, 1.0 - var_resid / var) : 0.0;

    // seasonal strength from seasonal means of the detrended series
    if (n >= 2 * seasonal_period && var_resid > 0.0) {
        std::vector<double> smean(seasonal_period, 0.0);
        std::vector<int> scount(seasonal_period, 0);
        for (int t = 0; t < n; ++t) {
            smean[t % seasonal_period] += resid[t];
            ++scount[t % seasonal_period];
        }
        for (int p = 0; p < seasonal_period; ++p) smean[p] /= scount[p];
        std::vector<double> remainder(n);
        for (int t = 0; t < n; ++t) remainder[t] = resid[t] - smean[t % seasonal_period];
        f[4] = std::max(0.0, 1.0 - variance(remainder) / var_resid);
    }

    // normalized Shannon entropy of the periodogram (DC excluded)
    const int nfreq = n / 2;
    if (var > 0.0 && nfreq >= 2) {
        using std::numbers::pi;
        std::vector<double> power(nfreq);
        double total = 0.0;
        for (int k = 1; k <= nfreq; ++k) {
            double re = 0.0, im = 0.0;
            for (int t = 0; t < n; ++t) {
                const double a = 2.0 * pi * k * t / n;
                re += (v[t] - mean) * std::cos(a);
                im -= (v[t] - mean) * std::sin(a);
            }
            power[k - 1] = re * re + im * im;
            total += power[k - 1];
        }
        if (total > 0.0) {
            double h = 0.0;
            for (double p : power) {
                const double q = p / total;
                if (q > 0.0) h -= q * std::log(q);
            }
            f[5] = h / std::log(static_cast<double>(nfreq));
        }
    }
    return f;
}

std::vector<int> agglomerative_cluster(const std::vector<FeatureVector>& features, int K) {
    const int n = static_cast<int>(features.size());
    if (K < 1) throw StructuralError("agglomerative_cluster: K must be positive");
    if (K > n) throw StructuralError("agglomerative_cluster: K exceeds sample count");

    // z-score standardization per coordinate
    std::vector<FeatureVector> pts = features;
    for (std::size_t d = 0; d < std::tuple_size_v<FeatureVector>; ++d) {
        double m = 0.0;
        for (const auto& p : pts) m += p[d];
        m /= n;
        double s = 0.0;
        for (const auto& p : pts) s += (p[d] - m) * (p[d] - m);
        s = std::sqrt(s / n);
        for (auto& p : pts) p[d] = s > 0.0 ? (p[d] - m) / s : 0.0;
    }

    // Ward via Lance-Williams on a full distance matrix; d = cluster sizes
    // weighted squared centroid distance.
    std::vector<bool> alive(n, true);
    std::vector<int> size(n, 1);
    std::vector<int> owner(n);  // point -> active cluster index
    for (int i = 0; i < n; ++i) owner[i] = i;

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < pts[i].size(); ++d) {
                const double dd = pts[i][d] - pts[j][d];
                d2 += dd * dd;
            }
            dist[i][j] = dist[j][i] = 0.5 * d2;  // ward cost for singletons
        }

    double last_cost = -std::numeric_limits<double>::infinity();
    for (int merges = 0; merges < n - K; ++merges) {
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                if (dist[i][j] < best) {  // strict: ties keep smallest (i, j)
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best + 1e-12 < last_cost)
            throw NumericError("agglomerative_cluster: ward cost decreased");
        last_cost = best;

        // merge bj into bi, update distances (Lance-Williams, Ward)
        const double si = size[bi], sj = size[bj];
        for (int k = 0; k < n; ++k) {
            if (!alive[k] || k == bi || k == bj) continue;
            const double sk = size[k];
            dist[bi][k] = dist[k][bi] =
                ((si + sk) * dist[bi][k] + (sj + sk) * dist[bj][k] - sk * dist[bi][bj]) /
                (si + sj + sk);
        }
        size[bi] += size[bj];
        alive[bj] = false;
        for (int p = 0; p < n; ++p)
            if (owner[p] == bj) owner[p] = bi;
    }

    // relabel 1..K by smallest member index
    std::vector<int> label(n, 0);
    int next = 1;
    std::vector<int> out(n);
    for (int p = 0; p < n; ++p) {
        if (label[owner[p]] == 0) label[owner[p]] = next++;
        out[p] = label[owner[p]];
    }
    return out;
}

}  // namespace dcfl::baseline
