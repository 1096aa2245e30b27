#include "dcsim/profiles.hpp"
#include "dcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dcsim {

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

// Parse a timestamp cell: either a plain number of seconds or ISO-8601.
// Returns seconds; `calendar` reports which form was seen.
double parse_timestamp(const std::string& cell, bool& calendar, std::size_t row) {
    const std::string t = trim(cell);
    if (t.empty()) throw data_error("profile row " + std::to_string(row) + ": empty timestamp");

    // Numeric offset?
    {
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end && *end == '\0') {
            calendar = false;
            return v;
        }
    }

    int y, mo, d, h, mi;
    double sec;
    char sep;
    if (std::sscanf(t.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec) == 7 &&
        (sep == 'T' || sep == ' ')) {
        calendar = true;
        return double(days_from_civil(y, unsigned(mo), unsigned(d))) * 86400.0 +
               h * 3600.0 + mi * 60.0 + sec;
    }
    throw data_error("profile row " + std::to_string(row) + ": unparseable timestamp '" + t + "'");
}

} // namespace

LoadProfile load_profile_csv(std::istream& in, double default_dt_s) {
    std::string line;
    if (!std::getline(in, line)) throw data_error("profile CSV: empty file");
    const std::string header = trim(line);

    bool has_ts;
    if (header == "timestamp,power_kw") has_ts = true;
    else if (header == "power_kw") has_ts = false;
    else throw data_error("profile CSV: expected header 'timestamp,power_kw' or 'power_kw', got '" + header + "'");

    std::vector<double> t_s, p_kw;
    bool calendar = false;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const std::string l = trim(line);
        if (l.empty()) continue;
        if (has_ts) {
            const auto comma = l.find(',');
            if (comma == std::string::npos)
                throw data_error("profile row " + std::to_string(row) + ": missing comma");
            bool cal = false;
            t_s.push_back(parse_timestamp(l.substr(0, comma), cal, row));
            if (t_s.size() == 1) calendar = cal;
            else if (cal != calendar)
                throw data_error("profile row " + std::to_string(row) + ": mixed timestamp styles");
            line = l.substr(comma + 1);
        } else {
            line = l;
        }
        char* end = nullptr;
        const std::string cell = trim(line);
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || !end || *end != '\0')
            throw data_error("profile row " + std::to_string(row) + ": unparseable power '" + cell + "'");
        if (!std::isfinite(v) || v < 0.0)
            throw data_error("profile row " + std::to_string(row) + ": power must be finite and >= 0");
        p_kw.push_back(v);
    }

    if (p_kw.size() < 2) throw data_error("profile CSV: need at least 2 samples");

    LoadProfile out;
    out.samples_kw = std::move(p_kw);
    if (has_ts) {
        const double dt = t_s[1] - t_s[0];
        if (!(dt > 0.0)) throw data_error("profile CSV: timestamps must be strictly increasing");
        for (std::size_t i = 1; i < t_s.size(); ++i) {
            const double step = t_s[i] - t_s[i - 1];
            if (std::fabs(step - dt) > 1e-3)
                throw data_error("profile row " + std::to_string(i + 2) +
                                 ": non-uniform sampling (step " + std::to_string(step) +
                                 " s vs " + std::to_string(dt) + " s)");
        }
        out.dt_s = dt;
        out.start_epoch_s = std::llround(t_s[0]);
    } else {
        if (!(default_dt_s > 0.0)) throw config_error("default profile dt must be > 0");
        out.dt_s = default_dt_s;
        out.start_epoch_s = 0;
    }
    return out;
}

LoadProfile load_profile_csv_file(const std::string& path, double default_dt_s) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open profile '" + path + "'");
    return load_profile_csv(f, default_dt_s);
}

void write_profile_csv(std::ostream& out, const LoadProfile& p) {
    out << "timestamp,power_kw\n";
    char buf[64];
    for (std::size_t i = 0; i < p.samples_kw.size(); ++i) {
        const double t = double(p.start_epoch_s) + double(i) * p.dt_s;
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", t, p.samples_kw[i]);
        out << buf;
    }
}

LoadProfile resample(const LoadProfile& p, double dt_new_s) {
    if (!std::isfinite(dt_new_s) || dt_new_s <= 0.0)
        throw config_error("resample: dt_new must be finite and > 0");

    const double span = p.span_s();
    const std::size_t n_new = std::size_t(std::floor(span / dt_new_s + 1e-9)) + 1;

    LoadProfile out;
    out.start_epoch_s = p.start_epoch_s;
    out.dt_s = dt_new_s;
    out.samples_kw.resize(n_new);
    const std::size_t n = p.samples_kw.size();
    for (std::size_t i = 0; i < n_new; ++i) {
        const double t = double(i) * dt_new_s;
        double x = t / p.dt_s;
        if (x <= 0.0) { out.samples_kw[i] = p.samples_kw.front(); continue; }
        if (x >= double(n - 1)) { out.samples_kw[i] = p.samples_kw.back(); continue; }
        const std::size_t k = std::size_t(x);
        const double f = x - double(k);
        // Exact hit on a source grid point: copy, no arithmetic.
        if (f < 1e-9) { out.samples_kw[i] = p.samples_kw[k]; continue; }
        if (f > 1.0 - 1e-9) { out.samples_kw[i] = p.samples_kw[k + 1]; continue; }
        out.samples_kw[i] = p.samples_kw[k] * (1.0 - f) + p.samples_kw[k + 1] * f;
    }
    return out;
}

std::size_t samples_per_day(const LoadProfile& p) {
    const double per_day = 86400.0 / p.dt_s;
    const double r = std::round(per_day);
    if (std::fabs(per_day - r) > 1e-9 || r < 1.0) return 0;
    const std::size_t n_day = std::size_t(r);
    if (p.samples_kw.size() % n_day != 0) return 0;
    return n_day;
}

LoadProfile compress_fluctuation(const LoadProfile& p, double beta) {
    if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0)
        throw config_error("compress_fluctuation: beta must be in [0,1]");
    const std::size_t n_day = samples_per_day(p);
    if (n_day == 0)
        throw data_error("compress_fluctuation: profile does not divide into whole days");

    LoadProfile out = p;
    const std::size_t days = p.samples_kw.size() / n_day;
    for (std::size_t d = 0; d < days; ++d) {
        const auto b = p.samples_kw.begin() + std::ptrdiff_t(d * n_day);
        const double sum = std::accumulate(b, b + std::ptrdiff_t(n_day), 0.0);
        const double mean = sum / double(n_day);
        double sum_c = 0.0;
        for (std::size_t i = 0; i < n_day; ++i) {
            const double v = std::max(0.0, mean + beta * (b[std::ptrdiff_t(i)] - mean));
            out.samples_kw[d * n_day + i] = v;
            sum_c += v;
        }
        // Per-day energy restore.  Zero-mean days stay at zero.
        if (sum_c > 0.0) {
            const double scale = sum / sum_c;
            for (std::size_t i = 0; i < n_day; ++i)
                out.samples_kw[d * n_day + i] *= scale;
        }
    }
    return out;
}

std::vector<double> daily_energy(const LoadProfile& p) {
    const std::size_t n_day = samples_per_day(p);
    if (n_day == 0)
        throw data_error("daily_energy: profile does not divide into whole days");
    const std::size_t days = p.samples_kw.size() / n_day;
    std::vector<double> kwh(days, 0.0);
    for (std::size_t d = 0; d < days; ++d) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_day; ++i) s += p.samples_kw[d * n_day + i];
        kwh[d] = s * p.dt_s / 3600.0;
    }
    return kwh;
}

double it_load(const ITLoadParams& it, double utilization) {
    if (!std::isfinite(utilization) || utilization < 0.0 || utilization > 1.0)
        throw data_error("it_load: utilization must be in [0,1]");
    return it.p_base_kw + it.alpha_kw * utilization;
}

double utilization_from_power(const ITLoadParams& it, double p_kw) {
    if (it.alpha_kw <= 0.0) return 0.0;
    const double u = (p_kw - it.p_base_kw) / it.alpha_kw;
    return std::clamp(u, 0.0, 1.0);
}

double cooling_step(const CoolingParams& c, double q_kw, double p_it_kw, double dt_s) {
    if (!(c.tau_s > 0.0)) throw config_error("cooling: tau must be > 0");
    if (!(dt_s > 0.0)) throw config_error("cooling: dt must be > 0");
    const double a = dt_s / c.tau_s;
    return (q_kw + a * c.k1 * p_it_kw) / (1.0 + a);
}

} // namespace dcsim
