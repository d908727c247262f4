#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "microgeo/error.hpp"
#include "microgeo/grid.hpp"
#include "microgeo/stats.hpp"

namespace microgeo {

// Stats report: one "key: value" pair per line after a version line. Keys
// appear in a fixed order; reals use 17 significant digits.
//
//   microgeo-report 1
//   target_set / reference_set     set names
//   extent                         lon_min,lon_max,lat_min,lat_max
//   grid                           <n>x<m>
//   bins                           n * m (scatter points)
//   n_target / n_reference         N_T, N_R
//   k_exact                        N_T / N_R
//   slope / intercept              least-squares fit of target on reference counts
//   pearson_r / p_value / df       correlation, two-sided p, points - 2
//   noise_band_coverage            share of occupied bins within +-k sqrt(c_ref) of y = kx
//   angle_points                   occupied bins entering the angle histogram
//   angle_mean_deg / angle_std_deg mean and population std of the angles
//   angle_histogram                90 space-separated counts for [0,1), ..., [89,90]

struct ReportInput {
    std::string target_set;
    std::string reference_set;
    const GridSpec* spec = nullptr;
    const ComparisonStats* stats = nullptr;
    const AngleHistogram* angles = nullptr;
    double noise_coverage = 0.0;
};

inline void write_report(std::ostream& os, const ReportInput& in) {
    if (!in.spec || !in.stats || !in.angles) throw Error("report input incomplete");
    const auto real = [](double v) { return detail::format_real(v); };
    const auto& e = in.spec->extent();
    const auto& reg = in.stats->regression;
    os << "microgeo-report 1\n"
       << "target_set: " << in.target_set << '\n'
       << "reference_set: " << in.reference_set << '\n'
       << "extent: " << real(e.lon_min()) << ',' << real(e.lon_max()) << ',' << real(e.lat_min()) << ','
       << real(e.lat_max()) << '\n'
       << "grid: " << in.spec->n() << 'x' << in.spec->m() << '\n'
       << "bins: " << in.spec->size() << '\n'
       << "n_target: " << in.stats->n_target << '\n'
       << "n_reference: " << in.stats->n_reference << '\n'
       << "k_exact: " << real(in.stats->k_exact) << '\n'
       << "slope: " << real(reg.slope) << '\n'
       << "intercept: " << real(reg.intercept) << '\n'
       << "pearson_r: " << real(reg.pearson_r) << '\n'
       << "p_value: " << real(reg.p_value) << '\n'
       << "df: " << reg.df << '\n'
       << "noise_band_coverage: " << real(in.noise_coverage) << '\n'
       << "angle_points: " << in.angles->n_points << '\n'
       << "angle_mean_deg: " << real(in.angles->mean_deg) << '\n'
       << "angle_std_deg: " << real(in.angles->std_deg) << '\n'
       << "angle_histogram:";
    for (auto c : in.angles->bin_counts) os << ' ' << c;
    os << '\n';
}

/// Key/value view of a report, for tests and downstream tooling.
inline std::map<std::string, std::string> parse_report(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "microgeo-report 1") throw ConfigError("not a microgeo report");
    std::map<std::string, std::string> kv;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ConfigError("malformed report line '" + line + "'");
        std::string value = line.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.erase(0, 1);
        kv[line.substr(0, colon)] = value;
    }
    return kv;
}

}  // namespace microgeo
