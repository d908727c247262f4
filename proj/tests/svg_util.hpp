#pragma once
// Minimal extraction of marker circles from rendered SVG, for assertions.

#include <regex>
#include <string>
#include <vector>

namespace svgtest {

struct Circle {
    double cx = 0, cy = 0, r = 0;
    std::string fill;
};

inline std::vector<Circle> circles(const std::string& svg, const std::string& cls = "marker") {
    static const std::regex re(
        R"re(<circle class="([^"]*)" cx="([^"]*)" cy="([^"]*)" r="([^"]*)" fill="([^"]*)")re");
    std::vector<Circle> out;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        if (m[1] != cls) continue;
        out.push_back({std::stod(m[2]), std::stod(m[3]), std::stod(m[4]), m[5]});
    }
    return out;
}

}  // namespace svgtest
