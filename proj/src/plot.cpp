#include "arena/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "arena/errors.hpp"

namespace arena::plot {

namespace {

const std::vector<std::string> kFamilies = {
    "reward_vs_steps",    "reward_vs_episodes",   "success_vs_steps",   "success_vs_episodes",
    "epsilon_vs_steps",   "epsilon_vs_episodes",  "random_vs_steps",    "random_vs_episodes",
    "nonrandom_vs_steps", "nonrandom_vs_episodes", "episodes_vs_steps", "length_vs_steps",
    "length_vs_episodes", "cumlength_vs_episodes",
};

// Episode boundaries derived from the step rows: (episode, end time_step,
// length, return, success) for episodes that actually ended.
struct EpisodeEnd {
    long episode;
    long end_step;
    long length;
    double ret;
    bool success;
};

std::vector<EpisodeEnd> episode_ends(const harness::MetricsLog& log) {
    std::vector<EpisodeEnd> out;
    long length = 0;
    double ret = 0.0;
    bool success = false;
    for (const harness::StepRecord& r : log.steps) {
        ++length;
        ret += r.reward;
        success = success || r.success;
        if (r.terminated || r.truncated) {
            out.push_back({r.episode, r.time_step, length, ret, success});
            length = 0;
            ret = 0.0;
            success = false;
        }
    }
    return out;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

const std::vector<std::string>& family_names() { return kFamilies; }

bool is_family(std::string_view name) {
    return std::find(kFamilies.begin(), kFamilies.end(), name) != kFamilies.end();
}

Series build_family(const harness::MetricsLog& log, std::string_view family) {
    Series s;
    s.title = std::string(family);
    const auto ends = episode_ends(log);

    auto per_step_cumulative = [&](auto counts, const char* ylabel) {
        s.x_label = "time step";
        s.y_label = ylabel;
        long cum = 0;
        for (const harness::StepRecord& r : log.steps) {
            cum += counts(r) ? 1 : 0;
            s.points.emplace_back(static_cast<double>(r.time_step), static_cast<double>(cum));
        }
    };

    if (family == "reward_vs_steps") {
        s.x_label = "time step";
        s.y_label = "episode reward";
        for (const EpisodeEnd& e : ends)
            s.points.emplace_back(static_cast<double>(e.end_step), e.ret);
    } else if (family == "reward_vs_episodes") {
        s.x_label = "episode";
        s.y_label = "episode reward";
        for (const EpisodeEnd& e : ends)
            s.points.emplace_back(static_cast<double>(e.episode), e.ret);
    } else if (family == "success_vs_steps") {
        s.x_label = "time step";
        s.y_label = "cumulative successful episodes";
        long cum = 0;
        std::size_t next_end = 0;
        for (const harness::StepRecord& r : log.steps) {
            if (next_end < ends.size() && ends[next_end].end_step == r.time_step) {
                if (ends[next_end].success) ++cum;
                ++next_end;
            }
            s.points.emplace_back(static_cast<double>(r.time_step), static_cast<double>(cum));
        }
    } else if (family == "success_vs_episodes") {
        s.x_label = "episode";
        s.y_label = "cumulative successful episodes";
        long cum = 0;
        for (const EpisodeEnd& e : ends) {
            if (e.success) ++cum;
            s.points.emplace_back(static_cast<double>(e.episode), static_cast<double>(cum));
        }
    } else if (family == "epsilon_vs_steps") {
        s.x_label = "time step";
        s.y_label = "epsilon";
        for (const harness::StepRecord& r : log.steps)
            if (r.epsilon) s.points.emplace_back(static_cast<double>(r.time_step), *r.epsilon);
    } else if (family == "epsilon_vs_episodes") {
        s.x_label = "episode";
        s.y_label = "epsilon";
        for (const harness::EpisodeSummary& e : log.episodes)
            if (e.epsilon_at_start)
                s.points.emplace_back(static_cast<double>(e.episode), *e.epsilon_at_start);
    } else if (family == "random_vs_steps") {
        per_step_cumulative([](const harness::StepRecord& r) { return agents::source_is_random(r.source); },
                            "cumulative random actions");
    } else if (family == "nonrandom_vs_steps") {
        per_step_cumulative([](const harness::StepRecord& r) { return !agents::source_is_random(r.source); },
                            "cumulative non-random actions");
    } else if (family == "random_vs_episodes" || family == "nonrandom_vs_episodes") {
        const bool want_random = family == "random_vs_episodes";
        s.x_label = "episode";
        s.y_label = want_random ? "cumulative random actions" : "cumulative non-random actions";
        long cum = 0;
        std::size_t next_end = 0;
        for (const harness::StepRecord& r : log.steps) {
            if (agents::source_is_random(r.source) == want_random) ++cum;
            if (next_end < ends.size() && ends[next_end].end_step == r.time_step) {
                s.points.emplace_back(static_cast<double>(ends[next_end].episode),
                                      static_cast<double>(cum));
                ++next_end;
            }
        }
    } else if (family == "episodes_vs_steps") {
        s.x_label = "time step";
        s.y_label = "episodes";
        for (const harness::StepRecord& r : log.steps)
            s.points.emplace_back(static_cast<double>(r.time_step), static_cast<double>(r.episode));
    } else if (family == "length_vs_steps") {
        s.x_label = "time step";
        s.y_label = "episode length";
        for (const EpisodeEnd& e : ends)
            s.points.emplace_back(static_cast<double>(e.end_step), static_cast<double>(e.length));
    } else if (family == "length_vs_episodes") {
        s.x_label = "episode";
        s.y_label = "episode length";
        for (const EpisodeEnd& e : ends)
            s.points.emplace_back(static_cast<double>(e.episode), static_cast<double>(e.length));
    } else if (family == "cumlength_vs_episodes") {
        s.x_label = "episode";
        s.y_label = "cumulative episode length";
        long cum = 0;
        for (const EpisodeEnd& e : ends) {
            cum += e.length;
            s.points.emplace_back(static_cast<double>(e.episode), static_cast<double>(cum));
        }
    } else {
        throw UsageError("unknown figure family: " + std::string(family));
    }
    return s;
}

std::string render_svg(const Series& series) {
    constexpr double kWidth = 800, kHeight = 500;
    constexpr double kLeft = 70, kRight = 20, kTop = 45, kBottom = 55;
    constexpr std::size_t kMaxPoints = 2000;

    // Deterministic decimation keeps the bytes stable across runs while
    // bounding file size for 100000-step series.
    std::vector<std::pair<double, double>> pts;
    if (series.points.size() <= kMaxPoints) {
        pts = series.points;
    } else {
        const std::size_t stride = (series.points.size() + kMaxPoints - 1) / kMaxPoints;
        for (std::size_t i = 0; i < series.points.size(); i += stride) pts.push_back(series.points[i]);
        if (pts.back() != series.points.back()) pts.push_back(series.points.back());
    }

    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (!pts.empty()) {
        xmin = xmax = pts[0].first;
        ymin = ymax = pts[0].second;
        for (const auto& [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double y) { return kTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + series.title + "</text>\n";

    // axes
    svg += "<line x1=\"" + fmt_coord(kLeft) + "\" y1=\"" + fmt_coord(kTop) + "\" x2=\"" +
           fmt_coord(kLeft) + "\" y2=\"" + fmt_coord(kTop + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt_coord(kLeft) + "\" y1=\"" + fmt_coord(kTop + plot_h) + "\" x2=\"" +
           fmt_coord(kLeft + plot_w) + "\" y2=\"" + fmt_coord(kTop + plot_h) +
           "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double px = sx(fx);
        svg += "<line x1=\"" + fmt_coord(px) + "\" y1=\"" + fmt_coord(kTop + plot_h) + "\" x2=\"" +
               fmt_coord(px) + "\" y2=\"" + fmt_coord(kTop + plot_h + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt_coord(px) + "\" y=\"" + fmt_coord(kTop + plot_h + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_tick(fx) + "</text>\n";

        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double py = sy(fy);
        svg += "<line x1=\"" + fmt_coord(kLeft - 5) + "\" y1=\"" + fmt_coord(py) + "\" x2=\"" +
               fmt_coord(kLeft) + "\" y2=\"" + fmt_coord(py) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt_coord(kLeft - 8) + "\" y=\"" + fmt_coord(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt_tick(fy) +
               "</text>\n";
    }

    svg += "<text x=\"" + fmt_coord(kLeft + plot_w / 2) + "\" y=\"" + fmt_coord(kHeight - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           series.x_label + "</text>\n";
    svg += "<text x=\"15\" y=\"" + fmt_coord(kTop + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 15 " + fmt_coord(kTop + plot_h / 2) + ")\">" + series.y_label +
           "</text>\n";

    if (!pts.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) svg += ' ';
            svg += fmt_coord(sx(pts[i].first)) + "," + fmt_coord(sy(pts[i].second));
        }
        svg += "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace arena::plot
