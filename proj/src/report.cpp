#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "evbandit/csv.hpp"
#include "evbandit/errors.hpp"
#include "evbandit/experiment.hpp"

namespace evbandit::experiment {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 180.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Plot labels use %g so tick values stay short.
std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Rank for the canonical policy order; unknown names sort after, by name.
int policy_rank(const std::string& name) {
  const auto kind = bandit::parse_policy(name);
  return kind ? static_cast<int>(*kind) : 1000;
}

double nice_step(double range, int ticks) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string display_name(const std::string& policy) {
  const auto kind = bandit::parse_policy(policy);
  return kind ? std::string(bandit::policy_label(*kind)) : policy;
}

}  // namespace

std::vector<PolicySummary> summarize(const std::filesystem::path& trace_dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(trace_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(trace_dir)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.starts_with("trace_") && name.ends_with(".csv")) {
        files.push_back(entry.path());
      }
    }
  }
  if (files.empty()) throw EmptyInput("no trace_*.csv files in " + trace_dir.string());
  std::sort(files.begin(), files.end());

  std::map<std::string, std::vector<environment::RegretTrace>> by_policy;
  for (const auto& f : files) {
    auto trace = environment::RegretTrace::from_csv(f);
    if (trace.rows().empty()) throw EmptyInput("trace file has no rows: " + f.string());
    by_policy[trace.rows().front().policy].push_back(std::move(trace));
  }

  std::vector<PolicySummary> out;
  for (auto& [policy, traces] : by_policy) {
    PolicySummary s;
    s.policy = policy;
    s.runs = traces.size();
    std::size_t horizon = traces.front().rows().size();
    for (const auto& tr : traces) horizon = std::min(horizon, tr.rows().size());
    s.horizon = static_cast<std::int64_t>(horizon);
    s.mean_cumulative.assign(horizon, 0.0);
    std::vector<double> finals;
    for (const auto& tr : traces) {
      for (std::size_t i = 0; i < horizon; ++i) {
        s.mean_cumulative[i] += tr.rows()[i].cumulative_regret_s;
      }
      finals.push_back(tr.rows()[horizon - 1].cumulative_regret_s);
    }
    const auto n = static_cast<double>(traces.size());
    for (auto& v : s.mean_cumulative) v /= n;
    double sum = 0.0;
    for (const double f : finals) sum += f;
    s.mean_final = sum / n;
    if (traces.size() > 1) {
      double ss = 0.0;
      for (const double f : finals) ss += (f - s.mean_final) * (f - s.mean_final);
      s.std_final = std::sqrt(ss / (n - 1.0));
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const int ra = policy_rank(a.policy);
    const int rb = policy_rank(b.policy);
    return ra != rb ? ra < rb : a.policy < b.policy;
  });
  return out;
}

std::string summary_csv(const std::vector<PolicySummary>& summaries) {
  std::ostringstream out;
  out << "policy,runs,horizon,mean_final_cumulative_regret_s,std_final_cumulative_regret_s\n";
  for (const auto& s : summaries) {
    out << s.policy << ',' << s.runs << ',' << s.horizon << ',' << io::format_double(s.mean_final)
        << ',' << io::format_double(s.std_final) << '\n';
  }
  return out.str();
}

std::string regret_svg(const std::vector<PolicySummary>& summaries) {
  std::int64_t max_t = 1;
  double max_y = 0.0;
  for (const auto& s : summaries) {
    max_t = std::max(max_t, s.horizon);
    for (const double v : s.mean_cumulative) max_y = std::max(max_y, v);
  }
  const double y_step = nice_step(max_y > 0.0 ? max_y : 1.0, 5);
  const double y_top = std::max(y_step, std::ceil(max_y / y_step) * y_step);
  const double x_step = nice_step(static_cast<double>(max_t), 5);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double t) { return kLeft + plot_w * t / static_cast<double>(max_t); };
  auto py = [&](double y) { return kTop + plot_h * (1.0 - y / y_top); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" "
         "height=\"600\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";

  // Axes and ticks.
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop + plot_h) << "\" x2=\""
      << fixed(kLeft + plot_w) << "\" y2=\"" << fixed(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(kLeft)
      << "\" y2=\"" << fixed(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  for (double t = 0.0; t <= static_cast<double>(max_t) + 1e-9; t += x_step) {
    svg << "<line x1=\"" << fixed(px(t)) << "\" y1=\"" << fixed(kTop + plot_h) << "\" x2=\""
        << fixed(px(t)) << "\" y2=\"" << fixed(kTop + plot_h + 5.0) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed(px(t)) << "\" y=\"" << fixed(kTop + plot_h + 20.0)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double y = 0.0; y <= y_top + 1e-9 * y_top; y += y_step) {
    svg << "<line x1=\"" << fixed(kLeft - 5.0) << "\" y1=\"" << fixed(py(y)) << "\" x2=\""
        << fixed(kLeft + plot_w) << "\" y2=\"" << fixed(py(y))
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fixed(kLeft - 8.0) << "\" y=\"" << fixed(py(y) + 4.0)
        << "\" text-anchor=\"end\">" << tick_label(y) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(kLeft + plot_w / 2.0) << "\" y=\"" << fixed(kHeight - 15.0)
      << "\" text-anchor=\"middle\">iteration t</text>\n";
  svg << "<text x=\"20\" y=\"" << fixed(kTop + plot_h / 2.0)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << fixed(kTop + plot_h / 2.0)
      << ")\">mean cumulative regret (s)</text>\n";

  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const auto& s = summaries[k];
    const char* color = kColors[k % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    svg << fixed(px(0.0)) << ',' << fixed(py(0.0));
    for (std::size_t i = 0; i < s.mean_cumulative.size(); ++i) {
      svg << ' ' << fixed(px(static_cast<double>(i + 1))) << ','
          << fixed(py(s.mean_cumulative[i]));
    }
    svg << "\"/>\n";
    const double ly = kTop + 20.0 * static_cast<double>(k);
    const double lx = kLeft + plot_w + 20.0;
    svg << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(lx + 24.0)
        << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed(lx + 30.0) << "\" y=\"" << fixed(ly + 4.0) << "\">"
        << display_name(s.policy) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> report(const std::filesystem::path& trace_dir,
                                          const std::filesystem::path& out_dir) {
  const auto summaries = summarize(trace_dir);
  std::filesystem::create_directories(out_dir);
  const auto csv = out_dir / "summary.csv";
  const auto svg = out_dir / "regret.svg";
  io::write_file_atomic(csv, summary_csv(summaries));
  io::write_file_atomic(svg, regret_svg(summaries));
  return {csv, svg};
}

}  // namespace evbandit::experiment
