#include "charlstm/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "charlstm/error.hpp"

namespace charlstm {

const char* schedule_color(int schedule) {
  switch (schedule) {
    case 1: return "blue";
    case 2: return "red";
    case 3: return "green";
    case 4: return "yellow";
    default: return "gray";
  }
}

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 600.0;
constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 170.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 60.0;

struct Scale {
  double lo = 0.0, hi = 1.0;
  double px0 = 0.0, px1 = 1.0;
  bool log = false;

  double operator()(double v) const {
    const double a = log ? std::log(v) : v;
    const double alo = log ? std::log(lo) : lo;
    const double ahi = log ? std::log(hi) : hi;
    const double t = (ahi == alo) ? 0.5 : (a - alo) / (ahi - alo);
    return px0 + t * (px1 - px0);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
  if (hi <= lo) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(t);
  }
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  for (int e = static_cast<int>(std::floor(std::log10(lo)));
       e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double t = m * std::pow(10.0, e);
      if (t >= lo * (1 - 1e-12) && t <= hi * (1 + 1e-12)) ticks.push_back(t);
    }
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

}  // namespace

void render_curves(const std::vector<CheckpointRecord>& records, CurveAxis axis,
                   const std::filesystem::path& path, bool log_y) {
  require(!records.empty(), "render_curves: no records");

  auto x_of = [axis](const CheckpointRecord& r) {
    return axis == CurveAxis::sequences ? static_cast<double>(r.sequences_seen)
                                        : r.wall_ms;
  };

  // Group by run, keeping first-appearance (= run) order.
  std::vector<std::size_t> run_order;
  std::map<std::size_t, std::vector<const CheckpointRecord*>> runs;
  for (const auto& r : records) {
    auto [it, inserted] = runs.try_emplace(r.run_id);
    if (inserted) run_order.push_back(r.run_id);
    it->second.push_back(&r);
  }

  double xmin = x_of(records[0]), xmax = xmin;
  double ymin = records[0].test_perplexity, ymax = ymin;
  for (const auto& r : records) {
    xmin = std::min(xmin, x_of(r));
    xmax = std::max(xmax, x_of(r));
    ymin = std::min(ymin, r.test_perplexity);
    ymax = std::max(ymax, r.test_perplexity);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  Scale sx{xmin, xmax, kMarginLeft, kWidth - kMarginRight, false};
  Scale sy{ymin, ymax, kHeight - kMarginBottom, kMarginTop, log_y};

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open SVG for writing: " + path.string());

  const char* x_label =
      axis == CurveAxis::sequences ? "train sequences seen" : "training time (ms)";

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";

  // Axes
  const double ax0 = kMarginLeft, ax1 = kWidth - kMarginRight;
  const double ay0 = kHeight - kMarginBottom, ay1 = kMarginTop;
  out << "  <line x1=\"" << ax0 << "\" y1=\"" << ay0 << "\" x2=\"" << ax1
      << "\" y2=\"" << ay0 << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << ax0 << "\" y1=\"" << ay0 << "\" x2=\"" << ax0
      << "\" y2=\"" << ay1 << "\" stroke=\"black\"/>\n";

  for (double t : linear_ticks(xmin, xmax)) {
    const double px = sx(t);
    out << "  <line x1=\"" << px << "\" y1=\"" << ay0 << "\" x2=\"" << px
        << "\" y2=\"" << ay0 + 5 << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << px << "\" y=\"" << ay0 + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t : (log_y ? log_ticks(ymin, ymax) : linear_ticks(ymin, ymax))) {
    const double py = sy(t);
    out << "  <line x1=\"" << ax0 - 5 << "\" y1=\"" << py << "\" x2=\"" << ax0
        << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << ax0 - 8 << "\" y=\"" << py + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  out << "  <text x=\"" << (ax0 + ax1) / 2 << "\" y=\"" << kHeight - 15
      << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "  <text x=\"20\" y=\"" << (ay0 + ay1) / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (ay0 + ay1) / 2 << ")\">test perplexity" << (log_y ? " (log)" : "")
      << "</text>\n";

  // One polyline per run; a lone checkpoint degenerates to a dot.
  for (std::size_t id : run_order) {
    const auto& pts = runs[id];
    const char* color = schedule_color(pts.front()->schedule);
    if (pts.size() == 1) {
      out << "  <circle cx=\"" << sx(x_of(*pts[0])) << "\" cy=\""
          << sy(pts[0]->test_perplexity) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
      continue;
    }
    out << "  <polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    const auto saved = out.precision(12);
    for (const auto* p : pts) {
      out << sx(x_of(*p)) << ',' << sy(p->test_perplexity) << ' ';
    }
    out.precision(saved);
    out << "\"/>\n";
  }

  // Legend: schedules present, in id order.
  std::set<int> present;
  for (const auto& r : records) present.insert(r.schedule);
  double ly = kMarginTop + 10;
  const double lx = kWidth - kMarginRight + 20;
  out << "  <text x=\"" << lx << "\" y=\"" << ly
      << "\" font-size=\"13\" font-weight=\"bold\">schedules</text>\n";
  for (int s : present) {
    ly += 22;
    out << "  <line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 28
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << schedule_color(s)
        << "\" stroke-width=\"2\"/>\n";
    out << "  <text x=\"" << lx + 34 << "\" y=\"" << ly
        << "\" font-size=\"13\">schedule " << s << "</text>\n";
  }

  out << "</svg>\n";
  out.flush();
  if (!out) throw IoError("write failure on SVG: " + path.string());
}

}  // namespace charlstm
