#include "sradam/bench/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace sradam::bench {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 24, kTop = 44, kBottom = 52;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double x, const char* spec = "%g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

Range padded(Range r, double frac) {
  if (r.hi <= r.lo) {
    const double bump = r.lo == 0.0 ? 1.0 : std::fabs(r.lo) * 0.1;
    return {r.lo - bump, r.hi + bump};
  }
  const double pad = (r.hi - r.lo) * frac;
  return {r.lo - pad, r.hi + pad};
}

std::vector<double> ticks(const Range& r, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(r.lo + (r.hi - r.lo) * i / (count - 1));
  }
  return out;
}

void open_svg(std::ostream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2
     << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << xml_escape(title) << "</text>\n";
}

void draw_axes(std::ostream& os, const LinMap& xm, const LinMap& ym,
               const Range& xr, const Range& yr, const std::string& x_label,
               const std::string& y_label) {
  const double py0 = kHeight - kBottom, py1 = kTop;
  os << "<line x1=\"" << kLeft << "\" y1=\"" << py0 << "\" x2=\""
     << kWidth - kRight << "\" y2=\"" << py0 << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << py0 << "\" x2=\"" << kLeft
     << "\" y2=\"" << py1 << "\" stroke=\"black\"/>\n";
  for (double t : ticks(xr, 5)) {
    const double px = xm(t);
    os << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px
       << "\" y2=\"" << py0 + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << py0 + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(t, "%.3g") << "</text>\n";
  }
  for (double t : ticks(yr, 5)) {
    const double py = ym(t);
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft
       << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(t, "%.3g") << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\""
     << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << xml_escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        "transform=\"rotate(-90 16 "
     << (kTop + kHeight - kBottom) / 2 << ")\">" << xml_escape(y_label)
     << "</text>\n";
}

}  // namespace

ErrorBand error_band(double mean, double std) {
  return {mean - std, mean + std};
}

void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          std::span<const Series> series) {
  if (series.empty()) {
    throw std::invalid_argument("write_line_chart_svg: no series");
  }
  Range xr{series[0].x.front(), series[0].x.front()};
  Range yr{series[0].y.front(), series[0].y.front()};
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty()) {
      throw std::invalid_argument("write_line_chart_svg: bad series " + s.label);
    }
    const bool banded = !s.y_lo.empty();
    if (banded && (s.y_lo.size() != s.x.size() || s.y_hi.size() != s.x.size())) {
      throw std::invalid_argument("write_line_chart_svg: bad band " + s.label);
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xr.widen(s.x[i]);
      yr.widen(s.y[i]);
      if (banded) {
        yr.widen(s.y_lo[i]);
        yr.widen(s.y_hi[i]);
      }
    }
  }
  xr = padded(xr, 0.02);
  yr = padded(yr, 0.06);
  const LinMap xm{xr.lo, xr.hi, kLeft, kWidth - kRight};
  const LinMap ym{yr.lo, yr.hi, kHeight - kBottom, kTop};

  std::ostringstream os;
  open_svg(os, title);
  draw_axes(os, xm, ym, xr, yr, x_label, y_label);

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    if (!s.y_lo.empty()) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" "
         << "stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << xm(s.x[i]) << ',' << ym(s.y_hi[i]) << ' ';
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        os << xm(s.x[i]) << ',' << ym(s.y_lo[i]) << ' ';
      }
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << xm(s.x[i]) << ',' << ym(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 16 * static_cast<double>(si);
    os << "<line x1=\"" << kWidth - kRight - 150 << "\" y1=\"" << ly
       << "\" x2=\"" << kWidth - kRight - 126 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight - 120 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << os.str();
}

void write_bar_chart_svg(const std::filesystem::path& path,
                         const std::string& title, const std::string& y_label,
                         std::span<const Bar> bars) {
  if (bars.empty()) {
    throw std::invalid_argument("write_bar_chart_svg: no bars");
  }
  Range yr{0.0, 0.0};
  for (const auto& b : bars) {
    const ErrorBand eb = error_band(b.value, b.err);
    yr.widen(eb.lo);
    yr.widen(eb.hi);
  }
  yr = padded(yr, 0.08);
  const LinMap ym{yr.lo, yr.hi, kHeight - kBottom, kTop};
  const double span = kWidth - kLeft - kRight;
  const double slot = span / static_cast<double>(bars.size());
  const double bar_w = slot * 0.6;

  std::ostringstream os;
  open_svg(os, title);
  const Range xr{0.0, static_cast<double>(bars.size())};
  const LinMap xm{xr.lo, xr.hi, kLeft, kWidth - kRight};
  draw_axes(os, xm, ym, xr, yr, "", y_label);

  const double base = ym(std::max(0.0, yr.lo));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const char* color = kPalette[i % std::size(kPalette)];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double top = ym(b.value);
    os << "<rect x=\"" << cx - bar_w / 2 << "\" y=\"" << std::min(top, base)
       << "\" width=\"" << bar_w << "\" height=\"" << std::fabs(base - top)
       << "\" fill=\"" << color << "\"/>\n";
    if (b.err > 0.0) {
      const ErrorBand eb = error_band(b.value, b.err);
      os << "<line x1=\"" << cx << "\" y1=\"" << ym(eb.lo) << "\" x2=\"" << cx
         << "\" y2=\"" << ym(eb.hi) << "\" stroke=\"black\"/>\n";
      for (double y : {ym(eb.lo), ym(eb.hi)}) {
        os << "<line x1=\"" << cx - 5 << "\" y1=\"" << y << "\" x2=\"" << cx + 5
           << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
      }
    }
    os << "<text x=\"" << cx << "\" y=\"" << kHeight - kBottom + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << xml_escape(b.label) << "</text>\n";
  }
  os << "</svg>\n";

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << os.str();
}

std::vector<std::string> emit_plots(std::span<const RunRecord> records,
                                    const std::filesystem::path& out_dir) {
  const auto curves = epoch_curves(records);
  const auto agg = aggregate(records);
  std::filesystem::create_directories(out_dir / "plots");

  // Regroup curves by competition coordinates; one chart per group.
  using CompetitionKey = std::tuple<std::string, std::string, double, int>;
  std::map<CompetitionKey, std::vector<const Curve*>> by_competition;
  for (const auto& c : curves) {
    by_competition[{c.key.dataset, c.key.model, c.key.noise, c.key.batch_size}]
        .push_back(&c);
  }

  std::vector<std::string> files;
  for (const auto& [ck, group] : by_competition) {
    const auto& [dataset, model, noise, batch] = ck;
    const std::string stem = dataset + "__" + model + "__n" + fmt(noise) +
                             "__b" + std::to_string(batch);

    std::vector<Series> series;
    for (const Curve* c : group) {
      Series s;
      s.label = c->key.optimizer;
      for (const auto& pt : c->points) {
        s.x.push_back(pt.epoch);
        s.y.push_back(pt.loss_mean);
        const ErrorBand eb = error_band(pt.loss_mean, pt.loss_std);
        s.y_lo.push_back(eb.lo);
        s.y_hi.push_back(eb.hi);
      }
      series.push_back(std::move(s));
    }
    const std::string loss_svg = "plots/loss__" + stem + ".svg";
    write_line_chart_svg(out_dir / loss_svg,
                         "test loss, " + dataset + " " + model + " noise " +
                             fmt(noise),
                         "epoch", "test loss", series);
    files.push_back(loss_svg);

    const std::string loss_csv = "plots/loss__" + stem + ".csv";
    {
      std::ofstream csv(out_dir / loss_csv, std::ios::trunc);
      csv << "optimizer,epoch,loss_mean,loss_std,acc_mean,acc_std\n";
      for (const Curve* c : group) {
        for (const auto& pt : c->points) {
          csv << c->key.optimizer << ',' << pt.epoch << ','
              << fmt(pt.loss_mean, "%.6f") << ',' << fmt(pt.loss_std, "%.6f")
              << ',' << fmt(pt.acc_mean, "%.6f") << ','
              << fmt(pt.acc_std, "%.6f") << '\n';
        }
      }
    }
    files.push_back(loss_csv);

    std::vector<Bar> bars;
    for (const auto& row : agg) {
      if (row.key.dataset == dataset && row.key.model == model &&
          row.key.noise == noise && row.key.batch_size == batch) {
        bars.push_back(Bar{row.key.optimizer, row.acc_mean, row.acc_std});
      }
    }
    if (!bars.empty()) {
      const std::string acc_svg = "plots/acc__" + stem + ".svg";
      write_bar_chart_svg(out_dir / acc_svg,
                          "best accuracy, " + dataset + " " + model +
                              " noise " + fmt(noise),
                          "best test accuracy", bars);
      files.push_back(acc_svg);
      const std::string acc_csv = "plots/acc__" + stem + ".csv";
      std::ofstream csv(out_dir / acc_csv, std::ios::trunc);
      csv << "optimizer,acc_mean,acc_std\n";
      for (const auto& b : bars) {
        csv << b.label << ',' << fmt(b.value, "%.6f") << ','
            << fmt(b.err, "%.6f") << '\n';
      }
      files.push_back(acc_csv);
    }
  }
  return files;
}

}  // namespace sradam::bench
