#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mail/harness/run.hpp"

namespace mail {

inline constexpr const char* kRecordHeader =
    "seed,env,feature_map,algorithm,budget,expert_queries,nash_gap,train_loglik,expected_tv_to_expert,wall_ms,error";

namespace detail {

inline std::string fmt_double(double v)
{
   if (std::isnan(v)) return "";
   char buf[32];
   std::snprintf(buf, sizeof buf, "%.17g", v);
   return buf;
}

inline std::string csv_quote(const std::string& s)
{
   if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
   std::string out = "\"";
   for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch == '\n' || ch == '\r' ? ' ' : ch;
   }
   return out + '"';
}

inline std::vector<std::string> csv_split(const std::string& line)
{
   std::vector<std::string> out(1);
   bool quoted = false;
   for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
         if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += '"', ++i;
         else if (ch == '"') quoted = false;
         else out.back() += ch;
      } else if (ch == '"') {
         quoted = true;
      } else if (ch == ',') {
         out.emplace_back();
      } else {
         out.back() += ch;
      }
   }
   return out;
}

}  // namespace detail

/// One row per record. wall_ms is written as 0 unless `with_timing`, so the
/// file is a pure function of the config.
inline void emit_csv(const std::vector<RunRecord>& records, std::ostream& os, bool with_timing = false)
{
   os << kRecordHeader << '\n';
   for (const auto& r : records) {
      os << r.seed << ',' << detail::csv_quote(r.env) << ',' << detail::csv_quote(r.feature_map) << ','
         << detail::csv_quote(r.algorithm) << ',' << r.budget << ',' << r.expert_queries << ','
         << detail::fmt_double(r.nash_gap) << ',' << detail::fmt_double(r.train_loglik) << ','
         << detail::fmt_double(r.expected_tv_to_expert) << ',' << (with_timing ? detail::fmt_double(r.wall_ms) : "0")
         << ',' << detail::csv_quote(r.error) << '\n';
   }
}

inline std::vector<RunRecord> read_records_csv(std::istream& is)
{
   std::string line;
   if (!std::getline(is, line) || line != kRecordHeader) throw DecodeError("records csv: unexpected header");
   std::vector<RunRecord> out;
   int lineno = 1;
   auto num = [&](const std::string& s) {
      if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw DecodeError("records csv: bad number on line " + std::to_string(lineno));
      return v;
   };
   while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto f = detail::csv_split(line);
      if (f.size() != 11) throw DecodeError("records csv: expected 11 fields on line " + std::to_string(lineno));
      try {
         RunRecord r;
         r.seed = std::stoull(f[0]);
         r.env = f[1];
         r.feature_map = f[2];
         r.algorithm = f[3];
         r.budget = std::stoi(f[4]);
         r.expert_queries = std::stol(f[5]);
         r.nash_gap = num(f[6]);
         r.train_loglik = num(f[7]);
         r.expected_tv_to_expert = num(f[8]);
         r.wall_ms = num(f[9]);
         r.error = f[10];
         out.push_back(std::move(r));
      } catch (const std::logic_error&) {
         throw DecodeError("records csv: bad field on line " + std::to_string(lineno));
      }
   }
   return out;
}

inline double record_metric(const RunRecord& r, const std::string& metric)
{
   if (metric == "nash_gap") return r.nash_gap;
   if (metric == "train_loglik") return r.train_loglik;
   if (metric == "expected_tv_to_expert") return r.expected_tv_to_expert;
   if (metric == "expert_queries") return static_cast<double>(r.expert_queries);
   if (metric == "wall_ms") return r.wall_ms;
   throw ArgumentError("unknown metric '" + metric + "'");
}

inline double record_x(const RunRecord& r, const std::string& x)
{
   if (x == "budget") return r.budget;
   if (x == "expert_queries") return static_cast<double>(r.expert_queries);
   throw ArgumentError("unknown x axis '" + x + "' (budget, expert_queries)");
}

struct PlotPoint {
   double x = 0.0;
   double mean = 0.0;
   double sd = 0.0;  // population standard deviation over seeds
   int n = 0;
};

// Series keyed by "algorithm / feature_map"; failed records are skipped.
inline std::map<std::string, std::vector<PlotPoint>> aggregate_series(const std::vector<RunRecord>& records,
                                                                      const std::string& metric, const std::string& x)
{
   std::map<std::string, std::map<double, std::vector<double>>> acc;
   for (const auto& r : records) {
      if (!r.ok()) continue;
      const double v = record_metric(r, metric);
      if (std::isnan(v)) continue;
      acc[r.algorithm + " / " + r.feature_map][record_x(r, x)].push_back(v);
   }
   std::map<std::string, std::vector<PlotPoint>> out;
   for (const auto& [name, by_x] : acc)
      for (const auto& [xv, vals] : by_x) {
         PlotPoint p;
         p.x = xv;
         p.n = static_cast<int>(vals.size());
         for (double v : vals) p.mean += v / p.n;
         for (double v : vals) p.sd += (v - p.mean) * (v - p.mean) / p.n;
         p.sd = std::sqrt(p.sd);
         out[name].push_back(p);
      }
   return out;
}

/// Self-contained SVG line plot: one line per series at the seed mean with a
/// shaded mean +- sd band.
inline void emit_plot(const std::vector<RunRecord>& records, const std::string& metric, const std::string& x_axis,
                      std::ostream& os, bool log_x = false)
{
   if (records.empty()) throw ArgumentError("emit_plot: no records");
   const auto series = aggregate_series(records, metric, x_axis);
   if (series.empty()) throw ArgumentError("emit_plot: no successful records to plot");
   double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
   for (const auto& [_, pts] : series)
      for (const auto& p : pts) {
         if (log_x && p.x <= 0.0) throw ArgumentError("emit_plot: log x axis needs positive x values");
         const double xv = log_x ? std::log10(p.x) : p.x;
         x0 = std::min(x0, xv), x1 = std::max(x1, xv);
         y0 = std::min(y0, p.mean - p.sd), y1 = std::max(y1, p.mean + p.sd);
      }
   if (x1 == x0) x0 -= 0.5, x1 += 0.5;
   if (y1 == y0) y0 -= 0.5, y1 += 0.5;
   const double pad = 0.05 * (y1 - y0);
   y0 -= pad, y1 += pad;
   constexpr double W = 640, Hh = 400, L = 70, R = 190, T = 30, B = 50;
   auto sx = [&](double v) { return L + (W - L - R) * ((log_x ? std::log10(v) : v) - x0) / (x1 - x0); };
   auto sy = [&](double v) { return T + (Hh - T - B) * (1.0 - (v - y0) / (y1 - y0)); };
   auto f = [](double v) { return detail::fmt_double(std::round(v * 100.0) / 100.0); };
   static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

   os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
   os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
   os << "<line x1=\"" << L << "\" y1=\"" << Hh - B << "\" x2=\"" << W - R << "\" y2=\"" << Hh - B
      << "\" stroke=\"black\"/>\n";
   os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << Hh - B << "\" stroke=\"black\"/>\n";
   for (int i = 0; i <= 4; ++i) {
      const double yv = y0 + (y1 - y0) * i / 4.0;
      os << "<text x=\"" << L - 6 << "\" y=\"" << f(sy(yv) + 4) << "\" text-anchor=\"end\">" << detail::fmt_double(std::round(yv * 1000) / 1000)
         << "</text>\n";
   }
   std::vector<double> xs;
   for (const auto& [_, pts] : series)
      for (const auto& p : pts) xs.push_back(p.x);
   std::sort(xs.begin(), xs.end());
   xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
   for (double xv : xs)
      os << "<text x=\"" << f(sx(xv)) << "\" y=\"" << Hh - B + 16 << "\" text-anchor=\"middle\">" << detail::fmt_double(xv)
         << "</text>\n";
   os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << Hh - 10 << "\" text-anchor=\"middle\">" << x_axis
      << (log_x ? " (log)" : "") << "</text>\n";
   os << "<text x=\"16\" y=\"" << (T + Hh - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + Hh - B) / 2 << ")\">" << metric << "</text>\n";
   int ci = 0;
   for (const auto& [name, pts] : series) {
      const char* col = colors[ci % 6];
      std::string band, line;
      for (const auto& p : pts) band += f(sx(p.x)) + "," + f(sy(p.mean + p.sd)) + " ";
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) band += f(sx(it->x)) + "," + f(sy(it->mean - it->sd)) + " ";
      for (const auto& p : pts) line += f(sx(p.x)) + "," + f(sy(p.mean)) + " ";
      os << "<polygon points=\"" << band << "\" fill=\"" << col << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
      os << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
      for (const auto& p : pts)
         os << "<circle cx=\"" << f(sx(p.x)) << "\" cy=\"" << f(sy(p.mean)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
      const double ly = T + 18.0 * ci;
      os << "<rect x=\"" << W - R + 12 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"" << col << "\"/>\n";
      os << "<text x=\"" << W - R + 30 << "\" y=\"" << ly + 10 << "\">" << name << "</text>\n";
      ++ci;
   }
   os << "</svg>\n";
}

}  // namespace mail
