#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "splitplot/cli.hpp"
#include "splitplot/error.hpp"

namespace splitplot::cli {

namespace {

using nlohmann::json;

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw InvalidInput("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(trim(cur));
  return fields;
}

double parse_real(const std::string& s, const std::string& column, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(v))
    throw InvalidInput("line " + std::to_string(line_no) + ": column '" + column + "' is not a finite number: '" + s + "'");
  return v;
}

std::size_t parse_level(const std::string& s, const std::string& column, std::size_t line_no) {
  std::size_t used = 0;
  long long v = -1;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || v < 0)
    throw InvalidInput("line " + std::to_string(line_no) + ": column '" + column +
                       "' must be a nonnegative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_csv_line(line, line_no);
  }
  if (header.empty()) throw InvalidInput(source + ": missing header");

  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k].empty()) throw InvalidInput(source + ": empty column name in header");
    if (!col.emplace(header[k], k).second) throw InvalidInput(source + ": duplicate column '" + header[k] + "'");
  }
  for (const char* required : {kWholePlot, kALevel, kBLevel, kOutcome})
    if (!col.count(required)) throw InvalidInput(source + ": missing required column '" + std::string(required) + "'");
  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  for (std::size_t k = 0; k < header.size(); ++k) {
    const std::string& h = header[k];
    if (h == kWholePlot || h == kUnit || h == kALevel || h == kBLevel || h == kOutcome) continue;
    cov_cols.push_back(k);
    cov_names.push_back(h);
  }

  struct Row {
    std::size_t b;
    double y;
    std::vector<double> x;
  };
  std::vector<std::string> plot_ids;
  std::unordered_map<std::string, std::size_t> plot_index;
  std::vector<std::size_t> plot_a;
  std::vector<std::size_t> plot_a_line;
  std::vector<std::vector<Row>> plots;
  std::size_t t_a = 0;
  std::size_t t_b = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line, line_no);
    if (f.size() != header.size())
      throw InvalidInput(source + ": line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                         " fields, header has " + std::to_string(header.size()));
    const std::string& id = f[col[kWholePlot]];
    if (id.empty()) throw InvalidInput(source + ": line " + std::to_string(line_no) + ": empty whole_plot id");
    const std::size_t a = parse_level(f[col[kALevel]], kALevel, line_no);
    Row row{parse_level(f[col[kBLevel]], kBLevel, line_no), parse_real(f[col[kOutcome]], kOutcome, line_no), {}};
    for (std::size_t k = 0; k < cov_cols.size(); ++k) row.x.push_back(parse_real(f[cov_cols[k]], cov_names[k], line_no));
    auto [it, fresh] = plot_index.emplace(id, plots.size());
    if (fresh) {
      plot_ids.push_back(id);
      plot_a.push_back(a);
      plot_a_line.push_back(line_no);
      plots.emplace_back();
    } else if (plot_a[it->second] != a) {
      throw InvalidInput(source + ": line " + std::to_string(line_no) + ": whole_plot '" + id + "' has a_level " +
                         std::to_string(a) + " but a_level " + std::to_string(plot_a[it->second]) + " on line " +
                         std::to_string(plot_a_line[it->second]));
    }
    t_a = std::max(t_a, a + 1);
    t_b = std::max(t_b, row.b + 1);
    plots[it->second].push_back(std::move(row));
  }
  if (plots.empty()) throw InvalidInput(source + ": no data rows");

  std::vector<std::size_t> w_a(t_a, 0);
  for (std::size_t a : plot_a) ++w_a[a];
  std::vector<std::vector<std::size_t>> m_wb(plots.size(), std::vector<std::size_t>(t_b, 0));
  Assignment x;
  x.a_levels = plot_a;
  x.b_levels.resize(plots.size());
  std::size_t n = 0;
  for (std::size_t w = 0; w < plots.size(); ++w) {
    for (const Row& r : plots[w]) {
      ++m_wb[w][r.b];
      x.b_levels[w].push_back(r.b);
    }
    n += plots[w].size();
  }
  // Level-count problems are reported by the design with their own message.
  SplitPlotDesign design = [&] {
    try {
      return SplitPlotDesign(std::max<std::size_t>(t_a, 2), std::max<std::size_t>(t_b, 2), w_a, m_wb);
    } catch (const InvalidInput& e) {
      throw InvalidInput(source + ": inferred " + e.what());
    }
  }();
  Vector y;
  y.reserve(n);
  Matrix cov(n, cov_cols.size());
  std::size_t i = 0;
  for (const auto& plot : plots)
    for (const Row& r : plot) {
      y.push_back(r.y);
      for (std::size_t k = 0; k < r.x.size(); ++k) cov(i, k) = r.x[k];
      ++i;
    }
  return Dataset{ObservedData(std::move(design), std::move(x), std::move(y), std::move(cov), cov_names),
                 std::move(plot_ids)};
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open dataset '" + path + "'");
  return read_dataset(in, path);
}

SplitPlotDesign parse_design_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    return SplitPlotDesign(j.at("t_a").get<std::size_t>(), j.at("t_b").get<std::size_t>(),
                           j.at("whole_plot_counts").get<std::vector<std::size_t>>(),
                           j.at("sub_plot_counts").get<std::vector<std::vector<std::size_t>>>());
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("design spec: ") + e.what());
  }
}

SplitPlotDesign load_design(const std::string& path) { return parse_design_json(read_file(path)); }

SimConfig parse_sim_config_json(const std::string& text, SimConfig c) {
  try {
    const json j = json::parse(text);
    static const std::vector<std::string> known = {
        "num_plots", "treated_fraction", "size_poisson_mean", "min_count", "covariate_mean", "covariate_variance",
        "within_covariate_variance", "theta_variance", "epsilon_halfwidth", "outcome", "replications", "seed",
        "z_critical", "workers"};
    for (const auto& [key, value] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw InvalidInput("simulation config: unknown key '" + key + "'");
    c.num_plots = get_or(j, "num_plots", c.num_plots);
    c.treated_fraction = get_or(j, "treated_fraction", c.treated_fraction);
    c.size_poisson_mean = get_or(j, "size_poisson_mean", c.size_poisson_mean);
    c.min_count = get_or(j, "min_count", c.min_count);
    c.covariate_mean = get_or(j, "covariate_mean", c.covariate_mean);
    c.covariate_variance = get_or(j, "covariate_variance", c.covariate_variance);
    c.within_covariate_variance = get_or(j, "within_covariate_variance", c.within_covariate_variance);
    c.theta_variance = get_or(j, "theta_variance", c.theta_variance);
    c.epsilon_halfwidth = get_or(j, "epsilon_halfwidth", c.epsilon_halfwidth);
    c.replications = get_or(j, "replications", c.replications);
    c.seed = get_or(j, "seed", c.seed);
    c.z_critical = get_or(j, "z_critical", c.z_critical);
    c.workers = get_or(j, "workers", c.workers);
    if (j.contains("outcome")) {
      const json& o = j.at("outcome");
      c.outcome.intercept = get_or(o, "intercept", c.outcome.intercept);
      c.outcome.theta = get_or(o, "theta", c.outcome.theta);
      c.outcome.x2 = get_or(o, "x2", c.outcome.x2);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

void write_assignment_csv(std::ostream& out, const SplitPlotDesign& design, const Assignment& x) {
  validate_assignment(design, x);
  out << kWholePlot << ',' << kUnit << ',' << kALevel << ',' << kBLevel << '\n';
  for (std::size_t w = 0; w < design.num_plots(); ++w)
    for (std::size_t s = 0; s < design.plot_size(w); ++s)
      out << w << ',' << s << ',' << x.a_levels[w] << ',' << x.b_levels[w][s] << '\n';
}

void write_sim_summary_csv(std::ostream& out, const SimSummary& summary) {
  out << "scheme,effect,truth,bias,sd,ese,coverage,failures\n";
  for (const SimRow& r : summary.rows)
    out << r.scheme << ',' << r.effect << ',' << format_number(r.truth) << ',' << format_number(r.bias) << ','
        << format_number(r.sd) << ',' << format_number(r.ese) << ',' << format_number(r.coverage) << ',' << r.failures
        << '\n';
}

}  // namespace splitplot::cli
