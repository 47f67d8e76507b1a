#include "arpdps/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace arpdps::io {

namespace {

// JSON has no infinities or NaN; they travel as strings.
Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double num_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a number, got " + j.dump());
}

Json vec(const Vec& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Vec vec_from(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array, got " + j.dump());
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = num_from(j[i]);
  return v;
}

// Row-major nested arrays.
Json mat(const Mat& m) {
  Json a = Json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(vec(m.row(r).transpose()));
  return a;
}

Mat mat_from(const Json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) throw std::invalid_argument("matrix has the wrong row count");
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Vec row = vec_from(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw std::invalid_argument("matrix has the wrong column count");
    m.row(r) = row.transpose();
  }
  return m;
}

template <class T, class F>
std::vector<T> list_from(const Json& j, F f) {
  if (!j.is_array()) throw std::invalid_argument("expected an array, got " + j.dump());
  std::vector<T> out;
  for (const auto& e : j) out.push_back(f(e));
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

Json to_json(const Polynomial& p) {
  Json terms = Json::array();
  for (const auto& [a, c] : p.terms()) terms.push_back({{"exponents", a.exponents()}, {"coeff", num(c)}});
  return {{"dim", p.dim()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const Json& j) {
  const int dim = j.at("dim").get<int>();
  Polynomial p(dim);
  for (const auto& t : j.at("terms")) {
    auto e = t.at("exponents").get<std::vector<int>>();
    if (static_cast<int>(e.size()) != dim) throw std::invalid_argument("polynomial term has the wrong number of exponents");
    for (int x : e)
      if (x < 0) throw std::invalid_argument("polynomial exponents must be nonnegative");
    p.add_term(MultiIndex(std::move(e)), num_from(t.at("coeff")));
  }
  return p;
}

Json to_json(const ArpProblem& p) {
  Json j;
  j["d"] = p.d;
  j["q"] = p.q;
  j["m"] = p.m;
  j["k"] = p.k;
  j["a0"] = Json::array();
  j["A"] = Json::array();
  j["bvec"] = Json::array();
  j["c"] = Json::array();
  for (int i = 0; i < p.m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    j["a0"].push_back(vec(p.a0[ui]));
    j["A"].push_back(mat(p.a[ui]));
    j["bvec"].push_back(vec(p.bvec[ui]));
    j["c"].push_back(vec(p.c[ui]));
  }
  j["b0"] = vec(p.b0);
  j["ball"] = {{"center", vec(p.ball.center)}, {"r", num(p.ball.r)}};
  j["box"] = {{"lo", vec(p.box_lo)}, {"hi", vec(p.box_hi)}};
  Json gs = Json::array();
  for (const auto& g : p.sos_set.gs) gs.push_back(to_json(g));
  j["sos_set"] = {{"dim", p.sos_set.dim}, {"omega", p.sos_set.omega}, {"constraints", gs}};
  if (p.sos_set.slater_point) j["sos_set"]["slater_point"] = vec(*p.sos_set.slater_point);
  j["objective"] = {{"linear", vec(p.f.linear)}, {"quadratic", vec(p.f.quadratic)},
                    {"lo", vec(p.f.lo)}, {"hi", vec(p.f.hi)}};
  j["rho"] = num(p.rho);
  return j;
}

ArpProblem arp_from_json(const Json& j) {
  ArpProblem p;
  p.d = j.at("d").get<int>();
  p.q = j.at("q").get<int>();
  p.m = j.at("m").get<int>();
  p.k = j.at("k").get<int>();
  p.a0 = list_from<Vec>(j.at("a0"), vec_from);
  p.a = list_from<Mat>(j.at("A"), [&](const Json& e) { return mat_from(e, p.d, p.k); });
  p.bvec = list_from<Vec>(j.at("bvec"), vec_from);
  p.c = list_from<Vec>(j.at("c"), vec_from);
  p.b0 = vec_from(j.at("b0"));
  p.ball.center = vec_from(j.at("ball").at("center"));
  p.ball.r = num_from(j.at("ball").at("r"));
  p.box_lo = vec_from(j.at("box").at("lo"));
  p.box_hi = vec_from(j.at("box").at("hi"));
  const Json& s = j.at("sos_set");
  p.sos_set.dim = s.at("dim").get<int>();
  p.sos_set.omega = s.at("omega").get<int>();
  p.sos_set.gs = list_from<Polynomial>(s.at("constraints"), polynomial_from_json);
  if (s.contains("slater_point")) p.sos_set.slater_point = vec_from(s.at("slater_point"));
  const Json& f = j.at("objective");
  p.f.linear = vec_from(f.at("linear"));
  if (f.contains("quadratic")) p.f.quadratic = vec_from(f.at("quadratic"));
  if (f.contains("lo")) p.f.lo = vec_from(f.at("lo"));
  if (f.contains("hi")) p.f.hi = vec_from(f.at("hi"));
  p.rho = num_from(j.at("rho"));
  p.validate();
  return p;
}

Json to_json(const SolveReport& r) {
  Json j;
  j["objective"] = num(r.objective);
  j["iterations"] = r.iterations;
  j["wall_time_s"] = num(r.wall_time_s);
  j["status"] = to_string(r.status);
  j["tau"] = num(r.tau);
  j["sigma"] = num(r.sigma);
  j["norm_estimate"] = num(r.norm_estimate);
  j["rel_dx"] = num(r.rel_dx);
  j["rel_dy"] = num(r.rel_dy);
  j["inner_iterations"] = r.inner_iterations;
  if (!r.message.empty()) j["message"] = r.message;
  if (!r.history.empty()) {
    Json h = Json::array();
    for (const auto& [dx, dy] : r.history) h.push_back({num(dx), num(dy)});
    j["residual_history"] = h;
  }
  return j;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = to_string(c.experiment);
  j["N"] = c.n_values;
  Json rg = Json::array();
  for (double r : c.r_grid) rg.push_back(num(r));
  j["r"] = rg;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  if (c.cost_mode) j["cost_mode"] = to_string(*c.cost_mode);
  j["rho"] = num(c.rho);
  j["eps"] = num(c.eps);
  j["max_iters"] = c.max_iters;
  j["output"] = c.output;
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  static const std::vector<std::string> known{"experiment", "N", "r", "runs", "seed", "cost_mode",
                                              "rho", "eps", "max_iters", "output"};
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw std::invalid_argument("experiment config: unknown key '" + item.key() + "'");
  ExperimentConfig c;
  c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  if (j.contains("N")) {
    const Json& n = j.at("N");
    c.n_values = n.is_array() ? n.get<std::vector<int>>() : std::vector<int>{n.get<int>()};
  }
  if (j.contains("r")) {
    const Json& r = j.at("r");
    c.r_grid = r.is_array() ? list_from<double>(r, num_from) : std::vector<double>{num_from(r)};
  }
  if (j.contains("runs")) c.runs = j.at("runs").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("cost_mode")) c.cost_mode = cost_mode_from_string(j.at("cost_mode").get<std::string>());
  if (j.contains("rho")) c.rho = num_from(j.at("rho"));
  if (j.contains("eps")) c.eps = num_from(j.at("eps"));
  if (j.contains("max_iters")) c.max_iters = j.at("max_iters").get<int>();
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment config '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("experiment config '" + path + "' is not valid JSON: " + e.what());
  }
  return experiment_config_from_json(j);
}

Json to_json(const RunRecord& r) {
  return {{"N", r.n},
          {"r", num(r.r)},
          {"seed", r.seed},
          {"objective", num(r.objective)},
          {"nominal", num(r.nominal)},
          {"por_percent", num(r.por_percent)},
          {"iterations", r.iterations},
          {"wall_time_s", num(r.wall_time_s)},
          {"status", r.status}};
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "N,r,seed,objective,nominal,por_percent,iterations,wall_time_s,status\n";
  for (const auto& r : records) {
    std::string status = r.status;
    for (auto& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    os << r.n << ',' << std::setprecision(17) << r.r << ',' << r.seed << ',' << r.objective << ',' << r.nominal
       << ',' << r.por_percent << ',' << r.iterations << ',' << r.wall_time_s << ',' << status << '\n';
  }
}

Json aggregate(const std::vector<RunRecord>& records) {
  std::map<std::pair<int, double>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) groups[{r.n, r.r}].push_back(&r);
  Json out = Json::array();
  for (const auto& [key, rs] : groups) {
    std::vector<double> obj, por, iters, wall;
    int converged = 0;
    for (const RunRecord* r : rs) {
      if (r->status == "converged") ++converged;
      if (std::isfinite(r->objective)) obj.push_back(r->objective);
      if (std::isfinite(r->por_percent)) por.push_back(r->por_percent);
      iters.push_back(r->iterations);
      wall.push_back(r->wall_time_s);
    }
    out.push_back({{"N", key.first},
                   {"r", num(key.second)},
                   {"runs", rs.size()},
                   {"converged", converged},
                   {"objective_mean", num(mean(obj))},
                   {"objective_std", num(stddev(obj))},
                   {"por_mean", num(mean(por))},
                   {"por_std", num(stddev(por))},
                   {"iterations_mean", num(mean(iters))},
                   {"iterations_std", num(stddev(iters))},
                   {"wall_time_mean_s", num(mean(wall))}});
  }
  return out;
}

void write_outputs(const std::string& path, const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(csv, records);
  std::string jpath = path;
  const auto dot = jpath.find_last_of('.');
  const auto slash = jpath.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) jpath.erase(dot);
  jpath += ".json";
  std::ofstream js(jpath);
  if (!js) throw std::runtime_error("cannot write '" + jpath + "'");
  js << Json{{"config", to_json(cfg)}, {"summary", aggregate(records)}}.dump(2) << '\n';
}

}  // namespace arpdps::io
