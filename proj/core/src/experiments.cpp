// Copyright 2026 The infolab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "infolab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "infolab/bounds.hpp"
#include "infolab/dataset_io.hpp"
#include "infolab/error.hpp"
#include "infolab/rng.hpp"
#include "json.hpp"

#ifndef INFOLAB_VERSION
#define INFOLAB_VERSION "0.0.0"
#endif

namespace infolab {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

std::string num(double v) { return format_double(v); }

int method_index(Optimizer o) {
  switch (o) {
    case Optimizer::kSG: return 0;
    case Optimizer::kNewton: return 1;
    case Optimizer::kPolyak: return 2;
  }
  return 0;
}

int eps_index(double eps) {
  if (eps == 1.0) return 0;
  if (eps == 0.1) return 1;
  if (eps == 0.01) return 2;
  return -1;
}

int beta_index(int beta) {
  if (beta < -1 || beta > 1) return -1;
  return 1 - beta;
}

// [eps][method][beta], beta ordered 1, 0, -1.
constexpr std::int64_t kRefSteps[3][3][3] = {
    {{44, 43, 42}, {3, 2, 19}, {36, 36, 34}},
    {{288, 253, 207}, {3, 28, 225}, {119, 111, 97}},
    {{2090, 1941, 1731}, {29, 315, 2663}, {1743, 1727, 1705}},
};

constexpr double kRefAlpha[3][3][3] = {
    {{5e-3, 5e-3, 5e-3}, {1e0, 1e0, 2e-1}, {5e-3, 4e-3, 5e-3}},
    {{4e-3, 4e-3, 5e-3}, {1e0, 2e0, 3e-2}, {2e-3, 2e-3, 3e-3}},
    {{1e-3, 1e-3, 2e-3}, {2e-1, 2e-2, 3e-3}, {3e-4, 3e-4, 3e-4}},
};

std::pair<long, int> one_digit_parts(double x) {
  int e = static_cast<int>(std::floor(std::log10(x)));
  long m = std::lround(x / std::pow(10.0, e));
  if (m >= 10) {
    m = 1;
    ++e;
  } else if (m == 0) {
    m = 1;
  }
  return {m, e};
}

// ---------------------------------------------------------------------------
// Output helpers

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const std::filesystem::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << content;
    if (!os) throw IoError("failed writing '" + path.string() + "'");
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

/// Tab-separated x/y blocks separated by a blank line; each block starts
/// with a "# label" line.
class PlotData {
 public:
  void block(const std::string& label) {
    if (!os_.str().empty()) os_ << "\n";
    os_ << "# " << label << "\n";
  }
  void point(double x, double y) { os_ << num(x) << "\t" << num(y) << "\n"; }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

// ---------------------------------------------------------------------------
// JSON reading with strict keys

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  template <typename Enum, typename Parse>
  void get_enum(const char* key, Enum& out, Parse parse) {
    std::string name;
    bool present = j_.contains(key);
    get(key, name);
    if (!present) return;
    try {
      out = parse(name);
    } catch (const Error& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json to_json(const TrainOptions& t) {
  return json{{"steps", t.steps}, {"stepsize", t.stepsize}, {"batch", t.batch},
              {"momentum", t.momentum}};
}

void from_json_into(const json& j, TrainOptions& t, const std::string& where) {
  Reader r(j, where);
  r.get("steps", t.steps);
  r.get("stepsize", t.stepsize);
  r.get("batch", t.batch);
  r.get("momentum", t.momentum);
  r.finish();
}

json to_json(const TableConfig& c) {
  json theta0{{"mode", to_string(c.theta0.mode)}, {"target_subopt", c.theta0.target_subopt},
              {"explicit", c.theta0.explicit_theta}};
  return json{{"d", c.d},
              {"betas", c.betas},
              {"eps", c.eps},
              {"theta0", theta0},
              {"alpha_lo", c.alpha_lo},
              {"alpha_hi", c.alpha_hi},
              {"points_per_decade", c.points_per_decade},
              {"gamma_mode", to_string(c.gamma_mode)},
              {"gamma", c.gamma},
              {"gamma_grid", c.gamma_grid},
              {"noise_multiplier", c.noise_multiplier}};
}

void from_json_into(const json& j, TableConfig& c) {
  Reader r(j, "params");
  r.get("d", c.d);
  r.get("betas", c.betas);
  r.get("eps", c.eps);
  if (const json* t = r.sub("theta0")) {
    Reader rt(*t, "params.theta0");
    rt.get_enum("mode", c.theta0.mode, theta0_mode_from_string);
    rt.get("target_subopt", c.theta0.target_subopt);
    rt.get("explicit", c.theta0.explicit_theta);
    rt.finish();
  }
  r.get("alpha_lo", c.alpha_lo);
  r.get("alpha_hi", c.alpha_hi);
  r.get("points_per_decade", c.points_per_decade);
  r.get_enum("gamma_mode", c.gamma_mode, gamma_mode_from_string);
  r.get("gamma", c.gamma);
  r.get("gamma_grid", c.gamma_grid);
  r.get("noise_multiplier", c.noise_multiplier);
  r.finish();
}

json to_json(const LimitCycleConfig& c) {
  return json{{"d", c.d},
              {"betas", c.betas},
              {"sg_alphas", c.sg_alphas},
              {"newton_alphas", c.newton_alphas},
              {"polyak_alphas", c.polyak_alphas},
              {"polyak_gammas", c.polyak_gammas}};
}

void from_json_into(const json& j, LimitCycleConfig& c) {
  Reader r(j, "params");
  r.get("d", c.d);
  r.get("betas", c.betas);
  r.get("sg_alphas", c.sg_alphas);
  r.get("newton_alphas", c.newton_alphas);
  r.get("polyak_alphas", c.polyak_alphas);
  r.get("polyak_gammas", c.polyak_gammas);
  r.finish();
}

json to_json(const BoundsConfig& c) {
  return json{{"trials", c.trials},           {"support_x", c.support_x},
              {"d_in", c.d_in},               {"classes", c.classes},
              {"param_scale", c.param_scale}, {"input_scale", c.input_scale},
              {"mismatch", c.mismatch},       {"identical", c.identical}};
}

void from_json_into(const json& j, BoundsConfig& c) {
  Reader r(j, "params");
  r.get("trials", c.trials);
  r.get("support_x", c.support_x);
  r.get("d_in", c.d_in);
  r.get("classes", c.classes);
  r.get("param_scale", c.param_scale);
  r.get("input_scale", c.input_scale);
  r.get("mismatch", c.mismatch);
  r.get("identical", c.identical);
  r.finish();
}

json to_json(const InfomatConfig& c) {
  return json{{"family", to_string(c.family)},
              {"data_path", c.data_path},
              {"n", c.n},
              {"d_in", c.d_in},
              {"d_out", c.d_out},
              {"hidden", c.hidden},
              {"noise_sigma", c.noise_sigma},
              {"separation", c.separation},
              {"train", to_json(c.train)},
              {"fisher_mode", to_string(c.fisher_mode)},
              {"fisher_draws", c.fisher_draws}};
}

FisherMode fisher_mode_from_string(const std::string& name) {
  for (FisherMode m : {FisherMode::kAuto, FisherMode::kExact, FisherMode::kClosedForm,
                       FisherMode::kMonteCarlo})
    if (name == to_string(m)) return m;
  throw InvalidArgumentError("unknown Fisher mode '" + name + "'");
}

void from_json_into(const json& j, InfomatConfig& c) {
  Reader r(j, "params");
  r.get_enum("family", c.family, family_from_string);
  r.get("data_path", c.data_path);
  r.get("n", c.n);
  r.get("d_in", c.d_in);
  r.get("d_out", c.d_out);
  r.get("hidden", c.hidden);
  r.get("noise_sigma", c.noise_sigma);
  r.get("separation", c.separation);
  if (const json* t = r.sub("train")) from_json_into(*t, c.train, "params.train");
  r.get_enum("fisher_mode", c.fisher_mode, fisher_mode_from_string);
  r.get("fisher_draws", c.fisher_draws);
  r.finish();
}

json to_json(const SimilarityConfig& c) {
  return json{{"n", c.n},
              {"d_in", c.d_in},
              {"d_out", c.d_out},
              {"sigmas", c.sigmas},
              {"balanced_noise", c.balanced_noise}};
}

void from_json_into(const json& j, SimilarityConfig& c) {
  Reader r(j, "params");
  r.get("n", c.n);
  r.get("d_in", c.d_in);
  r.get("d_out", c.d_out);
  r.get("sigmas", c.sigmas);
  r.get("balanced_noise", c.balanced_noise);
  r.finish();
}

json to_json(const GapConfig& c) {
  return json{{"sweep", to_string(c.sweep)},
              {"corruption_levels", c.corruption_levels},
              {"hidden_sizes", c.hidden_sizes},
              {"seeds", c.seeds},
              {"n_train", c.n_train},
              {"n_test", c.n_test},
              {"d_in", c.d_in},
              {"classes", c.classes},
              {"separation", c.separation},
              {"hidden", c.hidden},
              {"corruption", c.corruption},
              {"init_scale", c.init_scale},
              {"train", to_json(c.train)},
              {"eval_set", to_string(c.eval_set)},
              {"test_equals_train", c.test_equals_train},
              {"cutoff_sweep", c.cutoff_sweep}};
}

void from_json_into(const json& j, GapConfig& c) {
  Reader r(j, "params");
  r.get_enum("sweep", c.sweep, gap_sweep_from_string);
  r.get("corruption_levels", c.corruption_levels);
  r.get("hidden_sizes", c.hidden_sizes);
  r.get("seeds", c.seeds);
  r.get("n_train", c.n_train);
  r.get("n_test", c.n_test);
  r.get("d_in", c.d_in);
  r.get("classes", c.classes);
  r.get("separation", c.separation);
  r.get("hidden", c.hidden);
  r.get("corruption", c.corruption);
  r.get("init_scale", c.init_scale);
  if (const json* t = r.sub("train")) from_json_into(*t, c.train, "params.train");
  r.get_enum("eval_set", c.eval_set, eval_set_from_string);
  r.get("test_equals_train", c.test_equals_train);
  r.get("cutoff_sweep", c.cutoff_sweep);
  r.finish();
}

json run_config_json(const RunConfig& c) {
  json j{{"experiment", c.experiment},
         {"root_seed", c.root_seed},
         {"out_dir", c.out_dir},
         {"rel_cutoff", c.rel_cutoff}};
  j["params"] = std::visit([](const auto& p) { return to_json(p); }, c.params);
  return j;
}

// ---------------------------------------------------------------------------
// Experiments

std::string outcome_cell(const TableCell& c) {
  std::string s = c.outcome;
  if (c.ref_steps) s += fmt(" (%lld)", static_cast<long long>(*c.ref_steps));
  return s;
}

std::string alpha_cell(const TableCell& c) {
  if (c.steps < 0) return c.outcome;
  const double r = round_one_digit(c.alpha);
  std::string s = fmt("%.0e", r);
  if (c.ref_alpha)
    s += fmt(" (%.0e, %s)", *c.ref_alpha, same_one_digit(c.alpha, *c.ref_alpha) ? "match" : "differs");
  return s;
}

template <typename CellFn>
std::string table_markdown(const TableResult& r, const std::string& title, CellFn cell) {
  std::ostringstream os;
  os << "# " << title << "\n\n";
  os << "| eps | method |";
  for (int b : r.config.betas) os << " beta=" << b << " |";
  os << "\n|---|---|";
  for (std::size_t i = 0; i < r.config.betas.size(); ++i) os << "---|";
  os << "\n";
  for (double eps : r.config.eps) {
    for (Optimizer o : {Optimizer::kSG, Optimizer::kNewton, Optimizer::kPolyak}) {
      os << "| " << fmt("%g", eps) << " | " << to_string(o) << " |";
      for (int b : r.config.betas) os << " " << cell(r.at(eps, o, b)) << " |";
      os << "\n";
    }
  }
  os << "\ntheta0 mode: " << to_string(r.config.theta0.mode);
  if (r.config.theta0.mode == Theta0Mode::kUnitSuboptUniform)
    os << " (initial suboptimality " << fmt("%g", r.config.theta0.target_subopt) << ")";
  os << "; Polyak gamma: ";
  if (r.config.gamma_mode == GammaMode::kFixed) {
    os << fmt("fixed %g", r.config.gamma);
  } else {
    os << "grid";
  }
  os << "; alpha grid " << fmt("%g", r.config.alpha_lo) << " to " << fmt("%g", r.config.alpha_hi)
     << ", " << r.config.points_per_decade << " points per decade.\n";
  return os.str();
}

void write_table_outputs(const TableResult& r, bool steps_table, OutputDir& out,
                         std::vector<std::string>& lines) {
  const std::string stem = steps_table ? "table1" : "table2";
  if (steps_table) {
    out.write(stem + ".md",
              table_markdown(r, "Steps to reach eps (published value in parentheses)", outcome_cell));
  } else {
    out.write(stem + ".md",
              table_markdown(r, "Best stepsize, one significant digit (published value)", alpha_cell));
  }
  out.write(stem + ".csv", table_csv(r));

  PlotData plot;
  for (Optimizer o : {Optimizer::kSG, Optimizer::kNewton, Optimizer::kPolyak}) {
    for (int b : r.config.betas) {
      plot.block(fmt("%s beta=%d", to_string(o), b));
      for (double eps : r.config.eps) {
        const TableCell& c = r.at(eps, o, b);
        if (c.steps < 0) continue;
        plot.point(eps, steps_table ? static_cast<double>(c.steps) : c.alpha);
      }
    }
  }
  out.write("plotdata_" + stem + ".tsv", plot.str());

  int matched = 0, compared = 0;
  for (const TableCell& c : r.cells) {
    if (steps_table) {
      if (!c.ref_steps || c.steps < 0) continue;
      ++compared;
      const double ref = static_cast<double>(*c.ref_steps);
      if (std::abs(static_cast<double>(c.steps) - ref) <= 0.1 * ref) ++matched;
    } else {
      if (!c.ref_alpha || c.steps < 0) continue;
      ++compared;
      if (same_one_digit(c.alpha, *c.ref_alpha)) ++matched;
    }
  }
  lines.push_back(fmt("%s: %d of %d cells %s", stem.c_str(), matched, compared,
                      steps_table ? "within 10% of the published count"
                                  : "match the published stepsize to one digit"));
}

std::vector<std::string> run_tables(const RunConfig& rc, bool steps_table, OutputDir& out) {
  const TableResult r = run_table(std::get<TableConfig>(rc.params));
  std::vector<std::string> lines;
  write_table_outputs(r, steps_table, out, lines);
  return lines;
}

std::vector<std::string> write_limit_cycles(const LimitCycleResult& r, OutputDir& out) {
  std::ostringstream csv;
  csv << "method,beta,alpha,gamma,closed_form,recursion,lyapunov,abs_diff,lyapunov_residual,"
         "iterations\n";
  PlotData plot;
  plot.block("closed form vs recursion fixed point");
  for (const LimitCycleRow& row : r.rows) {
    csv << to_string(row.method) << "," << row.beta << "," << num(row.alpha) << ","
        << num(row.gamma) << "," << num(row.closed_form) << "," << num(row.recursion) << ","
        << num(row.lyapunov) << "," << num(row.abs_diff) << "," << num(row.lyapunov_residual)
        << "," << row.iterations << "\n";
    plot.point(row.closed_form, row.recursion);
  }
  out.write("limit_cycles.csv", csv.str());
  out.write("plotdata_limit_cycles.tsv", plot.str());
  const std::string line =
      fmt("limit-cycles: %zu configurations, closed form vs recursion max abs diff %.3e, "
          "max Lyapunov residual %.3e",
          r.rows.size(), r.max_abs_diff, r.max_lyapunov_residual);
  out.write("limit_cycles.md", "# Limit cycles\n\n" + line + "\n");
  return {line};
}

std::vector<std::string> write_bounds(const BoundsResult& r, OutputDir& out) {
  std::ostringstream csv;
  csv << "trial,direction,chi2_forward,chi2_backward,beta1,beta2,lhs_FH,rhs_FH,slack_FH,lhs_FC,"
         "rhs_FC,slack_FC,lhs_CH,rhs_CH,slack_CH,fisher_identity_gap\n";
  PlotData plot;
  plot.block("chi2 weight vs ||F - H||^2");
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    const BoundReport& b = r.reports[i];
    csv << i / 2 << "," << to_string(b.direction) << "," << num(b.chi2_forward) << ","
        << num(b.chi2_backward) << "," << num(b.beta1) << "," << num(b.beta2) << ","
        << num(b.lhs_FH) << "," << num(b.rhs_FH) << "," << num(b.slack_FH) << ","
        << num(b.lhs_FC) << "," << num(b.rhs_FC) << "," << num(b.slack_FC) << ","
        << num(b.lhs_CH) << "," << num(b.rhs_CH) << "," << num(b.slack_CH) << ","
        << num(b.fisher_identity_gap) << "\n";
    const double w = b.direction == BoundDirection::kBackward ? b.chi2_backward : b.chi2_forward;
    if (std::isfinite(w)) plot.point(w, b.lhs_FH);
  }
  out.write("bounds.csv", csv.str());
  out.write("plotdata_bounds.tsv", plot.str());
  std::vector<std::string> lines;
  lines.push_back(fmt("bounds: %zu reports, %zu violations, min slack %.3e", r.reports.size(),
                      r.violations, r.min_slack));
  lines.push_back(fmt("bounds: max distance between H, F, C when p == q: %.3e",
                      r.max_identical_dist));
  std::string md = "# Distribution-mismatch bounds\n\n";
  for (const auto& l : lines) md += "- " + l + "\n";
  out.write("bounds.md", md);
  return lines;
}

std::vector<std::string> write_infomat(const InfomatResult& r, OutputDir& out) {
  out.write("info.json", info_to_json(r.info));
  std::ostringstream ds;
  write_dataset_csv(ds, r.data);
  out.write("dataset.csv", ds.str());
  {
    std::ostringstream params;
    params << "index,value\n";
    for (std::size_t i = 0; i < r.model.dim(); ++i)
      params << i << "," << num(r.model.params()[i]) << "\n";
    out.write("params.csv", params.str());
  }

  const InfoMatrixSet& m = r.info;
  std::ostringstream csv;
  csv << "quantity,value\n";
  csv << "N," << m.N << "\ndim," << m.dim() << "\n";
  csv << "trace_H," << num(trace(m.H)) << "\ntrace_F," << num(trace(m.F)) << "\ntrace_C,"
      << num(trace(m.C)) << "\ntrace_S," << num(trace(m.S)) << "\n";
  std::vector<std::string> lines;
  auto pair = [&](const char* name, const SymMatrix& a, const SymMatrix& b) {
    const double rr = similarity_r(a, b);
    const double ss = similarity_s(a, b);
    csv << "r_" << name << "," << num(rr) << "\ns_" << name << "," << num(ss) << "\n";
    lines.push_back(fmt("infomat: r(%s) = %.6g, s(%s) = %.6g", name, rr, name, ss));
  };
  pair("C,H", m.C, m.H);
  pair("F,H", m.F, m.H);
  pair("C,F", m.C, m.F);
  out.write("infomat.csv", csv.str());

  PlotData plot;
  const std::pair<const char*, const SymMatrix*> mats[] = {{"H", &m.H}, {"F", &m.F}, {"C", &m.C}};
  for (const auto& [name, mat] : mats) {
    plot.block(fmt("eigenvalues of %s", name));
    const EigenDecomp e = eigh(*mat);
    for (std::size_t k = 0; k < e.eigenvalues.size(); ++k)
      plot.point(static_cast<double>(k), e.eigenvalues[k]);
  }
  out.write("plotdata_infomat_spectrum.tsv", plot.str());
  return lines;
}

std::vector<std::string> write_similarity(const std::vector<SimilarityRow>& rows, OutputDir& out) {
  std::ostringstream csv;
  csv << "sigma,r_data,s_data,r_closed,s_closed,r_fh,s_fh\n";
  PlotData plot;
  plot.block("sigma^2 vs r(C,H)");
  std::vector<std::string> lines;
  for (const SimilarityRow& r : rows) {
    csv << num(r.sigma) << "," << num(r.r_data) << "," << num(r.s_data) << "," << num(r.r_closed)
        << "," << num(r.s_closed) << "," << num(r.r_fh) << "," << num(r.s_fh) << "\n";
    plot.point(r.sigma * r.sigma, r.r_data);
    lines.push_back(fmt("similarity: sigma=%g r(C,H)=%.9g s(C,H)=%.12g", r.sigma, r.r_data, r.s_data));
  }
  out.write("similarity.csv", csv.str());
  out.write("plotdata_similarity.tsv", plot.str());
  return lines;
}

std::string gap_csv(const std::vector<GapReport>& reports) {
  std::ostringstream csv;
  csv << "corruption,hidden,seed,status,train_loss,test_loss,gap,tic,tic_fisher,trace_ratio,"
         "trace_ratio_raw,aic,flatness,sensitivity,retained_rank,fisher_retained_rank,rel_cutoff,"
         "N,dim\n";
  for (const GapReport& r : reports) {
    csv << num(r.corruption) << "," << r.hidden << "," << r.seed_index << "," << r.status << ","
        << num(r.train_loss) << "," << num(r.test_loss) << "," << num(r.gap) << "," << num(r.tic)
        << "," << num(r.tic_fisher) << "," << num(r.trace_ratio) << "," << num(r.trace_ratio_raw)
        << "," << num(r.aic) << "," << num(r.flatness) << "," << num(r.sensitivity) << ","
        << r.retained_rank << "," << r.fisher_retained_rank << "," << num(r.rel_cutoff) << ","
        << r.N << "," << r.dim << "\n";
  }
  return csv.str();
}

std::vector<std::string> run_gap_outputs(const RunConfig& rc, OutputDir& out) {
  GapConfig c = std::get<GapConfig>(rc.params);
  c.root_seed = rc.root_seed;
  c.rel_cutoff = rc.rel_cutoff;
  const std::vector<GapReport> reports = gap_experiment(c);
  out.write("gap.csv", gap_csv(reports));

  const std::pair<const char*, double GapReport::*> criteria[] = {
      {"tic", &GapReport::tic},
      {"tic_fisher", &GapReport::tic_fisher},
      {"trace_ratio", &GapReport::trace_ratio},
      {"flatness", &GapReport::flatness},
      {"sensitivity", &GapReport::sensitivity},
  };
  for (const auto& [name, field] : criteria) {
    PlotData plot;
    plot.block(fmt("%s vs gap", name));
    for (const GapReport& r : reports)
      if (r.status == "ok") plot.point(r.*field, r.gap);
    out.write(fmt("plotdata_gap_%s.tsv", name), plot.str());
  }

  const GapSummary s = summarize_gap(reports, c.sweep);
  std::vector<std::string> lines;
  lines.push_back(fmt("gap: %zu of %zu runs ok; Spearman vs gap: tic %.3f, tic_fisher %.3f, "
                      "trace_ratio %.3f, flatness %.3f, sensitivity %.3f; gap vs %s %.3f",
                      s.used, reports.size(), s.rho_tic, s.rho_tic_fisher, s.rho_trace_ratio,
                      s.rho_flatness, s.rho_sensitivity, to_string(c.sweep), s.rho_gap_sweep));

  if (c.cutoff_sweep) {
    std::ostringstream sweep;
    sweep << "rel_cutoff,rho_tic,rho_tic_fisher\n";
    for (double cutoff : {1e-2, 1e-3, 1e-4}) {
      GapConfig cc = c;
      cc.rel_cutoff = cutoff;
      const GapSummary ss = summarize_gap(gap_experiment(cc), c.sweep);
      sweep << num(cutoff) << "," << num(ss.rho_tic) << "," << num(ss.rho_tic_fisher) << "\n";
      lines.push_back(fmt("gap: rel_cutoff %g: Spearman tic %.3f, tic_fisher %.3f", cutoff,
                          ss.rho_tic, ss.rho_tic_fisher));
    }
    out.write("gap_cutoff_sweep.csv", sweep.str());
  }

  std::string md = "# Generalization gap and its estimators\n\n";
  for (const auto& l : lines) md += "- " + l + "\n";
  out.write("gap.md", md);
  return lines;
}

bool params_match(const std::string& experiment, const ExperimentParams& p) {
  if (experiment == "table1" || experiment == "table2")
    return std::holds_alternative<TableConfig>(p);
  if (experiment == "limit-cycles") return std::holds_alternative<LimitCycleConfig>(p);
  if (experiment == "bounds") return std::holds_alternative<BoundsConfig>(p);
  if (experiment == "infomat") return std::holds_alternative<InfomatConfig>(p);
  if (experiment == "similarity") return std::holds_alternative<SimilarityConfig>(p);
  if (experiment == "gap") return std::holds_alternative<GapConfig>(p);
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Table protocol

const char* to_string(GammaMode m) { return m == GammaMode::kFixed ? "fixed" : "grid"; }

GammaMode gamma_mode_from_string(const std::string& name) {
  if (name == "fixed") return GammaMode::kFixed;
  if (name == "grid") return GammaMode::kGrid;
  throw InvalidArgumentError("unknown gamma mode '" + name + "'");
}

const TableCell& TableResult::at(double eps, Optimizer method, int beta) const {
  for (const TableCell& c : cells)
    if (c.eps == eps && c.method == method && c.beta == beta) return c;
  throw InvalidArgumentError("table cell not found");
}

std::optional<std::int64_t> reference_steps(double eps, Optimizer method, int beta) {
  const int e = eps_index(eps), b = beta_index(beta);
  if (e < 0 || b < 0) return std::nullopt;
  return kRefSteps[e][method_index(method)][b];
}

std::optional<double> reference_alpha(double eps, Optimizer method, int beta) {
  const int e = eps_index(eps), b = beta_index(beta);
  if (e < 0 || b < 0) return std::nullopt;
  return kRefAlpha[e][method_index(method)][b];
}

double round_one_digit(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return x;
  const auto [m, e] = one_digit_parts(x);
  return static_cast<double>(m) * std::pow(10.0, e);
}

bool same_one_digit(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) return false;
  return one_digit_parts(a) == one_digit_parts(b);
}

TableResult run_table(const TableConfig& config) {
  if (config.d < 1) throw ConfigError("table: d must be >= 1");
  if (config.betas.empty() || config.eps.empty()) throw ConfigError("table: empty beta or eps set");
  const std::vector<double> alphas =
      log_grid(config.alpha_lo, config.alpha_hi, config.points_per_decade);
  const std::vector<double> gammas =
      config.gamma_mode == GammaMode::kFixed ? std::vector<double>{config.gamma} : config.gamma_grid;

  TableResult r;
  r.config = config;
  for (double eps : config.eps) {
    for (Optimizer o : {Optimizer::kSG, Optimizer::kNewton, Optimizer::kPolyak}) {
      for (int beta : config.betas) {
        const ProblemInstance inst =
            make_problem(config.d, beta, config.theta0, config.noise_multiplier);
        TableCell cell;
        cell.eps = eps;
        cell.method = o;
        cell.beta = beta;
        cell.ref_steps = reference_steps(eps, o, beta);
        cell.ref_alpha = reference_alpha(eps, o, beta);
        try {
          const StepsizeSearch s = optimize_stepsize(inst.problem, inst.theta0, o, eps, alphas, gammas);
          cell.steps = s.best_steps;
          cell.alpha = s.best_alpha;
          cell.gamma = s.best_gamma;
          cell.outcome = std::to_string(s.best_steps);
        } catch (const InfeasibleError&) {
          bool any_stable = false;
          for (double a : alphas)
            for (double g : gammas)
              if (spectral_radius(inst.problem, make_method(inst.problem, o, a, g)) < 1.0)
                any_stable = true;
          cell.outcome = any_stable ? "never" : "diverged";
        }
        r.cells.push_back(std::move(cell));
      }
    }
  }
  if (std::none_of(r.cells.begin(), r.cells.end(), [](const TableCell& c) { return c.steps >= 0; }))
    throw InfeasibleError("table: no cell reaches its threshold on the stepsize grid");
  return r;
}

std::string table1_markdown(const TableResult& r) {
  return table_markdown(r, "Steps to reach eps (published value in parentheses)", outcome_cell);
}

std::string table2_markdown(const TableResult& r) {
  return table_markdown(r, "Best stepsize, one significant digit (published value)", alpha_cell);
}

std::string table_csv(const TableResult& r) {
  std::ostringstream os;
  os << "eps,method,beta,outcome,steps,alpha,alpha_one_digit,gamma,ref_steps,ref_alpha,"
        "alpha_match\n";
  for (const TableCell& c : r.cells) {
    os << num(c.eps) << "," << to_string(c.method) << "," << c.beta << "," << c.outcome << ","
       << c.steps << "," << num(c.alpha) << "," << num(round_one_digit(c.alpha)) << ","
       << num(c.gamma) << ",";
    if (c.ref_steps) os << *c.ref_steps;
    os << ",";
    if (c.ref_alpha) os << num(*c.ref_alpha);
    os << ",";
    if (c.ref_alpha && c.steps >= 0) os << (same_one_digit(c.alpha, *c.ref_alpha) ? 1 : 0);
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Limit cycles

LimitCycleResult run_limit_cycles(const LimitCycleConfig& config) {
  struct Job {
    Optimizer method;
    int beta;
    double alpha;
    double gamma;
  };
  std::vector<Job> jobs;
  for (int beta : config.betas) {
    for (double a : config.sg_alphas) jobs.push_back({Optimizer::kSG, beta, a, 0.0});
    for (double a : config.newton_alphas) jobs.push_back({Optimizer::kNewton, beta, a, 0.0});
    for (double a : config.polyak_alphas)
      for (double g : config.polyak_gammas) jobs.push_back({Optimizer::kPolyak, beta, a, g});
  }

  LimitCycleResult r;
  for (const Job& job : jobs) {
    const QuadraticProblem p = make_problem(config.d, job.beta).problem;
    const MethodSpec m = make_method(p, job.method, job.alpha, job.gamma);
    LimitCycleRow row;
    row.method = job.method;
    row.beta = job.beta;
    row.alpha = job.alpha;
    row.gamma = job.gamma;
    row.closed_form = job.method == Optimizer::kPolyak
                          ? limit_cycle_polyak(p, job.alpha, job.gamma)
                          : limit_cycle_sg(p, job.alpha, m.preconditioner(p.dim()));
    const MomentState s = stationary_by_iteration(p, m);
    row.recursion = expected_subopt(p, s);
    row.iterations = s.t;
    row.lyapunov = 0.5 * trace_product(p.H, stationary_covariance(p, m));
    row.abs_diff = std::abs(row.closed_form - row.recursion);
    if (job.method != Optimizer::kPolyak) row.lyapunov_residual = lyapunov_residual(p, m, s.Sigma);
    r.max_abs_diff = std::max(r.max_abs_diff, row.abs_diff);
    r.max_lyapunov_residual = std::max(r.max_lyapunov_residual, row.lyapunov_residual);
    r.rows.push_back(row);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Bounds

BoundsResult run_bounds(const BoundsConfig& config, std::uint64_t seed) {
  if (config.trials == 0 || config.support_x == 0 || config.d_in < 1 || config.classes < 2)
    throw ConfigError("bounds: need trials, support_x, d_in >= 1 and classes >= 2");
  BoundsResult r;
  r.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < config.trials; ++t) {
    Rng rng = make_rng(derive_seed(seed, t));
    const LossOracle oracle =
        randomized(LossOracle::softmax_linear(config.d_in, config.classes), config.param_scale, rng);
    std::vector<Vector> xs(config.support_x);
    for (Vector& x : xs) {
      x = standard_normal_vector(rng, static_cast<std::size_t>(config.d_in));
      for (double& v : x) v *= config.input_scale;
    }
    Vector marginal(config.support_x);
    double total = 0.0;
    for (double& w : marginal) total += (w = std::exp(standard_normal(rng)));
    for (double& w : marginal) w /= total;
    const DiscreteJoint q = model_joint(oracle, xs, marginal);

    DiscreteJoint p = q;
    if (!config.identical) {
      Vector probs(q.size());
      double z = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i)
        z += (probs[i] = q.probs[i] * std::exp(config.mismatch * standard_normal(rng)));
      for (double& v : probs) v /= z;
      p = with_probs(q, std::move(probs));
    }

    for (BoundDirection dir : {BoundDirection::kBackward, BoundDirection::kForward}) {
      BoundReport b = verify_bounds(oracle, p, q, dir);
      r.min_slack = std::min(r.min_slack, b.min_slack());
      if (b.min_slack() < -1e-9) ++r.violations;
      if (config.identical) {
        const double dist = std::sqrt(std::max(
            {frobenius_dist_sq(b.H, b.F), frobenius_dist_sq(b.F, b.C), frobenius_dist_sq(b.C, b.H)}));
        r.max_identical_dist = std::max(r.max_identical_dist, dist);
      }
      r.reports.push_back(std::move(b));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Information matrices

Dataset make_ols_dataset(const LossOracle& truth, std::size_t n, double sigma, bool balanced,
                         Rng& rng) {
  if (truth.family() != Family::kOls) throw InvalidArgumentError("make_ols_dataset: needs an OLS model");
  const auto d = static_cast<std::size_t>(truth.input_dim());
  const auto p = static_cast<std::size_t>(truth.shape().d_out);
  const Vector& w = truth.params();
  Dataset data;
  for (std::size_t k = 0; k < n; ++k) {
    const Vector x = standard_normal_vector(rng, d);
    Vector mean(p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[i] += w[i * d + j] * x[j];
    if (balanced) {
      const double r = sigma * std::sqrt(static_cast<double>(p));
      for (std::size_t i = 0; i < p; ++i) {
        for (double sign : {1.0, -1.0}) {
          Vector y = mean;
          y[i] += sign * r;
          data.inputs.push_back(x);
          data.targets.push_back(Target::regression(std::move(y)));
        }
      }
    } else {
      Vector y = mean;
      for (double& v : y) v += sigma * standard_normal(rng);
      data.inputs.push_back(x);
      data.targets.push_back(Target::regression(std::move(y)));
    }
  }
  return data;
}

InfomatResult run_infomat(const InfomatConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  InfomatResult r;
  ModelShape shape{config.family, config.d_in, config.d_out, config.hidden};
  if (config.family == Family::kSoftmaxLinear) shape.hidden = 0;

  if (!config.data_path.empty()) {
    r.data = load_dataset_csv(config.data_path);
    shape.d_in = static_cast<int>(r.data.input_dim());
    if (config.family == Family::kOls) {
      if (r.data.targets.empty() || r.data.targets.front().is_class())
        throw ConfigError("infomat: OLS needs regression targets (y_k columns)");
      shape.d_out = static_cast<int>(r.data.targets.front().value.size());
    } else if (config.family != Family::kGaussianMean) {
      int max_label = -1;
      for (const Target& t : r.data.targets) max_label = std::max(max_label, t.label);
      if (max_label < 0) throw ConfigError("infomat: softmax models need class labels (y column)");
      shape.d_out = std::max(config.d_out, max_label + 1);
    }
  } else {
    if (config.n == 0 || config.d_in < 1 || config.d_out < 1)
      throw ConfigError("infomat: need n, d_in and d_out >= 1");
    switch (config.family) {
      case Family::kGaussianMean:
        for (std::size_t k = 0; k < config.n; ++k) {
          Vector x = standard_normal_vector(rng, static_cast<std::size_t>(config.d_in));
          for (double& v : x) v *= config.noise_sigma;
          r.data.inputs.push_back(std::move(x));
          r.data.targets.push_back(Target::none());
        }
        break;
      case Family::kOls: {
        const LossOracle truth = randomized(LossOracle::ols(config.d_in, config.d_out), 1.0, rng);
        r.data = make_ols_dataset(truth, config.n, config.noise_sigma, false, rng);
        break;
      }
      case Family::kSoftmaxLinear:
      case Family::kSoftmaxMlp1: {
        MixtureSpec spec;
        spec.n = config.n;
        spec.d_in = config.d_in;
        spec.classes = config.d_out;
        spec.separation = config.separation;
        r.data = make_gaussian_mixture(spec, derive_seed(seed, 1), rng);
        break;
      }
    }
  }
  r.data.validate(config.family == Family::kOls || config.family == Family::kGaussianMean ? 0
                                                                                         : shape.d_out);

  LossOracle model = LossOracle::from_shape(shape);
  const std::size_t N = r.data.size();
  const auto d = static_cast<std::size_t>(shape.d_in);
  switch (config.family) {
    case Family::kGaussianMean: {
      Vector mean(d, 0.0);
      for (const Vector& x : r.data.inputs)
        for (std::size_t i = 0; i < d; ++i) mean[i] += x[i] / static_cast<double>(N);
      model.set_params(mean);
      break;
    }
    case Family::kOls: {
      const auto p = static_cast<std::size_t>(shape.d_out);
      SymMatrix xx(d);
      Matrix yx(p, d);
      for (std::size_t n = 0; n < N; ++n) {
        add_outer(xx, r.data.inputs[n]);
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = 0; j < d; ++j)
            yx(i, j) += r.data.targets[n].value[i] * r.data.inputs[n][j];
      }
      const Matrix w = matmul(yx, inverse_spd(xx).matrix());
      model.set_params(Vector(w.data().begin(), w.data().end()));
      break;
    }
    case Family::kSoftmaxLinear:
    case Family::kSoftmaxMlp1:
      model = train(randomized(model, 0.1, rng), r.data, config.train, rng);
      break;
  }
  r.model = model;
  FisherOptions fo;
  fo.mode = config.fisher_mode;
  fo.draws = config.fisher_draws;
  fo.seed = derive_seed(seed, 2);
  r.info = compute_all(model, r.data, fo);
  return r;
}

std::vector<SimilarityRow> run_similarity(const SimilarityConfig& config, std::uint64_t seed) {
  if (config.n == 0 || config.d_in < 1 || config.d_out < 1 || config.sigmas.empty())
    throw ConfigError("similarity: need n, d_in, d_out >= 1 and at least one sigma");
  Rng rng = make_rng(seed);
  const LossOracle truth = randomized(LossOracle::ols(config.d_in, config.d_out), 1.0, rng);
  std::vector<SimilarityRow> rows;
  for (double sigma : config.sigmas) {
    const Dataset data = make_ols_dataset(truth, config.n, sigma, config.balanced_noise, rng);
    const SymMatrix H = compute_H(truth, data);
    const SymMatrix C = compute_C(truth, data);
    const SymMatrix F = compute_F(truth, data);
    SymMatrix noise = SymMatrix::identity(static_cast<std::size_t>(config.d_out));
    noise *= sigma * sigma;
    const OlsClosedForms cf = ols_closed_forms(data.inputs, noise);
    SimilarityRow row;
    row.sigma = sigma;
    row.r_data = similarity_r(C, H);
    row.s_data = similarity_s(C, H);
    row.r_closed = similarity_r(cf.C, cf.H);
    row.s_closed = similarity_s(cf.C, cf.H);
    row.r_fh = similarity_r(F, H);
    row.s_fh = similarity_s(F, H);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Runner

RunConfig default_run_config(const std::string& experiment) {
  RunConfig c;
  c.experiment = experiment;
  if (experiment == "table1" || experiment == "table2") {
    c.params = TableConfig{};
  } else if (experiment == "limit-cycles") {
    c.params = LimitCycleConfig{};
  } else if (experiment == "bounds") {
    c.params = BoundsConfig{};
  } else if (experiment == "infomat") {
    c.params = InfomatConfig{};
  } else if (experiment == "similarity") {
    c.params = SimilarityConfig{};
  } else if (experiment == "gap") {
    c.params = GapConfig{};
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

std::string run_config_to_json(const RunConfig& config) { return run_config_json(config).dump(1); }

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (!j.is_object() || !j.contains("experiment"))
    throw ConfigError("run config: missing 'experiment'");
  RunConfig c = default_run_config(j.at("experiment").get<std::string>());
  Reader r(j, "run config");
  r.get("experiment", c.experiment);
  r.get("root_seed", c.root_seed);
  r.get("out_dir", c.out_dir);
  r.get("rel_cutoff", c.rel_cutoff);
  if (const json* p = r.sub("params"))
    std::visit([&](auto& params) { from_json_into(*p, params); }, c.params);
  r.finish();
  return c;
}

RunSummary run_experiment(const RunConfig& config) {
  if (!params_match(config.experiment, config.params))
    throw ConfigError("parameter block does not match experiment '" + config.experiment + "'");
  if (!(config.rel_cutoff > 0.0 && config.rel_cutoff < 1.0))
    throw ConfigError("rel_cutoff must lie in (0, 1)");
  const auto start = std::chrono::steady_clock::now();
  OutputDir out(config.out_dir);
  RunSummary summary;
  const std::string& e = config.experiment;
  if (e == "table1" || e == "table2") {
    summary.lines = run_tables(config, e == "table1", out);
  } else if (e == "limit-cycles") {
    summary.lines = write_limit_cycles(run_limit_cycles(std::get<LimitCycleConfig>(config.params)), out);
  } else if (e == "bounds") {
    summary.lines =
        write_bounds(run_bounds(std::get<BoundsConfig>(config.params), config.root_seed), out);
  } else if (e == "infomat") {
    summary.lines =
        write_infomat(run_infomat(std::get<InfomatConfig>(config.params), config.root_seed), out);
  } else if (e == "similarity") {
    summary.lines = write_similarity(
        run_similarity(std::get<SimilarityConfig>(config.params), config.root_seed), out);
  } else {
    summary.lines = run_gap_outputs(config, out);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest{{"format", "infolab.manifest/1"},
                {"version", library_version()},
                {"experiment", config.experiment},
                {"root_seed", config.root_seed},
                {"config", run_config_json(config)},
                {"outputs", out.files()},
                {"summary", summary.lines},
                {"wall_time_seconds", wall}};
  out.write("manifest.json", manifest.dump(1) + "\n");
  summary.files = out.files();
  return summary;
}

RunSummary replay_manifest(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream is(manifest_path, std::ios::binary);
  if (!is) throw IoError("cannot open manifest '" + manifest_path + "'");
  json m;
  try {
    m = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (!m.is_object() || m.value("format", "") != "infolab.manifest/1" || !m.contains("config"))
    throw ConfigError("manifest: not an infolab manifest");
  RunConfig c = run_config_from_json(m.at("config").dump());
  if (!out_dir.empty()) c.out_dir = out_dir;
  return run_experiment(c);
}

std::string error_record(const std::string& kind, const std::string& message, int exit_code) {
  return json{{"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", exit_code}}
      .dump();
}

std::string library_version() { return INFOLAB_VERSION; }

}  // namespace infolab
