#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "slra/budget.hpp"
#include "slra/gaussian_noise.hpp"
#include "slra/io.hpp"
#include "slra/krylov.hpp"
#include "slra/oracle.hpp"
#include "slra/streaming.hpp"
#include "slra/svd.hpp"

using json = nlohmann::ordered_json;
using namespace slra;

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

json ledger_json(const MeasurementLedger& ledger) {
  json j = json::object();
  for (const auto& [k, v] : ledger.counts()) j[k] = v;
  j["total"] = ledger.total();
  return j;
}

json factor_json(const SparseRankKFactor& f) {
  json comps = json::array();
  for (const auto& c : f.components) {
    json jc;
    jc["tau"] = c.tau;
    jc["x_idx"] = c.x.idx;
    jc["x_val"] = c.x.val;
    jc["y_idx"] = c.y.idx;
    jc["y_val"] = c.y.val;
    comps.push_back(jc);
  }
  return comps;
}

void write_report(const std::string& path, json& j, double t0) {
  j["timing"] = {{"wall_ms", now_ms() - t0}};
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write report " + path);
  f << j.dump(2) << '\n';
}

DenseMatrix load_matrix(const std::string& path, bool binary) {
  return binary ? read_matrix_binary(path) : read_matrix_text(path);
}

StreamAlgo parse_algo(const std::string& s) {
  if (s == "net") return StreamAlgo::Net;
  if (s == "rel") return StreamAlgo::RelErr;
  if (s == "add") return StreamAlgo::AddErr;
  throw CLI::ValidationError("--algo must be net|rel|add");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse low-rank approximation toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate instances");
  bool gen_planted_flag = false;
  int g_n = 64, g_s = 2, g_k = 1;
  double g_lambda = -1.0;
  std::uint64_t g_seed = 0;
  std::string g_out = "instance";
  bool g_binary = false;
  gen->add_flag("--planted", gen_planted_flag, "planted signal-plus-noise instance");
  gen->add_option("--n", g_n);
  gen->add_option("--s", g_s);
  gen->add_option("--k", g_k);
  gen->add_option("--lambda", g_lambda, "signal scale (default sqrt(n))");
  gen->add_option("--seed", g_seed)->required();
  gen->add_option("--out", g_out, "output prefix");
  gen->add_flag("--binary", g_binary);

  // sparse-svd
  auto* ssvd = app.add_subcommand("sparse-svd", "spectral LRA for sparse singular vectors");
  std::string sv_input, sv_report = "sparse_svd.json";
  int sv_k = 1, sv_s = 1;
  double sv_eps = 0.2;
  std::uint64_t sv_seed = 0;
  bool sv_oracle = false, sv_binary = false;
  ssvd->add_option("--input", sv_input)->required();
  ssvd->add_option("--k", sv_k)->required();
  ssvd->add_option("--s", sv_s)->required();
  ssvd->add_option("--eps", sv_eps);
  ssvd->add_option("--seed", sv_seed)->required();
  ssvd->add_option("--report", sv_report);
  ssvd->add_flag("--oracle", sv_oracle, "compare against exact SVD");
  ssvd->add_flag("--binary", sv_binary);

  // stream
  auto* stream = app.add_subcommand("stream", "one-pass Frobenius sparse LRA");
  std::string st_algo = "net", st_input, st_report = "stream.json", st_factor_out;
  int st_n = 8, st_d = 8, st_s = 1, st_k = 1;
  double st_eps = 0.5, st_tau_max = 10.0;
  std::uint64_t st_seed = 0;
  bool st_oracle = false, st_restricted = false;
  stream->add_option("--algo", st_algo, "net|rel|add")->required();
  stream->add_option("--n", st_n)->required();
  stream->add_option("--d", st_d)->required();
  stream->add_option("--s", st_s);
  stream->add_option("--k", st_k);
  stream->add_option("--eps", st_eps);
  stream->add_option("--tau-max", st_tau_max);
  stream->add_option("--seed", st_seed)->required();
  stream->add_option("--input", st_input, "stream file (lines: i j delta)")->required();
  stream->add_option("--report", st_report);
  stream->add_option("--factor-out", st_factor_out);
  stream->add_flag("--oracle", st_oracle);
  stream->add_flag("--restricted", st_restricted, "single-submatrix budget variant");

  // detect
  auto* detect = app.add_subcommand("detect", "planted-signal detection");
  std::string de_input, de_regime = "auto", de_report = "detect.json", de_csv;
  int de_s = 2, de_k = 1;
  std::uint64_t de_seed = 0;
  bool de_binary = false;
  detect->add_option("--input", de_input)->required();
  detect->add_option("--regime", de_regime, "auto|small|large");
  detect->add_option("--s", de_s)->required();
  detect->add_option("--k", de_k);
  detect->add_option("--seed", de_seed)->required();
  detect->add_option("--report", de_report);
  detect->add_option("--csv", de_csv, "per-trial statistics for ROC plots");
  detect->add_flag("--binary", de_binary);

  // estimate
  auto* est = app.add_subcommand("estimate", "planted-signal estimation");
  std::string es_input, es_report = "estimate.json";
  int es_s = 2, es_k = 1;
  double es_eps = 0.5;
  std::uint64_t es_seed = 0;
  bool es_binary = false;
  est->add_option("--input", es_input)->required();
  est->add_option("--s", es_s)->required();
  est->add_option("--k", es_k);
  est->add_option("--eps", es_eps);
  est->add_option("--seed", es_seed)->required();
  est->add_option("--report", es_report);
  est->add_flag("--binary", es_binary);

  // bench
  auto* bench = app.add_subcommand("bench", "measurement scaling sweeps");
  std::string be_algo = "add", be_csv = "bench.csv";
  int be_n = 48, be_d = 48;
  double be_eps = 0.3;
  std::vector<int> be_s_list{1, 2, 4}, be_k_list{1, 2, 4};
  std::uint64_t be_seed = 1;
  bench->add_option("--algo", be_algo);
  bench->add_option("--n", be_n);
  bench->add_option("--d", be_d);
  bench->add_option("--eps", be_eps);
  bench->add_option("--s-list", be_s_list)->delimiter(',');
  bench->add_option("--k-list", be_k_list)->delimiter(',');
  bench->add_option("--seed", be_seed);
  bench->add_option("--csv", be_csv);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "null-seed false-positive check");
  std::string ca_regime = "small", ca_report = "calibrate.json";
  int ca_n = 128, ca_s = 2, ca_k = 1, ca_seeds = 100, ca_jobs = 1;
  std::uint64_t ca_seed = 0;
  cal->add_option("--regime", ca_regime, "small|large");
  cal->add_option("--n", ca_n);
  cal->add_option("--s", ca_s);
  cal->add_option("--k", ca_k);
  cal->add_option("--seeds", ca_seeds);
  cal->add_option("--seed", ca_seed)->required();
  cal->add_option("--jobs", ca_jobs);
  cal->add_option("--report", ca_report);

  CLI11_PARSE(app, argc, argv);
  const double t0 = now_ms();

  try {
    if (*gen) {
      if (!gen_planted_flag) throw std::runtime_error("gen currently supports --planted");
      const double lambda = g_lambda > 0 ? g_lambda : std::sqrt(double(g_n));
      PlantedInstance inst = gen_planted(g_n, g_s, g_k, lambda, g_seed);
      if (g_binary)
        write_matrix_binary(inst.a, g_out + ".bin");
      else
        write_matrix_text(inst.a, g_out + ".mtx");
      write_factor(inst.x, g_n, g_n, g_out + ".factor");
      json j;
      j["schema"] = 1;
      j["command"] = "gen";
      j["params"] = {{"n", g_n}, {"s", g_s}, {"k", g_k}, {"lambda", lambda}, {"seed", g_seed}};
      j["signal_frob_sq"] = inst.x.frob_norm_sq_disjoint();
      write_report(g_out + ".json", j, t0);
    } else if (*ssvd) {
      DenseMatrix a = load_matrix(sv_input, sv_binary);
      SpectralLraResult res = sparse_spectral_lra(a, sv_k, sv_s, sv_eps, sv_seed);
      json j;
      j["schema"] = 1;
      j["command"] = "sparse-svd";
      j["params"] = {{"input", sv_input}, {"k", sv_k}, {"s", sv_s}, {"eps", sv_eps}, {"seed", sv_seed}};
      j["support_rows"] = res.support.rows;
      j["support_cols"] = res.support.cols;
      j["certified_err"] = res.err;
      j["sigma_window"] = {res.sigma_lo, res.sigma_hi};
      j["a_mults"] = res.counter.a_mults;
      j["nnz_flops"] = res.counter.nnz_flops;
      j["factor"] = factor_json(res.factor);
      if (sv_oracle) {
        DenseMatrix diff = a;
        diff.add_scaled(materialize(res.factor, a.rows(), a.cols()), -1.0);
        const std::vector<double> sv = singular_values(a);
        j["oracle"] = {{"exact_err", spectral_norm(diff)},
                       {"sigma_k1", sv_k < int(sv.size()) ? sv[sv_k] : 0.0}};
      }
      write_report(sv_report, j, t0);
    } else if (*stream) {
      StreamConfig cfg;
      cfg.n = st_n;
      cfg.d = st_d;
      cfg.s = st_s;
      cfg.k = st_k;
      cfg.eps = st_eps;
      cfg.seed = st_seed;
      cfg.algo = parse_algo(st_algo);
      cfg.tau_max = st_tau_max;
      cfg.restricted_submatrix = st_restricted;
      StreamContext ctx(cfg);
      const std::vector<StreamUpdate> updates = read_stream(st_input);
      ctx.ingest(updates);
      ctx.finalize();

      json j;
      j["schema"] = 1;
      j["command"] = "stream";
      j["params"] = {{"algo", st_algo}, {"n", st_n}, {"d", st_d}, {"s", st_s}, {"k", st_k},
                     {"eps", st_eps}, {"seed", st_seed}, {"restricted", st_restricted}};

      DenseMatrix dense(st_n, st_d);
      for (const auto& u : updates) dense(u.row, u.col) += u.delta;

      SparseRankKFactor out_factor;
      if (cfg.algo == StreamAlgo::Net) {
        NetRecoverResult r = ctx.net_recover();
        out_factor = r.factor;
        j["sketched_cost"] = r.sketched_cost;
        j["factor"] = factor_json(r.factor);
      } else {
        BicriteriaOutput out = cfg.algo == StreamAlgo::RelErr ? ctx.rel_err_recover()
                                                              : ctx.add_err_recover();
        out_factor = out.as_factor();
        j["support_rows"] = out.support.rows;
        j["support_cols"] = out.support.cols;
        j["cost_estimate"] = out.cost_estimate;
        j["factor"] = factor_json(out_factor);
      }
      {
        DenseMatrix diff = dense;
        diff.add_scaled(materialize(out_factor, st_n, st_d), -1.0);
        j["true_cost"] = diff.frob_norm_sq();
      }
      if (st_oracle) {
        OracleResult oracle = st_k == 1 && cfg.algo != StreamAlgo::AddErr
                                  ? brute_force_sparse_lra(dense, st_s, st_k, OracleVariant::Submatrix)
                                  : greedy_sparse_oracle(dense, st_s, st_k);
        j["oracle"] = {{"cost", oracle.cost}, {"resolution", oracle.resolution}};
      }
      j["ledger"] = ledger_json(ctx.ledger());
      if (!st_factor_out.empty()) write_factor(out_factor, st_n, st_d, st_factor_out);
      write_report(st_report, j, t0);
    } else if (*detect) {
      DenseMatrix a = load_matrix(de_input, de_binary);
      const int n = a.rows();
      std::string regime = de_regime;
      if (regime == "auto") {
        const double boundary = std::sqrt(double(n) / (de_k * std::log(std::max(2.0, double(n)))));
        regime = de_s <= boundary ? "small" : "large";
      }
      DetectionReport rep = regime == "small" ? detect_small_s(a, de_s, de_k, de_seed)
                                              : detect_large_s(a, de_s, de_k, de_seed);
      json j;
      j["schema"] = 1;
      j["command"] = "detect";
      j["params"] = {{"input", de_input}, {"regime", regime}, {"s", de_s}, {"k", de_k},
                     {"seed", de_seed}};
      j["verdict"] = rep.signal ? "signal" : "null";
      j["fired_regime"] = rep.regime;
      json stats = json::array();
      for (const auto& st : rep.stats)
        stats.push_back({{"branch", st.branch}, {"level", st.level}, {"stat", st.statistic},
                         {"threshold", st.threshold}, {"fired", st.fired}, {"skipped", st.skipped}});
      j["trials"] = stats;
      j["ledger"] = ledger_json(rep.ledger);
      if (!de_csv.empty()) {
        std::ofstream csv(de_csv);
        csv << "branch,level,stat,threshold,fired,skipped\n";
        for (const auto& st : rep.stats)
          csv << st.branch << ',' << st.level << ',' << st.statistic << ',' << st.threshold << ','
              << st.fired << ',' << st.skipped << '\n';
      }
      write_report(de_report, j, t0);
    } else if (*est) {
      DenseMatrix a = load_matrix(es_input, es_binary);
      EstimateResult r = estimate_signal(a, es_s, es_k, es_eps, es_seed);
      json j;
      j["schema"] = 1;
      j["command"] = "estimate";
      j["params"] = {{"input", es_input}, {"s", es_s}, {"k", es_k}, {"eps", es_eps},
                     {"seed", es_seed}};
      j["hypothesis_ok"] = r.hypothesis_ok;
      j["m"] = r.m;
      j["factor"] = factor_json(r.factor);
      j["ledger"] = ledger_json(r.ledger);
      write_report(es_report, j, t0);
    } else if (*bench) {
      std::ofstream csv(be_csv);
      csv << "algo,n,d,eps,s,k,total_measurements\n";
      for (int s : be_s_list) {
        for (int k : be_k_list) {
          StreamConfig cfg;
          cfg.n = be_n;
          cfg.d = be_d;
          cfg.s = s;
          cfg.k = k;
          cfg.eps = be_eps;
          cfg.seed = be_seed;
          cfg.algo = parse_algo(be_algo);
          StreamContext ctx(cfg);  // tables are lazy; registration alone fills the ledger
          csv << be_algo << ',' << be_n << ',' << be_d << ',' << be_eps << ',' << s << ',' << k
              << ',' << ctx.ledger().total() << '\n';
        }
      }
      std::cout << "wrote " << be_csv << '\n';
    } else if (*cal) {
      std::vector<int> fired(ca_seeds, 0);
      auto worker = [&](int begin, int step) {
        for (int t = begin; t < ca_seeds; t += step) {
          const std::uint64_t s = mix64(ca_seed, std::uint64_t(t));
          DenseMatrix g = DenseMatrix::gaussian(ca_n, ca_n, s);
          DetectionReport rep = ca_regime == "small" ? detect_small_s(g, ca_s, ca_k, s)
                                                     : detect_large_s(g, ca_s, ca_k, s);
          fired[t] = rep.signal ? 1 : 0;
        }
      };
      const int jobs = std::max(1, ca_jobs);
      std::vector<std::thread> pool;
      for (int w = 1; w < jobs; ++w) pool.emplace_back(worker, w, jobs);
      worker(0, jobs);
      for (auto& th : pool) th.join();
      int total = 0;
      for (int f : fired) total += f;
      json j;
      j["schema"] = 1;
      j["command"] = "calibrate";
      j["params"] = {{"regime", ca_regime}, {"n", ca_n}, {"s", ca_s}, {"k", ca_k},
                     {"seeds", ca_seeds}, {"seed", ca_seed}};
      j["false_positives"] = total;
      j["empirical_fpr"] = double(total) / ca_seeds;
      write_report(ca_report, j, t0);
      std::cout << "empirical FPR " << double(total) / ca_seeds << '\n';
    }
  } catch (const BudgetExceeded& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
