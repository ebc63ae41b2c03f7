#include "dpca/cli.hpp"

#include "dpca/commcost.hpp"
#include "dpca/detection.hpp"
#include "dpca/error.hpp"
#include "dpca/ingest.hpp"
#include "dpca/matrix_io.hpp"
#include "dpca/pca.hpp"
#include "dpca/simnet.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>

namespace dpca::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using simnet::Mode;

struct Options {
  std::string input;
  std::string synth_config;
  std::string mode = "both";
  std::vector<std::string> s = {};
  std::vector<std::string> r = {};
  long k = 0;
  double var_threshold = 0.92;
  std::vector<double> truth_pct = {0.01, 0.05, 0.10};
  std::vector<double> d_star = {};
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string normalize = "zscore";
  size_t top_k = 300;
  size_t threads = 1;
  bool parallel = false;
  std::uint64_t m = 0, n = 0;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Normalization parse_normalization(const std::string& s) {
  if (s == "zscore") return Normalization::ZScore;
  if (s == "center") return Normalization::Center;
  throw_usage("unknown normalization '" + s + "'");
}

std::vector<Mode> parse_modes(const std::string& s) {
  if (s == "both") return {Mode::Horizontal, Mode::Vertical};
  return {simnet::parse_mode(s)};
}

/// Provenance line, CSV body, written only once everything is computed.
class Outputs {
 public:
  Outputs(std::string command, const json& config)
      : header_(std::string("# ") + kToolVersion + " command=" + command +
                " config=" + fnv1a_hex(config.dump()) + "\n") {}

  std::ostringstream& csv(const std::string& name) {
    auto& os = files_[name];
    if (os.tellp() == 0) os << header_;
    return os;
  }
  std::ostringstream& raw(const std::string& name) { return files_[name]; }

  void commit(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw_data("cannot create output directory " + dir);
    for (auto& [name, body] : files_) {
      const fs::path path = fs::path(dir) / name;
      const fs::path tmp = path.string() + ".tmp";
      {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw_data("cannot write " + tmp.string());
        f << body.str();
        if (!f) throw_data("write failed for " + tmp.string());
      }
      fs::rename(tmp, path, ec);
      if (ec) throw_data("cannot move " + tmp.string() + " into place");
    }
  }

 private:
  std::string header_;
  std::map<std::string, std::ostringstream> files_;
};

ingest::SynthConfig load_synth_config(const Options& o) {
  json j = json::object();
  if (!o.synth_config.empty()) {
    std::ifstream in(o.synth_config);
    if (!in) throw_data("cannot open " + o.synth_config);
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw_data(std::string("synth config: ") + e.what());
    }
  }
  if (o.seed) j["seed"] = *o.seed;
  return ingest::synth_config_from_json(j);
}

struct Dataset {
  DataMatrix data;
  json provenance;
};

Dataset load_dataset(const Options& o) {
  if (!o.input.empty() && !o.synth_config.empty())
    throw_usage("give either --input or --synth-config, not both");
  if (!o.input.empty()) return {load_matrix(o.input), {{"input", o.input}}};
  auto cfg = load_synth_config(o);
  auto traffic = ingest::synth_traffic(cfg);
  auto hm = ingest::build_histogram_matrix(traffic.records, o.top_k);
  return {std::move(hm.matrix),
          {{"synth", ingest::to_json(cfg)}, {"top_k", o.top_k}}};
}

json base_config(const std::string& command, const Options& o,
                 const json& provenance) {
  return {{"command", command},
          {"data", provenance},
          {"normalize", o.normalize},
          {"k", o.k},
          {"var_threshold", o.var_threshold}};
}

Eigen::Index resolve_k(const Options& o, const PcaModel& model) {
  if (o.k > 0) return o.k;
  if (o.k < 0) throw_usage("--k must be positive");
  return select_dimension(model, o.var_threshold);
}

std::vector<size_t> s_values(const Options& o, std::vector<std::string> dflt) {
  std::vector<size_t> out;
  for (long v : parse_int_list(o.s.empty() ? dflt : o.s)) {
    if (v < 1) throw_usage("--s values must be positive");
    out.push_back(static_cast<size_t>(v));
  }
  return out;
}

struct GridPoint {
  Mode mode;
  size_t s;
  Eigen::Index r;
};

/// Runs every grid point; results keep grid order regardless of `threads`.
std::vector<simnet::ProtocolRun> run_grid(const Matrix& m,
                                          const std::vector<GridPoint>& grid,
                                          Eigen::Index k, Normalization how,
                                          bool parallel_monitors,
                                          const simnet::Centralized& ref,
                                          size_t threads) {
  std::vector<simnet::ProtocolRun> runs(grid.size());
  auto one = [&](size_t i) {
    simnet::ProtocolConfig cfg{grid[i].mode, grid[i].s, grid[i].r, k, how,
                               parallel_monitors};
    runs[i] = simnet::run_protocol(m, cfg, &ref);
  };
  if (threads <= 1) {
    for (size_t i = 0; i < grid.size(); ++i) one(i);
    return runs;
  }
  for (size_t start = 0; start < grid.size(); start += threads) {
    std::vector<std::future<void>> batch;
    for (size_t i = start; i < std::min(grid.size(), start + threads); ++i)
      batch.push_back(std::async(std::launch::async, one, i));
    for (auto& f : batch) f.get();
  }
  return runs;
}

/// Grid of feasible (mode, s, r); r defaults to the whole feasible range.
std::vector<GridPoint> build_grid(const Matrix& m, const Options& o,
                                  Eigen::Index k,
                                  const std::vector<std::string>& default_s,
                                  std::ostream& err) {
  std::vector<GridPoint> grid;
  const auto requested = o.r.empty() ? std::vector<long>{}
                                     : parse_int_list(o.r);
  for (Mode mode : parse_modes(o.mode)) {
    for (size_t s : s_values(o, default_s)) {
      const auto parts = simnet::partition(m.rows(), m.cols(), mode, s);
      const auto rr = simnet::feasible_r(parts, m.rows(), m.cols(), k);
      if (requested.empty()) {
        for (Eigen::Index r = rr.lo; r <= rr.hi; ++r)
          grid.push_back({mode, s, r});
        continue;
      }
      for (long r : requested) {
        if (r < rr.lo || r > rr.hi) {
          err << "skipping " << simnet::to_string(mode) << " s=" << s
              << " r=" << r << ": feasible r is [" << rr.lo << ", " << rr.hi
              << "] for k=" << k << "\n";
          continue;
        }
        grid.push_back({mode, s, r});
      }
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Options& o, std::ostream& out) {
  if (o.input.empty()) throw_usage("ingest needs --input");
  auto parsed = ingest::parse_records_file(o.input);
  auto hm = ingest::build_histogram_matrix(parsed.records, o.top_k);

  json cfg = {{"command", "ingest"}, {"input", o.input}, {"top_k", o.top_k}};
  Outputs files("ingest", cfg);
  write_matrix_csv(files.csv("matrix.csv"), hm.matrix);
  files.raw("matrix.json") << ingest::sidecar_json(hm, &parsed).dump(2) << '\n';
  files.commit(o.out);

  double lo = 1.0, hi = 0.0, mean = 0.0;
  for (const auto& b : hm.per_bin) {
    lo = std::min(lo, b.fraction);
    hi = std::max(hi, b.fraction);
    mean += b.fraction;
  }
  mean /= static_cast<double>(hm.per_bin.size());
  out << "records " << parsed.records.size() << "\n"
      << "malformed " << parsed.malformed << "\n"
      << "bins " << hm.per_bin.size() << "\n"
      << "domains " << hm.domains.size() << "\n"
      << "fraction min " << num(lo) << " mean " << num(mean) << " max "
      << num(hi) << "\n";
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  auto cfg = load_synth_config(o);
  auto traffic = ingest::synth_traffic(cfg);
  json config = {{"command", "synth"}, {"synth", ingest::to_json(cfg)}};
  Outputs files("synth", config);
  ingest::write_records_csv(files.raw("records.csv"), traffic.records);
  json truth = {{"config", ingest::to_json(cfg)},
                {"records", traffic.records.size()},
                {"anomaly_bins", traffic.anomaly_bins},
                {"spike_bins", traffic.spike_bins},
                {"bin_totals", traffic.bin_totals}};
  files.raw("truth.json") << truth.dump(2) << '\n';
  files.commit(o.out);
  out << "records " << traffic.records.size() << "\n";
  return kOk;
}

int cmd_scree(const Options& o, std::ostream& out) {
  auto ds = load_dataset(o);
  const auto how = parse_normalization(o.normalize);
  const auto ref = simnet::centralized(ds.data.values, how);
  const auto k = select_dimension(ref.model, o.var_threshold);
  Outputs files("scree", base_config("scree", o, ds.provenance));
  write_scree_csv(files.csv("scree.csv"), scree(ref.model));
  files.commit(o.out);
  out << "k at threshold " << num(o.var_threshold) << ": " << k << "\n";
  return kOk;
}

int cmd_cost_table(const Options& o, std::ostream&) {
  std::uint64_t m = o.m, n = o.n;
  json provenance = {{"m", m}, {"n", n}};
  if (!o.input.empty()) {
    auto dm = load_matrix(o.input);
    m = static_cast<std::uint64_t>(dm.values.rows());
    n = static_cast<std::uint64_t>(dm.values.cols());
    provenance = {{"input", o.input}};
  }
  if (m == 0 || n == 0) throw_usage("cost-table needs --m and --n or --input");
  if (o.r.empty()) throw_usage("cost-table needs --r");
  std::vector<std::uint64_t> ss, rs;
  for (size_t s : s_values(o, {"2:25"})) ss.push_back(s);
  for (long r : parse_int_list(o.r)) {
    if (r < 0) throw_usage("--r values must be nonnegative");
    rs.push_back(static_cast<std::uint64_t>(r));
  }
  json cfg = {{"command", "cost-table"}, {"data", provenance},
              {"s", ss}, {"r", rs}};
  Outputs files("cost-table", cfg);
  commcost::write_cost_csv(files.csv("cost_table.csv"),
                           commcost::cost_table(m, n, ss, rs));
  files.commit(o.out);
  return kOk;
}

int cmd_gd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  auto ds = load_dataset(o);
  const Matrix& m = ds.data.values;
  const auto how = parse_normalization(o.normalize);
  const auto ref = simnet::centralized(m, how);
  const auto k = resolve_k(o, ref.model);
  const auto grid = build_grid(m, o, k, {"2,4"}, err);
  const auto runs = run_grid(m, grid, k, how, o.parallel, ref, o.threads);

  json cfg = base_config("gd-sweep", o, ds.provenance);
  cfg["grid"] = json::array();
  for (const auto& g : grid)
    cfg["grid"].push_back({simnet::to_string(g.mode), g.s, g.r});
  Outputs files("gd-sweep", cfg);
  auto& csv = files.csv("gd_sweep.csv");
  csv << "mode,s,r,gd,normalized_cost\n";
  for (const auto& run : runs) {
    csv << simnet::to_string(run.config.mode) << ',' << run.config.s << ','
        << run.config.r << ',' << num(run.gd_to_centralized) << ','
        << num(run.normalized_cost()) << '\n';
  }
  files.commit(o.out);
  out << "k " << k << ", " << runs.size() << " runs\n";
  return kOk;
}

int cmd_min_r(const Options& o, std::ostream& out) {
  auto ds = load_dataset(o);
  const Matrix& m = ds.data.values;
  const auto how = parse_normalization(o.normalize);
  const auto ref = simnet::centralized(m, how);
  const auto k = resolve_k(o, ref.model);
  if (o.d_star.empty()) throw_usage("min-r needs --d-star");
  const auto ss = s_values(o, {"2:25"});

  json cfg = base_config("min-r", o, ds.provenance);
  cfg["s"] = ss;
  cfg["d_star"] = o.d_star;
  cfg["mode"] = o.mode;
  Outputs files("min-r", cfg);
  auto& csv = files.csv("min_r.csv");
  csv << "mode,s,d_star,r_star,cost\n";
  size_t infeasible = 0;
  for (Mode mode : parse_modes(o.mode)) {
    for (double d : o.d_star) {
      for (const auto& row : simnet::sweep_min_r(m, mode, ss, d, k, how)) {
        csv << simnet::to_string(mode) << ',' << row.s << ',' << num(d) << ',';
        if (row.r_star) {
          csv << *row.r_star << ',' << num(row.cost) << '\n';
        } else {
          csv << "NA,NA\n";
          ++infeasible;
        }
      }
    }
  }
  files.commit(o.out);
  out << "k " << k << ", " << infeasible << " infeasible (s, d*) pairs\n";
  return kOk;
}

int cmd_roc(const Options& o, std::ostream& out, std::ostream& err) {
  auto ds = load_dataset(o);
  const Matrix& m = ds.data.values;
  const auto how = parse_normalization(o.normalize);
  const auto ref = simnet::centralized(m, how);
  const auto k = resolve_k(o, ref.model);
  Options grid_opts = o;
  if (grid_opts.r.empty()) grid_opts.r = {"20,30,40"};
  const auto grid = build_grid(m, grid_opts, k, {"4"}, err);
  const auto runs = run_grid(m, grid, k, how, o.parallel, ref, o.threads);

  const Vector central = residual_scores(ref.normalized,
                                         ref.model.principal_subspace(k));
  std::span<const double> central_span(central.data(),
                                       static_cast<size_t>(central.size()));

  json cfg = base_config("roc", o, ds.provenance);
  cfg["truth_pct"] = o.truth_pct;
  cfg["grid"] = json::array();
  for (const auto& g : grid)
    cfg["grid"].push_back({simnet::to_string(g.mode), g.s, g.r});
  Outputs files("roc", cfg);
  auto& roc = files.csv("roc.csv");
  auto& errs = files.csv("err.csv");
  roc << "method,s,r,truth_percentile,far,tpr\n";
  errs << "truth_percentile,method,r,err\n";

  auto emit = [&](const std::string& method, size_t s, Eigen::Index r,
                  double pct, std::span<const double> scores,
                  const detection::GroundTruth& truth) {
    auto curve = detection::roc_curve(scores, truth);
    for (const auto& p : curve.points) {
      roc << method << ',' << s << ',' << r << ',' << num(pct) << ','
          << num(p.far) << ',' << num(p.tpr) << '\n';
    }
    errs << num(pct) << ',' << method << ',' << r << ','
         << num(detection::equal_error_rate(curve)) << '\n';
  };

  for (double pct : o.truth_pct) {
    const auto truth = detection::make_ground_truth(central_span, pct);
    // the centralized detector against its own labels: r is reported as 0
    emit("centralized", 1, 0, pct, central_span, truth);
    for (const auto& run : runs) {
      std::span<const double> sc(run.scores.data(),
                                 static_cast<size_t>(run.scores.size()));
      emit(simnet::to_string(run.config.mode), run.config.s, run.config.r, pct,
           sc, truth);
    }
  }
  json transcripts = json::array();
  for (const auto& run : runs) transcripts.push_back(simnet::to_json(run));
  files.raw("runs.json") << transcripts.dump() << '\n';
  files.commit(o.out);
  out << "k " << k << ", " << runs.size() << " distributed runs\n";
  return kOk;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<long> parse_int_list(const std::vector<std::string>& items) {
  std::vector<long> out;
  auto to_long = [](const std::string& s) {
    size_t used = 0;
    long v = 0;
    try {
      v = std::stol(s, &used);
    } catch (const std::exception&) {
      throw_usage("not an integer: '" + s + "'");
    }
    if (used != s.size()) throw_usage("not an integer: '" + s + "'");
    return v;
  };
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      const auto colon = part.find(':');
      if (colon == std::string::npos) {
        out.push_back(to_long(part));
        continue;
      }
      const long a = to_long(part.substr(0, colon));
      const long b = to_long(part.substr(colon + 1));
      if (b < a) throw_usage("empty range '" + part + "'");
      for (long v = a; v <= b; ++v) out.push_back(v);
    }
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Distributed PCA experiments", "dpca"};
  app.require_subcommand(1);
  Options o;

  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Matrix file (.csv or .bin)");
    sub->add_option("--synth-config", o.synth_config,
                    "Synthetic traffic config (JSON)");
    sub->add_option("--top-k", o.top_k, "Domains kept for synthetic input");
    sub->add_option("--seed", o.seed, "Overrides the synthetic seed");
    sub->add_option("--normalize", o.normalize, "zscore or center")
        ->check(CLI::IsMember({"zscore", "center"}));
  };
  auto add_k = [&](CLI::App* sub) {
    sub->add_option("--k", o.k, "Principal subspace dimension");
    sub->add_option("--var-threshold", o.var_threshold,
                    "Variance fraction used when --k is absent");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "hor, ver or both")
        ->check(CLI::IsMember({"hor", "ver", "both"}));
    sub->add_option("--s", o.s, "Monitor counts (list or a:b)");
    sub->add_option("--r", o.r, "Local PC counts (list or a:b)");
    sub->add_option("--threads", o.threads, "Concurrent grid points");
    sub->add_flag("--parallel", o.parallel, "One thread per monitor");
  };

  auto* ingest_cmd = app.add_subcommand("ingest", "Aggregate DNS records");
  ingest_cmd->add_option("--input", o.input, "Records CSV (optionally .gz)")
      ->required();
  ingest_cmd->add_option("--top-k", o.top_k, "Domains kept");

  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic traffic");
  synth_cmd->add_option("--synth-config", o.synth_config, "Config (JSON)");
  synth_cmd->add_option("--seed", o.seed, "Overrides the config seed");

  auto* sweep_cmd = app.add_subcommand("gd-sweep", "GD versus r");
  add_data(sweep_cmd);
  add_k(sweep_cmd);
  add_grid(sweep_cmd);

  auto* minr_cmd = app.add_subcommand("min-r", "Minimum r for GD <= d*");
  add_data(minr_cmd);
  add_k(minr_cmd);
  minr_cmd->add_option("--mode", o.mode)
      ->check(CLI::IsMember({"hor", "ver", "both"}));
  minr_cmd->add_option("--s", o.s, "Monitor counts (list or a:b)");
  minr_cmd->add_option("--d-star", o.d_star, "GD targets")->delimiter(',');

  auto* cost_cmd = app.add_subcommand("cost-table", "Normalized costs");
  cost_cmd->add_option("--input", o.input, "Matrix supplying m and n");
  cost_cmd->add_option("--m", o.m);
  cost_cmd->add_option("--n", o.n);
  cost_cmd->add_option("--s", o.s);
  cost_cmd->add_option("--r", o.r);

  auto* roc_cmd = app.add_subcommand("roc", "ROC curves and equal error rates");
  add_data(roc_cmd);
  add_k(roc_cmd);
  add_grid(roc_cmd);
  roc_cmd->add_option("--truth-pct", o.truth_pct, "Ground-truth fractions")
      ->delimiter(',');

  auto* scree_cmd = app.add_subcommand("scree", "Scree table");
  add_data(scree_cmd);
  scree_cmd->add_option("--var-threshold", o.var_threshold);

  for (auto* sub : {ingest_cmd, synth_cmd, sweep_cmd, minr_cmd, cost_cmd, roc_cmd, scree_cmd}) {
    sub->add_option("--out", o.out, "Output directory");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "dpca: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(o, out);
    if (*synth_cmd) return cmd_synth(o, out);
    if (*sweep_cmd) return cmd_gd_sweep(o, out, err);
    if (*minr_cmd) return cmd_min_r(o, out);
    if (*cost_cmd) return cmd_cost_table(o, out);
    if (*roc_cmd) return cmd_roc(o, out, err);
    if (*scree_cmd) return cmd_scree(o, out);
  } catch (const Error& e) {
    err << "dpca: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Usage: return kUsage;
      case ErrorKind::Data: return kDataError;
      case ErrorKind::Numerical: return kNumericalFailure;
    }
  } catch (const std::exception& e) {
    err << "dpca: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace dpca::cli
