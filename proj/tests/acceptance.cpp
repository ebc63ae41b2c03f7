// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include "dpca/cli.hpp"
#include "dpca/commcost.hpp"
#include "dpca/detection.hpp"
#include "dpca/ingest.hpp"
#include "dpca/metrics.hpp"
#include "dpca/simnet.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace dpca;
using namespace dpca::simnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title,
            const std::function<Outcome()>& body, double limit_seconds = 0) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_seconds > 0 && secs >= limit_seconds) {
    o.pass = false;
    o.detail += " (over time limit)";
  }
  if (!o.pass) ++failures;
  std::ostringstream t;
  t.precision(2);
  t << std::fixed << secs;
  std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << title << " ["
            << t.str() << "s] " << o.detail << std::endl;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::span<const double> view(const Vector& v) {
  return {v.data(), static_cast<size_t>(v.size())};
}

// The detection instance shared by criteria 6 and 7.
ingest::SynthConfig traffic_config() {
  ingest::SynthConfig c;
  c.duration_seconds = 300;
  c.n_domains = 100;
  c.base_rate = 2000;
  c.groups = 3;
  c.amplitude = 0.3;
  c.seed = 7;
  ingest::Anomaly a;
  a.bin = 150;
  a.delta = 80;
  a.domain = 10;
  c.anomalies.push_back(a);
  return c;
}

Matrix traffic_matrix() {
  auto t = ingest::synth_traffic(traffic_config());
  return ingest::build_histogram_matrix(t.records, 100).matrix.values;
}

Outcome criterion1() {
  const commcost::CostParams p{4, 20, 1406, 300};
  const double h = commcost::c_hor(p), v = commcost::c_ver(p);
  bool ok = std::abs(h - 0.0571) <= 1e-4 && std::abs(v - 0.2809) <= 1e-4;
  std::mt19937_64 rng(1406);
  const Matrix m = testing::gaussian(1406, 300, rng);
  const auto hr = run_protocol(m, {Mode::Horizontal, 4, 20, 5});
  const auto vr = run_protocol(m, {Mode::Vertical, 4, 20, 5});
  ok = ok && std::abs(hr.normalized_cost() - 0.0571) <= 1e-4 &&
       std::abs(vr.normalized_cost() - 0.2809) <= 1e-4;
  return {ok, "c_hor=" + fmt(h) + " c_ver=" + fmt(v) + " simnet hor=" +
                  fmt(hr.normalized_cost()) + " ver=" + fmt(vr.normalized_cost())};
}

Outcome criterion2a() {
  const commcost::CostParams p{4, 20, 1406, 1000000};
  const auto lim = commcost::limits(p);
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-15 * std::abs(b); };
  bool ok = near(lim.hor_n_inf, 80.0 / 1406) && near(lim.ver_n_inf, 20.0 / 1406) &&
            lim.hor_m_inf == 0.0 && near(lim.ver_m_inf, 80.0 / 1e6);
  const double rel = std::abs(commcost::c_hor(p) - lim.hor_n_inf) / lim.hor_n_inf;
  ok = ok && rel <= 1e-5;
  return {ok, "limits sr/m r/m 0 sr/n; c_hor rel gap at n=1e6 " + fmt(rel)};
}

Outcome criterion2b() {
  const commcost::CostParams p{4, 20, 1406, 1000000};
  const auto lim = commcost::limits(p);
  const double rel = std::abs(commcost::c_ver(p) - lim.ver_n_inf) / lim.ver_n_inf;
  return {rel <= 1e-5, "c_ver rel gap at n=1e6 " + fmt(rel) +
                           " (exact value s*m/n = " + fmt(4.0 * 1406 / 1e6) + ")"};
}

Outcome criterion3() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> pick_m(60, 200), pick_rho(2, 8),
      pick_s(2, 4);
  double worst = 0.0;
  int runs = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = static_cast<size_t>(pick_s(rng));
    // n = s * n_i keeps every vertical block the same width
    const int lo = (20 + static_cast<int>(s) - 1) / static_cast<int>(s);
    std::uniform_int_distribution<int> pick_ni(lo, 60 / static_cast<int>(s));
    const Eigen::Index n = static_cast<Eigen::Index>(s) * pick_ni(rng);
    const Eigen::Index m = pick_m(rng);
    const Eigen::Index rho = pick_rho(rng);
    const Matrix x = testing::low_rank(m, n, rho, 1e-8, rng);
    const auto ref = centralized(x, Normalization::Center);
    const auto hparts = partition(m, n, Mode::Horizontal, s);
    const auto hi = feasible_r(hparts, m, n, 1).hi;
    for (Eigen::Index k = 1; k <= rho; ++k) {
      for (Eigen::Index r : {rho, std::min(rho + 3, hi)}) {
        const auto run = run_protocol(x, {Mode::Horizontal, s, r, k}, &ref);
        worst = std::max(worst, run.gd_to_centralized);
        ++runs;
      }
      const auto run =
          run_protocol(x, {Mode::Vertical, s, n / static_cast<Eigen::Index>(s), k},
                       &ref);
      worst = std::max(worst, run.gd_to_centralized);
      ++runs;
    }
  }
  return {worst < 1e-6, std::to_string(runs) + " runs, max GD " + fmt(worst)};
}

Outcome criterion4() {
  std::mt19937_64 rng(4004);
  double sym = 0, rot = 0, oracle = 0;
  bool bounded = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 6 + trial % 10, k = 1 + trial % 5;
    const Matrix a = testing::random_orthonormal(n, k, rng);
    const Matrix b = testing::random_orthonormal(n, k, rng);
    const double gd = geodesic_distance(Subspace(a), Subspace(b));
    sym = std::max(sym, std::abs(gd - geodesic_distance(Subspace(b), Subspace(a))));
    const Matrix qa = testing::random_orthonormal(k, k, rng);
    const Matrix qb = testing::random_orthonormal(k, k, rng);
    rot = std::max(rot, std::abs(gd - geodesic_distance(Subspace(a * qa),
                                                        Subspace(b * qb))));
    bounded = bounded && gd >= 0 &&
              gd <= std::sqrt(static_cast<double>(k)) * std::numbers::pi / 2 + 1e-12;
    const auto got = principal_angles(Subspace(a), Subspace(b));
    const auto want = testing::deflation_angles(a, b);
    for (size_t i = 0; i < got.size(); ++i)
      oracle = std::max(oracle, std::abs(got[i] - want[i]));
  }
  Matrix e1(2, 1), line(2, 1);
  e1 << 1, 0;
  line << std::cos(0.3), std::sin(0.3);
  const double planar =
      std::abs(geodesic_distance(Subspace(e1), Subspace(line)) - 0.3);
  const bool ok = sym < 1e-12 && rot < 1e-10 && bounded && planar < 1e-12 &&
                  oracle < 1e-6;
  return {ok, "asym " + fmt(sym) + ", rotation " + fmt(rot) + ", 2-D " +
                  fmt(planar) + ", oracle " + fmt(oracle)};
}

Outcome criterion5() {
  std::mt19937_64 rng(2024);
  const Eigen::Index k = 6;
  const Matrix x = testing::low_rank(400, 64, 6, 0.1, rng);
  const auto ref = centralized(x, Normalization::Center);
  int violations = 0, points = 0;
  double worst = 0.0;
  for (Mode mode : {Mode::Horizontal, Mode::Vertical}) {
    for (size_t s : {2, 4}) {
      const auto parts = partition(400, 64, mode, s);
      const auto rr = feasible_r(parts, 400, 64, k);
      double prev = 0;
      for (Eigen::Index r = std::max(k, rr.lo); r <= rr.hi; ++r) {
        const double gd = run_protocol(x, {mode, s, r, k}, &ref).gd_to_centralized;
        if (r > std::max(k, rr.lo)) {
          worst = std::max(worst, gd - prev);
          if (gd > prev + 1e-8) ++violations;
        }
        prev = gd;
        ++points;
      }
    }
  }
  int order_bad = 0, grid = 0;
  for (std::uint64_t m : {65, 100, 400, 1406, 100000})
    for (std::uint64_t n : {16, 64, 300, 1000})
      for (std::uint64_t s = 1; s <= 25; ++s)
        for (std::uint64_t r = 1; r <= 40; ++r) {
          if (m <= n + 1) continue;
          const commcost::CostParams p{s, r, m, n};
          ++grid;
          if (!(commcost::c_ver(p) > commcost::c_hor(p))) ++order_bad;
        }
  return {violations == 0 && order_bad == 0,
          std::to_string(points) + " GD points, " + std::to_string(violations) +
              " increases over 1e-8 (largest step " + fmt(worst) + "); " +
              std::to_string(order_bad) + "/" + std::to_string(grid) +
              " cost points with c_ver <= c_hor"};
}

Outcome criterion6() {
  const Matrix x = traffic_matrix();
  const auto ref = centralized(x, Normalization::Center);
  const auto k = select_dimension(ref.model, 0.92);
  const Vector central = residual_scores(ref.normalized, ref.model.principal_subspace(k));
  bool ok = true;
  std::ostringstream d;

  double self = 0;
  for (double pct : {0.01, 0.05, 0.10}) {
    const auto truth = detection::make_ground_truth(view(central), pct);
    self = std::max(self, detection::equal_error_rate(
                              detection::roc_curve(view(central), truth)));
  }
  ok = ok && self == 0.0;
  d << "self ERR " << fmt(self);

  double full = 0, trend = 0;
  int step_viol = 0;
  for (Mode mode : {Mode::Horizontal, Mode::Vertical}) {
    const size_t s = 4;
    const auto parts = partition(x.rows(), x.cols(), mode, s);
    const auto rr = feasible_r(parts, x.rows(), x.cols(), k);
    std::vector<Eigen::Index> grid;
    for (Eigen::Index r : {20, 30, 40})
      if (r <= rr.hi) grid.push_back(r);
    if (grid.back() != rr.hi) grid.push_back(rr.hi);
    std::vector<Vector> grid_scores;
    for (auto r : grid) grid_scores.push_back(run_protocol(x, {mode, s, r, k}, &ref).scores);
    std::vector<Vector> step_scores;
    for (Eigen::Index r = k; r <= rr.hi; ++r)
      step_scores.push_back(run_protocol(x, {mode, s, r, k}, &ref).scores);
    for (double pct : {0.01, 0.05, 0.10}) {
      const auto truth = detection::make_ground_truth(view(central), pct);
      auto err = [&](const Vector& sc) {
        return detection::equal_error_rate(detection::roc_curve(view(sc), truth));
      };
      full = std::max(full, err(grid_scores.back()));
      for (size_t i = 1; i < grid_scores.size(); ++i)
        trend = std::max(trend, err(grid_scores[i]) - err(grid_scores[i - 1]));
      for (size_t i = 1; i < step_scores.size(); ++i)
        if (err(step_scores[i]) > err(step_scores[i - 1]) + 0.01) ++step_viol;
    }
  }
  ok = ok && full < 1e-6 && trend <= 0.01;
  d << ", full-r ERR " << fmt(full) << ", largest ERR rise on r grid "
    << fmt(trend) << " (unit-step rises over 0.01: " << step_viol << ")";

  std::mt19937_64 rng(6006);
  std::uniform_int_distribution<int> level(0, 40);
  long mismatches = 0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> scores(200);
    for (auto& v : scores) v = level(rng) / 4.0;  // plenty of ties
    const auto truth = detection::make_ground_truth(scores, 0.05 + 0.01 * (trial % 6));
    const auto curve = detection::roc_curve(scores, truth);
    for (size_t i = 0; i < curve.points.size(); ++i) {
      const auto want = testing::naive_rates(scores, truth.labels, curve.thresholds[i]);
      if (want.far != curve.points[i].far || want.tpr != curve.points[i].tpr)
        ++mismatches;
    }
  }
  ok = ok && mismatches == 0;
  d << ", ROC oracle mismatches " << mismatches;
  return {ok, d.str()};
}

Outcome criterion7() {
  const auto cfg = traffic_config();
  const auto traffic = ingest::synth_traffic(cfg);
  const auto hm = ingest::build_histogram_matrix(traffic.records, 100);
  const Matrix& x = hm.matrix.values;
  const size_t bin = cfg.anomalies[0].bin;
  const auto ref = centralized(x, Normalization::Center);
  const auto k = select_dimension(ref.model, 0.92);
  const Vector central = residual_scores(ref.normalized, ref.model.principal_subspace(k));
  const auto truth = detection::make_ground_truth(view(central), 0.01);
  bool ok = x.rows() == 300 && x.cols() == 100 && truth.labels[bin];
  std::ostringstream d;
  d << "k=" << k << ", bin " << bin << (truth.labels[bin] ? " in" : " not in")
    << " centralized top 1%";
  for (Mode mode : {Mode::Horizontal, Mode::Vertical}) {
    const auto run = run_protocol(x, {mode, 4, 20, k}, &ref);
    const double far = detection::far_to_flag(view(run.scores), truth, bin);
    ok = ok && far <= 0.05;
    d << ", " << to_string(mode) << " FAR " << fmt(far);
  }
  return {ok, d.str()};
}

Outcome criterion8() {
  std::ostringstream d;
  ingest::SynthConfig c;
  c.duration_seconds = 240;
  c.n_domains = 60;
  c.base_rate = 300;
  c.groups = 4;
  c.amplitude = 0.4;
  c.spike_period = 60;
  c.spike_magnitude = 50;
  c.spike_domain = 3;
  c.seed = 88;
  c.anomalies.push_back({ingest::Anomaly::Kind::Volume, 100, 40, 7});
  c.anomalies.push_back({ingest::Anomaly::Kind::Dispersion, 170, 30, 0});
  const auto traffic = ingest::synth_traffic(c);
  const auto hm = ingest::build_histogram_matrix(traffic.records, 100000);
  long mismatch = 0;
  for (size_t d0 = 0; d0 < c.n_domains; ++d0) {
    const auto it = std::find(hm.domains.begin(), hm.domains.end(),
                              traffic.domain_names[d0]);
    const auto col = traffic.schedule.col(static_cast<Eigen::Index>(d0));
    if (it == hm.domains.end()) {
      if (col.sum() != 0.0) ++mismatch;
      continue;
    }
    const auto j = it - hm.domains.begin();
    if (hm.matrix.values.rows() != col.size() ||
        hm.matrix.values.col(j) != col)
      ++mismatch;
  }
  bool ok = mismatch == 0;
  d << "schedule columns differing " << mismatch;

  std::vector<ingest::DnsRecord> uniform;
  for (size_t i = 0; i < 300; ++i)
    uniform.push_back({5.0 + i / 1000.0, ingest::synth_domain_name(i), "A", "s", "d"});
  const double h = ingest::build_histogram_matrix(uniform, 10).per_bin[0].entropy;
  const double herr = std::abs(h - std::log2(300.0));
  ok = ok && herr <= 1e-12;
  d << ", uniform entropy error " << fmt(herr);

  std::ostringstream csv;
  ingest::SynthConfig small;
  small.duration_seconds = 10;
  small.base_rate = 100;
  auto recs = ingest::synth_traffic(small).records;
  recs.resize(1000);
  ingest::write_records_csv(csv, recs);
  std::istringstream lines(csv.str());
  std::string line, text;
  int row = 0;
  while (std::getline(lines, line)) {
    if (row > 0 && row % 100 == 0) {
      switch ((row / 100) % 4) {
        case 0: line = line.substr(0, line.rfind(',')); break;
        case 1: line = "x" + line; break;
        case 2: line += ",extra"; break;
        default: line = line.substr(line.find(',')); break;
      }
    }
    text += line + "\n";
    ++row;
  }
  std::istringstream corrupted(text);
  const auto parsed = ingest::parse_records(corrupted);
  ok = ok && parsed.malformed == 10 && parsed.records.size() == 990;
  d << ", malformed " << parsed.malformed << "/10, kept "
    << parsed.records.size() << "/990";
  return {ok, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int dpca_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

Outcome criterion9() {
  const fs::path root = fs::temp_directory_path() / "dpca_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "synth.json");
    cfg << R"({"duration_seconds": 200, "n_domains": 80, "base_rate": 800,
              "groups": 3, "amplitude": 0.3, "seed": 19,
              "anomalies": [{"kind": "volume", "bin": 77, "delta": 60, "domain": 5}]})";
  }
  const std::string cfg = (root / "synth.json").string();

  auto all = [&](const std::string& tag, bool parallel) {
    // same paths every pass, so the configs (and their hashes) are identical
    const std::string out = (root / "work").string();
    std::vector<std::vector<std::string>> cmds = {
        {"synth", "--synth-config", cfg, "--out", out + "/synth"},
        {"ingest", "--input", out + "/synth/records.csv", "--top-k", "80",
         "--out", out + "/ingest"},
        {"scree", "--input", out + "/ingest/matrix.csv", "--out", out + "/scree"},
        {"cost-table", "--m", "1406", "--n", "300", "--s", "1:8", "--r", "10,20",
         "--out", out + "/cost"},
        {"gd-sweep", "--synth-config", cfg, "--s", "2,4", "--r", "5:15",
         "--out", out + "/sweep"},
        {"min-r", "--synth-config", cfg, "--s", "2:5", "--d-star", "0.1,0.5",
         "--out", out + "/minr"},
        {"roc", "--synth-config", cfg, "--r", "10,20", "--out", out + "/roc"},
    };
    int bad = 0;
    for (auto& c : cmds) {
      if (parallel && (c[0] == "gd-sweep" || c[0] == "roc")) {
        c.push_back("--parallel");
        c.push_back("--threads");
        c.push_back("4");
      }
      if (dpca_cli(c) != 0) ++bad;
    }
    fs::rename(root / "work", root / tag);
    return bad;
  };
  int bad = all("a", false) + all("b", false) + all("c", true);

  long compared = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    const auto body = slurp(e.path());
    for (const char* other : {"b", "c"}) {
      ++compared;
      if (!fs::exists(root / other / rel) || slurp(root / other / rel) != body) {
        ++differing;
        std::cout << "  differs: " << other << "/" << rel.string() << "\n";
      }
    }
  }
  fs::remove_all(root);
  return {bad == 0 && compared >= 20 && differing == 0,
          std::to_string(bad) + " failed commands, " + std::to_string(differing) +
              "/" + std::to_string(compared) + " file comparisons differ"};
}

}  // namespace

int main() {
  report("1", "cost-formula fidelity", criterion1, 60);
  report("2a", "limit fidelity, horizontal", criterion2a);
  report("2b", "limit fidelity, vertical", criterion2b);
  report("3", "exactness suite", criterion3, 300);
  report("4", "GD metric suite", criterion4);
  report("5", "monotonicity suite", criterion5);
  report("6", "detection suite", criterion6);
  report("7", "pipeline end-to-end", criterion7, 120);
  report("8", "ingestion fidelity", criterion8);
  report("9", "determinism", criterion9);
  std::cout << (failures == 0 ? "all criteria passed" : "criteria failed: " + std::to_string(failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
