#include "dpca/simnet.hpp"

#include "dpca/commcost.hpp"
#include "dpca/dispca_horizontal.hpp"
#include "dpca/dispca_vertical.hpp"
#include "dpca/error.hpp"
#include "dpca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace dpca::simnet {

std::string to_string(Mode mode) {
  return mode == Mode::Horizontal ? "hor" : "ver";
}

Mode parse_mode(const std::string& text) {
  if (text == "hor" || text == "horizontal") return Mode::Horizontal;
  if (text == "ver" || text == "vertical") return Mode::Vertical;
  throw_usage("unknown partitioning mode '" + text + "'");
}

Partitioning partition(Eigen::Index rows, Eigen::Index cols, Mode mode,
                       size_t s) {
  const Eigen::Index total = mode == Mode::Horizontal ? rows : cols;
  if (s < 1 || static_cast<Eigen::Index>(s) > total) {
    std::ostringstream os;
    os << "s = " << s << " outside [1, " << total << "] for "
       << to_string(mode) << " partitioning";
    throw_usage(os.str());
  }
  const auto ss = static_cast<Eigen::Index>(s);
  auto size = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(total) / static_cast<double>(s)));
  // rounding up can starve the last block (e.g. 9 over 6); fall back to floor
  if (size * (ss - 1) >= total) size = total / ss;

  Partitioning p{mode, s, {}};
  p.boundaries.reserve(s + 1);
  for (Eigen::Index b = 0; b < ss; ++b) p.boundaries.push_back(b * size);
  p.boundaries.push_back(total);
  return p;
}

std::vector<Matrix> split(const Matrix& m, const Partitioning& parts) {
  std::vector<Matrix> blocks;
  blocks.reserve(parts.s);
  for (size_t b = 0; b < parts.s; ++b) {
    const auto start = parts.boundaries[b];
    const auto len = parts.block_size(b);
    if (parts.mode == Mode::Horizontal) {
      blocks.emplace_back(m.middleRows(start, len));
    } else {
      blocks.emplace_back(m.middleCols(start, len));
    }
  }
  return blocks;
}

Prepass center_prepass(const std::vector<Matrix>& blocks, Mode mode,
                       Normalization how) {
  if (blocks.empty()) throw_data("center_prepass: no blocks");
  for (const auto& b : blocks) validate_matrix(b);
  const bool zscore = how == Normalization::ZScore;
  Prepass out;

  if (mode == Mode::Horizontal) {
    const auto n = blocks.front().cols();
    Eigen::Index m = 0;
    Vector sums = Vector::Zero(n);
    for (const auto& b : blocks) {
      if (b.cols() != n) throw_data("center_prepass: blocks disagree on width");
      sums += b.colwise().sum().transpose();
      m += b.rows();
      out.values_sent += static_cast<std::uint64_t>(n);
    }
    out.stats.means = sums / static_cast<double>(m);
    Vector sq = Vector::Zero(n);
    for (const auto& b : blocks) {
      sq += (b.rowwise() - out.stats.means.transpose())
                .colwise()
                .squaredNorm()
                .transpose();
      if (zscore) out.values_sent += static_cast<std::uint64_t>(n);
    }
    out.stats.stds = (sq / static_cast<double>(m)).cwiseSqrt();
  } else {
    const auto m = blocks.front().rows();
    Eigen::Index n = 0;
    for (const auto& b : blocks) {
      if (b.rows() != m) throw_data("center_prepass: blocks disagree on height");
      n += b.cols();
    }
    out.stats.means.resize(n);
    out.stats.stds.resize(n);
    Eigen::Index col = 0;
    for (const auto& b : blocks) {
      const auto local = b.cols();
      Vector means = b.colwise().mean().transpose();
      out.stats.means.segment(col, local) = means;
      out.stats.stds.segment(col, local) =
          ((b.rowwise() - means.transpose()).colwise().squaredNorm() /
           static_cast<double>(m))
              .cwiseSqrt()
              .transpose();
      out.values_sent += static_cast<std::uint64_t>(zscore ? 2 * local : local);
      col += local;
    }
  }

  out.stats.constant.resize(out.stats.stds.size());
  for (Eigen::Index j = 0; j < out.stats.stds.size(); ++j)
    out.stats.constant[j] = out.stats.stds[j] == 0.0;

  out.blocks.reserve(blocks.size());
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    if (mode == Mode::Horizontal) {
      out.blocks.push_back(apply_column_stats(b, out.stats, how));
    } else {
      ColumnStats local;
      local.means = out.stats.means.segment(col, b.cols());
      local.stds = out.stats.stds.segment(col, b.cols());
      local.constant.assign(out.stats.constant.begin() + col,
                            out.stats.constant.begin() + col + b.cols());
      out.blocks.push_back(apply_column_stats(b, local, how));
      col += b.cols();
    }
  }
  return out;
}

Centralized centralized(const Matrix& m, Normalization how) {
  Centralized c;
  c.normalized = normalize_columns(m, how).data;
  c.model = fit_pca(c.normalized);
  return c;
}

RRange feasible_r(const Partitioning& parts, Eigen::Index m, Eigen::Index n,
                  Eigen::Index k) {
  RRange range;
  range.hi = std::numeric_limits<Eigen::Index>::max();
  for (size_t b = 0; b < parts.s; ++b) {
    const auto size = parts.block_size(b);
    range.hi = std::min(range.hi, parts.mode == Mode::Horizontal
                                      ? std::min(size, n)
                                      : std::min(m, size));
  }
  const auto s = static_cast<Eigen::Index>(parts.s);
  range.lo = std::max<Eigen::Index>(1, (k + s - 1) / s);
  return range;
}

namespace {

/// In-memory uplink: one slot per monitor, the DFC waits until all are full.
class Channel {
 public:
  explicit Channel(size_t s) : slots_(s) {}

  void send(size_t monitor, std::vector<std::uint8_t> bytes) {
    {
      std::lock_guard lock(mu_);
      slots_[monitor] = std::move(bytes);
      ++filled_;
    }
    cv_.notify_all();
  }

  std::vector<std::vector<std::uint8_t>> collect() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return filled_ == slots_.size(); });
    return std::move(slots_);
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::vector<std::uint8_t>> slots_;
  size_t filled_ = 0;
};

void run_monitors(size_t s, bool parallel,
                  const std::function<void(size_t)>& body) {
  if (!parallel || s == 1) {
    for (size_t i = 0; i < s; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(s);
  std::vector<std::thread> threads;
  threads.reserve(s);
  for (size_t i = 0; i < s; ++i) {
    threads.emplace_back([&, i] {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

ProtocolRun run_protocol(const Matrix& m, const ProtocolConfig& config,
                         const Centralized* reference) {
  validate_matrix(m);
  ProtocolRun run;
  run.config = config;
  run.m = static_cast<std::uint64_t>(m.rows());
  run.n = static_cast<std::uint64_t>(m.cols());
  run.partitioning = partition(m.rows(), m.cols(), config.mode, config.s);

  const auto s = static_cast<Eigen::Index>(config.s);
  const RRange rr = feasible_r(run.partitioning, m.rows(), m.cols(), config.k);
  if (config.r < 1 || config.r > rr.hi) {
    std::ostringstream os;
    os << "r = " << config.r << " outside [1, " << rr.hi << "]";
    throw_usage(os.str());
  }
  const Eigen::Index width = config.mode == Mode::Horizontal
                                 ? std::min(s * config.r, m.cols())
                                 : std::min(s * config.r, m.rows());
  if (config.k < 1 || config.k > width) {
    std::ostringstream os;
    os << "k = " << config.k << " outside [1, " << width << "]";
    throw_usage(os.str());
  }

  Prepass pre = center_prepass(split(m, run.partitioning), config.mode,
                               config.normalization);
  run.prepass_values = pre.values_sent;

  Channel uplink(config.s);
  std::uint64_t header_bytes = 0;
  if (config.mode == Mode::Horizontal) {
    header_bytes = horizontal::kHeaderBytes;
    run_monitors(config.s, config.parallel, [&](size_t i) {
      auto sum = horizontal::local_summarize(pre.blocks[i], config.r,
                                             static_cast<std::uint32_t>(i));
      uplink.send(i, horizontal::encode(sum));
    });
  } else {
    header_bytes = vertical::kHeaderBytes;
    run_monitors(config.s, config.parallel, [&](size_t i) {
      auto sum = vertical::local_summarize(pre.blocks[i], config.r,
                                           static_cast<std::uint32_t>(i));
      uplink.send(i, vertical::encode(sum));
    });
  }
  auto messages = uplink.collect();
  for (const auto& msg : messages)
    run.values_sent += (msg.size() - header_bytes) / 8;

  if (config.mode == Mode::Horizontal) {
    std::vector<horizontal::LocalSummary> summaries;
    summaries.reserve(messages.size());
    for (const auto& msg : messages) summaries.push_back(horizontal::decode(msg));
    auto agg = horizontal::aggregate(summaries);
    Subspace sub = horizontal::principal_subspace(agg, config.k);
    run.subspace = sub.basis();

    // the DFC broadcasts the subspace; each monitor scores its own rows
    run.scores.resize(m.rows());
    run_monitors(config.s, config.parallel, [&](size_t i) {
      run.scores.segment(run.partitioning.boundaries[i],
                         run.partitioning.block_size(i)) =
          residual_scores(pre.blocks[i], sub);
    });
  } else {
    std::vector<vertical::LocalSummary> summaries;
    summaries.reserve(messages.size());
    for (const auto& msg : messages) summaries.push_back(vertical::decode(msg));
    auto agg = vertical::aggregate(summaries, config.k);
    run.subspace = agg.v_hat_k;
    run.scores = vertical::residual_est(agg);
  }

  std::optional<Centralized> own;
  if (!reference) {
    own = centralized(m, config.normalization);
    reference = &*own;
  }
  run.gd_to_centralized =
      geodesic_distance(Subspace(run.subspace),
                        reference->model.principal_subspace(config.k));
  return run;
}

std::vector<MinRRow> sweep_min_r(const Matrix& m, Mode mode,
                                 const std::vector<size_t>& s_values,
                                 double d_star, Eigen::Index k,
                                 Normalization how) {
  if (!(d_star > 0.0)) throw_usage("d* must be positive");
  const Centralized ref = centralized(m, how);
  std::vector<MinRRow> rows;
  for (size_t s : s_values) {
    const auto parts = partition(m.rows(), m.cols(), mode, s);
    const RRange rr = feasible_r(parts, m.rows(), m.cols(), k);
    MinRRow row{mode, s, d_star, std::nullopt, 0.0};
    const auto start = std::max(rr.lo, std::min(k, rr.hi));
    for (Eigen::Index r = start; r <= rr.hi; ++r) {
      ProtocolConfig cfg{mode, s, r, k, how, false};
      const auto run = run_protocol(m, cfg, &ref);
      if (run.gd_to_centralized <= d_star) {
        row.r_star = r;
        commcost::CostParams p{s, static_cast<std::uint64_t>(r),
                               static_cast<std::uint64_t>(m.rows()),
                               static_cast<std::uint64_t>(m.cols())};
        row.cost = mode == Mode::Horizontal ? commcost::c_hor(p)
                                            : commcost::c_ver(p);
        break;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json to_json(const ProtocolRun& run) {
  nlohmann::json j;
  j["mode"] = to_string(run.config.mode);
  j["s"] = run.config.s;
  j["r"] = run.config.r;
  j["k"] = run.config.k;
  j["normalization"] =
      run.config.normalization == Normalization::ZScore ? "zscore" : "center";
  j["m"] = run.m;
  j["n"] = run.n;
  j["boundaries"] = run.partitioning.boundaries;
  j["values_sent"] = run.values_sent;
  j["prepass_values"] = run.prepass_values;
  j["normalized_cost"] = run.normalized_cost();
  j["gd_to_centralized"] = run.gd_to_centralized;
  j["scores"] = std::vector<double>(run.scores.begin(), run.scores.end());
  nlohmann::json basis = nlohmann::json::array();
  for (Eigen::Index c = 0; c < run.subspace.cols(); ++c) {
    basis.push_back(std::vector<double>(run.subspace.col(c).begin(),
                                        run.subspace.col(c).end()));
  }
  j["subspace"] = std::move(basis);
  return j;
}

}  // namespace dpca::simnet
