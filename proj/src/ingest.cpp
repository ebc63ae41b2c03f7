#include "dpca/ingest.hpp"

#include "dpca/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace dpca::ingest {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool skippable(const std::string& line, bool first) {
  if (line.empty() || line[0] == '#') return true;
  return first && line.rfind("timestamp,", 0) == 0;
}

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

void accept_line(const std::string& raw, bool& first, ParseResult& out) {
  std::string line = chomp(raw);
  if (skippable(line, first)) {
    first = false;
    return;
  }
  first = false;
  if (auto rec = parse_line(line)) {
    out.records.push_back(std::move(*rec));
  } else {
    ++out.malformed;
  }
}

}  // namespace

std::optional<DnsRecord> parse_line(const std::string& line) {
  auto fields = split_fields(line);
  if (fields.size() != 5) return std::nullopt;
  DnsRecord rec;
  const auto& ts = fields[0];
  auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(),
                                   rec.timestamp);
  if (ec != std::errc() || ptr != ts.data() + ts.size()) return std::nullopt;
  if (!std::isfinite(rec.timestamp) || rec.timestamp < 0.0) return std::nullopt;
  if (fields[1].empty()) return std::nullopt;
  rec.qname = std::move(fields[1]);
  rec.qtype = std::move(fields[2]);
  rec.src = std::move(fields[3]);
  rec.dst = std::move(fields[4]);
  return rec;
}

ParseResult parse_records(std::istream& in) {
  ParseResult out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) accept_line(line, first, out);
  return out;
}

ParseResult parse_records_file(const std::string& path) {
  // gzopen reads uncompressed files transparently
  gzFile gz = gzopen(path.c_str(), "rb");
  if (!gz) throw_data("cannot open " + path);
  ParseResult out;
  bool first = true;
  std::string line;
  char buf[8192];
  while (gzgets(gz, buf, sizeof buf)) {
    line += buf;
    if (!line.empty() && line.back() == '\n') {
      accept_line(line, first, out);
      line.clear();
    }
  }
  int errnum = 0;
  gzerror(gz, &errnum);
  gzclose(gz);
  if (errnum != Z_OK && errnum != Z_STREAM_END)
    throw_data("read error in " + path);
  if (!line.empty()) accept_line(line, first, out);
  return out;
}

void write_records_csv(std::ostream& out,
                       const std::vector<DnsRecord>& records) {
  out << "timestamp,qname,qtype,src,dst\n";
  char ts[64];
  for (const auto& r : records) {
    std::snprintf(ts, sizeof ts, "%.6f", r.timestamp);
    out << ts << ',' << r.qname << ',' << r.qtype << ',' << r.src << ','
        << r.dst << '\n';
  }
}

double entropy_bits(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

HistogramMatrix build_histogram_matrix(const std::vector<DnsRecord>& records,
                                       size_t top_k) {
  if (records.empty()) throw_data("build_histogram_matrix: no records");
  if (top_k < 1) throw_usage("top_k must be at least 1");

  double lo = records.front().timestamp, hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, r.timestamp);
    hi = std::max(hi, r.timestamp);
  }
  const double origin = std::floor(lo);
  const auto bins = static_cast<size_t>(std::floor(hi) - origin) + 1;

  // per-bin full histograms keyed by domain index
  std::unordered_map<std::string, size_t> index;
  std::vector<std::string> names;
  std::vector<std::uint64_t> global;
  std::vector<std::unordered_map<size_t, std::uint64_t>> per_bin(bins);
  for (const auto& r : records) {
    auto [it, fresh] = index.try_emplace(r.qname, names.size());
    if (fresh) {
      names.push_back(r.qname);
      global.push_back(0);
    }
    const auto bin = static_cast<size_t>(std::floor(r.timestamp) - origin);
    ++global[it->second];
    ++per_bin[bin][it->second];
  }

  std::vector<size_t> order(names.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (global[a] != global[b]) return global[a] > global[b];
    return names[a] < names[b];
  });
  const size_t kept = std::min(top_k, order.size());
  std::vector<long> column(names.size(), -1);
  HistogramMatrix hm;
  hm.origin = origin;
  for (size_t j = 0; j < kept; ++j) {
    column[order[j]] = static_cast<long>(j);
    hm.domains.push_back(names[order[j]]);
  }

  hm.matrix.values = Matrix::Zero(static_cast<Eigen::Index>(bins),
                                  static_cast<Eigen::Index>(kept));
  hm.matrix.col_names = hm.domains;
  hm.per_bin.resize(bins);
  std::vector<double> counts;
  for (size_t b = 0; b < bins; ++b) {
    counts.clear();
    double sq = 0.0;
    std::uint64_t total = 0, retained = 0;
    for (const auto& [dom, c] : per_bin[b]) {
      counts.push_back(static_cast<double>(c));
      sq += static_cast<double>(c) * static_cast<double>(c);
      total += c;
      if (column[dom] >= 0) {
        hm.matrix.values(static_cast<Eigen::Index>(b), column[dom]) =
            static_cast<double>(c);
        retained += c;
      }
    }
    // sort so the entropy sum does not depend on hash order
    std::sort(counts.begin(), counts.end());
    auto& st = hm.per_bin[b];
    st.norm = std::sqrt(sq);
    st.entropy = entropy_bits(counts);
    st.total = total;
    st.fraction = total ? static_cast<double>(retained) /
                              static_cast<double>(total)
                        : 0.0;
  }
  return hm;
}

Field parse_field(const std::string& text) {
  if (text == "qname") return Field::QName;
  if (text == "qtype") return Field::QType;
  if (text == "src") return Field::Src;
  if (text == "dst") return Field::Dst;
  throw_usage("unknown record field '" + text + "'");
}

std::vector<FieldCount> field_histograms(const std::vector<DnsRecord>& records,
                                         Field field, size_t top_n) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : records) {
    switch (field) {
      case Field::QName: ++counts[r.qname]; break;
      case Field::QType: ++counts[r.qtype]; break;
      case Field::Src: ++counts[r.src]; break;
      case Field::Dst: ++counts[r.dst]; break;
    }
  }
  std::vector<FieldCount> out;
  out.reserve(counts.size());
  const double total = static_cast<double>(records.size());
  for (const auto& [value, c] : counts)
    out.push_back({value, c, total > 0 ? static_cast<double>(c) / total : 0.0});
  // map order is lexicographic, so a stable sort by count keeps that tie rule
  std::stable_sort(out.begin(), out.end(),
                   [](const FieldCount& a, const FieldCount& b) {
                     return a.count > b.count;
                   });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<QTypeShare> default_qtype_mix() {
  return {{"A", 0.700}, {"AAAA", 0.246}, {"PTR", 0.0239}, {"MX", 0.012},
          {"TXT", 0.010}, {"SRV", 0.005}, {"NS", 0.0031}};
}

std::string synth_domain_name(size_t rank) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "d%04zu.example.com", rank);
  return buf;
}

namespace {

Anomaly::Kind parse_kind(const std::string& s) {
  if (s == "volume") return Anomaly::Kind::Volume;
  if (s == "dispersion") return Anomaly::Kind::Dispersion;
  throw_usage("unknown anomaly kind '" + s + "'");
}

void check_config(const SynthConfig& c) {
  if (c.duration_seconds < 1) throw_usage("synth: duration must be >= 1");
  if (c.n_domains < 1) throw_usage("synth: need at least one domain");
  if (c.zipf_exponent < 0.0) throw_usage("synth: zipf exponent must be >= 0");
  if (c.amplitude < 0.0 || c.amplitude >= 1.0)
    throw_usage("synth: amplitude must lie in [0, 1)");
  if (c.groups > 0 && !(c.min_period > 0.0 && c.max_period >= c.min_period))
    throw_usage("synth: bad modulation periods");
  if (c.spike_period > 0 && c.spike_domain >= c.n_domains)
    throw_usage("synth: spike domain out of range");
  if (c.n_sources < 1 || c.n_destinations < 1)
    throw_usage("synth: need at least one source and destination");
  for (const auto& a : c.anomalies) {
    if (a.bin >= c.duration_seconds) throw_usage("synth: anomaly bin out of range");
    if (a.kind == Anomaly::Kind::Volume && a.domain >= c.n_domains)
      throw_usage("synth: anomaly domain out of range");
  }
  for (const auto& q : c.qtype_mix)
    if (!(q.weight >= 0.0)) throw_usage("synth: negative qtype weight");
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  try {
    c.duration_seconds = j.value("duration_seconds", c.duration_seconds);
    c.base_rate = j.value("base_rate", c.base_rate);
    c.n_domains = j.value("n_domains", c.n_domains);
    c.zipf_exponent = j.value("zipf_exponent", c.zipf_exponent);
    c.groups = j.value("groups", c.groups);
    c.amplitude = j.value("amplitude", c.amplitude);
    c.min_period = j.value("min_period", c.min_period);
    c.max_period = j.value("max_period", c.max_period);
    if (j.contains("spike")) {
      const auto& s = j.at("spike");
      c.spike_period = s.value("period", size_t{0});
      c.spike_magnitude = s.value("magnitude", std::uint64_t{0});
      c.spike_domain = s.value("domain", size_t{0});
    }
    if (j.contains("anomalies")) {
      for (const auto& a : j.at("anomalies")) {
        Anomaly an;
        an.kind = parse_kind(a.value("kind", std::string("volume")));
        an.bin = a.at("bin").get<size_t>();
        an.delta = a.at("delta").get<std::uint64_t>();
        an.domain = a.value("domain", size_t{0});
        c.anomalies.push_back(an);
      }
    }
    if (j.contains("qtype_mix")) {
      for (const auto& [k, v] : j.at("qtype_mix").items())
        c.qtype_mix.push_back({k, v.get<double>()});
    }
    c.n_sources = j.value("n_sources", c.n_sources);
    c.n_destinations = j.value("n_destinations", c.n_destinations);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw_usage(std::string("synth config: ") + e.what());
  }
  check_config(c);
  return c;
}

nlohmann::json to_json(const SynthConfig& c) {
  nlohmann::json j;
  j["duration_seconds"] = c.duration_seconds;
  j["base_rate"] = c.base_rate;
  j["n_domains"] = c.n_domains;
  j["zipf_exponent"] = c.zipf_exponent;
  j["groups"] = c.groups;
  j["amplitude"] = c.amplitude;
  j["min_period"] = c.min_period;
  j["max_period"] = c.max_period;
  j["spike"] = {{"period", c.spike_period},
                {"magnitude", c.spike_magnitude},
                {"domain", c.spike_domain}};
  auto anomalies = nlohmann::json::array();
  for (const auto& a : c.anomalies) {
    anomalies.push_back(
        {{"kind", a.kind == Anomaly::Kind::Volume ? "volume" : "dispersion"},
         {"bin", a.bin},
         {"delta", a.delta},
         {"domain", a.domain}});
  }
  j["anomalies"] = std::move(anomalies);
  auto mix = nlohmann::json::object();
  for (const auto& q : c.qtype_mix) mix[q.qtype] = q.weight;
  j["qtype_mix"] = std::move(mix);
  j["n_sources"] = c.n_sources;
  j["n_destinations"] = c.n_destinations;
  j["seed"] = c.seed;
  return j;
}

SynthTraffic synth_traffic(const SynthConfig& config) {
  check_config(config);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const size_t bins = config.duration_seconds;
  const size_t nd = config.n_domains;

  std::vector<double> popularity(nd);
  for (size_t d = 0; d < nd; ++d)
    popularity[d] = 1.0 / std::pow(static_cast<double>(d + 1),
                                   config.zipf_exponent);

  struct Profile {
    double period, phase;
  };
  std::vector<Profile> profiles(config.groups);
  for (auto& p : profiles) {
    p.period = config.min_period +
               (config.max_period - config.min_period) * unit(rng);
    p.phase = 2.0 * std::numbers::pi * unit(rng);
  }

  auto mix = config.qtype_mix.empty() ? default_qtype_mix() : config.qtype_mix;
  std::vector<double> mix_weights;
  for (const auto& q : mix) mix_weights.push_back(q.weight);
  std::discrete_distribution<size_t> pick_qtype(mix_weights.begin(),
                                                mix_weights.end());

  std::vector<double> src_weights(config.n_sources);
  for (size_t i = 0; i < src_weights.size(); ++i)
    src_weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<size_t> pick_src(src_weights.begin(),
                                              src_weights.end());
  std::uniform_int_distribution<size_t> pick_dst(0, config.n_destinations - 1);

  SynthTraffic out;
  out.domain_names.reserve(nd);
  for (size_t d = 0; d < nd; ++d) out.domain_names.push_back(synth_domain_name(d));
  out.schedule = Matrix::Zero(static_cast<Eigen::Index>(bins),
                              static_cast<Eigen::Index>(nd));
  out.bin_totals.assign(bins, 0);

  auto emit = [&](size_t bin, const std::string& qname) {
    DnsRecord rec;
    // microsecond resolution so the CSV text round-trips exactly
    rec.timestamp = static_cast<double>(bin) +
                    std::floor(unit(rng) * 1e6) / 1e6;
    rec.qname = qname;
    rec.qtype = mix[pick_qtype(rng)].qtype;
    const size_t src = pick_src(rng);
    char buf[32];
    std::snprintf(buf, sizeof buf, "10.%zu.%zu.%zu", (src >> 16) & 255,
                  (src >> 8) & 255, src & 255);
    rec.src = buf;
    std::snprintf(buf, sizeof buf, "192.0.2.%zu", pick_dst(rng) + 1);
    rec.dst = buf;
    out.records.push_back(std::move(rec));
    ++out.bin_totals[bin];
  };

  std::vector<double> weights(nd);
  for (size_t t = 0; t < bins; ++t) {
    const size_t first = out.records.size();
    double level = 0.0;
    for (size_t d = 0; d < nd; ++d) {
      double factor = 1.0;
      if (!profiles.empty()) {
        const auto& p = profiles[d % profiles.size()];
        factor += config.amplitude *
                  std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                               p.period +
                           p.phase);
      }
      weights[d] = popularity[d] * factor;
      level += weights[d];
    }
    double base_level = 0.0;
    for (double p : popularity) base_level += p;
    const auto count = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(config.base_rate) * level / base_level));

    std::discrete_distribution<size_t> pick_domain(weights.begin(),
                                                   weights.end());
    for (std::uint64_t i = 0; i < count; ++i) {
      const size_t d = pick_domain(rng);
      out.schedule(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) += 1.0;
      emit(t, out.domain_names[d]);
    }

    if (config.spike_period > 0 && t % config.spike_period == 0) {
      out.spike_bins.push_back(t);
      for (std::uint64_t i = 0; i < config.spike_magnitude; ++i) {
        out.schedule(static_cast<Eigen::Index>(t),
                     static_cast<Eigen::Index>(config.spike_domain)) += 1.0;
        emit(t, out.domain_names[config.spike_domain]);
      }
    }

    for (size_t a = 0; a < config.anomalies.size(); ++a) {
      const auto& an = config.anomalies[a];
      if (an.bin != t) continue;
      out.anomaly_bins.push_back(t);
      for (std::uint64_t i = 0; i < an.delta; ++i) {
        if (an.kind == Anomaly::Kind::Volume) {
          out.schedule(static_cast<Eigen::Index>(t),
                       static_cast<Eigen::Index>(an.domain)) += 1.0;
          emit(t, out.domain_names[an.domain]);
        } else {
          char buf[64];
          std::snprintf(buf, sizeof buf, "x%zu-%zu-%llu.example.net", t, a,
                        static_cast<unsigned long long>(i));
          emit(t, buf);
        }
      }
    }

    std::sort(out.records.begin() + static_cast<std::ptrdiff_t>(first),
              out.records.end(), [](const DnsRecord& x, const DnsRecord& y) {
                return x.timestamp < y.timestamp;
              });
  }
  std::sort(out.anomaly_bins.begin(), out.anomaly_bins.end());
  out.anomaly_bins.erase(
      std::unique(out.anomaly_bins.begin(), out.anomaly_bins.end()),
      out.anomaly_bins.end());
  return out;
}

nlohmann::json sidecar_json(const HistogramMatrix& hm, const ParseResult* parse,
                            const SynthTraffic* truth) {
  nlohmann::json j;
  j["bins"] = hm.per_bin.size();
  j["bin_seconds"] = hm.bin_seconds;
  j["origin"] = hm.origin;
  j["domains"] = hm.domains;
  auto stats = nlohmann::json::array();
  for (const auto& b : hm.per_bin) {
    stats.push_back({{"norm", b.norm},
                     {"entropy", b.entropy},
                     {"fraction", b.fraction},
                     {"total", b.total}});
  }
  j["per_bin"] = std::move(stats);
  if (parse) {
    j["records"] = parse->records.size();
    j["malformed"] = parse->malformed;
  }
  if (truth) {
    j["ground_truth"] = {{"anomaly_bins", truth->anomaly_bins},
                         {"spike_bins", truth->spike_bins}};
  }
  return j;
}

}  // namespace dpca::ingest
