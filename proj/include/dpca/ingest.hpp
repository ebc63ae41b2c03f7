#pragma once

#include "dpca/matrix.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dpca::ingest {

struct DnsRecord {
  double timestamp = 0.0;  // seconds
  std::string qname;
  std::string qtype;
  std::string src;
  std::string dst;
};

/// One record per CSV line: timestamp,qname,qtype,src,dst.
std::optional<DnsRecord> parse_line(const std::string& line);

struct ParseResult {
  std::vector<DnsRecord> records;
  std::uint64_t malformed = 0;
};

/// Blank lines, '#' comments and a leading "timestamp,..." header are skipped
/// without being counted as malformed.
ParseResult parse_records(std::istream& in);
/// Reads plain or gzip-compressed files.
ParseResult parse_records_file(const std::string& path);

void write_records_csv(std::ostream& out, const std::vector<DnsRecord>& records);

struct BinStats {
  double norm = 0.0;     // L2 norm of the full per-bin domain histogram
  double entropy = 0.0;  // bits
  double fraction = 0.0; // retained / total, 0 for an empty bin
  std::uint64_t total = 0;
};

struct HistogramMatrix {
  DataMatrix matrix;             // bins x retained domains, raw counts
  std::vector<std::string> domains;
  double origin = 0.0;           // timestamp of bin 0's left edge
  double bin_seconds = 1.0;
  std::vector<BinStats> per_bin;
};

/// One-second bins from floor(min timestamp) through the bin holding the
/// largest timestamp; columns are the top_k most frequent qnames (count
/// descending, then lexicographic).
HistogramMatrix build_histogram_matrix(const std::vector<DnsRecord>& records,
                                       size_t top_k);

enum class Field { QName, QType, Src, Dst };
Field parse_field(const std::string& text);

struct FieldCount {
  std::string value;
  std::uint64_t count;
  double share;  // of all records
};

std::vector<FieldCount> field_histograms(const std::vector<DnsRecord>& records,
                                         Field field, size_t top_n);

/// Shannon entropy in bits of a nonnegative count vector.
double entropy_bits(const std::vector<double>& counts);

// ---------------------------------------------------------------------------
// Synthetic traffic

struct QTypeShare {
  std::string qtype;
  double weight;
};

struct Anomaly {
  enum class Kind { Volume, Dispersion };
  Kind kind = Kind::Volume;
  size_t bin = 0;
  std::uint64_t delta = 0;  // extra records
  size_t domain = 0;        // popularity rank for volume anomalies
};

struct SynthConfig {
  size_t duration_seconds = 60;
  std::uint64_t base_rate = 100;  // records per second before modulation
  size_t n_domains = 100;
  double zipf_exponent = 1.0;
  /// Latent traffic groups: domain d follows group d % groups, each with
  /// its own sinusoidal rate profile of relative amplitude `amplitude`.
  size_t groups = 0;
  double amplitude = 0.0;
  double min_period = 30.0;
  double max_period = 300.0;
  size_t spike_period = 0;  // 0 disables the periodic spike
  std::uint64_t spike_magnitude = 0;
  size_t spike_domain = 0;
  std::vector<Anomaly> anomalies;
  std::vector<QTypeShare> qtype_mix;  // empty: address-heavy default mix
  size_t n_sources = 200;
  size_t n_destinations = 4;
  std::uint64_t seed = 1;
};

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& config);

/// Default mix: 94.6% address (A/AAAA), 2.39% pointer, remainder spread over
/// a few other types.
std::vector<QTypeShare> default_qtype_mix();

struct SynthTraffic {
  std::vector<DnsRecord> records;       // time-ordered
  std::vector<std::string> domain_names;  // by popularity rank
  Matrix schedule;                      // bins x n_domains emitted counts
  std::vector<std::uint64_t> bin_totals;  // includes dispersion domains
  std::vector<size_t> anomaly_bins;
  std::vector<size_t> spike_bins;
};

SynthTraffic synth_traffic(const SynthConfig& config);

/// Domain name for popularity rank `rank`.
std::string synth_domain_name(size_t rank);

/// Sidecar describing a histogram matrix (and generator truth when given).
nlohmann::json sidecar_json(const HistogramMatrix& hm,
                            const ParseResult* parse = nullptr,
                            const SynthTraffic* truth = nullptr);

}  // namespace dpca::ingest
