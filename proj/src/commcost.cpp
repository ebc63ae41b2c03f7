#include "dpca/commcost.hpp"

#include "dpca/error.hpp"

#include <iomanip>
#include <ostream>

namespace dpca::commcost {
namespace {

void check(const CostParams& p) {
  if (p.s < 1 || p.m < 1 || p.n < 1)
    throw_usage("cost parameters need s, m, n >= 1");
}

}  // namespace

double c_hor(const CostParams& p) {
  check(p);
  const double s = p.s, r = p.r, m = p.m, n = p.n;
  return s * r * (n + 1.0) / (m * n);
}

double c_ver(const CostParams& p) {
  check(p);
  const double s = p.s, r = p.r, m = p.m, n = p.n;
  return s * r * (m + n / s) / (m * n);
}

Limits limits(const CostParams& p) {
  check(p);
  const double s = p.s, r = p.r, m = p.m, n = p.n;
  return {s * r / m, r / m, 0.0, s * r / n};
}

std::vector<CostRow> cost_table(std::uint64_t m, std::uint64_t n,
                                const std::vector<std::uint64_t>& s_values,
                                const std::vector<std::uint64_t>& r_values) {
  std::vector<CostRow> rows;
  for (auto s : s_values) {
    for (auto r : r_values) {
      CostParams p{s, r, m, n};
      rows.push_back({s, r, c_hor(p), c_ver(p)});
    }
  }
  return rows;
}

void write_cost_csv(std::ostream& out, const std::vector<CostRow>& rows) {
  out << "s,r,c_hor,c_ver\n" << std::setprecision(17);
  for (const auto& row : rows)
    out << row.s << ',' << row.r << ',' << row.c_hor << ',' << row.c_ver
        << '\n';
}

}  // namespace dpca::commcost
