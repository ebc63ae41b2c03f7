#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dpca::commcost {

struct CostParams {
  std::uint64_t s = 1;  // monitors
  std::uint64_t r = 0;  // local PCs
  std::uint64_t m = 1;  // rows
  std::uint64_t n = 1;  // columns
};

/// Uplinked values over m*n for the horizontal protocol: s r (n + 1) / (m n).
double c_hor(const CostParams& p);

/// Same for the vertical protocol with n_i = n / s taken as a real:
/// s r (m + n / s) / (m n).
double c_ver(const CostParams& p);

struct Limits {
  double hor_n_inf;  // s r / m
  double ver_n_inf;  // r / m
  double hor_m_inf;  // 0
  double ver_m_inf;  // s r / n
};

Limits limits(const CostParams& p);

struct CostRow {
  std::uint64_t s, r;
  double c_hor, c_ver;
};

std::vector<CostRow> cost_table(std::uint64_t m, std::uint64_t n,
                                const std::vector<std::uint64_t>& s_values,
                                const std::vector<std::uint64_t>& r_values);
void write_cost_csv(std::ostream& out, const std::vector<CostRow>& rows);

}  // namespace dpca::commcost
