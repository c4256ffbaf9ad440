#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mail/exploration/lsvi_ucb_zero.hpp"

namespace mail {

/// Checkpoint rows "k,h,logdet,probe_norm" with h 1-based. probe_norm is the
/// max over probes at that stage, empty when no series is given.
inline void write_trace_csv(const ExplorationTrace& trace, const FeatureMap& f, const ProbeSeries* probes,
                            std::ostream& os)
{
   if (probes && probes->k != trace.snapshot_k)
      throw ArgumentError("write_trace_csv: probe series does not match the trace checkpoints");
   os << "k,h,logdet,probe_norm\n";
   const int H = static_cast<int>(trace.elliptical_potential.size());
   char buf[64];
   for (std::size_t i = 0; i < trace.snapshot_k.size(); ++i)
      for (int h = 0; h < H; ++h) {
         const double ld = Eigen::LDLT<Matrix>(trace.covariance_at(i, h, f)).vectorD().array().log().sum();
         os << trace.snapshot_k[i] << ',' << h + 1 << ',';
         std::snprintf(buf, sizeof buf, "%.17g", ld);
         os << buf << ',';
         if (probes) {
            std::snprintf(buf, sizeof buf, "%.17g", probes->stage[i][h]);
            os << buf;
         }
         os << '\n';
      }
}

// Named dense matrices in one binary file:
//   "MAILMAT1", u32 count, then per matrix: u32 name length, name bytes,
//   u32 rows, u32 cols, rows * cols f64 in row-major order.
// All integers and doubles are little-endian.
using NamedMatrix = std::pair<std::string, Matrix>;

namespace detail {

inline constexpr char kMatrixMagic[8] = {'M', 'A', 'I', 'L', 'M', 'A', 'T', '1'};

inline void put_u32(std::ostream& os, std::uint32_t v)
{
   unsigned char b[4];
   for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
   os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& os, double d)
{
   const auto v = std::bit_cast<std::uint64_t>(d);
   unsigned char b[8];
   for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
   os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_bytes(std::istream& is, int n)
{
   unsigned char b[8] = {};
   if (!is.read(reinterpret_cast<char*>(b), n)) throw DecodeError("matrix container: truncated");
   std::uint64_t v = 0;
   for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
   return v;
}

}  // namespace detail

inline void write_matrices(const std::vector<NamedMatrix>& mats, std::ostream& os)
{
   os.write(detail::kMatrixMagic, 8);
   detail::put_u32(os, static_cast<std::uint32_t>(mats.size()));
   for (const auto& [name, m] : mats) {
      detail::put_u32(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      detail::put_u32(os, static_cast<std::uint32_t>(m.rows()));
      detail::put_u32(os, static_cast<std::uint32_t>(m.cols()));
      for (Eigen::Index i = 0; i < m.rows(); ++i)
         for (Eigen::Index j = 0; j < m.cols(); ++j) detail::put_f64(os, m(i, j));
   }
   if (!os) throw Error("write_matrices: stream error");
}

inline std::vector<NamedMatrix> read_matrices(std::istream& is)
{
   char magic[8];
   if (!is.read(magic, 8) || std::memcmp(magic, detail::kMatrixMagic, 8) != 0)
      throw DecodeError("matrix container: bad magic");
   const auto count = detail::get_bytes(is, 4);
   std::vector<NamedMatrix> out;
   for (std::uint64_t c = 0; c < count; ++c) {
      const auto len = detail::get_bytes(is, 4);
      if (len > (1u << 20)) throw DecodeError("matrix container: name too long");
      std::string name(len, '\0');
      if (!is.read(name.data(), static_cast<std::streamsize>(len))) throw DecodeError("matrix container: truncated");
      const auto rows = static_cast<Eigen::Index>(detail::get_bytes(is, 4));
      const auto cols = static_cast<Eigen::Index>(detail::get_bytes(is, 4));
      Matrix m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
         for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std::bit_cast<double>(detail::get_bytes(is, 8));
      out.emplace_back(std::move(name), std::move(m));
   }
   return out;
}

// Final covariance of every stage as "lambda_h<h>" (1-based).
inline std::vector<NamedMatrix> trace_matrices(const ExplorationTrace& trace)
{
   std::vector<NamedMatrix> out;
   for (int h = 0; h < trace.covariances.horizon(); ++h)
      out.emplace_back("lambda_h" + std::to_string(h + 1), trace.covariances.matrices[h]);
   return out;
}

}  // namespace mail
