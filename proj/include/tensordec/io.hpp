// SPDX-License-Identifier: Apache-2.0
// Text containers for tensors, models, and masks. The exact grammar lives in
// docs/FORMATS.md; every float is written as printf "%.17g" so values
// round-trip bit-exactly and files are byte-stable for a given input.
#pragma once

#include "tensordec/cp.hpp"
#include "tensordec/lrat.hpp"
#include "tensordec/tucker.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tensordec::io {

inline std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(std::string("unexpected end of file reading ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline double parse_double(const std::string& s, const char* what) {
  const char* p = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(p, &end);
  if (end == p || end != p + s.size()) {
    throw std::runtime_error(std::string("bad ") + what + " value '" + s + "'");
  }
  return v;
}

inline void expect(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

inline void write_values(std::ostream& out, const double* data, Index n) {
  for (Index i = 0; i < n; ++i) out << g17(data[i]) << '\n';
}

inline void read_values(std::istream& in, double* data, Index n, const char* what) {
  for (Index i = 0; i < n; ++i) data[i] = parse_double(next_line(in, what), what);
}

}  // namespace detail

// --------------------------------------------------------------------------
// Tensor container.

inline void write_tensor(std::ostream& out, const DenseTensor3& t) {
  const auto d = t.dims();
  out << "tensordec-tensor v1\norder 3\ndims " << d[0] << ' ' << d[1] << ' ' << d[2]
      << "\nlayout mode1-colmajor\n";
  detail::write_values(out, t.data().data(), t.size());
}

inline DenseTensor3 read_tensor(std::istream& in) {
  detail::expect(detail::next_line(in, "tensor header") == "tensordec-tensor v1",
                 "not a tensordec-tensor v1 file");
  detail::expect(detail::next_line(in, "tensor order") == "order 3", "expected 'order 3'");
  const auto dims = detail::tokens(detail::next_line(in, "tensor dims"));
  detail::expect(dims.size() == 4 && dims[0] == "dims", "expected 'dims I J K'");
  const Index i = std::stoll(dims[1]), j = std::stoll(dims[2]), k = std::stoll(dims[3]);
  detail::expect(detail::next_line(in, "tensor layout") == "layout mode1-colmajor",
                 "expected 'layout mode1-colmajor'");
  DenseTensor3 t(i, j, k);
  detail::read_values(in, t.data().data(), t.size(), "tensor entry");
  return t;
}

// Plain-text interchange: one line per entry, "i,j,k,value", 0-based indices
// in layout order. The reader sizes the tensor from the largest index seen.
inline void write_tensor_entries(std::ostream& out, const DenseTensor3& t) {
  const auto d = t.dims();
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i)
        out << i << ',' << j << ',' << k << ',' << g17(t(i, j, k)) << '\n';
}

inline DenseTensor3 read_tensor_entries(std::istream& in) {
  struct Entry {
    Index i, j, k;
    double v;
  };
  std::vector<Entry> entries;
  Index mi = 0, mj = 0, mk = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 4> f;
    std::size_t pos = 0;
    for (int c = 0; c < 4; ++c) {
      const std::size_t comma = line.find(',', pos);
      if (c < 3) {
        detail::expect(comma != std::string::npos,
                       "line " + std::to_string(line_no) + ": expected i,j,k,value");
        f[static_cast<std::size_t>(c)] = line.substr(pos, comma - pos);
        pos = comma + 1;
      } else {
        f[3] = line.substr(pos);
      }
    }
    Entry e{std::stoll(f[0]), std::stoll(f[1]), std::stoll(f[2]),
            detail::parse_double(f[3], "entry")};
    detail::expect(e.i >= 0 && e.j >= 0 && e.k >= 0,
                   "line " + std::to_string(line_no) + ": negative index");
    mi = std::max(mi, e.i);
    mj = std::max(mj, e.j);
    mk = std::max(mk, e.k);
    entries.push_back(e);
  }
  detail::expect(!entries.empty(), "interchange file has no entries");
  DenseTensor3 t(mi + 1, mj + 1, mk + 1);
  for (const auto& e : entries) t(e.i, e.j, e.k) = e.v;
  return t;
}

// --------------------------------------------------------------------------
// Observation mask.

inline void write_mask(std::ostream& out, const ObservationMask& m) {
  const auto d = m.dims();
  out << "tensordec-mask v1\ndims " << d[0] << ' ' << d[1] << ' ' << d[2] << '\n';
  if (m.count_observed() == m.size()) {
    out << "all\n";
    return;
  }
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i)
        if (m(i, j, k)) out << i << ',' << j << ',' << k << '\n';
}

inline ObservationMask read_mask(std::istream& in) {
  detail::expect(detail::next_line(in, "mask header") == "tensordec-mask v1",
                 "not a tensordec-mask v1 file");
  const auto dims = detail::tokens(detail::next_line(in, "mask dims"));
  detail::expect(dims.size() == 4 && dims[0] == "dims", "expected 'dims I J K'");
  ObservationMask m(std::stoll(dims[1]), std::stoll(dims[2]), std::stoll(dims[3]), false);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line == "all") return ObservationMask::all_observed(m.dims());
    first = false;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    detail::expect(c1 != std::string::npos && c2 != std::string::npos, "expected 'i,j,k' mask line");
    m.set(std::stoll(line.substr(0, c1)), std::stoll(line.substr(c1 + 1, c2 - c1 - 1)),
          std::stoll(line.substr(c2 + 1)), true);
  }
  return m;
}

// --------------------------------------------------------------------------
// Model containers. Factors are stored column-major.

inline void write_cp_model(std::ostream& out, const CPModel& m) {
  m.validate();
  const auto d = m.dims();
  out << "tensordec-cpmodel v1\nrank " << m.rank() << "\ndims " << d[0] << ' ' << d[1] << ' '
      << d[2] << '\n';
  detail::write_values(out, m.weights.data(), m.weights.size());
  detail::write_values(out, m.A.data(), m.A.size());
  detail::write_values(out, m.B.data(), m.B.size());
  detail::write_values(out, m.C.data(), m.C.size());
}

inline CPModel read_cp_model(std::istream& in) {
  detail::expect(detail::next_line(in, "model header") == "tensordec-cpmodel v1",
                 "not a tensordec-cpmodel v1 file");
  const auto rank_line = detail::tokens(detail::next_line(in, "model rank"));
  detail::expect(rank_line.size() == 2 && rank_line[0] == "rank", "expected 'rank R'");
  const Index r = std::stoll(rank_line[1]);
  const auto dims = detail::tokens(detail::next_line(in, "model dims"));
  detail::expect(dims.size() == 4 && dims[0] == "dims", "expected 'dims I J K'");
  CPModel m;
  m.weights.resize(r);
  m.A.resize(std::stoll(dims[1]), r);
  m.B.resize(std::stoll(dims[2]), r);
  m.C.resize(std::stoll(dims[3]), r);
  detail::read_values(in, m.weights.data(), m.weights.size(), "weight");
  detail::read_values(in, m.A.data(), m.A.size(), "factor A entry");
  detail::read_values(in, m.B.data(), m.B.size(), "factor B entry");
  detail::read_values(in, m.C.data(), m.C.size(), "factor C entry");
  m.validate();
  return m;
}

inline void write_tucker_model(std::ostream& out, const TuckerModel& m) {
  const auto r = m.ranks();
  const auto d = m.dims();
  out << "tensordec-tucker v1\nranks " << r[0] << ' ' << r[1] << ' ' << r[2] << "\ndims " << d[0]
      << ' ' << d[1] << ' ' << d[2] << '\n';
  detail::write_values(out, m.core.data().data(), m.core.size());
  for (const auto& u : m.factors) detail::write_values(out, u.data(), u.size());
}

inline TuckerModel read_tucker_model(std::istream& in) {
  detail::expect(detail::next_line(in, "model header") == "tensordec-tucker v1",
                 "not a tensordec-tucker v1 file");
  const auto ranks = detail::tokens(detail::next_line(in, "model ranks"));
  detail::expect(ranks.size() == 4 && ranks[0] == "ranks", "expected 'ranks R1 R2 R3'");
  const auto dims = detail::tokens(detail::next_line(in, "model dims"));
  detail::expect(dims.size() == 4 && dims[0] == "dims", "expected 'dims I J K'");
  TuckerModel m;
  m.core = DenseTensor3(std::stoll(ranks[1]), std::stoll(ranks[2]), std::stoll(ranks[3]));
  detail::read_values(in, m.core.data().data(), m.core.size(), "core entry");
  for (int n = 0; n < 3; ++n) {
    m.factors[static_cast<std::size_t>(n)].resize(std::stoll(dims[static_cast<std::size_t>(n) + 1]),
                                                  std::stoll(ranks[static_cast<std::size_t>(n) + 1]));
    detail::read_values(in, m.factors[static_cast<std::size_t>(n)].data(),
                        m.factors[static_cast<std::size_t>(n)].size(), "factor entry");
  }
  return m;
}

// --------------------------------------------------------------------------
// Fit traces. The error trace is deterministic for a fixed seed; wall times
// go to their own file so reruns stay byte-identical.

inline void write_trace_csv(std::ostream& out, const FitTrace& trace) {
  out << "iter,relative_error\n";
  for (std::size_t i = 0; i < trace.relative_errors.size(); ++i)
    out << (i + 1) << ',' << g17(trace.relative_errors[i]) << '\n';
}

inline void write_timing_csv(std::ostream& out, const FitTrace& trace) {
  out << "iter,seconds\n";
  for (std::size_t i = 0; i < trace.wall_times.size(); ++i)
    out << (i + 1) << ',' << g17(trace.wall_times[i]) << '\n';
}

// --------------------------------------------------------------------------
// File convenience wrappers.

template <typename T, typename Reader>
T read_file(const std::string& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return reader(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

template <typename Writer>
void write_file(const std::string& path, Writer writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  writer(out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline DenseTensor3 load_tensor(const std::string& path) {
  return read_file<DenseTensor3>(path, [](std::istream& in) { return read_tensor(in); });
}
inline void save_tensor(const std::string& path, const DenseTensor3& t) {
  write_file(path, [&](std::ostream& out) { write_tensor(out, t); });
}
inline ObservationMask load_mask(const std::string& path) {
  return read_file<ObservationMask>(path, [](std::istream& in) { return read_mask(in); });
}
inline void save_mask(const std::string& path, const ObservationMask& m) {
  write_file(path, [&](std::ostream& out) { write_mask(out, m); });
}
inline CPModel load_cp_model(const std::string& path) {
  return read_file<CPModel>(path, [](std::istream& in) { return read_cp_model(in); });
}
inline void save_cp_model(const std::string& path, const CPModel& m) {
  write_file(path, [&](std::ostream& out) { write_cp_model(out, m); });
}
inline TuckerModel load_tucker_model(const std::string& path) {
  return read_file<TuckerModel>(path, [](std::istream& in) { return read_tucker_model(in); });
}
inline void save_tucker_model(const std::string& path, const TuckerModel& m) {
  write_file(path, [&](std::ostream& out) { write_tucker_model(out, m); });
}

}  // namespace tensordec::io
