#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/objectives.hpp"
#include "sgp/rng.hpp"

namespace sgp {

// Shortest round-trippable decimal form of a double. Used everywhere we
// serialize numbers so output is byte-stable.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

struct ParseResult {
  std::vector<Sample> samples;
  int d = 0;  // inferred (max index + 1) unless expected_d was given
  std::vector<std::string> warnings;
};

// LIBSVM text: each line "label idx:val idx:val ...", 1-based ascending
// indices. Labels +1/-1; 0 tolerated as -1. Indices converted to 0-based.
inline ParseResult parse_libsvm(std::istream& is, int expected_d = -1) {
  ParseResult out;
  std::string line;
  int line_no = 0;
  int max_index = 0;  // 1-based
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    Sample s;
    try {
      const double label = std::stod(tok);
      if (label == 0.0)
        s.label = -1.0;  // some dumps use 0 for the negative class
      else
        s.label = label > 0 ? 1.0 : -1.0;
    } catch (const std::exception&) {
      throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                               ": non-numeric label '" + tok + "'");
    }
    int prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                                 ": malformed feature token '" + tok + "'");
      int index = 0;
      double value = 0.0;
      try {
        index = std::stoi(tok.substr(0, colon));
        value = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                                 ": non-numeric token '" + tok + "'");
      }
      if (index <= 0)
        throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                                 ": index must be positive (1-based)");
      if (index <= prev_index)
        out.warnings.push_back("line " + std::to_string(line_no) +
                               ": non-ascending index " + std::to_string(index));
      if (expected_d >= 0 && index > expected_d)
        throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                                 ": index " + std::to_string(index) +
                                 " exceeds expected dimension " +
                                 std::to_string(expected_d));
      prev_index = std::max(prev_index, index);
      s.features.emplace_back(index - 1, value);
      max_index = std::max(max_index, index);
    }
    out.samples.push_back(std::move(s));
  }
  out.d = expected_d >= 0 ? expected_d : max_index;
  return out;
}

inline std::string to_libsvm(std::span<const Sample> samples) {
  std::ostringstream os;
  for (const auto& s : samples) {
    os << (s.label > 0 ? "+1" : "-1");
    for (const auto& [idx, val] : s.features)
      os << ' ' << (idx + 1) << ':' << format_double(val);
    os << '\n';
  }
  return os.str();
}

// Dataset split across m nodes with n samples each, plus a held-out pool
// (neighbor replacements) and an optional test set.
struct ShardedDataset {
  int d = 0;
  std::vector<std::vector<Sample>> shards;
  std::vector<Sample> pool;
  std::vector<Sample> test;
  // Provenance of each shard/pool entry as a row index into the source list.
  std::vector<std::vector<int>> shard_rows;
  std::vector<int> pool_rows;

  int m() const { return static_cast<int>(shards.size()); }
  int n() const { return shards.empty() ? 0 : static_cast<int>(shards[0].size()); }
};

// Random permutation by seed, first m*n rows dealt round-robin into shards,
// remainder into the held-out pool.
inline ShardedDataset shard(const std::vector<Sample>& dataset, int m, int n,
                            std::uint64_t seed, int d) {
  if (m < 1 || n < 1) throw std::invalid_argument("shard: m and n must be >= 1");
  const long total = static_cast<long>(m) * n;
  if (total > static_cast<long>(dataset.size()))
    throw std::invalid_argument("shard: insufficient samples for m*n");

  std::vector<int> perm(dataset.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed, /*stream=*/0x5a5a);
  for (int i = static_cast<int>(perm.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }

  ShardedDataset out;
  out.d = d;
  out.shards.assign(m, {});
  out.shard_rows.assign(m, {});
  for (long k = 0; k < total; ++k) {
    const int node = static_cast<int>(k % m);
    out.shards[node].push_back(dataset[perm[k]]);
    out.shard_rows[node].push_back(perm[k]);
  }
  for (long k = total; k < static_cast<long>(dataset.size()); ++k) {
    out.pool.push_back(dataset[perm[k]]);
    out.pool_rows.push_back(perm[k]);
  }
  return out;
}

inline std::string shard_manifest_csv(const ShardedDataset& ds) {
  std::ostringstream os;
  os << "shard,source_row\n";
  for (int i = 0; i < ds.m(); ++i)
    for (int row : ds.shard_rows[i]) os << i << ',' << row << '\n';
  for (int row : ds.pool_rows) os << "pool," << row << '\n';
  return os.str();
}

// Synthetic logistic data: unit-sphere features, labels from a planted
// separator with logistic noise controlled by `margin` (larger = cleaner;
// margin -> inf gives the deterministic sign of the planted score).
inline std::vector<Sample> synth_logistic(int d, int count, double margin,
                                          std::uint64_t seed) {
  if (d < 1 || count < 1) throw std::invalid_argument("synth_logistic: d, count >= 1");
  Rng wrng(seed, /*stream=*/0x9137);
  Eigen::VectorXd wstar(d);
  for (int k = 0; k < d; ++k) wstar(k) = wrng.next_gaussian();
  wstar.normalize();

  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(seed, stream_key(0x517e, static_cast<std::uint64_t>(i), 0));
    Eigen::VectorXd a(d);
    for (int k = 0; k < d; ++k) a(k) = rng.next_gaussian();
    a.normalize();
    const double score = margin * wstar.dot(a);
    const double p_pos = sigmoid(score);
    Sample s;
    s.label = rng.next_double() < p_pos ? 1.0 : -1.0;
    s.features.reserve(d);
    for (int k = 0; k < d; ++k)
      if (a(k) != 0.0) s.features.emplace_back(k, a(k));
    out.push_back(std::move(s));
  }
  return out;
}

// Quadratic with exact spectrum endpoints: A = Q diag(alpha..L) Q^T with a
// random orthogonal Q, b standard normal.
inline PLQuadratic synth_pl(int d, double alpha, double L, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("synth_pl: d >= 1");
  if (!(alpha > 0.0) || alpha > L)
    throw std::invalid_argument("synth_pl: need 0 < alpha <= L");
  Rng rng(seed, /*stream=*/0x91);
  Eigen::MatrixXd gauss(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gauss(i, j) = rng.next_gaussian();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  Eigen::VectorXd spec(d);
  for (int k = 0; k < d; ++k)
    spec(k) = d == 1 ? alpha : alpha + (L - alpha) * k / static_cast<double>(d - 1);
  PLQuadratic pl;
  pl.a = q * spec.asDiagonal() * q.transpose();
  pl.a = 0.5 * (pl.a + pl.a.transpose());  // kill asymmetric rounding
  pl.b = Eigen::VectorXd(d);
  for (int k = 0; k < d; ++k) pl.b(k) = rng.next_gaussian();
  return pl;
}

// Mean-zero dense gradient-noise samples for the PL experiments. Generated in
// +/- pairs so the empirical mean is exactly zero.
inline std::vector<Sample> synth_pl_noise(int d, int count, double scale,
                                          std::uint64_t seed) {
  if (count % 2 != 0) throw std::invalid_argument("synth_pl_noise: count must be even");
  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count / 2; ++i) {
    Rng rng(seed, stream_key(0x1401, static_cast<std::uint64_t>(i), 0));
    Sample s, neg;
    for (int k = 0; k < d; ++k) {
      const double v = scale * rng.next_gaussian();
      s.features.emplace_back(k, v);
      neg.features.emplace_back(k, -v);
    }
    out.push_back(std::move(s));
    out.push_back(std::move(neg));
  }
  return out;
}

}  // namespace sgp
