#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fzero/dataset.hpp"
#include "fzero/errors.hpp"
#include "fzero/protocols.hpp"
#include "fzero/stream_io.hpp"
#include "fzero/streaming.hpp"
#include "fzero/workloads.hpp"

// Batch experiment runner: sweeps (eps, seed) grids over one selected
// estimator and emits versioned CSV for external plotting.  No plotting
// happens in-process.

namespace fzero {

enum class Protocol {
  kConst4,    // constant-factor distributed estimate
  kAlg1,      // eps-approximate distributed estimate
  kAlg2,      // collision-budgeted distributed estimate
  kDup,       // distributed duplication estimate
  kStream1p,  // one-pass robust streaming estimate
  kStream2p,  // two-pass level-set streaming estimate (collision-budgeted)
  kStream2ps  // two-pass level-set streaming estimate (small-budget variant)
};

inline const char* protocol_token(Protocol p) {
  switch (p) {
    case Protocol::kConst4: return "const4";
    case Protocol::kAlg1: return "alg1";
    case Protocol::kAlg2: return "alg2";
    case Protocol::kDup: return "dup";
    case Protocol::kStream1p: return "stream1p";
    case Protocol::kStream2p: return "stream2p";
    case Protocol::kStream2ps: return "stream2ps";
  }
  return "?";
}

inline Protocol parse_protocol(std::string_view tok) {
  for (Protocol p : {Protocol::kConst4, Protocol::kAlg1, Protocol::kAlg2,
                     Protocol::kDup, Protocol::kStream1p, Protocol::kStream2p,
                     Protocol::kStream2ps})
    if (tok == protocol_token(p)) return p;
  throw InvalidSpec("unknown protocol: " + std::string(tok));
}

// Coordinator protocols consume a sharded dataset and charge a ledger;
// streaming ones consume a flat stream and send nothing.
inline bool runs_on_coordinator(Protocol p) {
  switch (p) {
    case Protocol::kConst4:
    case Protocol::kAlg1:
    case Protocol::kAlg2:
    case Protocol::kDup:
      return true;
    default:
      return false;
  }
}

enum class WorkloadKind { kZipf, kPlanted, kFile };
enum class StreamFormat { kLines, kBinary };

inline const char* workload_token(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kZipf: return "zipf";
    case WorkloadKind::kPlanted: return "planted";
    case WorkloadKind::kFile: return "file";
  }
  return "?";
}

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kZipf;
  std::uint64_t n = 1 << 20;      // universe size (zipf/planted)
  std::uint32_t alpha = 8;        // servers (zipf/planted)
  double zipf_s = 1.2;            // zipf decay exponent
  double zipf_cz = 4.0;           // zipf leading constant
  std::uint64_t support = 1 << 16;  // zipf distinct items
  std::uint64_t planted_f0 = 10000;
  std::uint64_t planted_c = 0;
  std::string path;               // file workload: edge CSV or id stream
  StreamFormat format = StreamFormat::kLines;
};

// The run seed drives both workload generation and estimator randomness,
// so each seed is an independent end-to-end trial.  File workloads ignore
// the seed (the data is fixed).
inline Dataset realize_dataset(const WorkloadSpec& w, std::uint64_t seed) {
  switch (w.kind) {
    case WorkloadKind::kZipf: {
      ZipfSpec z;
      z.s = w.zipf_s;
      z.c_z = w.zipf_cz;
      z.support = w.support;
      z.n = w.n;
      z.alpha = w.alpha;
      z.seed = seed;
      return gen_zipfian_dataset(z);
    }
    case WorkloadKind::kPlanted:
      return gen_planted({w.planted_f0, w.planted_c, w.alpha}, w.n, seed);
    case WorkloadKind::kFile:
      if (w.path.empty()) throw InvalidSpec("file workload needs a path");
      return partition_by_receiver(load_edges(w.path));
  }
  throw InvalidSpec("unknown workload kind");
}

// Stream view of a workload: for generated workloads, the shards flattened
// in server order (so a dataset item held by h servers appears h times);
// for file workloads, the raw id stream in the selected format.
inline std::vector<std::uint64_t> realize_stream(const WorkloadSpec& w,
                                                 std::uint64_t seed) {
  if (w.kind == WorkloadKind::kFile) {
    if (w.path.empty()) throw InvalidSpec("file workload needs a path");
    return w.format == StreamFormat::kBinary ? load_stream_binary(w.path)
                                             : load_stream_lines(w.path);
  }
  const Dataset ds = realize_dataset(w, seed);
  std::vector<std::uint64_t> stream;
  std::size_t total = 0;
  for (const auto& shard : ds.shards) total += shard.size();
  stream.reserve(total);
  for (const auto& shard : ds.shards)
    stream.insert(stream.end(), shard.begin(), shard.end());
  return stream;
}

inline GroundTruth stream_ground_truth(std::span<const std::uint64_t> stream) {
  std::unordered_map<std::uint64_t, std::uint64_t> freq;
  for (std::uint64_t x : stream) ++freq[x];
  GroundTruth gt;
  gt.f0 = freq.size();
  gt.f1 = stream.size();
  for (const auto& [id, f] : freq) {
    gt.excess_mass += f - 1;
    gt.pairwise_collisions += f * (f - 1) / 2;
    ++gt.multiplicity_histogram[f];
  }
  return gt;
}

// Number of items appearing at least twice (the quantity the duplication
// protocol targets, and the collision budget the streaming variants take).
inline std::uint64_t duplicated_items(const GroundTruth& gt) {
  std::uint64_t d = 0;
  for (const auto& [mult, cnt] : gt.multiplicity_histogram)
    if (mult >= 2) d += cnt;
  return d;
}

struct ExperimentConfig {
  Protocol protocol = Protocol::kAlg1;
  std::vector<int> eps_pows = {1, 2, 3};  // eps = 2^-p per entry
  std::uint32_t seeds = 3;                // trials per eps
  std::uint64_t seed0 = 1;                // first seed; trials use seed0..+seeds-1
  WorkloadSpec workload;
  // Collision budget handed to the estimator; 0 means "use the oracle":
  // pairwise collisions for alg2, duplicated-item count for dup and the
  // streaming variants.  stream1p always receives the oracle distinct count
  // as its hint.
  std::uint64_t c_budget = 0;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.seeds == 0) throw InvalidSpec("seeds must be >= 1");
  if (cfg.eps_pows.empty()) throw InvalidSpec("need at least one eps");
  for (int p : cfg.eps_pows)
    if (p < 0 || p > 62)
      throw InvalidSpec("eps pow out of range [0, 62]: " + std::to_string(p));
}

// One (eps, seed) trial.  `truth` is the estimator's target quantity: the
// distinct count for every F0 estimator, the duplicated-item count for dup —
// the f0_true CSV column carries it either way.  rel_err divides by
// max(truth, 1) so planted-zero targets stay finite.
struct RunRow {
  Protocol protocol = Protocol::kAlg1;
  double eps = 0.0;
  std::uint64_t c_effective = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double rel_err = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t rounds = 0;
  double baseline_bits = 0.0;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

inline double relative_error(double estimate, double truth) {
  return std::abs(estimate - truth) / std::max(truth, 1.0);
}

inline RunRow run_coordinator_once(const ExperimentConfig& cfg,
                                   const Dataset& ds, const GroundTruth& gt,
                                   double eps, std::uint64_t seed) {
  SimNetwork net(ds, seed);
  ProtocolResult pr;
  double truth = static_cast<double>(gt.f0);
  std::uint64_t c_eff = 0;
  switch (cfg.protocol) {
    case Protocol::kConst4:
      pr = constant_factor_f0(net);
      break;
    case Protocol::kAlg1:
      pr = eps_approx_f0(net, eps);
      break;
    case Protocol::kAlg2:
      c_eff = cfg.c_budget ? cfg.c_budget : gt.pairwise_collisions;
      pr = collision_bounded_f0(net, eps, c_eff);
      break;
    case Protocol::kDup:
      c_eff = cfg.c_budget ? cfg.c_budget : duplicated_items(gt);
      truth = static_cast<double>(duplicated_items(gt));
      pr = duplication_estimate(net, eps, c_eff);
      break;
    default:
      throw InvalidSpec("not a coordinator protocol");
  }
  RunRow row;
  row.protocol = cfg.protocol;
  row.eps = eps;
  row.c_effective = c_eff;
  row.seed = seed;
  row.estimate = pr.estimate;
  row.truth = truth;
  row.rel_err = relative_error(pr.estimate, truth);
  row.bits = pr.bits_used;
  row.rounds = pr.rounds;
  // Comparator: the textbook protocol's alpha*(c0/eps^2 + c0*log2 n) bits
  // with c0 = 1.
  row.baseline_bits =
      static_cast<double>(ds.alpha()) *
      (1.0 / (eps * eps) + std::log2(static_cast<double>(ds.n)));
  return row;
}

inline RunRow run_stream_once(const ExperimentConfig& cfg,
                              std::span<const std::uint64_t> stream,
                              const GroundTruth& gt, std::uint64_t universe,
                              double eps, std::uint64_t seed) {
  RunRow row;
  row.protocol = cfg.protocol;
  row.eps = eps;
  row.seed = seed;
  row.truth = static_cast<double>(gt.f0);
  switch (cfg.protocol) {
    case Protocol::kStream1p: {
      row.c_effective = cfg.c_budget ? cfg.c_budget : duplicated_items(gt);
      const OnePassResult r = one_pass_f0_robust(
          stream, eps, row.c_effective, static_cast<double>(gt.f0), seed);
      row.estimate = r.estimate;
      row.rounds = 1;
      break;
    }
    case Protocol::kStream2p: {
      row.c_effective = cfg.c_budget ? cfg.c_budget : duplicated_items(gt);
      const TwoPassResult r =
          two_pass_f0(stream, stream, eps, row.c_effective, universe, seed);
      row.estimate = r.estimate;
      row.rounds = 2;
      break;
    }
    case Protocol::kStream2ps: {
      const TwoPassResult r =
          two_pass_f0_small(stream, stream, eps, universe, seed);
      row.estimate = r.estimate;
      row.rounds = 2;
      break;
    }
    default:
      throw InvalidSpec("not a streaming protocol");
  }
  row.rel_err = relative_error(row.estimate, row.truth);
  return row;
}

inline std::vector<RunRow> run_rows(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::vector<double> eps_list;
  eps_list.reserve(cfg.eps_pows.size());
  for (int p : cfg.eps_pows) eps_list.push_back(std::ldexp(1.0, -p));
  std::sort(eps_list.begin(), eps_list.end());

  std::vector<RunRow> rows;
  rows.reserve(eps_list.size() * cfg.seeds);
  const bool coord = runs_on_coordinator(cfg.protocol);
  for (std::uint32_t k = 0; k < cfg.seeds; ++k) {
    const std::uint64_t seed = cfg.seed0 + k;
    if (coord) {
      const Dataset ds = realize_dataset(cfg.workload, seed);
      const GroundTruth gt = ground_truth(ds);
      for (double eps : eps_list)
        rows.push_back(run_coordinator_once(cfg, ds, gt, eps, seed));
    } else {
      const std::vector<std::uint64_t> stream =
          realize_stream(cfg.workload, seed);
      const GroundTruth gt = stream_ground_truth(stream);
      std::uint64_t universe = cfg.workload.n;
      if (cfg.workload.kind == WorkloadKind::kFile)
        universe =
            *std::max_element(stream.begin(), stream.end()) + 1;
      for (double eps : eps_list)
        rows.push_back(run_stream_once(cfg, stream, gt, universe, eps, seed));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    if (a.eps != b.eps) return a.eps < b.eps;
    return a.seed < b.seed;
  });
  return rows;
}

inline void append_row_common(std::string& out, const RunRow& r) {
  out += protocol_token(r.protocol);
  out += ',';
  out += fmt_double(r.eps);
  out += ',';
  out += std::to_string(r.c_effective);
  out += ',';
  out += std::to_string(r.seed);
  out += ',';
  out += fmt_double(r.estimate);
  out += ',';
  out += fmt_double(r.truth);
  out += ',';
  out += fmt_double(r.rel_err);
  out += ',';
  out += std::to_string(r.bits);
  out += ',';
  out += std::to_string(r.rounds);
}

}  // namespace detail

// Communication sweep: one data row per (eps, seed) with the measured ledger
// bits next to the baseline formula column.  Coordinator protocols only.
inline std::string run_comm_vs_eps(const ExperimentConfig& cfg) {
  if (!runs_on_coordinator(cfg.protocol))
    throw InvalidSpec("comm experiment requires a coordinator protocol");
  const std::vector<RunRow> rows = detail::run_rows(cfg);
  std::string out =
      "# schema=comm.v1 c0=1 baseline_bits=alpha*(c0/eps^2+c0*log2(n))\n"
      "protocol,eps,c_budget,seed,estimate,f0_true,rel_err,bits,rounds,"
      "baseline_bits\n";
  for (const RunRow& r : rows) {
    detail::append_row_common(out, r);
    out += ',';
    out += detail::fmt_double(r.baseline_bits);
    out += '\n';
  }
  return out;
}

// Accuracy sweep: the same data rows (bits column included for
// cross-checking) plus one summary row per eps holding the per-column
// medians; its protocol cell is "<name>:median" and its seed cell is the
// number of trials summarized.
inline std::string run_accuracy_vs_eps(const ExperimentConfig& cfg) {
  const std::vector<RunRow> rows = detail::run_rows(cfg);
  std::string out =
      "# schema=accuracy.v1\n"
      "protocol,eps,c_budget,seed,estimate,f0_true,rel_err,bits,rounds\n";
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].eps == rows[i].eps) ++j;
    std::vector<double> est, truth, rel, bits, rounds, c_eff;
    for (std::size_t k = i; k < j; ++k) {
      detail::append_row_common(out, rows[k]);
      out += '\n';
      est.push_back(rows[k].estimate);
      truth.push_back(rows[k].truth);
      rel.push_back(rows[k].rel_err);
      bits.push_back(static_cast<double>(rows[k].bits));
      rounds.push_back(static_cast<double>(rows[k].rounds));
      c_eff.push_back(static_cast<double>(rows[k].c_effective));
    }
    out += protocol_token(cfg.protocol);
    out += ":median,";
    out += detail::fmt_double(rows[i].eps);
    out += ',';
    out += detail::fmt_double(detail::median_of(c_eff));
    out += ',';
    out += std::to_string(j - i);
    out += ',';
    out += detail::fmt_double(detail::median_of(est));
    out += ',';
    out += detail::fmt_double(detail::median_of(truth));
    out += ',';
    out += detail::fmt_double(detail::median_of(rel));
    out += ',';
    out += detail::fmt_double(detail::median_of(bits));
    out += ',';
    out += detail::fmt_double(detail::median_of(rounds));
    out += '\n';
    i = j;
  }
  return out;
}

struct HistogramOutputs {
  std::string receivers_csv;  // distinct senders per receiver, rank order
  std::string activity_csv;   // interactions per sender, busiest receiver
  std::string fit_csv;        // fitted (s, c_z) of the receiver histogram
};

namespace detail {
inline std::string hist_csv(const char* kind,
                            std::span<const std::uint64_t> counts) {
  std::string out = "# schema=hist.v1 kind=";
  out += kind;
  out += "\nrank,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += std::to_string(counts[i]);
    out += '\n';
  }
  return out;
}
}  // namespace detail

inline HistogramOutputs run_histograms(const WorkloadSpec& w) {
  if (w.kind != WorkloadKind::kFile)
    throw InvalidSpec("histograms require a file workload");
  const std::vector<EdgeRecord> edges = load_edges(w.path);
  const std::vector<std::uint64_t> recv = receiver_histogram(edges);
  const std::vector<std::uint64_t> act = activity_histogram(edges);
  HistogramOutputs out;
  out.receivers_csv = detail::hist_csv("receivers", recv);
  out.activity_csv = detail::hist_csv("activity", act);
  const std::vector<double> counts(recv.begin(), recv.end());
  const ZipfFit fit = fit_zipf(counts);
  out.fit_csv = "# schema=fit.v1\ns,c_z\n" + detail::fmt_double(fit.s) + "," +
                detail::fmt_double(fit.c_z) + "\n";
  return out;
}

}  // namespace fzero
