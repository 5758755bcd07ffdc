// Experiment CLI: sweeps one estimator over an (eps, seed) grid on a
// generated or file-backed workload and writes versioned CSVs.
//
//   fzero comm       --protocol alg1 --workload planted ... --out comm.csv
//   fzero accuracy   --protocol stream2p --workload zipf ... --out acc.csv
//   fzero histograms --file edges.csv --out hist
//
// histograms writes <out>.receivers.csv, <out>.activity.csv, <out>.fit.csv.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fzero/experiments.hpp"

namespace {

struct Opts {
  std::string protocol = "alg1";
  std::string eps_pows = "1..3";
  std::uint32_t seeds = 3;
  std::uint64_t seed0 = 1;
  std::string workload = "zipf";
  std::uint64_t n = 1 << 20;
  std::uint32_t alpha = 8;
  double zipf_s = 1.2;
  double zipf_cz = 4.0;
  std::uint64_t support = 1 << 16;
  std::uint64_t planted_f0 = 10000;
  std::uint64_t planted_c = 0;
  std::string file;
  std::string format = "lines";
  std::uint64_t c_budget = 0;
  std::string out;
};

std::vector<int> parse_pows(const std::string& s) {
  const auto dots = s.find("..");
  int lo = 0, hi = 0;
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoi(s);
    } else {
      lo = std::stoi(s.substr(0, dots));
      hi = std::stoi(s.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw fzero::InvalidSpec("--eps-pows: expected a..b with integers");
  }
  if (lo > hi) throw fzero::InvalidSpec("--eps-pows: need a..b with a <= b");
  std::vector<int> pows;
  for (int p = lo; p <= hi; ++p) pows.push_back(p);
  return pows;
}

fzero::WorkloadSpec build_workload(const Opts& o) {
  fzero::WorkloadSpec w;
  if (o.workload == "zipf") {
    w.kind = fzero::WorkloadKind::kZipf;
  } else if (o.workload == "planted") {
    w.kind = fzero::WorkloadKind::kPlanted;
  } else if (o.workload == "file") {
    w.kind = fzero::WorkloadKind::kFile;
    if (o.file.empty())
      throw fzero::InvalidSpec("--workload file requires --file");
  } else {
    throw fzero::InvalidSpec("unknown workload: " + o.workload);
  }
  w.n = o.n;
  w.alpha = o.alpha;
  w.zipf_s = o.zipf_s;
  w.zipf_cz = o.zipf_cz;
  w.support = o.support;
  w.planted_f0 = o.planted_f0;
  w.planted_c = o.planted_c;
  w.path = o.file;
  w.format = o.format == "binary" ? fzero::StreamFormat::kBinary
                                  : fzero::StreamFormat::kLines;
  return w;
}

fzero::ExperimentConfig build_config(const Opts& o) {
  fzero::ExperimentConfig cfg;
  cfg.protocol = fzero::parse_protocol(o.protocol);
  cfg.eps_pows = parse_pows(o.eps_pows);
  cfg.seeds = o.seeds;
  cfg.seed0 = o.seed0;
  cfg.workload = build_workload(o);
  cfg.c_budget = o.c_budget;
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fzero::Error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw fzero::Error("write failed: " + path);
  std::cout << "wrote " << path << " (" << content.size() << " bytes)\n";
}

void add_experiment_flags(CLI::App* sub, Opts& o) {
  sub->add_option("--protocol", o.protocol,
                  "estimator to run")
      ->check(CLI::IsMember({"const4", "alg1", "alg2", "dup", "stream1p",
                             "stream2p", "stream2ps"}))
      ->capture_default_str();
  sub->add_option("--eps-pows", o.eps_pows, "eps = 2^-p for p in a..b")
      ->capture_default_str();
  sub->add_option("--seeds", o.seeds, "trials per eps")
      ->capture_default_str();
  sub->add_option("--seed", o.seed0, "first seed")->capture_default_str();
  sub->add_option("--workload", o.workload, "input workload")
      ->check(CLI::IsMember({"zipf", "planted", "file"}))
      ->capture_default_str();
  sub->add_option("--n", o.n, "universe size")->capture_default_str();
  sub->add_option("--alpha", o.alpha, "number of servers")
      ->capture_default_str();
  sub->add_option("--zipf-s", o.zipf_s, "zipf decay exponent")
      ->capture_default_str();
  sub->add_option("--zipf-cz", o.zipf_cz, "zipf leading constant")
      ->capture_default_str();
  sub->add_option("--support", o.support, "zipf distinct items")
      ->capture_default_str();
  sub->add_option("--planted-f0", o.planted_f0, "planted distinct items")
      ->capture_default_str();
  sub->add_option("--planted-c", o.planted_c, "planted duplicated items")
      ->capture_default_str();
  sub->add_option("--file", o.file, "file workload path");
  sub->add_option("--format", o.format, "stream file format")
      ->check(CLI::IsMember({"lines", "binary"}))
      ->capture_default_str();
  sub->add_option("--c-budget", o.c_budget,
                  "collision budget (0 = oracle value)")
      ->capture_default_str();
  sub->add_option("--out", o.out, "output CSV path")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distinct-element estimation experiment runner"};
  app.require_subcommand(1);
  Opts o;

  CLI::App* comm =
      app.add_subcommand("comm", "communication vs eps sweep (coordinator "
                                 "protocols)");
  add_experiment_flags(comm, o);
  CLI::App* accuracy =
      app.add_subcommand("accuracy", "accuracy vs eps sweep with per-eps "
                                     "median summary rows");
  add_experiment_flags(accuracy, o);
  CLI::App* histograms = app.add_subcommand(
      "histograms", "rank/count histograms and power-law fit of an edge CSV");
  histograms->add_option("--file", o.file, "edge CSV path")->required();
  histograms->add_option("--out", o.out, "output prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (comm->parsed()) {
      write_file(o.out, fzero::run_comm_vs_eps(build_config(o)));
    } else if (accuracy->parsed()) {
      write_file(o.out, fzero::run_accuracy_vs_eps(build_config(o)));
    } else if (histograms->parsed()) {
      fzero::WorkloadSpec w;
      w.kind = fzero::WorkloadKind::kFile;
      w.path = o.file;
      const fzero::HistogramOutputs h = fzero::run_histograms(w);
      write_file(o.out + ".receivers.csv", h.receivers_csv);
      write_file(o.out + ".activity.csv", h.activity_csv);
      write_file(o.out + ".fit.csv", h.fit_csv);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
