#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fsorelay/experiment.hpp"

namespace {

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int threads = 0;
  std::optional<std::uint64_t> mc_bits;
  std::optional<int> subharmonics;
  std::optional<int> split_step;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "scenario file (key = value)");
  cmd->add_option("--seed", c.seed, "master seed override");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mc-bits", c.mc_bits, "bits per state for bit-level BER (enables it)");
  cmd->add_option("--subharmonics", c.subharmonics, "subharmonic levels in the phase screens")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--split-step", c.split_step, "screens per hop (split-step propagation)")
      ->check(CLI::PositiveNumber);
}

fsorelay::Scenario resolve(const Common& c) {
  fsorelay::Scenario s = c.scenario.empty() ? fsorelay::Scenario{} : fsorelay::load_scenario(c.scenario);
  if (c.seed) s.master_seed = *c.seed;
  if (c.mc_bits) s.mc_bits = *c.mc_bits;
  if (c.subharmonics) s.screens.subharmonics = *c.subharmonics;
  if (c.split_step) s.screens.split_steps = *c.split_step;
  s.validate();
  return s;
}

fsorelay::RunOptions run_options(const Common& c) {
  fsorelay::RunOptions o;
  o.threads = c.threads;
  o.progress = [](const std::string& msg) { std::cerr << "[fsorelay] " << msg << std::endl; };
  return o;
}

void print_written(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

void print_summary(const fsorelay::SweepResult& r) {
  for (const auto& [k, v] : r.summary) std::cout << k << " = " << v << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-hop FSO link with an all-optical few-mode EDFA relay"};
  app.require_subcommand(1);
  Common c;
  auto* ber = app.add_subcommand("ber-sweep", "BER against transmit power for each relay configuration");
  auto* relay = app.add_subcommand("relay-sweep", "BER against transmit power for each relay location");
  auto* mdg = app.add_subcommand("mdg-sweep", "fixed-gain FM relay BER for each mode-dependent gain");
  auto* fading = app.add_subcommand("fading-stats", "relay-input fading histogram and RSD");
  auto* screens = app.add_subcommand("screens", "dump phase screens as float32 files");
  auto* oracle = app.add_subcommand("oracle", "compare the noise budget with the time-domain simulation");
  oracle->group("");
  for (auto* cmd : {ber, relay, mdg, fading, screens, oracle}) add_common(cmd, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const fsorelay::Scenario scn = resolve(c);
    const auto opts = run_options(c);
    const std::filesystem::path out = c.out;
    if (ber->parsed()) {
      const auto r = fsorelay::run_ber_sweep(scn, opts);
      print_summary(r);
      print_written(fsorelay::emit_outputs(r, out, "ber_sweep"));
    } else if (relay->parsed()) {
      const auto r = fsorelay::run_relay_location_sweep(scn, opts);
      print_summary(r);
      print_written(fsorelay::emit_outputs(r, out, "relay_sweep"));
    } else if (mdg->parsed()) {
      const auto r = fsorelay::run_mdg_sweep(scn, opts);
      print_summary(r);
      print_written(fsorelay::emit_outputs(r, out, "mdg_sweep"));
    } else if (fading->parsed()) {
      const auto r = fsorelay::run_fading_stats(scn, opts);
      print_summary(r);
      print_written(fsorelay::emit_outputs(r, out, "fading_stats"));
    } else if (screens->parsed()) {
      print_written(fsorelay::dump_screens(scn, out));
    } else if (oracle->parsed()) {
      const auto rows = fsorelay::run_oracle_check(scn, c.threads, opts.progress);
      std::error_code ec;
      std::filesystem::create_directories(out, ec);
      const auto path = out / "oracle.csv";
      std::ofstream f(path, std::ios::binary);
      if (ec || !f) throw fsorelay::Error(fsorelay::ErrorCode::io_failure, "cannot write " + path.string());
      f << "state,term,closed_form,oracle,se,pass\n";
      int failed = 0;
      for (const auto& row : rows) {
        f << row.state << "," << row.term << "," << fsorelay::format_double(row.closed_form) << ","
          << fsorelay::format_double(row.oracle) << "," << fsorelay::format_double(row.se) << ","
          << (row.pass ? 1 : 0) << "\n";
        failed += row.pass ? 0 : 1;
      }
      f.flush();
      if (!f) throw fsorelay::Error(fsorelay::ErrorCode::io_failure, "write failed for " + path.string());
      std::cout << "terms compared = " << rows.size() << "\nterms outside tolerance = " << failed << "\n"
                << path.string() << "\n";
    }
  } catch (const fsorelay::Error& e) {
    std::cerr << "fsorelay: " << e.what() << "\n";
    return e.code() == fsorelay::ErrorCode::io_failure ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "fsorelay: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
