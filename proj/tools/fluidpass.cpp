// fluidpass: first-passage-time distributions of Markov-modulated fluid
// queues, by direct PDE integration, Laplace-transform inversion, or Monte
// Carlo simulation.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "fluidpass/runner.hpp"

namespace {

fluidpass::RunConfig load_config(const std::string& path) {
  const auto j = fluidpass::detail::load_json(path);
  const std::string base = std::filesystem::path(path).parent_path().string();
  return fluidpass::detail::parse_config(j, base.empty() ? "." : base);
}

int do_run(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = load_config(config_path);
  const auto files = fluidpass::run(cfg, out_dir);
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
  return 0;
}

int do_compare(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  for (double x : cfg.x_values) {
    const auto rep = fluidpass::compare(cfg, x);
    std::printf("# x = %g, baseline = %s, jump window = %g\n", x,
                fluidpass::scheme_name(rep.baseline), rep.window);
    std::printf("%-16s %12s %12s\n", "scheme", "sup_error", "seconds");
    for (const auto& row : rep.rows) {
      if (row.lst_failed)
        std::printf("%-16s %12s %12s  (%s)\n", fluidpass::scheme_name(row.scheme),
                    "-", "-", row.lst_diagnostic.c_str());
      else
        std::printf("%-16s %12.3e %12.3f\n", fluidpass::scheme_name(row.scheme),
                    row.sup_error, row.wall_seconds);
    }
    std::printf("t,baseline");
    for (const auto& row : rep.rows)
      std::printf(",err_%s", fluidpass::scheme_name(row.scheme));
    std::printf("\n");
    for (size_t i = 0; i < rep.times.size(); ++i) {
      std::printf("%.10g,%.10g", rep.times[i], rep.baseline_values[i]);
      for (const auto& row : rep.rows)
        std::printf(",%.10g", row.lst_failed ? 0.0 : row.errors[i]);
      std::printf("\n");
    }
  }
  return 0;
}

int do_bench(const std::string& suite, double scale) {
  const auto rows = fluidpass::bench(suite, scale);
  std::printf("%-16s %8s %12s\n", "scheme", "dx", "seconds");
  for (const auto& row : rows) {
    if (row.failed)
      std::printf("%-16s %8.3g %12s  (%s)\n", fluidpass::scheme_name(row.scheme),
                  row.dx, "-", row.note.c_str());
    else
      std::printf("%-16s %8.3g %12.3f\n", fluidpass::scheme_name(row.scheme),
                  row.dx, row.wall_seconds);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-passage-time solver for Markov-modulated fluid queues"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", suite;
  double scale = 1.0;

  auto* run_cmd = app.add_subcommand("run", "Compute a passage CDF and write CSV output");
  run_cmd->add_option("--config", config_path, "JSON config file")->required();
  run_cmd->add_option("--output", out_dir, "Output directory (default: .)");

  auto* cmp_cmd = app.add_subcommand("compare", "Run several schemes and report errors");
  cmp_cmd->add_option("--config", config_path, "JSON config file")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Time every scheme on a named suite");
  bench_cmd->add_option("--suite", suite, "example1 | example2 | example3 | example4")
      ->required();
  bench_cmd->add_option("--scale", scale, "State-count scale factor (default 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(config_path, out_dir);
    if (cmp_cmd->parsed()) return do_compare(config_path);
    return do_bench(suite, scale);
  } catch (const fluidpass::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", fluidpass::error_name(e.code()), e.what());
    return fluidpass::exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
