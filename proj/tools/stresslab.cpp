#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stresslab/stresslab.hpp"

namespace {

using namespace stresslab;

int cmd_run(const std::string& path, const std::string& out, int resolution, int threads) {
  RunOptions opt;
  if (!out.empty()) {
    opt.out_dir = out;
  } else if (const char* env = std::getenv("STRESSLAB_OUT_DIR"); env && *env) {
    opt.out_dir = env;
  } else {
    opt.out_dir = "reports";
  }
  if (resolution > 0) opt.resolution = resolution;
  if (threads > 0) opt.threads = threads;
  const ScenarioOutcome res = run_scenario_file(path, opt);
  if (res.exit_code == 2) {
    std::cerr << "config error: " << res.message << "\n";
    return 2;
  }
  std::cout << res.id << " [" << res.kind << "]: " << res.message << "\n"
            << "  report: " << res.json_path.string() << "\n"
            << "  table:  " << res.csv_path.string() << "\n";
  return res.exit_code;
}

int cmd_list(bool as_json) {
  const json cat = {{"charts", chart_ids()},
                    {"immersions", immersion_ids()},
                    {"forms", form_ids()},
                    {"exhaustions", {"euclidean", "ellipsoid", "complex-ellipsoid", "radial", "extrinsic"}},
                    {"kinds", scenario_kinds()}};
  if (as_json) {
    std::cout << cat.dump(2) << "\n";
    return 0;
  }
  for (auto it = cat.begin(); it != cat.end(); ++it) {
    std::cout << it.key() << ":\n";
    for (const auto& v : it.value()) std::cout << "  " << v.get<std::string>() << "\n";
  }
  return 0;
}

int cmd_schema(const std::string& kind) {
  if (kind == "report") {
    std::cout << schema::report().dump(2) << "\n";
    return 0;
  }
  try {
    std::cout << schema::config(kind).dump(2) << "\n";
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_profile(const std::string& id, double dr, const std::string& out) {
  try {
    const WarpedChart wc = make_warped_catalog_chart(id);
    const std::string csv = wc.profile->csv(dr);
    if (out.empty()) std::cout << csv;
    else write_atomic(out, csv);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for stress-energy tensors and monotonicity formulae"};
  app.require_subcommand(1);

  std::string scenario, out;
  int resolution = 0, threads = 0;
  auto* run = app.add_subcommand("run", "Run one scenario file");
  run->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (default $STRESSLAB_OUT_DIR or ./reports)");
  run->add_option("--resolution", resolution, "Quadrature resolution override")->check(CLI::Range(16, 4096));
  run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

  bool as_json = false;
  auto* list = app.add_subcommand("list-catalog", "List catalog IDs");
  list->add_flag("--json", as_json, "Print as JSON");

  std::string kind;
  auto* sch = app.add_subcommand("schema", "Print the JSON schema of a scenario kind, or 'report'");
  sch->add_option("kind", kind)->required();

  std::string profile_id, profile_out;
  double dr = 0.01;
  auto* prof = app.add_subcommand("profile", "Export a warped chart profile as CSV (r,f,fp,K_r)");
  prof->add_option("chart", profile_id)->required();
  prof->add_option("--dr", dr, "Radial spacing")->check(CLI::PositiveNumber);
  prof->add_option("--out", profile_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(scenario, out, resolution, threads);
  if (*list) return cmd_list(as_json);
  if (*sch) return cmd_schema(kind);
  return cmd_profile(profile_id, dr, profile_out);
}
