#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "perihom/perihom.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenisation toolkit: cell problems, micro and macro solvers, limit study"};
  std::string mode, config, out;
  bool strict = false;
  int parallel = 1;
  app.add_option("mode", mode, "cell | micro | macro | converge")
      ->required()
      ->check(CLI::IsMember({"cell", "micro", "macro", "converge"}));
  app.add_option("--config", config, "JSON run configuration")->required();
  app.add_option("--out", out, "output directory (overrides output.directory)");
  app.add_flag("--strict", strict, "exit with status 4 on any invariant violation");
  app.add_option("--parallel", parallel, "concurrent micro runs in converge mode")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : perihom::kExitConfig;
  }

  perihom::RunOptions opt;
  opt.mode = mode;
  opt.out_dir = out;
  opt.strict = strict;
  opt.parallel = parallel;
  return perihom::run_file(config, opt);
}
