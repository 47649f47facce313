#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hjmm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Forward-curve simulation, positivity and arbitrage checks, density models"};
  app.set_version_flag("--version", std::string(HJMM_VERSION));
  app.require_subcommand(1);

  hjmm::cli::Options opt;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_flag("-v,--verbose", opt.verbose, "progress lines on stderr");
  };
  for (const char* name : {"simulate", "check-positivity", "verify-arbitrage", "bh"}) {
    add_common(app.add_subcommand(name, std::string("run ") + name));
  }

  std::string manifest;
  auto* rep = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  rep->add_option("--manifest", manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", opt.out, "output directory")->required();
  rep->add_option("--threads", threads, "worker threads (0 = all cores)");
  rep->add_flag("-v,--verbose", opt.verbose, "progress lines on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hjmm::cli::ConfigFailure;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::optional<unsigned> thread_flag;
  if (sub->count("--threads") > 0) thread_flag = threads;
  if (sub == rep) return hjmm::cli::replay(manifest, opt.out, thread_flag, opt.verbose);

  opt.command = sub->get_name();
  if (sub->count("--seed") > 0) opt.seed = seed;
  opt.threads = thread_flag;
  return hjmm::cli::run(opt);
}
