#include <cstdio>
#include <iostream>

#include "context.hpp"
#include "tipping/error.hpp"
#include "tipping/io.hpp"
#include "tipping/parallel.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int report(const std::string& kind, const std::string& code, const std::string& message,
           const std::vector<std::string>& violations, int status) {
  kit::json j;
  j["error"] = {{"kind", kind}, {"code", code}, {"message", message}};
  j["error"]["violations"] = violations.empty() ? std::vector<std::string>{message} : violations;
  j["exit_code"] = status;
  std::cerr << j.dump() << std::endl;
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-induced tipping toolkit: deterministic criteria, escape probabilities and "
               "the monsoon example. Time unit is decades unless --years is given; albedo is a "
               "fraction."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kit::kVersion);

  kit::Context ctx;
  app.add_option("--config", ctx.config_path, "JSON config file with solver overrides");
  app.add_option("--out-dir", ctx.out_dir,
                 std::string("Output directory (default: $") + tipping::io::kOutputDirEnv + " or cwd)");
  app.add_option("--params", ctx.preset, "Monsoon parameter preset")
      ->check(CLI::IsMember({"reference", "table"}))
      ->default_val("reference");
  app.add_option("--workers", ctx.workers, "Worker threads (0: available parallelism)")
      ->default_val(0);
  app.add_flag("--years", ctx.years, "Read and print exceedance times in years instead of decades");

  kit::register_commands(app, ctx);
  kit::register_reproduce(app, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("validation", "invalid-arguments", e.what(), {}, kExitValidation);
  }

  try {
    ctx.load();
    if (ctx.workers > 0) tipping::set_default_workers(ctx.workers);
    for (auto& [sub, run] : ctx.handlers)
      if (app.got_subcommand(sub)) run();
  } catch (const tipping::TippingError& e) {
    bool numerical = e.kind() == tipping::ErrorKind::numerical;
    return report(numerical ? "numerical" : "validation", e.code(), e.what(), e.details(),
                  numerical ? kExitNumerical : kExitValidation);
  } catch (const std::exception& e) {
    return report("numerical", "internal-error", e.what(), {}, kExitNumerical);
  }
  return 0;
}
