// Command-line experiment runner over the semilab C API.

#include "semilab/semilab.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string spec;
  std::optional<std::size_t> depth;
  long precision = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  unsigned workers = 1;
  std::string multiplier;
  bool quiet = false;
};

int error_exit(semilab_status status) {
  std::cerr << "error (" << semilab_status_name(status) << "): " << semilab_last_error() << '\n';
  const bool inconclusive =
      status == SEMILAB_E_INCONCLUSIVE_CONFIGURATION || status == SEMILAB_E_NEEDS_LARGER_TMAX;
  return inconclusive ? 3 : 1;
}

void print_verdicts(const std::string& verdicts_json) {
  const auto doc = nlohmann::json::parse(verdicts_json);
  for (const auto& v : doc.at("verdicts")) {
    std::cout << v.at("outcome").get<std::string>() << "  " << v.at("label").get<std::string>() << "  lhs ["
              << v.at("lhs").at("lo").get<std::string>() << ", " << v.at("lhs").at("hi").get<std::string>()
              << "]  rhs [" << v.at("rhs").at("lo").get<std::string>() << ", "
              << v.at("rhs").at("hi").get<std::string>() << "]  " << v.at("precision").get<long>() << " bits\n";
  }
  std::cout << "outcome: " << doc.at("outcome").get<std::string>() << '\n';
}

bool write_file(const std::filesystem::path& path, const char* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  out.write(data, static_cast<std::streamsize>(size));
  return static_cast<bool>(out);
}

int run(const std::string& subcommand, const Options& o) {
  if (semilab_status s = semilab_set_workers(o.workers); s != SEMILAB_OK) return error_exit(s);
  semilab_run_options ro{};
  ro.subcommand = subcommand.c_str();
  ro.spec = o.spec.empty() ? nullptr : o.spec.c_str();
  ro.has_depth = o.depth.has_value();
  ro.depth = o.depth.value_or(0);
  ro.precision = o.precision;
  ro.has_seed = o.seed.has_value();
  ro.seed = o.seed.value_or(0);
  ro.format = o.format.c_str();
  ro.multiplier = o.multiplier.empty() ? nullptr : o.multiplier.c_str();

  semilab_run* handle = nullptr;
  if (semilab_status s = semilab_experiment_run(&ro, &handle); s != SEMILAB_OK) return error_exit(s);

  int code = semilab_run_exit_code(handle);
  std::filesystem::path dir(o.out);
  if (!o.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      std::cerr << "error (io): cannot create '" << o.out << "': " << ec.message() << '\n';
      semilab_run_free(handle);
      return 1;
    }
  }
  for (std::size_t i = 0; i < semilab_run_artifact_count(handle); ++i) {
    const char* name = nullptr;
    const char* content = nullptr;
    std::size_t length = 0;
    semilab_run_artifact(handle, i, &name, &content, &length);
    if (!o.quiet && std::string(name) == "verdicts.json") print_verdicts(content);
    if (!o.out.empty() && !write_file(dir / name, content, length)) {
      std::cerr << "error (io): cannot write '" << (dir / name).string() << "'\n";
      code = 1;
    }
  }
  if (!o.out.empty()) {
    const std::string manifest = semilab_run_manifest(handle);
    if (!write_file(dir / "manifest.json", manifest.data(), manifest.size())) {
      std::cerr << "error (io): cannot write manifest\n";
      code = 1;
    }
  }
  semilab_run_free(handle);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and certified experiments on semimeasures and their mixtures"};
  app.set_version_flag("--version", semilab_version());
  app.require_subcommand(1);

  Options o;
  std::string chosen;
  for (std::size_t i = 0; i < semilab_experiment_count(); ++i) {
    const std::string name = semilab_experiment_name(i);
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--spec", o.spec, "experiment spec: a JSON file or inline JSON");
    sub->add_option("--depth", o.depth, "horizon n (default per experiment)");
    sub->add_option("--precision", o.precision, "starting precision in bits (default 128)")
        ->envname("SEMILAB_PRECISION")
        ->check(CLI::Range(2, 1024));
    sub->add_option("--seed", o.seed, "seed for every sampled quantity");
    sub->add_option("--out", o.out, "directory for result files");
    sub->add_option("--format", o.format, "table format")
        ->check(CLI::IsMember({"csv", "json", "plotdata"}));
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--multiplier", o.multiplier, "scale applied to chain-lemma right-hand sides");
    sub->add_flag("--quiet", o.quiet, "print nothing on success");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return run(chosen, o);
}
