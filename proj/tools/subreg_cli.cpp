// subreg: command-line front end for the subregularity toolkit.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "subreg/catalog.hpp"
#include "subreg/error.hpp"
#include "subreg/report.hpp"
#include "subreg/runner.hpp"
#include "subreg/soundness.hpp"

namespace fs = std::filesystem;
using namespace subreg;

namespace {

struct Outputs {
  std::string out;
  std::string curves_dir;
};

bool write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "subreg: cannot write " << path.string() << "\n";
    return false;
  }
  f << text;
  return static_cast<bool>(f);
}

int emit(const json& report, const Outputs& o) {
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
    return 0;
  }
  return write_file(o.out, text) ? 0 : kExitEval;
}

int finish(const RunResult& r, const Outputs& o) {
  if (r.exit_code == kExitParse) {
    std::cerr << r.diagnostic << "\n";
    return kExitParse;
  }
  if (!o.curves_dir.empty()) {
    std::error_code ec;
    fs::create_directories(o.curves_dir, ec);
    for (const auto& c : r.curves)
      if (!write_file(fs::path(o.curves_dir) / c.name, c.csv)) return kExitEval;
  }
  if (const int e = emit(r.report, o)) return e;
  return r.exit_code;
}

json summary_json(const SoundnessSummary& s, const std::string& mode, std::uint64_t seed) {
  json cases = json::array();
  for (const auto& c : s.cases)
    cases.push_back({{"index", c.index}, {"description", c.description}, {"report", to_json(c.report)}});
  return {{"schema", kSchemaVersion},
          {"artifact", "subreg"},
          {"version", kArtifactVersion},
          {"theorem", s.theorem},
          {"instances_mode", mode},
          {"seed", seed},
          {"instances", s.instances},
          {"held", s.held},
          {"not_applicable", s.not_applicable},
          {"worst_excess", number(s.worst_excess)},
          {"all_hold", s.all_hold()},
          {"cases", cases}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical certification of strong metric subregularity"};
  app.require_subcommand(1);

  Outputs outputs;
  std::uint64_t seed = 0;
  std::string schedule;
  RunOptions opt;
  double assume_eps = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", outputs.out, "Write the JSON report here instead of stdout");
    sub->add_option("--curves-dir", outputs.curves_dir, "Directory for per-estimate CSV curves");
    sub->add_option("--seed", seed, "Override the document seed");
    sub->add_option("--schedule", schedule, "Shell schedule r0,decay,K,N");
    sub->add_flag("--skip-eval-errors", opt.skip_eval_errors, "Record evaluation errors and continue");
    sub->add_option("--assume-eps", assume_eps, "Use X as the approximation defect (marked in the report)");
  };

  std::string doc_path;
  auto* run = app.add_subcommand("run", "Run the tasks of a problem document");
  run->add_option("document", doc_path, "Problem document")->required();
  common(run);

  std::string example_id;
  auto* reproduce = app.add_subcommand("reproduce", "Run a catalog example and check its outcome");
  reproduce->add_option("example", example_id, "Example id (see `subreg list`)")->required();
  common(reproduce);

  std::string theorem, mode = "random";
  std::size_t count = 100;
  std::uint64_t verify_seed = 20240601;
  auto* verify = app.add_subcommand("verify", "Check a calculus bound on a family of instances");
  verify->add_option("theorem", theorem, "Bound id, e.g. composition or thm3.1")->required();
  verify->add_option("--instances", mode, "catalog or random")->check(CLI::IsMember({"catalog", "random"}));
  verify->add_option("--count", count, "Number of random instances");
  verify->add_option("--seed", verify_seed, "Seed for the random family");
  verify->add_option("--out", outputs.out, "Write the JSON summary here instead of stdout");

  app.add_subcommand("list", "List catalog examples and bound ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (!schedule.empty()) opt.schedule = parse_schedule_override(schedule);
    if (run->parsed() || reproduce->parsed()) {
      auto* sub = run->parsed() ? run : reproduce;
      if (sub->count("--seed")) opt.seed = seed;
      if (sub->count("--assume-eps")) opt.assume_eps = assume_eps;
    }

    if (run->parsed()) {
      std::ifstream f(doc_path, std::ios::binary);
      if (!f) {
        std::cerr << doc_path << ": cannot open document\n";
        return kExitParse;
      }
      std::stringstream buf;
      buf << f.rdbuf();
      RunResult r = run_document(buf.str(), opt);
      if (r.exit_code == kExitParse) r.diagnostic = doc_path + ":" + r.diagnostic;
      return finish(r, outputs);
    }
    if (reproduce->parsed()) return finish(reproduce_example(example_id, opt), outputs);
    if (verify->parsed()) {
      std::string id;
      try {
        id = canonical_theorem(theorem);
      } catch (const Error& e) {
        std::cerr << "subreg: " << e.what() << "\n";
        return kExitParse;
      }
      const SoundnessSummary s =
          mode == "catalog" ? catalog_suite(id) : soundness_suite(id, count, verify_seed);
      std::cerr << s.theorem << ": " << s.held << "/" << s.instances << " hold\n";
      if (const int e = emit(summary_json(s, mode, verify_seed), outputs)) return e;
      return s.all_hold() ? kExitOk : kExitExpectation;
    }
    for (const auto& e : catalog()) std::cout << e.id << "\t" << e.title << "\n";
    std::cout << "\n";
    for (const auto& t : soundness_theorems()) std::cout << t << "\n";
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "subreg: " << e.what() << "\n";
    return kExitEval;
  }
}
