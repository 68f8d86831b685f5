// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
//
// slimir: program specialization over a textual load/store IR.
//
//   slimir mine <prog.ir> --category cli            neck mining
//   slimir interpret-to-neck <prog.necked.ir> ...   partial interpretation
//   slimir convert <prog.necked.ir> --state F       constant conversion
//   slimir simplify <prog.cc.ir> --state F          multi-stage simplification
//   slimir debloat <prog.ir> --category cli ...     the whole pipeline
//   slimir run <prog.ir> [--arg A]... [--stdin F]   plain execution
//   slimir diff <orig.ir> <spec.ir> ...             differential testing
//   slimir stats <prog.ir> [--dump-cfg]             size metrics
//
// Exit codes: 0 ok, 1 diff mismatch, 2 input error, 3 pipeline phase error.

#include <CLI11.hpp>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "slimir/analysis.hpp"
#include "slimir/harness.hpp"
#include "slimir/json_io.hpp"
#include "slimir/parse.hpp"
#include "slimir/pipeline.hpp"
#include "slimir/print.hpp"
#include "slimir/validate.hpp"

namespace fs = std::filesystem;
using namespace slimir;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiffFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitPhase = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

ir::Program load_program(const std::string& path, bool must_validate = true) {
  ir::Program p = ir::parse_program(read_file(path));
  if (must_validate) {
    auto diags = ir::validate(p);
    if (!diags.empty())
      throw InputError(path + " does not validate:\n" + ir::diagnostics_to_string(diags));
  }
  return p;
}

// wc.necked.ir -> wc ; wc.cc.ir -> wc
std::string base_stem(const std::string& path) {
  fs::path p(path);
  fs::path dir = p.parent_path();
  std::string stem = p.stem().string();  // strips .ir
  for (const char* suffix : {".necked", ".cc", ".debloated"}) {
    if (stem.size() > std::strlen(suffix) &&
        stem.compare(stem.size() - std::strlen(suffix), std::string::npos, suffix) == 0)
      stem.resize(stem.size() - std::strlen(suffix));
  }
  return (dir / stem).string();
}

struct CommonOpts {
  std::string config_file;
  bool json = false;
  bool verbose = false;
};

pipeline::PipelineConfig make_config(const CommonOpts& common, const std::string& category,
                                     const std::vector<std::string>& parse_apis,
                                     const std::vector<std::string>& args) {
  pipeline::PipelineConfig cfg;
  if (!common.config_file.empty())
    cfg = json_io::pipeline_config_from_json(read_file(common.config_file));
  if (!category.empty()) {
    if (category == "cli") {
      cfg.category = neck::ProgramCategory::CommandLine;
    } else if (category == "config") {
      cfg.category = neck::ProgramCategory::ConfigFile;
    } else {
      throw InputError("--category must be cli or config");
    }
  }
  if (!parse_apis.empty()) cfg.parse_apis = parse_apis;
  if (!args.empty()) cfg.supplied_args = args;
  return cfg;
}

neck::MinerConfig miner_config(const pipeline::PipelineConfig& cfg) {
  neck::MinerConfig mc;
  mc.category = cfg.category;
  mc.file_parsing_apis = cfg.parse_apis;
  return mc;
}

void emit(const CommonOpts& common, const std::string& path, const std::string& content,
          bool echo_json = false) {
  write_file(path, content);
  if (common.verbose) std::cerr << "wrote " << path << "\n";
  if (echo_json && common.json) std::cout << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"program specialization toolkit for the slim load/store IR"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts common;
  app.add_option("--config", common.config_file, "pipeline config JSON file");
  app.add_flag("--json", common.json, "echo machine-readable reports on stdout");
  app.add_flag("--verbose", common.verbose, "chatty progress output");

  // ---- mine ----
  auto* mine = app.add_subcommand("mine", "insert the neck marker");
  std::string mine_input, mine_category;
  std::vector<std::string> mine_apis;
  mine->add_option("prog", mine_input, "input .ir file")->required();
  mine->add_option("--category", mine_category, "cli|config");
  mine->add_option("--parse-api", mine_apis, "file-parsing API name (config category)");

  // ---- interpret-to-neck ----
  auto* itn = app.add_subcommand("interpret-to-neck", "partial interpretation to the neck");
  std::string itn_input;
  std::vector<std::string> itn_args;
  std::int64_t itn_budget = 10'000'000;
  itn->add_option("prog", itn_input, "input .necked.ir file")->required();
  itn->add_option("--arg", itn_args, "supplied argument (repeatable)");
  itn->add_option("--budget", itn_budget, "step budget");

  // ---- convert ----
  auto* conv = app.add_subcommand("convert", "constant conversion from a captured state");
  std::string conv_input, conv_state;
  conv->add_option("prog", conv_input, "input .necked.ir file")->required();
  conv->add_option("--state", conv_state, "captured state JSON")->required();

  // ---- simplify ----
  auto* simp = app.add_subcommand("simplify", "multi-stage simplification");
  std::string simp_input, simp_state;
  simp->add_option("prog", simp_input, "input .cc.ir file")->required();
  simp->add_option("--state", simp_state, "captured state JSON (visited functions)")
      ->required();

  // ---- debloat ----
  auto* deb = app.add_subcommand("debloat", "full specialization pipeline");
  std::string deb_input, deb_category;
  std::vector<std::string> deb_args, deb_apis;
  std::int64_t deb_budget = 0;
  deb->add_option("prog", deb_input, "input .ir file")->required();
  deb->add_option("--category", deb_category, "cli|config");
  deb->add_option("--arg", deb_args, "supplied argument (repeatable)");
  deb->add_option("--parse-api", deb_apis, "file-parsing API name");
  deb->add_option("--budget", deb_budget, "step budget");

  // ---- run ----
  auto* run = app.add_subcommand("run", "execute a program");
  std::string run_input, run_stdin_file;
  std::vector<std::string> run_args;
  std::int64_t run_budget = 10'000'000;
  run->add_option("prog", run_input, "input .ir file")->required();
  run->add_option("--arg", run_args, "argument (repeatable)");
  run->add_option("--stdin", run_stdin_file, "file supplying stdin bytes");
  run->add_option("--budget", run_budget, "step budget");

  // ---- diff ----
  auto* diff = app.add_subcommand("diff", "differential test original vs specialized");
  std::string diff_orig, diff_spec, diff_profile = "text";
  std::vector<std::string> diff_args;
  std::uint64_t diff_seed = 1;
  int diff_trials = 100;
  diff->add_option("orig", diff_orig, "original .ir")->required();
  diff->add_option("spec", diff_spec, "specialized .ir")->required();
  diff->add_option("--arg", diff_args, "supplied argument (repeatable)");
  diff->add_option("--seed", diff_seed, "input generator seed");
  diff->add_option("--trials", diff_trials, "number of delayed inputs");
  diff->add_option("--stdin-profile", diff_profile, "text|bytes");

  // ---- stats ----
  auto* st = app.add_subcommand("stats", "size metrics");
  std::string st_input;
  bool st_dump_cfg = false;
  st->add_option("prog", st_input, "input .ir file")->required();
  st->add_flag("--dump-cfg", st_dump_cfg, "emit each function's CFG as DOT");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mine) {
      auto cfg = make_config(common, mine_category, mine_apis, {});
      ir::Program p = load_program(mine_input);
      auto [marked, report] = neck::mine_neck(p, miner_config(cfg));
      std::string stem = base_stem(mine_input);
      emit(common, stem + ".necked.ir", ir::print_program(marked));
      emit(common, stem + ".neck.json", json_io::neck_report_to_json(report), true);
      return kExitOk;
    }
    if (*itn) {
      auto cfg = make_config(common, "", {}, itn_args);
      ir::Program p = load_program(itn_input);
      interp::PartialState state =
          interp::run_to_neck(p, cfg.supplied_args, itn_budget);
      emit(common, base_stem(itn_input) + ".state.json", json_io::state_to_json(state), true);
      return kExitOk;
    }
    if (*conv) {
      ir::Program p = load_program(conv_input);
      auto neck_id = ir::find_neck(p);
      if (!neck_id) throw InputError(conv_input + " has no neck marker");
      interp::PartialState state = json_io::state_from_json(read_file(conv_state));
      auto plan = constconv::plan_conversion(p, state, *neck_id);
      ir::Program converted = constconv::apply_conversion(p, plan);
      std::string stem = base_stem(conv_input);
      emit(common, stem + ".cc.ir", ir::print_program(converted));
      emit(common, stem + ".ccplan.json", json_io::plan_to_json(plan), true);
      return kExitOk;
    }
    if (*simp) {
      ir::Program p = load_program(simp_input);
      interp::PartialState state = json_io::state_from_json(read_file(simp_state));
      auto [out, reports] = simplify::run_simplify(p, state.visited_funcs);
      std::string stem = base_stem(simp_input);
      emit(common, stem + ".debloated.ir", ir::print_program(out));
      if (common.verbose)
        for (const auto& r : reports)
          std::cerr << r.pass << " round " << r.round << ": -" << r.removed_insts
                    << " insts\n";
      return kExitOk;
    }
    if (*deb) {
      auto cfg = make_config(common, deb_category, deb_apis, deb_args);
      if (deb_budget > 0) cfg.step_budget = deb_budget;
      ir::Program p = load_program(deb_input);
      auto [out, report] = pipeline::debloat_pipeline(p, cfg);
      std::string stem = base_stem(deb_input);
      emit(common, stem + ".debloated.ir", ir::print_program(out));
      emit(common, stem + ".report.json", json_io::debloat_report_to_json(report), true);
      return kExitOk;
    }
    if (*run) {
      ir::Program p = load_program(run_input);
      interp::Invocation inv;
      inv.args = run_args;
      inv.step_budget = run_budget;
      if (!run_stdin_file.empty()) {
        inv.stdin_bytes = read_file(run_stdin_file);
      } else {
        inv.stdin_bytes = std::string{};
      }
      interp::RunOutcome out = interp::run_full(p, inv);
      std::cout << out.stdout_bytes;
      if (out.trap) {
        std::cerr << "trap: " << interp::trap_kind_name(*out.trap) << " at inst "
                  << (out.trap_site ? *out.trap_site : -1) << "\n";
        return kExitPhase;
      }
      std::cerr << "exit status: " << out.exit_status << "\n";
      return kExitOk;
    }
    if (*diff) {
      ir::Program orig = load_program(diff_orig);
      ir::Program spec = load_program(diff_spec);
      harness::InputProfile profile = harness::InputProfile::Text;
      if (diff_profile == "bytes") {
        profile = harness::InputProfile::Bytes;
      } else if (diff_profile != "text") {
        throw InputError("--stdin-profile must be text or bytes");
      }
      auto inputs = harness::random_delayed_inputs(diff_seed, diff_trials, profile);
      auto report = harness::diff_run(orig, spec, diff_args, inputs);
      std::string pair_name = fs::path(base_stem(diff_orig)).string() + "_vs_" +
                              fs::path(diff_spec).stem().string();
      emit(common, pair_name + ".diff.json", json_io::diff_report_to_json(report), true);
      if (!common.json)
        std::cout << (report.pass() ? "Pass" : "Fail") << " (" << report.trials
                  << " trials, " << report.mismatches.size() << " mismatches)\n";
      return report.pass() ? kExitOk : kExitDiffFail;
    }
    if (*st) {
      ir::Program p = load_program(st_input);
      std::cout << json_io::stats_to_json(harness::stats(p));
      if (st_dump_cfg) {
        for (const auto& f : p.functions) {
          analysis::Cfg g = analysis::build_cfg(f);
          std::cout << "digraph \"" << f.name << "\" {\n";
          for (const auto& n : g.nodes) {
            std::cout << "  \"" << n << "\";\n";
            for (const auto& s : g.succs.at(n))
              std::cout << "  \"" << n << "\" -> \"" << s << "\";\n";
          }
          std::cout << "}\n";
        }
      }
      return kExitOk;
    }
  } catch (const ir::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const pipeline::PipelineError& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return kExitPhase;
  } catch (const neck::NeckError& e) {
    std::cerr << "neck mining failed: " << e.what() << "\n";
    return kExitPhase;
  } catch (const interp::InterpError& e) {
    std::cerr << "partial interpretation failed: " << e.what() << "\n";
    return kExitPhase;
  } catch (const constconv::StateMismatch& e) {
    std::cerr << "constant conversion failed: " << e.what() << "\n";
    return kExitPhase;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
