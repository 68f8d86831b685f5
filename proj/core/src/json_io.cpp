// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/json_io.hpp"

#include <json.hpp>

namespace slimir::json_io {

using json = nlohmann::ordered_json;
using interp::Path;
using interp::PathRef;
using ir::ConstValue;

namespace {

json const_to_jv(const ConstValue& c) {
  json j;
  switch (c.kind) {
    case ConstValue::Kind::Int:
      j["kind"] = "int";
      j["value"] = c.int_val;
      break;
    case ConstValue::Kind::Byte:
      j["kind"] = "byte";
      j["value"] = static_cast<int>(c.byte_val);
      break;
    case ConstValue::Kind::Str:
      j["kind"] = "str";
      j["value"] = c.str_val;
      break;
    case ConstValue::Kind::Null:
      j["kind"] = "null";
      break;
  }
  return j;
}

ConstValue const_from_jv(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "int") return ConstValue::of_int(j.at("value").get<std::int64_t>());
  if (kind == "byte")
    return ConstValue::of_byte(static_cast<std::uint8_t>(j.at("value").get<int>()));
  if (kind == "str") return ConstValue::of_str(j.at("value").get<std::string>());
  return ConstValue::null();
}

json path_to_jv(const PathRef& p) {
  json j;
  switch (p->kind) {
    case Path::Kind::Global:
      j["kind"] = "global";
      j["name"] = p->global_name;
      break;
    case Path::Kind::StackSlot:
      j["kind"] = "stack";
      j["function"] = p->func;
      j["alloca"] = p->alloca_id;
      j["register"] = p->alloca_reg;
      break;
    case Path::Kind::StructElem:
      j["kind"] = "struct_elem";
      j["base"] = path_to_jv(p->base);
      j["index"] = p->elem_index;
      break;
    case Path::Kind::PtrTarget:
      j["kind"] = "ptr_target";
      j["base"] = path_to_jv(p->base);
      break;
  }
  return j;
}

PathRef path_from_jv(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "global") return Path::global(j.at("name").get<std::string>());
  if (kind == "stack")
    return Path::stack_slot(j.at("function").get<std::string>(),
                            j.at("alloca").get<ir::InstId>(),
                            j.at("register").get<std::string>());
  if (kind == "struct_elem")
    return Path::struct_elem(path_from_jv(j.at("base")), j.at("index").get<std::int64_t>());
  if (kind == "ptr_target") return Path::ptr_target(path_from_jv(j.at("base")));
  throw std::runtime_error("unknown path kind '" + kind + "' in state file");
}

ir::TypeRef type_from_string(const std::string& s);

// Minimal type parser for state files; the IR grammar's type syntax.
ir::TypeRef parse_type_str(const std::string& s, std::size_t& i) {
  auto skip = [&] {
    while (i < s.size() && s[i] == ' ') ++i;
  };
  auto word = [&]() {
    skip();
    std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      ++i;
    return s.substr(start, i - start);
  };
  std::string w = word();
  if (w == "int") return ir::Type::int_ty();
  if (w == "byte") return ir::Type::byte_ty();
  if (w == "str") return ir::Type::str_ty();
  if (w == "ptr") {
    skip();
    ++i;  // <
    auto inner = parse_type_str(s, i);
    skip();
    ++i;  // >
    return ir::Type::ptr(inner);
  }
  if (w == "arr") {
    skip();
    ++i;  // <
    auto inner = parse_type_str(s, i);
    skip();
    ++i;  // ,
    skip();
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    std::int64_t len = std::stoll(s.substr(start, i - start));
    skip();
    ++i;  // >
    return ir::Type::arr(inner, len);
  }
  if (w == "struct") {
    skip();
    std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      ++i;
    return ir::Type::struct_ref(s.substr(start, i - start));
  }
  throw std::runtime_error("bad type string '" + s + "'");
}

ir::TypeRef type_from_string(const std::string& s) {
  std::size_t i = 0;
  return parse_type_str(s, i);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json outcome_to_jv(const interp::RunOutcome& o) {
  json j;
  j["stdout"] = o.stdout_bytes;
  if (o.trap) {
    j["trap"] = interp::trap_kind_name(*o.trap);
  } else {
    j["exit"] = o.exit_status;
  }
  j["steps"] = o.steps;
  return j;
}

json pass_report_to_jv(const simplify::PassReport& r) {
  json j;
  j["pass"] = r.pass;
  j["round"] = r.round;
  j["removedInsts"] = r.removed_insts;
  j["removedBlocks"] = r.removed_blocks;
  j["removedFuncs"] = r.removed_funcs;
  j["removedGlobals"] = r.removed_globals;
  j["iterations"] = r.iterations;
  if (r.folded_sites) j["foldedSites"] = r.folded_sites;
  if (!r.unfolded_div_traps.empty()) j["unfoldedDivTraps"] = r.unfolded_div_traps;
  return j;
}

json stats_to_jv(const harness::SizeStats& s) {
  json j;
  j["irInsts"] = s.ir_insts;
  j["funcs"] = s.funcs;
  j["basicBlocks"] = s.basic_blocks;
  j["globals"] = s.globals;
  return j;
}

}  // namespace

std::string state_to_json(const interp::PartialState& st) {
  json j;
  j["entries"] = json::array();
  for (const auto& e : st.entries) {
    json je;
    je["path"] = path_to_jv(e.path);
    je["display"] = interp::path_to_string(e.path);
    je["type"] = ir::type_to_string(e.declared_type);
    je["value"] = const_to_jv(e.value);
    j["entries"].push_back(std::move(je));
  }
  j["visitedFuncs"] = json::array();
  for (const auto& f : st.visited_funcs) j["visitedFuncs"].push_back(f);
  j["neckCrossings"] = st.neck_crossings;
  j["exclusions"] = json::array();
  for (const auto& x : st.exclusions) {
    json jx;
    jx["path"] = x.path;
    jx["reason"] = x.reason;
    j["exclusions"].push_back(std::move(jx));
  }
  return dump(j);
}

interp::PartialState state_from_json(const std::string& text) {
  json j = json::parse(text);
  interp::PartialState st;
  for (const auto& je : j.at("entries")) {
    interp::CapturedEntry e;
    e.path = path_from_jv(je.at("path"));
    e.declared_type = type_from_string(je.at("type").get<std::string>());
    e.value = const_from_jv(je.at("value"));
    st.entries.push_back(std::move(e));
  }
  for (const auto& f : j.at("visitedFuncs"))
    st.visited_funcs.insert(f.get<std::string>());
  st.neck_crossings = j.value("neckCrossings", 1);
  if (j.contains("exclusions")) {
    for (const auto& jx : j.at("exclusions"))
      st.exclusions.push_back(
          {jx.at("path").get<std::string>(), jx.at("reason").get<std::string>()});
  }
  return st;
}

std::string neck_report_to_json(const neck::NeckReport& r) {
  json j;
  j["category"] = neck::category_name(r.category);
  j["heuristicStart"] = r.heuristic_start;
  j["startBlock"] = r.start_block;
  j["candidates"] = json::array();
  for (const auto& c : r.candidates) {
    json jc;
    jc["inst"] = c.inst;
    jc["block"] = c.block;
    jc["distance"] = c.distance;
    jc["offset"] = c.offset;
    jc["executedOnceProxy"] = c.evidence.executed_once_proxy;
    jc["articulation"] = c.evidence.articulation;
    jc["dominatesRest"] = c.evidence.dominates_rest;
    jc["admissible"] = c.evidence.admissible();
    j["candidates"].push_back(std::move(jc));
  }
  j["chosen"] = r.chosen;
  j["chosenBlock"] = r.chosen_block;
  j["marker"] = r.marker;
  return dump(j);
}

std::string plan_to_json(const constconv::ConversionPlan& plan) {
  json j;
  auto rewrites = [&](const std::vector<constconv::Rewrite>& rs) {
    json arr = json::array();
    for (const auto& r : rs) {
      json jr;
      jr["site"] = r.site;
      jr["action"] = r.action == constconv::Rewrite::Action::ReplaceLoadWithConst
                         ? "replace_load_with_const"
                         : "rewrite_store_source";
      jr["value"] = const_to_jv(r.value);
      if (r.global_name) jr["global"] = *r.global_name;
      arr.push_back(std::move(jr));
    }
    return arr;
  };
  j["preNeck"] = rewrites(plan.pre_neck);
  j["postNeck"] = rewrites(plan.post_neck);
  j["newGlobals"] = json::array();
  for (const auto& g : plan.new_globals) {
    json jg;
    jg["name"] = g.name;
    jg["bytes"] = g.bytes;
    j["newGlobals"].push_back(std::move(jg));
  }
  j["skipped"] = json::array();
  for (const auto& s : plan.skipped) {
    json js;
    js["path"] = s.path;
    js["reason"] = s.reason;
    j["skipped"].push_back(std::move(js));
  }
  return dump(j);
}

std::string stats_to_json(const harness::SizeStats& s) { return dump(stats_to_jv(s)); }

std::string diff_report_to_json(const harness::DiffReport& r) {
  json j;
  j["trials"] = r.trials;
  j["verdict"] = r.pass() ? "Pass" : "Fail";
  j["mismatches"] = json::array();
  for (const auto& m : r.mismatches) {
    json jm;
    jm["trial"] = m.trial;
    std::string preview = m.extension.stdin_bytes.substr(0, 64);
    jm["stdinPreview"] = preview;
    jm["extraArgs"] = m.extension.extra_args;
    jm["original"] = outcome_to_jv(m.original);
    jm["specialized"] = outcome_to_jv(m.specialized);
    j["mismatches"].push_back(std::move(jm));
  }
  return dump(j);
}

std::string debloat_report_to_json(const pipeline::DebloatReport& r) {
  json j;
  j["neck"] = json::parse(neck_report_to_json(r.neck));
  json st;
  st["entries"] = static_cast<std::int64_t>(r.partial_state.entries.size());
  st["visitedFuncs"] = json::array();
  for (const auto& f : r.partial_state.visited_funcs) st["visitedFuncs"].push_back(f);
  st["exclusions"] = static_cast<std::int64_t>(r.partial_state.exclusions.size());
  j["partialState"] = std::move(st);
  json conv;
  conv["preNeckRewrites"] = static_cast<std::int64_t>(r.plan.pre_neck.size());
  conv["postNeckRewrites"] = static_cast<std::int64_t>(r.plan.post_neck.size());
  conv["newGlobals"] = static_cast<std::int64_t>(r.plan.new_globals.size());
  conv["skipped"] = static_cast<std::int64_t>(r.plan.skipped.size());
  j["conversion"] = std::move(conv);
  j["passes"] = json::array();
  for (const auto& pr : r.passes) j["passes"].push_back(pass_report_to_jv(pr));
  j["before"] = stats_to_jv(r.before);
  j["after"] = stats_to_jv(r.after);
  json red;
  for (const auto& [k, v] : r.reduction) red[k] = v;
  j["reductionPct"] = std::move(red);
  j["metrics"] = "ir";  // no native code: sizes are IR-level counts
  return dump(j);
}

pipeline::PipelineConfig pipeline_config_from_json(const std::string& text) {
  json j = json::parse(text);
  pipeline::PipelineConfig cfg;
  if (j.contains("category")) {
    std::string c = j.at("category").get<std::string>();
    if (c == "cli") {
      cfg.category = neck::ProgramCategory::CommandLine;
    } else if (c == "config") {
      cfg.category = neck::ProgramCategory::ConfigFile;
    } else {
      throw std::runtime_error("category must be \"cli\" or \"config\"");
    }
  }
  if (j.contains("parseApis"))
    cfg.parse_apis = j.at("parseApis").get<std::vector<std::string>>();
  if (j.contains("suppliedArgs"))
    cfg.supplied_args = j.at("suppliedArgs").get<std::vector<std::string>>();
  if (j.contains("stepBudget")) cfg.step_budget = j.at("stepBudget").get<std::int64_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  return cfg;
}

}  // namespace slimir::json_io
