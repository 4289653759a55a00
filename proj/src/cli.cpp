// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gpuir/buffers.hpp"
#include "gpuir/corpus.hpp"
#include "gpuir/parse.hpp"
#include "gpuir/print.hpp"
#include "gpuir/translate.hpp"

namespace gpuir::cli {

namespace {

bool color_enabled() {
  const char *v = std::getenv("GPUIR_COLOR");
  return v && std::string(v) == "1";
}

std::string paint(const std::string &s, const char *code) {
  if (!color_enabled())
    return s;
  return std::string("\033[") + code + "m" + s + "\033[0m";
}

void report_errors(std::ostream &err, const std::string &path,
                   const std::vector<ParseError> &errors) {
  for (const auto &e : errors)
    err << paint(path + ":" + e.to_string(), "31") << "\n";
}

std::optional<std::string> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    return false;
  out << text;
  return bool(out);
}

bool parse_dims_arg(const std::string &s, std::array<int, 3> &out) {
  int vals[3] = {1, 1, 1};
  int n = 0;
  size_t start = 0;
  while (n < 3) {
    size_t p = s.find(',', start);
    std::string item =
        p == std::string::npos ? s.substr(start) : s.substr(start, p - start);
    auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), vals[n]);
    if (ec != std::errc{} || ptr != item.data() + item.size())
      return false;
    ++n;
    if (p == std::string::npos)
      break;
    start = p + 1;
  }
  if (n == 0)
    return false;
  out = {vals[0], vals[1], vals[2]};
  return true;
}

bool parse_schedule_arg(const std::string &s, Schedule &out) {
  if (s == "canonical") {
    out = Schedule::canonical();
    return true;
  }
  if (s.rfind("seed:", 0) == 0) {
    uint64_t seed = 0;
    const char *b = s.data() + 5;
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), seed);
    if (ec != std::errc{} || p != s.data() + s.size())
      return false;
    out = Schedule::seeded(seed);
    return true;
  }
  return false;
}

struct RunArgs {
  std::string input;
  std::string kernel;
  std::string grid = "1,1,1";
  std::string block = "1,1,1";
  std::string buffers;
  std::string schedule = "canonical";
  std::string engine = "serial";
};

// Shared front half of run/diff: parse module, config and bindings.
struct LoadedRun {
  Module module;
  DispatchConfig cfg;
  std::vector<BufferBinding> bindings;
  Schedule sched;
  Engine engine = Engine::serial;
};

std::optional<LoadedRun> load_run(const RunArgs &a, std::ostream &err) {
  auto text = read_file(a.input);
  if (!text) {
    err << paint("cannot read " + a.input, "31") << "\n";
    return std::nullopt;
  }
  ParseResult pr = parse_module(*text);
  if (!pr.ok()) {
    report_errors(err, a.input, pr.errors);
    return std::nullopt;
  }
  LoadedRun lr;
  lr.module = std::move(*pr.module);
  if (!parse_dims_arg(a.grid, lr.cfg.grid) || lr.cfg.grid[0] < 1 ||
      lr.cfg.grid[1] < 1 || lr.cfg.grid[2] < 1) {
    err << paint("grid dims must be positive", "31") << "\n";
    return std::nullopt;
  }
  if (!parse_dims_arg(a.block, lr.cfg.block) || lr.cfg.block[0] < 1 ||
      lr.cfg.block[1] < 1 || lr.cfg.block[2] < 1) {
    err << paint("block dims must be positive", "31") << "\n";
    return std::nullopt;
  }
  if (!parse_schedule_arg(a.schedule, lr.sched)) {
    err << paint("schedule must be canonical or seed:N", "31") << "\n";
    return std::nullopt;
  }
  if (a.engine == "omp")
    lr.engine = Engine::openmp;
  else if (a.engine != "serial") {
    err << paint("engine must be serial or omp", "31") << "\n";
    return std::nullopt;
  }
  auto buffers_text = read_file(a.buffers);
  if (!buffers_text) {
    err << paint("cannot read " + a.buffers, "31") << "\n";
    return std::nullopt;
  }
  BufferFileResult bf = parse_buffer_file(*buffers_text);
  if (!bf.ok()) {
    for (const auto &e : bf.errors)
      err << paint(a.buffers + ": " + e, "31") << "\n";
    return std::nullopt;
  }
  lr.bindings = std::move(bf.bindings);
  return lr;
}

int cmd_translate(const std::string &input, const std::string &output,
                  const std::string &stage, std::ostream &out,
                  std::ostream &err) {
  (void)out;
  auto text = read_file(input);
  if (!text) {
    err << paint("cannot read " + input, "31") << "\n";
    return kExitInputError;
  }
  ParseResult pr = parse_module(*text);
  if (!pr.ok()) {
    report_errors(err, input, pr.errors);
    return kExitInputError;
  }

  TranslateResult tr = stage == "spirv" ? translate_nvvm_to_spirv(*pr.module)
                                        : translate(*pr.module);
  err << tr.report.summary();
  if (tr.report.failed())
    return kExitUnsupported;
  if (!tr.ok()) {
    for (const auto &d : tr.errors)
      err << paint(d.to_string(), "31") << "\n";
    return kExitInputError;
  }
  if (!write_file(output, print_module(*tr.module))) {
    err << paint("cannot write " + output, "31") << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_run(const RunArgs &a, std::ostream &out, std::ostream &err) {
  auto lr = load_run(a, err);
  if (!lr)
    return kExitInputError;
  LaunchOutcome lo = launch(lr->module, a.kernel, lr->cfg, lr->bindings,
                            lr->sched, lr->engine);
  if (!lo.launched()) {
    err << paint(*lo.setup_error, "31") << "\n";
    return kExitInputError;
  }
  if (lo.result.trap) {
    err << paint(lo.result.trap->to_string(), "31") << "\n";
    return kExitTrap;
  }
  out << print_buffers(lo.result.buffers);
  return kExitOk;
}

int cmd_diff(const RunArgs &a, std::ostream &out, std::ostream &err) {
  auto lr = load_run(a, err);
  if (!lr)
    return kExitInputError;
  TranslateResult tr = translate(lr->module);
  err << tr.report.summary();
  if (tr.report.failed())
    return kExitUnsupported;
  if (!tr.ok()) {
    for (const auto &d : tr.errors)
      err << paint(d.to_string(), "31") << "\n";
    return kExitInputError;
  }
  DiffOutcome d = differential_check(lr->module, *tr.module, a.kernel,
                                     lr->cfg, lr->bindings);
  switch (d.kind) {
  case DiffOutcome::Kind::equal:
    out << "equal\n";
    return kExitOk;
  case DiffOutcome::Kind::mismatch:
    out << d.to_string() << "\n";
    return kExitMismatch;
  case DiffOutcome::Kind::src_trap:
  case DiffOutcome::Kind::dst_trap:
    err << paint(d.to_string(), "31") << "\n";
    return kExitTrap;
  case DiffOutcome::Kind::setup_error:
    err << paint(d.error, "31") << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

int cmd_corpus(const std::string &dir, std::ostream &out, std::ostream &err) {
  (void)err;
  CorpusRunResult r = run_corpus(dir);
  out << corpus_table(r);
  return r.all_pass ? kExitOk : kExitMismatch;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"NVVM -> SPIR-V -> OpenCL kernel translation toolkit"};
  app.require_subcommand(1);

  std::string t_input, t_output, t_stage = "opencl";
  auto *translate_cmd =
      app.add_subcommand("translate", "translate an NVVM-dialect .ll file");
  translate_cmd->add_option("input", t_input)->required();
  translate_cmd->add_option("-o,--output", t_output)->required();
  translate_cmd->add_option("--stage", t_stage)
      ->check(CLI::IsMember({"spirv", "opencl"}));

  RunArgs run_args;
  auto *run_cmd =
      app.add_subcommand("run", "execute a kernel in the interpreter");
  run_cmd->add_option("input", run_args.input)->required();
  run_cmd->add_option("--kernel", run_args.kernel)->required();
  run_cmd->add_option("--grid", run_args.grid);
  run_cmd->add_option("--block", run_args.block);
  run_cmd->add_option("--buffers", run_args.buffers)->required();
  run_cmd->add_option("--schedule", run_args.schedule);
  run_cmd->add_option("--engine", run_args.engine);

  RunArgs diff_args;
  auto *diff_cmd = app.add_subcommand(
      "diff", "translate, run source and translation, compare bit-exactly");
  diff_cmd->add_option("input", diff_args.input)->required();
  diff_cmd->add_option("--kernel", diff_args.kernel)->required();
  diff_cmd->add_option("--grid", diff_args.grid);
  diff_cmd->add_option("--block", diff_args.block);
  diff_cmd->add_option("--buffers", diff_args.buffers)->required();
  diff_cmd->add_option("--schedule", diff_args.schedule);

  std::string corpus_dir;
  auto *corpus_cmd =
      app.add_subcommand("corpus", "run the kernel corpus support matrix");
  corpus_cmd->add_option("dir", corpus_dir)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << paint(e.what(), "31") << "\n";
    return kExitInputError;
  }

  if (translate_cmd->parsed())
    return cmd_translate(t_input, t_output, t_stage, out, err);
  if (run_cmd->parsed())
    return cmd_run(run_args, out, err);
  if (diff_cmd->parsed())
    return cmd_diff(diff_args, out, err);
  if (corpus_cmd->parsed())
    return cmd_corpus(corpus_dir, out, err);
  err << app.help();
  return kExitInputError;
}

} // namespace gpuir::cli
