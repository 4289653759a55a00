// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gpuir/buffers.hpp"
#include "gpuir/parse.hpp"
#include "gpuir/translate.hpp"

namespace gpuir {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_dims(std::string_view s, std::array<int, 3> &out) {
  int vals[3] = {1, 1, 1};
  int n = 0;
  size_t start = 0;
  while (n < 3) {
    size_t p = s.find(',', start);
    std::string_view item =
        trim(p == std::string_view::npos ? s.substr(start)
                                         : s.substr(start, p - start));
    auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), vals[n]);
    if (ec != std::errc{} || ptr != item.data() + item.size())
      return false;
    ++n;
    if (p == std::string_view::npos)
      break;
    start = p + 1;
  }
  if (n == 0)
    return false;
  out = {vals[0], vals[1], vals[2]};
  return true;
}

std::optional<std::string> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

CorpusEntry parse_manifest(const std::string &path, std::string_view text) {
  CorpusEntry e;
  e.manifest_path = path;
  e.name = std::filesystem::path(path).stem().string();
  bool saw_grid = false, saw_block = false, saw_expect = false;

  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t p = text.find('\n', start);
    std::string_view line =
        p == std::string_view::npos ? text.substr(start)
                                    : text.substr(start, p - start);
    start = p == std::string_view::npos ? text.size() + 1 : p + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      e.errors.push_back("line " + std::to_string(line_no) +
                         ": expected key: value");
      continue;
    }
    std::string key(trim(line.substr(0, colon)));
    std::string_view value = trim(line.substr(colon + 1));
    if (key == "source") {
      e.source = std::string(value);
    } else if (key == "kernel") {
      e.kernel = std::string(value);
    } else if (key == "grid") {
      saw_grid = parse_dims(value, e.cfg.grid);
      if (!saw_grid)
        e.errors.push_back("line " + std::to_string(line_no) +
                           ": malformed grid dims");
    } else if (key == "block") {
      saw_block = parse_dims(value, e.cfg.block);
      if (!saw_block)
        e.errors.push_back("line " + std::to_string(line_no) +
                           ": malformed block dims");
    } else if (key == "buffers") {
      e.buffers_path = std::string(value);
    } else if (key == "features") {
      size_t s2 = 0;
      std::string v(value);
      while (s2 <= v.size()) {
        size_t c = v.find(',', s2);
        std::string f(trim(c == std::string::npos
                               ? std::string_view(v).substr(s2)
                               : std::string_view(v).substr(s2, c - s2)));
        if (!f.empty())
          e.features.push_back(f);
        if (c == std::string::npos)
          break;
        s2 = c + 1;
      }
    } else if (key == "expect") {
      saw_expect = true;
      if (value == "supported")
        e.expect_supported = true;
      else if (value == "unsupported")
        e.expect_supported = false;
      else
        e.errors.push_back("line " + std::to_string(line_no) +
                           ": expect must be supported or unsupported");
    } else {
      e.errors.push_back("line " + std::to_string(line_no) +
                         ": unknown key '" + key + "'");
    }
  }

  if (e.source.empty())
    e.errors.push_back("missing source");
  if (e.kernel.empty())
    e.errors.push_back("missing kernel");
  if (!saw_expect)
    e.errors.push_back("missing expect");
  if (e.expect_supported) {
    if (!saw_grid || !saw_block)
      e.errors.push_back("missing grid/block dims");
    if (e.buffers_path.empty())
      e.errors.push_back("missing buffers");
  }
  return e;
}

namespace {

CorpusRow run_entry(const std::filesystem::path &dir, CorpusEntry entry) {
  CorpusRow row;
  row.entry = std::move(entry);
  const CorpusEntry &e = row.entry;
  if (!e.ok()) {
    row.note = "manifest: " + e.errors.front();
    return row;
  }

  auto source_text = read_file((dir / e.source).string());
  if (!source_text) {
    row.note = "cannot read " + e.source;
    return row;
  }
  ParseResult pr = parse_module(*source_text);
  if (!pr.ok()) {
    row.note = "parse: " + pr.errors.front().to_string();
    return row;
  }

  TranslateResult tr = translate(*pr.module);
  if (!tr.ok()) {
    if (!e.expect_supported && tr.report.failed()) {
      // The expected outcome for unsupported-feature kernels.
      row.pass = true;
      row.note = "unsupported: " + tr.report.unsupported.front().callee;
      return row;
    }
    row.note = tr.report.failed()
                   ? "unsupported: " + tr.report.unsupported.front().callee
                   : "translate: " + tr.errors.front().to_string();
    return row;
  }
  row.translate_ok = true;
  if (!e.expect_supported) {
    row.note = "translated but expected unsupported";
    return row;
  }

  auto buffers_text = read_file((dir / e.buffers_path).string());
  if (!buffers_text) {
    row.note = "cannot read " + e.buffers_path;
    return row;
  }
  BufferFileResult bf = parse_buffer_file(*buffers_text);
  if (!bf.ok()) {
    row.note = "buffers: " + bf.errors.front();
    return row;
  }

  DiffOutcome diff = differential_check(*pr.module, *tr.module, e.kernel,
                                        e.cfg, bf.bindings);
  row.diff_equal = diff.equal();
  if (!row.diff_equal) {
    row.note = diff.to_string();
    return row;
  }
  row.pass = true;
  return row;
}

} // namespace

CorpusRunResult run_corpus(const std::string &dir) {
  CorpusRunResult result;
  std::filesystem::path root(dir);
  std::vector<std::filesystem::path> manifests;
  std::error_code ec;
  for (const auto &de : std::filesystem::directory_iterator(root, ec))
    if (de.path().extension() == ".manifest")
      manifests.push_back(de.path());
  std::sort(manifests.begin(), manifests.end());

  result.rows.resize(manifests.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (size_t i = 0; i < manifests.size(); ++i) {
    auto text = read_file(manifests[i].string());
    CorpusEntry e = text ? parse_manifest(manifests[i].string(), *text)
                         : CorpusEntry{};
    if (!text) {
      e.manifest_path = manifests[i].string();
      e.name = manifests[i].stem().string();
      e.errors.push_back("cannot read manifest");
    }
    result.rows[i] = run_entry(root, std::move(e));
  }

  for (const auto &row : result.rows)
    result.all_pass = result.all_pass && row.pass;
  return result;
}

std::string corpus_table(const CorpusRunResult &r) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"kernel", "features", "translate", "diff", "result"});
  for (const auto &row : r.rows) {
    std::string features;
    for (size_t i = 0; i < row.entry.features.size(); ++i)
      features += (i ? "," : "") + row.entry.features[i];
    if (features.empty())
      features = "-";
    std::string translate =
        row.translate_ok ? "ok"
                         : (row.entry.expect_supported ? "fail" : "rejected");
    std::string diff = row.entry.expect_supported
                           ? (row.diff_equal ? "equal" : "-")
                           : "n/a";
    std::string res = row.pass ? "pass" : "FAIL";
    if (!row.note.empty())
      res += "  (" + row.note + ")";
    cells.push_back({row.entry.name, features, translate, diff, res});
  }

  std::array<size_t, 5> width{};
  for (const auto &row : cells)
    for (size_t c = 0; c + 1 < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto &row : cells) {
    for (size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size())
        out += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out += "\n";
  }
  return out;
}

} // namespace gpuir
