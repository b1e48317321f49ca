// Copyright 2026 The Lewis Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lewis/editops.hpp"

#include <algorithm>

#include "lewis/errors.hpp"

namespace lewis {
namespace {

bool is_mask(const std::string& token) { return token == special::kMaskSurface; }

void push_mask(MaskedTarget& out) {
  if (!out.tokens.empty() && is_mask(out.tokens.back())) return;
  out.tokens.emplace_back(special::kMaskSurface);
  ++out.slot_count;
}

std::string span_text(const TokenSeq& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end && i < tokens.size(); ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace

char edit_code(EditKind kind) {
  switch (kind) {
    case EditKind::kKeep: return 'K';
    case EditKind::kDelete: return 'D';
    case EditKind::kReplace: return 'R';
    case EditKind::kInsert: return 'I';
  }
  return '?';
}

char edit_code(CoarseOp op) {
  switch (op) {
    case CoarseOp::kKeep: return 'K';
    case CoarseOp::kDelete: return 'D';
    case CoarseOp::kReplace: return 'R';
  }
  return '?';
}

std::size_t levenshtein_distance(const TokenSeq& src, const TokenSeq& tgt) {
  std::vector<std::size_t> row(tgt.size() + 1);
  for (std::size_t j = 0; j <= tgt.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= src.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= tgt.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({diag + (src[i - 1] == tgt[j - 1] ? 0 : 1), up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[tgt.size()];
}

EditScript levenshtein_script(const TokenSeq& src, const TokenSeq& tgt) {
  if (src.empty() || tgt.empty()) throw EmptyInput("levenshtein_script needs non-empty sequences");
  const std::size_t n = src.size();
  const std::size_t m = tgt.size();
  // Suffix table: dist[i][j] = distance(src[i:], tgt[j:]); walking it from
  // (0, 0) resolves ties left to right.
  std::vector<std::size_t> dist((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return dist[i * (m + 1) + j]; };
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = m - j;
  for (std::size_t i = n; i-- > 0;) {
    at(i, m) = n - i;
    for (std::size_t j = m; j-- > 0;) {
      const std::size_t diag = at(i + 1, j + 1) + (src[i] == tgt[j] ? 0 : 1);
      at(i, j) = std::min({diag, at(i + 1, j) + 1, at(i, j + 1) + 1});
    }
  }

  EditScript script;
  script.cost = at(0, 0);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    const std::size_t here = at(i, j);
    if (i < n && j < m && src[i] == tgt[j] && here == at(i + 1, j + 1)) {
      script.ops.push_back({EditKind::kKeep, i, i + 1, {}});
      ++i, ++j;
    } else if (i < n && j < m && src[i] != tgt[j] && here == at(i + 1, j + 1) + 1) {
      script.ops.push_back({EditKind::kReplace, i, i + 1, {tgt[j]}});
      ++i, ++j;
    } else if (i < n && here == at(i + 1, j) + 1) {
      script.ops.push_back({EditKind::kDelete, i, i + 1, {}});
      ++i;
    } else {
      script.ops.push_back({EditKind::kInsert, i, i, {tgt[j]}});
      ++j;
    }
  }
  return script;
}

TokenSeq apply_script(const TokenSeq& src, const EditScript& script) {
  TokenSeq out;
  std::size_t pos = 0;
  for (const auto& op : script.ops) {
    if (op.src_begin != pos || op.src_end > src.size()) throw InvalidScript("script does not fit source");
    switch (op.kind) {
      case EditKind::kKeep:
        out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(op.src_begin),
                   src.begin() + static_cast<std::ptrdiff_t>(op.src_end));
        break;
      case EditKind::kDelete:
        break;
      case EditKind::kReplace:
      case EditKind::kInsert:
        out.insert(out.end(), op.fill.begin(), op.fill.end());
        break;
    }
    pos = op.src_end;
  }
  if (pos != src.size()) throw InvalidScript("script does not cover source");
  return out;
}

DualTags to_dual_tags(const EditScript& script) {
  std::size_t pos = 0;
  for (const auto& op : script.ops) {
    const bool insert = op.kind == EditKind::kInsert;
    if (op.src_begin != pos || (insert ? op.src_end != pos : op.src_end <= pos)) {
      throw InvalidScript("edit ops are not contiguous over the source");
    }
    pos = op.src_end;
  }
  DualTags tags;
  tags.insert_before.assign(pos + 1, false);
  tags.ops.assign(pos + 1, CoarseOp::kKeep);
  for (const auto& op : script.ops) {
    switch (op.kind) {
      case EditKind::kInsert:
        tags.insert_before[op.src_begin] = true;
        break;
      case EditKind::kKeep:
      case EditKind::kDelete:
      case EditKind::kReplace: {
        const CoarseOp c = op.kind == EditKind::kKeep     ? CoarseOp::kKeep
                           : op.kind == EditKind::kDelete ? CoarseOp::kDelete
                                                          : CoarseOp::kReplace;
        for (std::size_t k = op.src_begin; k < op.src_end; ++k) tags.ops[k] = c;
        break;
      }
    }
  }
  return tags;
}

EditScript from_dual_tags(const DualTags& tags) {
  if (tags.ops.empty() || tags.ops.size() != tags.insert_before.size() ||
      tags.ops.back() != CoarseOp::kKeep) {
    throw InvalidScript("malformed dual tags");
  }
  EditScript script;
  const std::size_t n = tags.source_length();
  for (std::size_t i = 0; i <= n; ++i) {
    if (tags.insert_before[i]) {
      script.ops.push_back({EditKind::kInsert, i, i, {}});
      ++script.cost;
    }
    if (i == n) break;
    switch (tags.ops[i]) {
      case CoarseOp::kKeep:
        script.ops.push_back({EditKind::kKeep, i, i + 1, {}});
        break;
      case CoarseOp::kDelete:
        script.ops.push_back({EditKind::kDelete, i, i + 1, {}});
        ++script.cost;
        break;
      case CoarseOp::kReplace:
        script.ops.push_back({EditKind::kReplace, i, i + 1, {}});
        ++script.cost;
        break;
    }
  }
  return script;
}

EditScript coarsen(const EditScript& script) {
  EditScript out;
  for (const auto& op : script.ops) {
    if (op.kind == EditKind::kInsert) {
      if (!out.ops.empty() && out.ops.back().kind == EditKind::kInsert &&
          out.ops.back().src_begin == op.src_begin) {
        continue;
      }
      out.ops.push_back({EditKind::kInsert, op.src_begin, op.src_begin, {}});
      ++out.cost;
      continue;
    }
    for (std::size_t k = op.src_begin; k < op.src_end; ++k) {
      out.ops.push_back({op.kind, k, k + 1, {}});
      if (op.kind != EditKind::kKeep) ++out.cost;
    }
  }
  return out;
}

MaskedTarget apply_coarse(const TokenSeq& src, const DualTags& tags) {
  if (tags.ops.size() != src.size() + 1 || tags.insert_before.size() != src.size() + 1) {
    throw TagMismatch("dual tags must have source length + 1 entries");
  }
  MaskedTarget out;
  for (std::size_t i = 0; i <= src.size(); ++i) {
    if (tags.insert_before[i]) push_mask(out);
    if (i == src.size()) break;
    switch (tags.ops[i]) {
      case CoarseOp::kKeep:
        out.tokens.push_back(src[i]);
        break;
      case CoarseOp::kDelete:
        break;
      case CoarseOp::kReplace:
        push_mask(out);
        break;
    }
  }
  return out;
}

TokenSeq reconstruct(const TokenSeq& src, const DualTags& tags,
                     const std::vector<TokenSeq>& fills) {
  const MaskedTarget skeleton = apply_coarse(src, tags);
  if (fills.size() != skeleton.slot_count) {
    throw FillMismatch("expected " + std::to_string(skeleton.slot_count) + " fills, got " +
                       std::to_string(fills.size()));
  }
  TokenSeq out;
  std::size_t next = 0;
  for (const auto& t : skeleton.tokens) {
    if (is_mask(t)) {
      const auto& f = fills[next++];
      out.insert(out.end(), f.begin(), f.end());
    } else {
      out.push_back(t);
    }
  }
  return out;
}

std::vector<TokenSeq> gold_fills(const EditScript& script) {
  std::vector<TokenSeq> fills;
  bool open = false;
  for (const auto& op : script.ops) {
    switch (op.kind) {
      case EditKind::kKeep:
        open = false;
        break;
      case EditKind::kDelete:
        break;
      case EditKind::kReplace:
      case EditKind::kInsert:
        if (!open) fills.emplace_back();
        fills.back().insert(fills.back().end(), op.fill.begin(), op.fill.end());
        open = true;
        break;
    }
  }
  return fills;
}

GoldEdit gold_edit(const TokenSeq& src, const TokenSeq& tgt) {
  GoldEdit g;
  g.script = levenshtein_script(src, tgt);
  g.tags = to_dual_tags(g.script);
  g.masked = apply_coarse(src, g.tags);
  g.fills = gold_fills(g.script);
  return g;
}

MergedScript merge_spans(const EditScript& script) {
  MergedScript out;
  out.script.cost = script.cost;
  for (const auto& op : script.ops) {
    auto& spans = out.script.ops;
    if (!spans.empty() && spans.back().kind == op.kind && spans.back().src_end == op.src_begin) {
      spans.back().src_end = op.src_end;
      spans.back().fill.insert(spans.back().fill.end(), op.fill.begin(), op.fill.end());
    } else {
      spans.push_back(op);
    }
    out.stats.source_token_count = std::max(out.stats.source_token_count, op.src_end);
  }
  for (const auto& span : out.script.ops) {
    if (span.kind != EditKind::kKeep) ++out.stats.merged_op_count;
    if (span.kind == EditKind::kKeep) {
      out.stats.output_token_count += span.src_end - span.src_begin;
    } else {
      out.stats.output_token_count += span.fill.size();
    }
  }
  return out;
}

std::string render_script(const TokenSeq& src, const EditScript& script) {
  std::string out;
  for (const auto& span : merge_spans(script).script.ops) {
    if (!out.empty()) out.push_back(' ');
    out.push_back(edit_code(span.kind));
    out.push_back('[');
    switch (span.kind) {
      case EditKind::kKeep:
      case EditKind::kDelete:
        out += span_text(src, span.src_begin, span.src_end);
        break;
      case EditKind::kReplace:
        out += span_text(src, span.src_begin, span.src_end);
        out += "→";
        out += span_text(span.fill, 0, span.fill.size());
        break;
      case EditKind::kInsert:
        out += span_text(span.fill, 0, span.fill.size());
        break;
    }
    out.push_back(']');
  }
  return out;
}

std::string render_tags(const DualTags& tags) {
  std::string out;
  const std::size_t n = tags.source_length();
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out.push_back(' ');
    if (tags.insert_before[i]) out.push_back('I');
    out.push_back(edit_code(tags.ops[i]));
  }
  if (!tags.insert_before.empty() && tags.insert_before[n]) {
    if (!out.empty()) out.push_back(' ');
    out.push_back('I');
  }
  return out;
}

}  // namespace lewis
