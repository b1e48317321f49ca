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

#ifndef LEWIS_EDITOPS_HPP_
#define LEWIS_EDITOPS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lewis/corpus.hpp"

namespace lewis {

enum class EditKind : std::uint8_t { kKeep, kDelete, kReplace, kInsert };

// The non-insert half of the dual-tag encoding.
enum class CoarseOp : std::uint8_t { kKeep, kDelete, kReplace };

char edit_code(EditKind kind);  // K, D, R, I
char edit_code(CoarseOp op);

// One operation positioned against the source. KEEP/DELETE/REPLACE cover
// source tokens [src_begin, src_end); INSERT has src_begin == src_end and
// sits before source token src_begin (src_begin == N appends). `fill` holds
// target tokens for INSERT/REPLACE in gold scripts and is empty otherwise.
// Unit scripts cover one token per op; merged scripts cover spans.
struct EditOp {
  EditKind kind = EditKind::kKeep;
  std::size_t src_begin = 0;
  std::size_t src_end = 0;
  TokenSeq fill;

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct EditScript {
  std::vector<EditOp> ops;
  std::size_t cost = 0;

  friend bool operator==(const EditScript&, const EditScript&) = default;
};

// Per source position insert-before flag plus the token's operation.
// Both vectors have N+1 entries; entry N is the end sentinel whose op is
// always KEEP.
struct DualTags {
  std::vector<bool> insert_before;
  std::vector<CoarseOp> ops;

  std::size_t source_length() const { return ops.empty() ? 0 : ops.size() - 1; }
  friend bool operator==(const DualTags&, const DualTags&) = default;
};

struct MaskedTarget {
  TokenSeq tokens;
  std::size_t slot_count = 0;
};

struct SpanStats {
  std::size_t merged_op_count = 0;
  std::size_t source_token_count = 0;
  std::size_t output_token_count = 0;
};

struct MergedScript {
  EditScript script;
  SpanStats stats;
};

// Classic unit-cost DP distance.
std::size_t levenshtein_distance(const TokenSeq& src, const TokenSeq& tgt);

// Minimal unit-cost script with gold fills. Ties resolve left to right with
// preference KEEP > REPLACE > DELETE > INSERT.
EditScript levenshtein_script(const TokenSeq& src, const TokenSeq& tgt);

// Applies a gold script to src; throws InvalidScript if it does not fit.
TokenSeq apply_script(const TokenSeq& src, const EditScript& script);

DualTags to_dual_tags(const EditScript& script);

// Fill-free unit script with one INSERT per flagged position.
EditScript from_dual_tags(const DualTags& tags);

// Drops fills and collapses consecutive inserts at one position; the image
// of a script under to_dual_tags/from_dual_tags.
EditScript coarsen(const EditScript& script);

// Skeleton x_c: KEEP copies, DELETE drops, REPLACE and INSERT become MASK.
// MASKs adjacent in the output merge into one slot.
MaskedTarget apply_coarse(const TokenSeq& src, const DualTags& tags);

// Replaces the skeleton's MASKs by fills in order.
TokenSeq reconstruct(const TokenSeq& src, const DualTags& tags,
                     const std::vector<TokenSeq>& fills);

// Gold fills for apply_coarse's slots, read off a gold script.
std::vector<TokenSeq> gold_fills(const EditScript& script);

// Everything an editor training record needs for one (src, tgt) pair.
struct GoldEdit {
  EditScript script;
  DualTags tags;
  MaskedTarget masked;
  std::vector<TokenSeq> fills;
};
GoldEdit gold_edit(const TokenSeq& src, const TokenSeq& tgt);

// Coalesces adjacent ops of one kind into spans. KEEP spans are kept in
// the script but not counted in merged_op_count.
MergedScript merge_spans(const EditScript& script);

// `I[probably] K[the] R[worst→best] ...`, one item per merged span.
std::string render_script(const TokenSeq& src, const EditScript& script);

// Per-position tag string, e.g. "IK R K D K D K" (a trailing "I" marks an
// append at the end sentinel).
std::string render_tags(const DualTags& tags);

}  // namespace lewis

#endif  // LEWIS_EDITOPS_HPP_
