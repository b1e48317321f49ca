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

#include "lewis/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "lewis/errors.hpp"
#include "lewis/util.hpp"

namespace lewis {
namespace {

struct Counts {
  std::vector<double> matched;
  std::vector<double> total;
  double hyp_len = 0.0;
  double ref_len = 0.0;
};

void accumulate(Counts& counts, const TokenSeq& hyp, const TokenSeq& ref, int max_n) {
  if (hyp.empty() || ref.empty()) throw EmptyInput("BLEU needs non-empty sequences");
  for (int n = 1; n <= max_n; ++n) {
    std::map<std::vector<std::string>, int> ref_grams;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) {
      ++ref_grams[{ref.begin() + static_cast<std::ptrdiff_t>(i), ref.begin() + static_cast<std::ptrdiff_t>(i + n)}];
    }
    std::map<std::vector<std::string>, int> hyp_grams;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
      ++hyp_grams[{hyp.begin() + static_cast<std::ptrdiff_t>(i), hyp.begin() + static_cast<std::ptrdiff_t>(i + n)}];
    }
    double matched = 0.0;
    double total = 0.0;
    for (const auto& [gram, c] : hyp_grams) {
      total += c;
      const auto it = ref_grams.find(gram);
      if (it != ref_grams.end()) matched += std::min(c, it->second);
    }
    counts.matched[static_cast<std::size_t>(n - 1)] += matched;
    counts.total[static_cast<std::size_t>(n - 1)] += total;
  }
  counts.hyp_len += static_cast<double>(hyp.size());
  counts.ref_len += static_cast<double>(ref.size());
}

double score(const Counts& counts, const BleuConfig& config) {
  // Orders longer than every hypothesis are skipped (effective order).
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < config.max_n; ++n) {
    double m = counts.matched[static_cast<std::size_t>(n)];
    const double t = counts.total[static_cast<std::size_t>(n)];
    if (t == 0.0) continue;
    if (m == 0.0) {
      if (config.smoothing == BleuSmoothing::kNone) return 0.0;
      m = config.epsilon;
    }
    log_sum += std::log(m / t);
    ++orders;
  }
  const double bp = counts.hyp_len >= counts.ref_len ? 1.0 : std::exp(1.0 - counts.ref_len / counts.hyp_len);
  return 100.0 * bp * std::exp(log_sum / orders);
}

Counts make_counts(const BleuConfig& config) {
  if (config.max_n < 1) throw ConfigError("bleu.max_n", "must be at least 1");
  const auto n = static_cast<std::size_t>(config.max_n);
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0, 0.0};
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

double sentence_bleu(const TokenSeq& hyp, const TokenSeq& ref, const BleuConfig& config) {
  Counts counts = make_counts(config);
  accumulate(counts, hyp, ref, config.max_n);
  return score(counts, config);
}

double corpus_bleu(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs,
                   const BleuConfig& config) {
  if (hyps.size() != refs.size()) throw ShapeError("corpus BLEU needs one reference per hypothesis");
  if (hyps.empty()) throw EmptyInput("corpus BLEU over an empty corpus");
  Counts counts = make_counts(config);
  for (std::size_t i = 0; i < hyps.size(); ++i) accumulate(counts, hyps[i], refs[i], config.max_n);
  return score(counts, config);
}

double self_bleu(const std::vector<TokenSeq>& outputs, const std::vector<TokenSeq>& sources,
                 const BleuConfig& config) {
  return corpus_bleu(outputs, sources, config);
}

double transfer_accuracy(const std::vector<TokenSeq>& outputs, const std::vector<Style>& targets,
                         const StyleJudge& judge) {
  if (outputs.empty()) throw EmptyInput("no outputs to classify");
  if (outputs.size() != targets.size()) throw ShapeError("one target style per output");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) hits += judge.classify(outputs[i]).label == targets[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(outputs.size());
}

EvalReport evaluate(const std::string& system, const std::vector<EvalInput>& inputs,
                    const StyleJudge& judge, const BleuConfig& config) {
  if (inputs.empty()) throw EmptyInput("nothing to evaluate");
  EvalReport report;
  report.system = system;
  const BleuConfig row_config{config.max_n, BleuSmoothing::kAddEpsilon, config.epsilon};
  std::vector<TokenSeq> outputs, sources, refs, ref_outputs;
  std::size_t hits = 0;
  for (const auto& in : inputs) {
    EvalRow row;
    row.source = in.source;
    row.output = in.output;
    row.reference = in.reference;
    row.target = in.target;
    const Classification c = judge.classify(in.output);
    row.cls_prob = c.probs[style_index(in.target)];
    row.correct = c.label == in.target;
    hits += row.correct;
    row.sbleu = sentence_bleu(in.output, in.source, row_config);
    if (in.reference) {
      row.bleu = sentence_bleu(in.output, *in.reference, row_config);
      refs.push_back(*in.reference);
      ref_outputs.push_back(in.output);
    }
    outputs.push_back(in.output);
    sources.push_back(in.source);
    report.rows.push_back(std::move(row));
  }
  report.accuracy = 100.0 * static_cast<double>(hits) / static_cast<double>(inputs.size());
  report.sbleu = self_bleu(outputs, sources, config);
  if (!refs.empty()) report.bleu = corpus_bleu(ref_outputs, refs, config);
  return report;
}

std::string report_json(const EvalReport& report, const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["system"] = report.system;
  j["examples"] = report.rows.size();
  j["accuracy"] = report.accuracy;
  j["sbleu"] = report.sbleu;
  j["bleu"] = report.bleu ? nlohmann::ordered_json(*report.bleu) : nlohmann::ordered_json(nullptr);
  j["config_hash"] = config_hash;
  return j.dump(2);
}

std::string report_csv(const EvalReport& report) {
  std::string out = "source,output,reference,bleu,sbleu,cls_prob,correct\n";
  for (const auto& r : report.rows) {
    out += csv_field(join(r.source, " ")) + ',' + csv_field(join(r.output, " ")) + ',' +
           (r.reference ? csv_field(join(*r.reference, " ")) : std::string()) + ',' +
           (r.reference ? fixed(r.bleu) : std::string()) + ',' + fixed(r.sbleu) + ',' +
           fixed(r.cls_prob) + ',' + (r.correct ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace lewis
