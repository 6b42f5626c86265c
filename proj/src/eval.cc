// src/eval.cc

// Copyright 2026  The arcall Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "arcall/eval.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "arcall/error.h"

namespace arcall {

EditOps& EditOps::operator+=(const EditOps& o) {
  n += o.n;
  deletions += o.deletions;
  substitutions += o.substitutions;
  insertions += o.insertions;
  hits += o.hits;
  return *this;
}

EditOps align_labels(const std::vector<std::string>& ref,
                     const std::vector<std::string>& hyp) {
  if (ref.empty()) throw Error(ErrorCode::kEmptyReference, "reference has no labels");
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<std::vector<int>> cost(R + 1, std::vector<int>(H + 1, 0));
  for (std::size_t i = 0; i <= R; ++i) cost[i][0] = int(i);
  for (std::size_t j = 0; j <= H; ++j) cost[0][j] = int(j);
  for (std::size_t i = 1; i <= R; ++i)
    for (std::size_t j = 1; j <= H; ++j)
      cost[i][j] = std::min({cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                             cost[i - 1][j] + 1, cost[i][j - 1] + 1});

  EditOps ops;
  ops.n = int(R);
  std::size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (same ? 0 : 1)) {
        (same ? ops.hits : ops.substitutions)++;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++ops.deletions;
      --i;
    } else {
      ++ops.insertions;
      --j;
    }
  }
  return ops;
}

WerReport compute_wer(const EditOps& ops) {
  WerReport r;
  r.ops = ops;
  r.percent_correct =
      ops.n > 0 ? 100.0 * double(ops.n - ops.deletions - ops.substitutions) / double(ops.n)
                : 0.0;
  r.wer = 100.0 - r.percent_correct;
  return r;
}

std::map<std::string, std::vector<std::string>> parse_transcripts(std::string_view text) {
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id)) continue;
    std::vector<std::string> labels;
    for (std::string w; fields >> w;) labels.push_back(w);
    if (!out.emplace(id, std::move(labels)).second)
      throw Error(ErrorCode::kInvalidArgument,
                  "utterance " + id + " repeated at line " + std::to_string(line_no));
  }
  return out;
}

BatchWer score_transcripts(const std::map<std::string, std::vector<std::string>>& reference,
                           const std::map<std::string, std::vector<std::string>>& hypothesis) {
  BatchWer batch;
  EditOps total;
  for (const auto& [id, ref] : reference) {
    if (ref.empty()) continue;
    auto it = hypothesis.find(id);
    if (it == hypothesis.end()) batch.missing_hypotheses.push_back(id);
    static const std::vector<std::string> kNone;
    const EditOps ops = align_labels(ref, it == hypothesis.end() ? kNone : it->second);
    batch.per_utterance[id] = ops;
    total += ops;
  }
  for (const auto& kv : hypothesis)
    if (!reference.count(kv.first)) batch.extra_hypotheses.push_back(kv.first);
  if (total.n == 0) throw Error(ErrorCode::kEmptyReference, "no reference labels to score");
  batch.total = compute_wer(total);
  return batch;
}

std::string format_report(const BatchWer& batch) {
  const auto& r = batch.total;
  char line[256];
  std::snprintf(line, sizeof line,
                "correct=%.1f wer=%.1f N=%d H=%d D=%d S=%d I=%d utterances=%zu\n",
                r.percent_correct, r.wer, r.ops.n, r.ops.hits, r.ops.deletions,
                r.ops.substitutions, r.ops.insertions, batch.per_utterance.size());
  std::string out = line;
  for (const auto& id : batch.missing_hypotheses)
    out += "warning: no hypothesis for " + id + "\n";
  for (const auto& id : batch.extra_hypotheses)
    out += "warning: hypothesis " + id + " has no reference\n";
  return out;
}

std::string report_json(const BatchWer& batch) {
  auto ops_json = [](const EditOps& o) {
    return nlohmann::json{{"N", o.n},
                          {"H", o.hits},
                          {"D", o.deletions},
                          {"S", o.substitutions},
                          {"I", o.insertions}};
  };
  nlohmann::json j;
  j["percent_correct"] = batch.total.percent_correct;
  j["wer"] = batch.total.wer;
  j["ops"] = ops_json(batch.total.ops);
  j["utterances"] = nlohmann::json::object();
  for (const auto& [id, ops] : batch.per_utterance) j["utterances"][id] = ops_json(ops);
  j["missing_hypotheses"] = batch.missing_hypotheses;
  j["extra_hypotheses"] = batch.extra_hypotheses;
  return j.dump(2);
}

}  // namespace arcall
