// arcall/eval.h

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

/**
   Label error rates from a minimum edit-distance alignment (unit costs).

     percent_correct = 100 (N - D - S) / N
     wer             = 100 - percent_correct

   Insertions do not enter either figure; they are counted and reported
   alongside, so percent_correct is not the usual "accuracy".
 */

#ifndef ARCALL_EVAL_H_
#define ARCALL_EVAL_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace arcall {

struct EditOps {
  int n = 0;  // reference length
  int deletions = 0;
  int substitutions = 0;
  int insertions = 0;
  int hits = 0;

  int cost() const { return deletions + substitutions + insertions; }
  EditOps& operator+=(const EditOps& o);
  bool operator==(const EditOps&) const = default;
};

struct WerReport {
  EditOps ops;
  double percent_correct = 0.0;
  double wer = 0.0;
};

// Among minimal alignments the backtrace prefers a diagonal step (hit or
// substitution), then a deletion, then an insertion.
EditOps align_labels(const std::vector<std::string>& reference,
                     const std::vector<std::string>& hypothesis);

WerReport compute_wer(const EditOps& ops);

// `utt-id w1 w2 ...` per line; blank lines skipped.
std::map<std::string, std::vector<std::string>> parse_transcripts(std::string_view text);

struct BatchWer {
  WerReport total;
  std::map<std::string, EditOps> per_utterance;
  std::vector<std::string> missing_hypotheses;  // scored as all deletions
  std::vector<std::string> extra_hypotheses;    // ignored
};

BatchWer score_transcripts(const std::map<std::string, std::vector<std::string>>& reference,
                           const std::map<std::string, std::vector<std::string>>& hypothesis);

std::string format_report(const BatchWer& batch);
std::string report_json(const BatchWer& batch);

}  // namespace arcall

#endif  // ARCALL_EVAL_H_
