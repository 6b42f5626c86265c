// tools/arcall.cc

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

// Operator command line: train, align, recognize, phonetize, eval-wer,
// dict-build, serve.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "arcall/acoustic.h"
#include "arcall/audio.h"
#include "arcall/decoder.h"
#include "arcall/error.h"
#include "arcall/eval.h"
#include "arcall/lexicon.h"
#include "arcall/model_io.h"
#include "arcall/service.h"
#include "arcall/store.h"

namespace fs = std::filesystem;
using namespace arcall;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// A transcript is either a file or the text itself; Arabic text is
// phonetized, anything else is read as phoneme symbols.
PhonemeSequence read_transcript(const std::string& arg) {
  std::string text = arg;
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) text = read_file(arg);
  text = trim(text);
  if (text.empty()) throw Error(ErrorCode::kCompositionError, "empty transcript");
  if (looks_arabic(text)) return phonetize(text);
  return parse_phoneme_list(text);
}

FrameParams front_end_of(const AcousticModel& model) {
  const FrameParams p = model.front_end().value_or(FrameParams{});
  if (p.feature_dim() != model.feature_dim())
    throw Error(ErrorCode::kModelFormat, "model has no usable front end");
  return p;
}

int cmd_train(const std::string& corpus_dir, const std::string& out_path,
              const TrainingConfig& config) {
  const fs::path root(corpus_dir);
  const std::string transcripts = read_file((root / "etc" / "transcripts.txt").string());
  const FrameParams params;
  std::vector<TrainingUtterance> corpus;
  std::istringstream lines(transcripts);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id) || id[0] == '#') continue;
    std::string rest;
    std::getline(fields, rest);
    PhonemeSequence tr;
    try {
      tr = parse_phoneme_list(rest);
    } catch (const Error& e) {
      throw Error(e.code(), "transcripts.txt line " + std::to_string(line_no) + ": " + e.what());
    }
    if (tr.empty())
      throw Error(ErrorCode::kCompositionError,
                  "transcripts.txt line " + std::to_string(line_no) + ": no phonemes");
    const std::string wav = (root / "wav" / (id + ".wav")).string();
    try {
      corpus.push_back({compute_mfcc(load_wav_file(wav), params), std::move(tr)});
    } catch (const Error& e) {
      throw Error(e.code(), wav + ": " + e.what());
    }
  }
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "no utterances in " + corpus_dir);

  TrainingResult result = train_acoustic_model(corpus, config);
  result.model.set_front_end(params);
  save_model(out_path, result.model);

  std::cerr << "trained on " << corpus.size() << " utterances; log-likelihood "
            << result.flat_start_log_likelihood << " -> " << result.final_log_likelihood
            << "\n";
  if (!result.uncovered.empty())
    std::cerr << "warning: " << result.uncovered.size()
              << " phonemes have no training data and keep flat-start parameters\n";
  return 0;
}

int cmd_align(const std::string& model_path, const std::string& wav,
              const std::string& transcript, const std::string& features_out, bool silence) {
  const AcousticModel model = load_model(model_path);
  const PhonemeSequence phonemes = read_transcript(transcript);
  const FeatureSequence features = compute_mfcc(load_wav_file(wav), front_end_of(model));
  if (!features_out.empty()) {
    std::ofstream out(features_out);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + features_out);
    write_feature_dump(out, features);
  }
  const Alignment al = forced_align(features, phonemes, model, DecodeOptions{silence});
  write_alignment_dump(std::cout, al);
  return 0;
}

int cmd_recognize(const std::string& model_path, const std::string& dict_path,
                  const std::string& wav, int nbest) {
  const AcousticModel model = load_model(model_path);
  const Lexicon lexicon = parse_dictionary(read_file(dict_path));
  const FeatureSequence features = compute_mfcc(load_wav_file(wav), front_end_of(model));
  const auto hyps = recognize_isolated(features, lexicon, model, LanguagePrior::uniform(lexicon));
  for (int i = 0; i < nbest && i < int(hyps.size()); ++i)
    std::cout << hyps[std::size_t(i)].word << ' ' << hyps[std::size_t(i)].combined_log << '\n';
  return 0;
}

int cmd_phonetize(const std::string& word, bool spans) {
  if (!spans) {
    std::cout << to_string(phonetize(word)) << '\n';
    return 0;
  }
  for (const auto& s : phonetize_with_spans(word))
    std::cout << symbol(s.phoneme) << ' ' << s.grapheme_begin << ' ' << s.grapheme_end << '\n';
  return 0;
}

int cmd_eval_wer(const std::string& ref, const std::string& hyp, bool as_json) {
  const BatchWer batch =
      score_transcripts(parse_transcripts(read_file(ref)), parse_transcripts(read_file(hyp)));
  std::cout << (as_json ? report_json(batch) + "\n" : format_report(batch));
  return 0;
}

int cmd_dict_build(const std::string& wordfile, const std::string& out_path) {
  std::vector<std::string> words;
  std::istringstream in(read_file(wordfile));
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') words.push_back(line);
  }
  const std::string text = write_dictionary(build_dictionary(words));
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!(out << text)) throw Error(ErrorCode::kIo, "cannot write " + out_path);
  }
  return 0;
}

HttpServer* g_server = nullptr;

int cmd_serve(const std::string& store_dir, const std::string& model_path,
              const std::string& host, int port, int teacher_limit) {
  DocumentStore store(DocumentStore::resolve_root(store_dir));
  ServiceOptions options;
  options.teacher_limit = teacher_limit;
  Service service(store, load_model(model_path), options);
  HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cerr << "serving " << store.root().string() << " on http://" << host << ":" << bound
            << "\n";
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arabic pronunciation training engine"};
  app.require_subcommand(1);

  std::string a, b, c, out;
  bool flag = false;

  auto* train = app.add_subcommand("train", "Train an acoustic model from wav/ + etc/transcripts.txt");
  TrainingConfig config;
  train->add_option("corpus-dir", a)->required();
  train->add_option("out-model", b)->required();
  train->add_option("--iterations", config.iterations, "Baum-Welch iterations")->capture_default_str();
  train->add_option("--states", config.state_count, "States per phoneme")->capture_default_str();
  train->add_option("--mixtures", config.mixtures, "Gaussians per state")->capture_default_str();
  train->add_option("--seed", config.seed, "Flat-start seed")->capture_default_str();

  auto* align = app.add_subcommand("align", "Forced-align a recording and print per-phoneme scores");
  bool no_silence = false;
  align->add_option("model", a)->required();
  align->add_option("wav", b)->required();
  align->add_option("transcript", c, "File or text: phoneme symbols or an Arabic word")->required();
  align->add_option("--features-out", out, "Write the MFCC frames here");
  align->add_flag("--no-silence", no_silence, "Do not try SIL around the transcript");

  auto* recognize = app.add_subcommand("recognize", "Isolated-word recognition");
  int nbest = 1;
  recognize->add_option("model", a)->required();
  recognize->add_option("dictionary", b)->required();
  recognize->add_option("wav", c)->required();
  recognize->add_option("--nbest", nbest)->capture_default_str();

  auto* phon = app.add_subcommand("phonetize", "Print the phonemes of a diacritized word");
  phon->add_option("word", a)->required();
  phon->add_flag("--spans", flag, "Also print the letters behind each phoneme");

  auto* wer = app.add_subcommand("eval-wer", "Score hypothesis transcripts against references");
  bool as_json = false;
  wer->add_option("ref", a)->required();
  wer->add_option("hyp", b)->required();
  wer->add_flag("--json", as_json);

  auto* dict = app.add_subcommand("dict-build", "Build a pronunciation dictionary from a word list");
  dict->add_option("wordfile", a)->required();
  dict->add_option("-o,--output", out);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080, teacher_limit = 3;
  serve->add_option("store-dir", a)->required();
  serve->add_option("model", b)->required();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--repeat-limit", teacher_limit, "Repeats required before a word may be skipped")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(a, b, config);
    if (*align) return cmd_align(a, b, c, out, !no_silence);
    if (*recognize) return cmd_recognize(a, b, c, nbest);
    if (*phon) return cmd_phonetize(a, flag);
    if (*wer) return cmd_eval_wer(a, b, as_json);
    if (*dict) return cmd_dict_build(a, out);
    if (*serve) return cmd_serve(a, b, host, port, teacher_limit);
  } catch (const Error& e) {
    std::cerr << "arcall: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "arcall: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
