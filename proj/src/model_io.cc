// src/model_io.cc

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

#include "arcall/model_io.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "arcall/error.h"
#include "arcall/logmath.h"

namespace arcall {

using nlohmann::json;

namespace {

json log_value(double v) { return is_log_zero(v) ? json(nullptr) : json(v); }

double read_log_value(const json& j) { return j.is_null() ? kLogZero : j.get<double>(); }

json gmm_to_json(const GaussianMixture& g) {
  return json{{"weights", g.weights}, {"means", g.means}, {"variances", g.variances}};
}

GaussianMixture gmm_from_json(const json& j) {
  GaussianMixture g;
  g.weights = j.at("weights").get<std::vector<double>>();
  g.means = j.at("means").get<std::vector<std::vector<double>>>();
  g.variances = j.at("variances").get<std::vector<std::vector<double>>>();
  return g;
}

}  // namespace

std::string model_to_json(const AcousticModel& model) {
  json j;
  j["format"] = "arcall-acoustic-model";
  j["version"] = kModelFormatVersion;
  j["feature_dim"] = model.feature_dim();
  json inventory = json::array();
  for (const auto& e : model.inventory().entries()) inventory.push_back(symbol(e.id));
  j["inventory"] = inventory;

  json hmms = json::array();
  for (const auto& h : model.hmms()) {
    json trans = json::array();
    for (double v : h.log_transitions()) trans.push_back(log_value(v));
    json emissions = json::array();
    for (const auto& g : h.emissions()) emissions.push_back(gmm_to_json(g));
    hmms.push_back({{"phoneme", symbol(h.phoneme())},
                    {"log_transitions", trans},
                    {"emissions", emissions}});
  }
  j["hmms"] = hmms;

  json stats = json::object();
  for (const auto& [p, s] : model.score_stats())
    stats[std::string(symbol(p))] = {{"mean", s.mean}, {"stddev", s.stddev}, {"frames", s.frames}};
  j["score_stats"] = stats;

  if (const auto& fe = model.front_end()) {
    j["front_end"] = {{"frame_length_ms", fe->frame_length_ms},
                      {"frame_shift_ms", fe->frame_shift_ms},
                      {"preemphasis_alpha", fe->preemphasis_alpha},
                      {"mel_filter_count", fe->mel_filter_count},
                      {"cepstral_count", fe->cepstral_count},
                      {"log_floor", fe->log_floor},
                      {"use_deltas", fe->use_deltas}};
  } else {
    j["front_end"] = nullptr;
  }
  return j.dump(1);
}

AcousticModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "arcall-acoustic-model")
      throw Error(ErrorCode::kModelFormat, "not an acoustic model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::kModelFormat,
                  "unsupported model version " + j.at("version").dump());

    const auto& inv = PhonemeInventory::standard().entries();
    const auto& names = j.at("inventory");
    if (names.size() != inv.size())
      throw Error(ErrorCode::kModelFormat, "inventory has " + std::to_string(names.size()) +
                                               " phonemes, expected " +
                                               std::to_string(inv.size()));
    for (std::size_t i = 0; i < inv.size(); ++i)
      if (names[i].get<std::string>() != symbol(inv[i].id))
        throw Error(ErrorCode::kModelFormat, "inventory mismatch at " + names[i].dump());

    const int dim = j.at("feature_dim").get<int>();
    const auto& hmms_json = j.at("hmms");
    if (hmms_json.size() != inv.size())
      throw Error(ErrorCode::kModelFormat, "expected one HMM per phoneme");
    std::vector<PhonemeHmm> hmms;
    for (std::size_t i = 0; i < inv.size(); ++i) {
      const auto& h = hmms_json[i];
      if (h.at("phoneme").get<std::string>() != symbol(inv[i].id))
        throw Error(ErrorCode::kModelFormat, "HMM order mismatch at " + h.at("phoneme").dump());
      std::vector<GaussianMixture> emissions;
      for (const auto& g : h.at("emissions")) emissions.push_back(gmm_from_json(g));
      PhonemeHmm hmm(inv[i].id, std::move(emissions));
      std::vector<double> trans;
      for (const auto& v : h.at("log_transitions")) trans.push_back(read_log_value(v));
      hmm.set_log_transitions(std::move(trans));
      hmms.push_back(std::move(hmm));
    }
    AcousticModel model(std::move(hmms), dim);

    std::map<Phoneme, ScoreStats> stats;
    for (const auto& [name, s] : j.at("score_stats").items()) {
      auto p = parse_phoneme(name);
      if (!p) throw Error(ErrorCode::kModelFormat, "unknown phoneme in score_stats: " + name);
      stats[*p] = ScoreStats{s.at("mean").get<double>(), s.at("stddev").get<double>(),
                             s.at("frames").get<std::size_t>()};
    }
    model.set_score_stats(std::move(stats));

    if (const auto& fe = j.at("front_end"); !fe.is_null()) {
      FrameParams p;
      p.frame_length_ms = fe.at("frame_length_ms").get<double>();
      p.frame_shift_ms = fe.at("frame_shift_ms").get<double>();
      p.preemphasis_alpha = fe.at("preemphasis_alpha").get<double>();
      p.mel_filter_count = fe.at("mel_filter_count").get<int>();
      p.cepstral_count = fe.at("cepstral_count").get<int>();
      p.log_floor = fe.at("log_floor").get<double>();
      p.use_deltas = fe.at("use_deltas").get<bool>();
      p.validate();
      if (p.feature_dim() != dim)
        throw Error(ErrorCode::kModelFormat, "front end does not produce feature_dim");
      model.set_front_end(p);
    }
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kModelFormat, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kModelFormat) throw;
    throw Error(ErrorCode::kModelFormat, e.what());
  }
}

void save_model(const std::string& path, const AcousticModel& model) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << model_to_json(model);
    if (!out.flush()) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename to " + path + ": " + ec.message());
}

AcousticModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace arcall
