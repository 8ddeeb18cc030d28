// Copyright 2026 The mbdtg Authors.
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

#include "mbdtg/mbd/generate.h"

#include <algorithm>
#include <cmath>

#include "mbdtg/error.h"

namespace mbdtg::mbd {
namespace {

struct Hypothesis {
  std::vector<int> ids;
  double log_prob = 0.0;
  DecoderState state;
  int prev_input = Vocabulary::kBos;
};

struct Candidate {
  double log_prob;
  size_t parent;
  int id;
};

// The k most probable ids, excluding <bos>; ties go to the lower id.
std::vector<int> TopIds(const Vector &dist, int k) {
  std::vector<int> ids;
  ids.reserve(dist.size());
  for (int i = 0; i < dist.size(); ++i) {
    if (i != Vocabulary::kBos) ids.push_back(i);
  }
  k = std::min<int>(k, static_cast<int>(ids.size()));
  std::partial_sort(ids.begin(), ids.begin() + k, ids.end(), [&](int a, int b) {
    return dist(a) != dist(b) ? dist(a) > dist(b) : a < b;
  });
  ids.resize(k);
  return ids;
}

Generation Finish(const Model &model, const PreparedSource &source, const std::vector<int> &ids,
                  double log_prob, bool finished) {
  Generation out;
  for (int id : ids) out.tokens.push_back(model.ExtendedWord(id, source));
  const size_t length = ids.size() + (finished ? 1 : 0);
  out.score = length == 0 ? 0.0 : log_prob / static_cast<double>(length);
  out.finished = finished;
  return out;
}

}  // namespace

Generation Generate(const Model &model, const corpus::EntityTable &table,
                    const BranchWeights &weights, const GenerateOptions &options) {
  if (options.beam_size < 1) throw Error(ErrorCode::kInvalidArgument, "beam_size must be >= 1");
  if (options.max_len < 1) throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  Tape tape(&model.params(), nullptr);
  const PreparedSource source = model.Prepare(table);
  const EncoderOutput encoded = model.Encode(tape, source);

  std::vector<Hypothesis> live(1);
  live[0].state = model.InitialState(tape, encoded);
  std::vector<Hypothesis> finished;

  for (int t = 0; t <= options.max_len; ++t) {
    std::vector<Candidate> candidates;
    std::vector<DecoderState> next_states;
    for (size_t h = 0; h < live.size(); ++h) {
      StepOutput step =
          model.DecodeStep(tape, live[h].prev_input, live[h].state, weights, encoded);
      const Vector dist = model.Distribution(tape, step, source);
      for (int id : TopIds(dist, options.beam_size)) {
        // Past max_len only <eos> may extend a hypothesis.
        if (t == options.max_len && id != Vocabulary::kEos) continue;
        candidates.push_back(Candidate{live[h].log_prob + std::log(dist(id)), h, id});
      }
      next_states.push_back(step.state);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate &a, const Candidate &b) { return a.log_prob > b.log_prob; });
    std::vector<Hypothesis> next;
    for (size_t c = 0; c < candidates.size() && c < static_cast<size_t>(options.beam_size); ++c) {
      const Candidate &cand = candidates[c];
      Hypothesis hyp;
      hyp.ids = live[cand.parent].ids;
      hyp.log_prob = cand.log_prob;
      if (cand.id == Vocabulary::kEos) {
        finished.push_back(std::move(hyp));
        continue;
      }
      hyp.ids.push_back(cand.id);
      hyp.state = next_states[cand.parent];
      hyp.prev_input = model.InputId(cand.id);
      next.push_back(std::move(hyp));
    }
    if (finished.size() >= static_cast<size_t>(options.beam_size) || next.empty()) break;
    live = std::move(next);
  }

  auto normalized = [](const Hypothesis &h, size_t extra) {
    return h.log_prob / static_cast<double>(h.ids.size() + extra);
  };
  const bool complete = !finished.empty();
  const std::vector<Hypothesis> &pool = complete ? finished : live;
  const size_t extra = complete ? 1 : 0;
  const auto best = std::max_element(pool.begin(), pool.end(),
                                     [&](const Hypothesis &a, const Hypothesis &b) {
                                       return normalized(a, extra) < normalized(b, extra);
                                     });
  return Finish(model, source, best->ids, best->log_prob, complete);
}

Generation GreedyDecode(const Model &model, const corpus::EntityTable &table,
                        const BranchWeights &weights, int max_len) {
  if (max_len < 1) throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  Tape tape(&model.params(), nullptr);
  const PreparedSource source = model.Prepare(table);
  const EncoderOutput encoded = model.Encode(tape, source);
  DecoderState state = model.InitialState(tape, encoded);
  std::vector<int> ids;
  double log_prob = 0.0;
  int prev = Vocabulary::kBos;
  for (int t = 0; t <= max_len; ++t) {
    StepOutput step = model.DecodeStep(tape, prev, state, weights, encoded);
    const Vector dist = model.Distribution(tape, step, source);
    const int best = TopIds(dist, 1).front();
    if (t == max_len && best != Vocabulary::kEos) break;
    log_prob += std::log(dist(best));
    if (best == Vocabulary::kEos) return Finish(model, source, ids, log_prob, true);
    ids.push_back(best);
    state = step.state;
    prev = model.InputId(best);
  }
  return Finish(model, source, ids, log_prob, false);
}

}  // namespace mbdtg::mbd
