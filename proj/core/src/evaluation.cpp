/*
 * Copyright 2026 The mtuda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "mtuda/evaluation.hpp"

#include <algorithm>
#include <map>

#include "mtuda/error.hpp"

namespace mtuda {

std::vector<VolumeLabels> predict_volumes(const SegNetSpec& spec, const ParamSet& student, const Translator& translator,
                                          const std::vector<Sample>& test) {
  std::map<std::string, std::vector<const Sample*>> groups;
  for (const Sample& s : test) {
    if (!s.labeled()) throw ValidationError("evaluate: test sample '" + s.id + "' has no reference labels");
    groups[s.volume.empty() ? s.id : s.volume].push_back(&s);
  }
  std::vector<VolumeLabels> out;
  out.reserve(groups.size());
  for (auto& [id, slices] : groups) {
    std::stable_sort(slices.begin(), slices.end(), [](const Sample* a, const Sample* b) { return a->slice < b->slice; });
    const std::size_t h = slices.front()->height(), w = slices.front()->width();
    for (const Sample* s : slices) {
      if (s->height() != h || s->width() != w) throw ValidationError("evaluate: volume '" + id + "' mixes slice sizes");
    }
    const ImageBatch batch = stack_images(slices, slices.front()->domain);
    const LabelMap pred = infer_target(spec, student, translator, batch);
    const LabelMap ref = stack_labels(slices);
    out.push_back({id, slices.size(), h, w, pred.labels, ref.labels});
  }
  return out;
}

EvalReport evaluate(const SegNetSpec& spec, const ParamSet& student, const Translator& translator,
                    const std::vector<Sample>& test, double asd_cap) {
  const std::vector<VolumeLabels> volumes = predict_volumes(spec, student, translator, test);
  return evaluate_volumes(volumes, spec.num_classes, asd_cap);
}

}  // namespace mtuda
