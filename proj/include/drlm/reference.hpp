// Copyright 2026 The DRLM Authors.
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

#pragma once

// Published reference figures and hyper-parameters. These are documentation
// anchors only; no experiment in this repository recomputes them.
namespace drlm::reference {

// Hyper-parameters.
inline constexpr double kLearningRate = 0.1;
inline constexpr double kClipThreshold = 5.0;
inline constexpr double kDropout = 0.5;
inline constexpr double kPriorInitRange = 1e-5;
inline constexpr int kVocabularySize = 10000;
inline constexpr int kGridSizes[] = {32, 48, 64, 96, 128};

// PDTB first-level implicit relations (test set).
inline constexpr double kPdtbMostCommonAccuracy = 54.7;
inline constexpr double kPdtbJointAccuracy = 57.1;
inline constexpr double kPdtbJointMacroF1 = 40.5;
inline constexpr double kPdtbConditionalAccuracy = 59.5;
inline constexpr double kPdtbConditionalMacroF1 = 42.3;

// SWDA dialogue acts.
inline constexpr double kSwdaMostCommonAccuracy = 31.5;
inline constexpr double kSwdaConditionalAccuracy = 77.0;

// Test perplexities with marginalized relations.
inline constexpr double kPdtbPerplexityRnnlm = 117.8;
inline constexpr double kPdtbPerplexityDclm = 112.2;
inline constexpr double kPdtbPerplexityDrlm = 108.3;
inline constexpr double kSwdaPerplexityRnnlm = 56.0;
inline constexpr double kSwdaPerplexityDclm = 45.3;
inline constexpr double kSwdaPerplexityDrlm = 39.6;

}  // namespace drlm::reference
