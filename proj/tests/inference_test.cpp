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

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "drlm/inference.hpp"
#include "test_util.hpp"

namespace drlm {
namespace {

using testutil::logsumexp;
using testutil::random_document;
using testutil::random_params;

// Every labeling of T slots with Z labels, in lexicographic order.
std::vector<std::vector<int>> all_labelings(std::size_t Z, std::size_t T) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(T, 0);
  while (true) {
    out.push_back(cur);
    std::size_t i = T;
    while (i > 0) {
      --i;
      if (++cur[i] < static_cast<int>(Z)) break;
      cur[i] = 0;
      if (i == 0) return out;
    }
  }
}

TEST(RelationDistribution, ArgmaxAndTies) {
  EXPECT_EQ((RelationDistribution{{0.1, 0.7, 0.2}}.argmax()), 1);
  EXPECT_EQ((RelationDistribution{{0.5, 0.5}}.argmax()), 0);
  EXPECT_EQ((RelationDistribution{{0.2, 0.4, 0.4}}.argmax()), 1);
  const std::vector<double> scores{1.0, 2.0, 3.0};
  const auto d = from_log_scores(scores);
  EXPECT_NEAR(d.total(), 1.0, 1e-15);
  EXPECT_NEAR(d.probs[2] / d.probs[1], std::exp(1.0), 1e-12);
}

// Prior times product of per-token probabilities, normalized in probability space.
TEST(Posterior, MatchesProbabilitySpaceComputation) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DrlmParams p = random_params({5, 3, 4, 3}, Variant::kDrlm, seed, 1.0);
    std::mt19937_64 rng(seed);
    const std::vector<int> sentence{4, kEosId};
    const Tensor c = testutil::random_tensor(4, 1, rng);

    Tape tape;
    ModelGraph g(tape, p);
    const Var cv = tape.constant(c);
    const auto pass = g.encode_sentence(sentence, nullptr);
    const Tensor prior = tape.value(g.relation_prior(cv));
    std::vector<double> joint(3);
    for (int z = 0; z < 3; ++z) {
      double prob = prior[z];
      for (std::size_t n = 0; n < sentence.size(); ++n) {
        const Tensor lp = tape.value(g.token_log_probs(pass.run.hidden[n], cv, z));
        prob *= std::exp(lp[sentence[n]]);
      }
      joint[z] = prob;
    }
    const double total = std::accumulate(joint.begin(), joint.end(), 0.0);
    const auto post = relation_posterior(p, sentence, c);
    EXPECT_NEAR(post.total(), 1.0, 1e-9);
    for (int z = 0; z < 3; ++z) EXPECT_NEAR(post.probs[z], joint[z] / total, 1e-12);
  }
}

TEST(Posterior, SingleRelationIsCertain) {
  const DrlmParams p = random_params({10, 3, 4, 1}, Variant::kDrlm, 2);
  const std::vector<int> sentence{5, 6, kEosId};
  const auto post = relation_posterior(p, sentence, p.c_0.value);
  ASSERT_EQ(post.probs.size(), 1u);
  EXPECT_DOUBLE_EQ(post.probs[0], 1.0);
}

TEST(Posterior, FlatLikelihoodReturnsPrior) {
  DrlmParams p = random_params({10, 3, 4, 3}, Variant::kDrlm, 3);
  for (std::size_t z = 1; z < 3; ++z) {
    p.V_z[z].value = p.V_z[0].value;
    p.M_z[z].value = p.M_z[0].value;
    p.b_o[z].value = p.b_o[0].value;
  }
  const std::vector<int> sentence{5, 9, 7, kEosId};
  const auto post = relation_posterior(p, sentence, p.c_0.value);
  Tape tape;
  ModelGraph g(tape, p);
  const Tensor prior = tape.value(g.relation_prior(g.default_context()));
  for (int z = 0; z < 3; ++z) EXPECT_NEAR(post.probs[z], prior[z], 1e-12);
}

TEST(Posterior, ShiftInvariantInPriorBias) {
  DrlmParams p = random_params({10, 3, 4, 3}, Variant::kDrlm, 4);
  const std::vector<int> sentence{5, 9, kEosId};
  const auto before = relation_posterior(p, sentence, p.c_0.value);
  for (double& v : p.b.value.values()) v += 17.5;
  const auto after = relation_posterior(p, sentence, p.c_0.value);
  for (int z = 0; z < 3; ++z) EXPECT_NEAR(before.probs[z], after.probs[z], 1e-12);
}

TEST(Posterior, SlotDependsOnlyOnItsSentenceAndPredecessor) {
  std::mt19937_64 rng(5);
  const DrlmParams p = random_params({12, 3, 4, 3}, Variant::kDrlm, 5, 1.0);
  const Document doc = random_document(12, 3, 5, 5, rng);
  const auto base = slot_posteriors(p, doc);
  for (std::size_t edit = 0; edit < doc.size(); ++edit) {
    Document changed = doc;
    changed.sentences[edit] = {11, 4, 10, kEosId};
    changed.relations[edit] = (doc.relations[edit] + 1) % 3;
    const auto post = slot_posteriors(p, changed);
    for (std::size_t t = 0; t < doc.size(); ++t) {
      if (t == edit || t == edit + 1) continue;
      for (int z = 0; z < 3; ++z) EXPECT_EQ(post[t].probs[z], base[t].probs[z]) << edit << " " << t;
    }
  }
}

TEST(Posterior, SlotsNormalizedAndTagsAreArgmax) {
  std::mt19937_64 rng(6);
  for (Variant v : {Variant::kDrlm, Variant::kModel2}) {
    const DrlmParams p = random_params({12, 3, 4, 3}, v, 6, 1.0);
    const Document doc = random_document(12, 3, 4, 4, rng);
    const auto post = slot_posteriors(p, doc);
    const auto tags = tag_document(p, doc);
    ASSERT_EQ(post.size(), doc.size());
    for (std::size_t t = 0; t < doc.size(); ++t) {
      EXPECT_NEAR(post[t].total(), 1.0, 1e-9);
      EXPECT_EQ(tags[t], post[t].argmax());
    }
  }
}

TEST(Marginal, EqualsLogSumExpOverAllLabelings) {
  std::mt19937_64 rng(7);
  for (Variant v : {Variant::kDrlm, Variant::kModel2}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const DrlmParams p = random_params({10, 3, 4, 2}, v, seed, 1.0);
      const Document doc = random_document(10, 2, 3, 4, rng);
      std::vector<double> joints;
      for (const auto& labels : all_labelings(2, 3)) joints.push_back(document_joint_log_prob(p, doc, labels));
      const double marginal = marginal_log_likelihood(p, doc);
      EXPECT_NEAR(marginal, logsumexp(joints), 1e-10);
      for (double j : joints) EXPECT_GE(marginal, j);
    }
  }
}

TEST(Marginal, SingleRelationEqualsJoint) {
  std::mt19937_64 rng(8);
  const DrlmParams p = random_params({10, 3, 4, 1}, Variant::kDrlm, 8);
  const Document doc = random_document(10, 1, 3, 4, rng);
  EXPECT_NEAR(marginal_log_likelihood(p, doc), document_joint_log_prob(p, doc), 1e-12);
}

TEST(Marginal, IgnoresObservedLabels) {
  std::mt19937_64 rng(9);
  const DrlmParams p = random_params({10, 3, 4, 3}, Variant::kDrlm, 9);
  Document doc = random_document(10, 3, 3, 4, rng);
  const double a = marginal_log_likelihood(p, doc);
  for (auto& r : doc.relations) r = kNoLabel;
  EXPECT_EQ(marginal_log_likelihood(p, doc), a);
}

TEST(Marginal, FlatLikelihoodSumsSentenceTerms) {
  std::mt19937_64 rng(10);
  DrlmParams p = random_params({10, 3, 4, 3}, Variant::kDrlm, 10);
  for (std::size_t z = 1; z < 3; ++z) {
    p.V_z[z].value = p.V_z[0].value;
    p.M_z[z].value = p.M_z[0].value;
    p.b_o[z].value = p.b_o[0].value;
  }
  const Document doc = random_document(10, 3, 3, 4, rng);
  const auto contexts = context_chain(p, doc);
  double total = 0.0;
  for (std::size_t t = 0; t < doc.size(); ++t) {
    Tape tape;
    ModelGraph g(tape, p);
    const auto pass = g.encode_sentence(doc.sentences[t], nullptr);
    total += tape.scalar(g.sentence_log_prob(pass, doc.sentences[t], tape.constant(contexts[t]), 2));
  }
  EXPECT_NEAR(marginal_log_likelihood(p, doc), total, 1e-10);
}

TEST(ExactModel2, SingleSlotDirect) {
  std::mt19937_64 rng(11);
  const DrlmParams p = random_params({10, 3, 4, 3}, Variant::kModel2, 11, 1.0);
  const Document doc = random_document(10, 3, 1, 5, rng);
  const auto exact = enumerate_exact_model2(p, doc);
  EXPECT_EQ(exact.sequences, 3u);
  const Model2State s0 = model2_initial_state(p);
  const auto prior = model2_log_prior(p, s0);
  std::vector<double> scores;
  for (int z = 0; z < 3; ++z) scores.push_back(prior[z] + model2_extend(p, s0, doc.sentences[0], z).sentence_log_prob);
  EXPECT_NEAR(exact.log_marginal, logsumexp(scores), 1e-12);
  const auto direct = from_log_scores(scores);
  for (int z = 0; z < 3; ++z) EXPECT_NEAR(exact.slot_marginals[0].probs[z], direct.probs[z], 1e-12);
}

TEST(ExactModel2, MatchesTapeJointEnumeration) {
  std::mt19937_64 rng(12);
  const DrlmParams p = random_params({10, 3, 4, 2}, Variant::kModel2, 12, 1.0);
  const Document doc = random_document(10, 2, 4, 4, rng);
  const auto exact = enumerate_exact_model2(p, doc);
  EXPECT_EQ(exact.sequences, 16u);
  std::vector<double> joints;
  std::vector<std::vector<double>> slot_mass(4, std::vector<double>(2, 0.0));
  const auto labelings = all_labelings(2, 4);
  for (const auto& labels : labelings) joints.push_back(document_joint_log_prob(p, doc, labels));
  const double lse = logsumexp(joints);
  EXPECT_NEAR(exact.log_marginal, lse, 1e-10);
  for (std::size_t i = 0; i < labelings.size(); ++i) {
    for (std::size_t t = 0; t < 4; ++t) slot_mass[t][labelings[i][t]] += std::exp(joints[i] - lse);
  }
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_NEAR(exact.slot_marginals[t].total(), 1.0, 1e-9);
    for (int z = 0; z < 2; ++z) EXPECT_NEAR(exact.slot_marginals[t].probs[z], slot_mass[t][z], 1e-10);
  }
}

TEST(ExactModel2, IdenticalTransitionsMakeRelationsIrrelevant) {
  std::mt19937_64 rng(13);
  DrlmParams p = random_params({10, 3, 4, 3}, Variant::kModel2, 13, 1.0);
  for (std::size_t z = 1; z < 3; ++z) p.W_trans[z].value = p.W_trans[0].value;
  const Document doc = random_document(10, 3, 3, 4, rng);
  Model2State state = model2_initial_state(p);
  double chain = 0.0;
  for (const auto& s : doc.sentences) {
    auto ext = model2_extend(p, state, s, 0);
    chain += ext.sentence_log_prob;
    state = ext.next;
  }
  EXPECT_NEAR(enumerate_exact_model2(p, doc).log_marginal, chain, 1e-10);
}

TEST(ExactModel2, RejectsLargeEnumeration) {
  std::mt19937_64 rng(14);
  const DrlmParams p = random_params({10, 3, 4, 4}, Variant::kModel2, 14);
  const Document doc = random_document(10, 4, 11, 2, rng);  // 4^11 > 10^6
  try {
    enumerate_exact_model2(p, doc);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("smc_sample"), std::string::npos) << e.what();
  }
}

// ---- sequential Monte Carlo ----

struct Toy {
  DrlmParams params;
  Document doc;
};

Toy model2_toy() {
  std::mt19937_64 rng(15);
  Toy toy{random_params({10, 3, 4, 2}, Variant::kModel2, 15, 1.0), {}};
  toy.doc = random_document(10, 2, 3, 4, rng);
  return toy;
}

TEST(Smc, WeightsNormalizedAndEssBounded) {
  const Toy toy = model2_toy();
  for (Proposal q : {Proposal::kPrior, Proposal::kUniform}) {
    for (double threshold : {0.0, 0.5, 1.0}) {
      SmcConfig config{200, q, threshold, 3};
      const auto traj = smc_sample(toy.params, toy.doc, config);
      const auto& w = traj.particles.weights;
      EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-9);
      for (double x : w) EXPECT_GE(x, 0.0);
      EXPECT_GE(traj.particles.ess(), 1.0 - 1e-9);
      EXPECT_LE(traj.particles.ess(), 200.0 + 1e-9);
      for (double e : traj.ess) {
        EXPECT_GE(e, 1.0 - 1e-9);
        EXPECT_LE(e, 200.0 + 1e-9);
      }
      for (const auto& path : traj.particles.paths) EXPECT_EQ(path.size(), toy.doc.size());
    }
  }
}

TEST(Smc, SingleParticleSingleRelation) {
  std::mt19937_64 rng(16);
  const DrlmParams p = random_params({10, 3, 4, 1}, Variant::kDrlm, 16);
  const Document doc = random_document(10, 1, 3, 4, rng);
  const auto traj = smc_sample(p, doc, {1, Proposal::kUniform, 0.5, 1});
  ASSERT_EQ(traj.particles.weights.size(), 1u);
  EXPECT_DOUBLE_EQ(traj.particles.weights[0], 1.0);
  EXPECT_NEAR(smc_log_marginal(traj), marginal_log_likelihood(p, doc), 1e-10);
}

TEST(Smc, Deterministic) {
  const Toy toy = model2_toy();
  const SmcConfig config{300, Proposal::kPrior, 0.5, 42};
  const auto a = smc_sample(toy.params, toy.doc, config);
  const auto b = smc_sample(toy.params, toy.doc, config);
  EXPECT_EQ(a.particles.paths, b.particles.paths);
  EXPECT_EQ(a.particles.weights, b.particles.weights);
  EXPECT_EQ(smc_log_marginal(a), smc_log_marginal(b));
}

TEST(Smc, PriorProposalFilterMatchesModelOnePosterior) {
  std::mt19937_64 rng(17);
  const DrlmParams p = random_params({10, 3, 4, 3}, Variant::kDrlm, 17, 1.0);
  const Document doc = random_document(10, 3, 3, 4, rng);
  const auto exact = slot_posteriors(p, doc);
  const auto traj = smc_sample(p, doc, {5000, Proposal::kPrior, 0.5, 7});
  for (std::size_t t = 0; t < doc.size(); ++t) {
    for (int z = 0; z < 3; ++z) EXPECT_LT(std::abs(traj.slot_filter[t].probs[z] - exact[t].probs[z]), 0.02);
  }
}

TEST(Smc, ModelTwoLogMarginalNearExact) {
  const Toy toy = model2_toy();
  const double exact = enumerate_exact_model2(toy.params, toy.doc).log_marginal;
  for (Proposal q : {Proposal::kPrior, Proposal::kUniform}) {
    const auto traj = smc_sample(toy.params, toy.doc, {2000, q, 0.5, 8});
    EXPECT_LT(std::abs(smc_log_marginal(traj) - exact), 0.05);
  }
}

TEST(Smc, EstimatorMeanAndVariance) {
  const Toy toy = model2_toy();
  const double exact = enumerate_exact_model2(toy.params, toy.doc).log_marginal;
  auto stats = [&](std::size_t N) {
    std::vector<double> xs;
    for (std::uint64_t run = 0; run < 50; ++run) {
      xs.push_back(smc_log_marginal(smc_sample(toy.params, toy.doc, {N, Proposal::kUniform, 0.5, 1000 + run})));
    }
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::pair{mean, var / (xs.size() - 1)};
  };
  const auto [mean_small, var_small] = stats(100);
  const auto [mean_large, var_large] = stats(2000);
  EXPECT_LT(std::abs(mean_large - exact), 0.05);
  EXPECT_GT(var_small / var_large, 2.0);
  (void)mean_small;
}

TEST(Smc, RejectsBadConfiguration) {
  const Toy toy = model2_toy();
  EXPECT_THROW(smc_sample(toy.params, toy.doc, {0, Proposal::kPrior, 0.5, 1}), std::invalid_argument);
  EXPECT_THROW(smc_sample(toy.params, toy.doc, {10, Proposal::kPrior, 1.5, 1}), std::invalid_argument);
  const DrlmParams rnnlm = random_params({10, 3, 4, 1}, Variant::kRnnlm, 1);
  Document unlabeled = toy.doc;
  for (auto& r : unlabeled.relations) r = 0;
  EXPECT_THROW(smc_sample(rnnlm, unlabeled, {10, Proposal::kPrior, 0.5, 1}), std::invalid_argument);
}

}  // namespace
}  // namespace drlm
