#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "testutil.hpp"

#include "recembed/objectives/losses.hpp"

using namespace recembed;
using namespace recembed::objectives;
using testutil::random_matrix;
using DVar = ad::Var<double>;
using Mat = ad::Mat<double>;

namespace {

Eigen::VectorXd unit2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v / v.norm();
}

DVar row_var(const Eigen::VectorXd& v) {
  Mat m(1, v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) m(0, i) = v(i);
  return DVar::param(m);
}

}  // namespace

TEST_CASE("cosine similarity identities") {
  Rng rng(1);
  auto v = random_unit(rng, 6);
  CHECK(cosine_similarity(v, v) == 1.0);
  CHECK(cosine_similarity(v, (-v).eval()) == -1.0);
  Eigen::VectorXd a = unit2(1, 0), b = unit2(0, 1);
  CHECK(cosine_similarity(a, b) == 0.0);
  CHECK_THROWS_AS(cosine_similarity(a, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("cosine margin loss hand cases") {
  Rng rng(2);
  auto v = random_unit(rng, 8);
  CHECK(cosine_margin_loss(v, v, 1, 0.1) == 0.0);

  // y=-1 at the margin boundary and at cos=0.5 with margin 0.1.
  Eigen::VectorXd q = unit2(1, 0);
  Eigen::VectorXd at_margin = unit2(0.1, std::sqrt(1 - 0.01));
  CHECK(cosine_margin_loss(q, at_margin, -1, 0.1) == doctest::Approx(0.0).epsilon(1e-12));
  Eigen::VectorXd half = unit2(0.5, std::sqrt(0.75));
  CHECK(cosine_margin_loss(q, half, -1, 0.1) == doctest::Approx(0.4).epsilon(1e-12));

  CHECK_THROWS_AS(cosine_margin_loss(q, half, 0, 0.1), std::invalid_argument);
}

TEST_CASE("negative-pair loss is zero whenever cosine is at or below the margin") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_unit(rng, 5);
    auto b = random_unit(rng, 5);
    const double alpha = rng.uniform(-1, 1);
    const double loss = cosine_margin_loss(a, b, -1, alpha);
    CHECK(loss >= 0.0);
    if (cosine_similarity(a, b) <= alpha) CHECK(loss == 0.0);
  }
}

TEST_CASE("classifier softmax properties") {
  Rng rng(4);
  Mat w = random_matrix(rng, 6, 5);
  Eigen::RowVectorXd b = random_matrix(rng, 1, 5);
  auto phi = random_unit(rng, 6);

  auto probs = classify_semantic(phi, w, b);
  CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(probs.minCoeff() >= 0.0);

  // Zero weights: uniform distribution.
  auto uniform = classify_semantic(phi, Mat::Zero(6, 5), Eigen::RowVectorXd::Zero(5));
  for (int c = 0; c < 5; ++c) CHECK(uniform(c) == doctest::Approx(0.2).epsilon(1e-12));

  // Shifting all logits leaves probabilities unchanged.
  Eigen::RowVectorXd shifted = b.array() + 7.5;
  auto same = classify_semantic(phi, w, shifted);
  CHECK((probs - same).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("regularized loss reproduces the hand-evaluated combination") {
  // Components pinned exactly: L_cos = 0.3, CE terms 0.7 and 0.9, lambda 0.02.
  const double p1 = std::exp(-0.7);
  const double p2 = std::exp(-0.9);
  Eigen::RowVectorXd logits_q(2), logits_d(2);
  logits_q << std::log(p1), std::log(1 - p1);
  logits_d << std::log(p2), std::log(1 - p2);

  PairSample s;
  s.phi_q = unit2(1, 0);
  s.phi_d = unit2(0.7, std::sqrt(1 - 0.49));
  s.y = 1;
  s.c_r = 0;
  s.c_v = 0;

  // Solve the shared classifier so each embedding lands on its logits.
  Mat w(2, 2);
  w.row(0) = logits_q;
  w.row(1) = (logits_d - 0.7 * logits_q) / std::sqrt(1 - 0.49);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(2);

  CHECK(cross_entropy(s.phi_q, w, b, 0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(cross_entropy(s.phi_d, w, b, 0) == doctest::Approx(0.9).epsilon(1e-12));

  LossConfig cfg;
  cfg.lambda = 0.02;
  cfg.num_classes = 2;
  const double loss = regularized_loss(s, w, b, cfg);
  CHECK(std::abs(loss - 0.332) <= 1e-12);

  // lambda = 0 reduces to the plain cosine margin loss.
  cfg.lambda = 0.0;
  CHECK(regularized_loss(s, w, b, cfg) == cosine_margin_loss(s, cfg.alpha_cos));

  // A perfect pair with a perfectly confident classifier scores zero.
  PairSample perfect;
  perfect.phi_q = unit2(1, 0);
  perfect.phi_d = unit2(1, 0);
  Mat confident = Mat::Zero(2, 2);
  confident(0, 0) = 1e4;  // softmax saturates to probability 1 for class 0
  cfg.lambda = 0.02;
  CHECK(regularized_loss(perfect, confident, b, cfg) == 0.0);

  CHECK_THROWS_AS(cross_entropy(s.phi_q, w, b, 5), std::invalid_argument);
}

TEST_CASE("triplet loss hand cases") {
  LossConfig cfg;  // beta 0.1, alpha 0.3, gamma 0.3

  // Fully satisfied: cos+=1, cos-=0, semantic hinge also satisfied.
  TripletSample sat;
  sat.phi_q = unit2(1, 0);
  sat.phi_d_pos = unit2(1, 0);
  sat.phi_d_neg = unit2(0, 1);
  sat.phi_sem_pos = unit2(1, 0);
  sat.phi_sem_neg = unit2(-1, 0);
  CHECK(triplet_loss(sat, cfg) == 0.0);

  // Hand-evaluated: inner hinge 0.4; 0.1*0.16 + 0.9*0.4 = 0.376.
  TripletSample t;
  t.phi_q = unit2(1, 0);
  t.phi_d_pos = unit2(0.5, std::sqrt(0.75));
  t.phi_d_neg = unit2(0.6, 0.8);
  t.phi_sem_pos = unit2(1, 0);
  t.phi_sem_neg = unit2(-1, 0);
  CHECK(std::abs(triplet_loss(t, cfg) - 0.376) <= 1e-12);

  // gamma = 0 removes any influence of the semantic pair.
  LossConfig no_sem = cfg;
  no_sem.gamma = 0.0;
  TripletSample flipped = t;
  flipped.phi_sem_pos = unit2(-1, 0);
  flipped.phi_sem_neg = unit2(1, 0);
  CHECK(triplet_loss(t, no_sem) == triplet_loss(flipped, no_sem));
}

TEST_CASE("triplet loss is non-negative and non-decreasing in the negative cosine") {
  Rng rng(5);
  LossConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    TripletSample t;
    t.phi_q = random_unit(rng, 6);
    t.phi_d_pos = random_unit(rng, 6);
    t.phi_d_neg = random_unit(rng, 6);
    t.phi_sem_pos = random_unit(rng, 6);
    t.phi_sem_neg = random_unit(rng, 6);
    const double base = triplet_loss(t, cfg);
    CHECK(base >= 0.0);

    // Rotate the negative toward the query; its cosine can only grow.
    TripletSample closer = t;
    const double step = rng.uniform(0.05, 0.9);
    Eigen::VectorXd mixed = (1 - step) * t.phi_d_neg + step * t.phi_q;
    if (mixed.norm() == 0.0) continue;
    closer.phi_d_neg = mixed / mixed.norm();
    REQUIRE(cosine_similarity(closer.phi_q, closer.phi_d_neg) >=
            cosine_similarity(t.phi_q, t.phi_d_neg) - 1e-12);
    CHECK(triplet_loss(closer, cfg) >= base - 1e-12);
  }
}

TEST_CASE("graph losses agree with the plain evaluations") {
  Rng rng(6);
  LossConfig cfg;
  cfg.num_classes = 4;
  model::ClassifierParams<double> clf;
  clf.w = DVar::param(random_matrix(rng, 6, 4));
  clf.b = DVar::param(random_matrix(rng, 1, 4));

  for (int trial = 0; trial < 50; ++trial) {
    PairSample s;
    s.phi_q = random_unit(rng, 6);
    s.phi_d = random_unit(rng, 6);
    s.y = trial % 2 == 0 ? 1 : -1;
    s.c_r = rng.uniform_int(4);
    s.c_v = rng.uniform_int(4);
    auto graph = regularized_loss(row_var(s.phi_q), row_var(s.phi_d), s.y, s.c_r, s.c_v, clf, cfg);
    const double plain =
        regularized_loss(s, clf.w.value(), Eigen::RowVectorXd(clf.b.value().row(0)), cfg);
    CHECK(graph.value()(0, 0) == doctest::Approx(plain).epsilon(1e-14));

    TripletSample t;
    t.phi_q = s.phi_q;
    t.phi_d_pos = random_unit(rng, 6);
    t.phi_d_neg = random_unit(rng, 6);
    t.phi_sem_pos = random_unit(rng, 6);
    t.phi_sem_neg = random_unit(rng, 6);
    auto tg = triplet_loss(row_var(t.phi_q), row_var(t.phi_d_pos), row_var(t.phi_d_neg),
                           row_var(t.phi_sem_pos), row_var(t.phi_sem_neg), cfg);
    CHECK(tg.value()(0, 0) == doctest::Approx(triplet_loss(t, cfg)).epsilon(1e-14));
  }
}

TEST_CASE("loss gradients w.r.t. embeddings match finite differences") {
  Rng rng(7);
  LossConfig cfg;
  cfg.num_classes = 3;
  model::ClassifierParams<double> clf;
  clf.w = DVar::param(random_matrix(rng, 5, 3));
  clf.b = DVar::param(random_matrix(rng, 1, 3));

  auto q = row_var(random_unit(rng, 5));
  auto d = row_var(random_unit(rng, 5));
  testutil::check_all_gradients({q, d, clf.w, clf.b},
                                [&] { return regularized_loss(q, d, 1, 1, 2, clf, cfg); });

  auto neg = row_var(random_unit(rng, 5));
  auto sem_pos = row_var(random_unit(rng, 5));
  auto sem_neg = row_var(random_unit(rng, 5));
  // Keep both hinges strictly active so the kink sits far from the FD probe.
  auto activate = [&](DVar& pos_v, DVar& neg_v) {
    Mat posm = q.value() * 0.2 + 0.1 * random_matrix(rng, 1, 5);
    Mat negm = q.value() * 0.9 + 0.05 * random_matrix(rng, 1, 5);
    pos_v.value() = posm / posm.norm();
    neg_v.value() = negm / negm.norm();
  };
  activate(d, neg);
  activate(sem_pos, sem_neg);
  testutil::check_all_gradients({q, d, neg, sem_pos, sem_neg},
                                [&] { return triplet_loss(q, d, neg, sem_pos, sem_neg, cfg); });
}
