#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "symrfm/analysis.hpp"
#include "symrfm/representation.hpp"

using namespace symrfm;
using Eigen::MatrixXd;

namespace {

GroupElement el(std::initializer_list<int> residues) { return GroupElement{residues}; }

Subgroup refl_subgroup(const GroupSpec& spec, GroupElement axis,
                       ActionVariant variant = ActionVariant::direct) {
  return enumerate_subgroup(spec,
                            {SubgroupSpec::Kind::reflection, 1, 0, std::move(axis), variant});
}

MatrixXd rep_sum(const GroupSpec& spec, const Subgroup& H) {
  MatrixXd out = MatrixXd::Zero(2 * spec.order(), 2 * spec.order());
  for (const auto& h : H.elements) out += perm_rep(spec, h).matrix;
  return out;
}

struct Pgm {
  int width = 0, height = 0;
  std::vector<unsigned char> pixels;
};

Pgm read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::string magic;
  int maxval = 0;
  Pgm img;
  in >> magic >> img.width >> img.height >> maxval;
  REQUIRE(magic == "P5");
  REQUIRE(maxval == 255);
  in.get();
  img.pixels.resize(static_cast<size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  REQUIRE(in);
  return img;
}

}  // namespace

TEST_CASE("accuracy") {
  std::vector<int> truth = {1, 2, 3};
  CHECK(accuracy(std::vector<int>{1, 2, 3}, truth) == 1.0);
  CHECK(accuracy(std::vector<int>{0, 0, 0}, truth) == 0.0);

  std::vector<int> fifty(50, 7), pred(50, 7);
  pred[13] = 0;
  CHECK(accuracy(pred, fifty) == doctest::Approx(0.98));

  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy(std::vector<int>{1}, truth), std::invalid_argument);
}

TEST_CASE("alignment scores") {
  GroupSpec z29 = GroupSpec::cyclic(29);

  SUBCASE("a representation sum is perfectly aligned with its own subgroup") {
    for (GroupElement axis : {el({0}), el({7})}) {
      Subgroup H = refl_subgroup(z29, axis);
      AlignmentScore score = alignment(rep_sum(z29, H), z29, H);
      CHECK(score.support_mass_fraction == 1.0);
      CHECK(score.pearson_r > 0.99);
    }
    GroupSpec z32 = GroupSpec::cyclic(32);
    Subgroup klein = enumerate_subgroup(z32, parse_subgroup(z32, "dihedral:16,0"));
    CHECK(alignment(rep_sum(z32, klein), z32, klein).support_mass_fraction == 1.0);
  }

  SUBCASE("an unstructured matrix holds mask-density mass") {
    Subgroup H = refl_subgroup(z29, el({3}));
    MatrixXd ones = MatrixXd::Ones(58, 58);
    AlignmentScore score = alignment(ones, z29, H);
    CHECK(score.support_mass_fraction == doctest::Approx(1.0 / 29).epsilon(1e-12));
    CHECK(score.pearson_r == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("mass concentrated on the wrong reflection scores low") {
    Subgroup right = refl_subgroup(z29, el({3}));
    Subgroup wrong = refl_subgroup(z29, el({9}));
    MatrixXd M = rep_sum(z29, right);
    AlignmentScore on_wrong = alignment(M, z29, wrong);
    CHECK(on_wrong.support_mass_fraction < 0.6);  // only the shared identity diagonal
    CHECK(alignment(M, z29, right).support_mass_fraction == 1.0);
  }

  CHECK_THROWS_AS(alignment(MatrixXd::Identity(4, 4), z29, refl_subgroup(z29, el({0}))),
                  std::invalid_argument);
}

TEST_CASE("orbit prediction") {
  Dataset ds = build_dataset(make_modular_task(OperationKind::add, 5));
  const GroupSpec& spec = ds.task.spec;

  // Hand-built partition: train = two chosen pairs, test = everything else.
  Partition part;
  part.train = {pair_index(spec, {el({1}), el({2})}), pair_index(spec, {el({0}), el({0})})};
  for (std::int32_t row = 0; row < ds.rows(); ++row)
    if (row != part.train[0] && row != part.train[1]) part.test.push_back(row);

  Subgroup H = refl_subgroup(spec, el({0}));

  // Orbit of the train pairs under {id, s}: (1,2) gains its swap (2,1); (0,0)
  // is fixed. Expected predicted-correct = {(2,1)}.
  RunRecord run;
  run.test_predictions.assign(part.test.size(), 0);
  run.test_correct.assign(part.test.size(), 0);

  SUBCASE("perfect match when the run gets exactly the orbit right") {
    const PairIndex swapped = pair_index(spec, {el({2}), el({1})});
    for (size_t i = 0; i < part.test.size(); ++i)
      run.test_correct[i] = part.test[i] == swapped;
    OrbitPrediction pred = orbit_predict(ds, part, H, run);
    CHECK(pred.predicted_correct == std::vector<std::int32_t>{swapped});
    CHECK(pred.actual_correct == std::vector<std::int32_t>{swapped});
    CHECK(pred.precision == 1.0);
    CHECK(pred.recall == 1.0);
  }

  SUBCASE("hand-counted precision and recall") {
    const PairIndex swapped = pair_index(spec, {el({2}), el({1})});
    // the run gets the orbit point plus two points outside the orbit
    std::set<PairIndex> correct = {swapped, pair_index(spec, {el({3}), el({3})}),
                                   pair_index(spec, {el({4}), el({0})})};
    for (size_t i = 0; i < part.test.size(); ++i)
      run.test_correct[i] = correct.count(part.test[i]) > 0;
    OrbitPrediction pred = orbit_predict(ds, part, H, run);
    CHECK(pred.predicted_correct.size() == 1);
    CHECK(pred.actual_correct.size() == 3);
    CHECK(*pred.precision == doctest::Approx(1.0));
    CHECK(*pred.recall == doctest::Approx(1.0 / 3));
  }

  SUBCASE("empty-set conventions") {
    Subgroup trivial = enumerate_subgroup(spec, {});
    OrbitPrediction nothing = orbit_predict(ds, part, trivial, run);
    CHECK(nothing.predicted_correct.empty());
    CHECK(nothing.actual_correct.empty());
    CHECK(nothing.precision == 1.0);
    CHECK(nothing.recall == 1.0);

    run.test_correct[0] = 1;  // actual nonempty, predicted empty
    OrbitPrediction skewed = orbit_predict(ds, part, trivial, run);
    CHECK_FALSE(skewed.precision.has_value());
    CHECK(skewed.recall == 0.0);
  }

  SUBCASE("monotone in the subgroup and equal to the brute-force double loop") {
    SubgroupSpec full_spec;
    full_spec.kind = SubgroupSpec::Kind::full;
    Subgroup full = enumerate_subgroup(spec, full_spec);

    std::vector<Subgroup> chain = {enumerate_subgroup(spec, {}), H, full};
    size_t previous = 0;
    for (const auto& sub : chain) {
      OrbitPrediction pred = orbit_predict(ds, part, sub, run);
      CHECK(pred.predicted_correct.size() >= previous);
      previous = pred.predicted_correct.size();

      std::set<PairIndex> brute;
      for (const auto& h : sub.elements)
        for (std::int32_t row : part.train) brute.insert(apply_to_index(spec, h, row));
      std::vector<PairIndex> expected;
      std::set_intersection(brute.begin(), brute.end(), part.test.begin(), part.test.end(),
                            std::back_inserter(expected));
      CHECK(pred.predicted_correct == expected);
    }

    // the full group reaches exactly the symmetry classes the train set
    // touches: labels 3 (from (1,2)) and 0 (from (0,0))
    OrbitPrediction everything = orbit_predict(ds, part, full, run);
    std::vector<PairIndex> classes = symmetry_class(spec, el({3}));
    for (PairIndex idx : symmetry_class(spec, el({0}))) classes.push_back(idx);
    std::sort(classes.begin(), classes.end());
    std::vector<PairIndex> expected_full;
    std::set_intersection(classes.begin(), classes.end(), part.test.begin(), part.test.end(),
                          std::back_inserter(expected_full));
    CHECK(everything.predicted_correct == expected_full);
    CHECK(everything.predicted_correct.size() == 8);
  }
}

TEST_CASE("heatmaps render linear grayscale") {
  const std::string path = "test_heatmap.pgm";

  SUBCASE("identity: white diagonal on black") {
    heatmap(MatrixXd::Identity(4, 4), path);
    Pgm img = read_pgm(path);
    CHECK(img.width == 4);
    CHECK(img.height == 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(img.pixels[i * 4 + j] == (i == j ? 255 : 0));
  }

  SUBCASE("constant matrices come out uniform") {
    heatmap(MatrixXd::Constant(3, 5, 4.2), path);
    Pgm img = read_pgm(path);
    for (unsigned char px : img.pixels) CHECK(px == img.pixels[0]);
  }

  SUBCASE("the swap representation shows two blocks") {
    GroupSpec z4 = GroupSpec::cyclic(4);
    MatrixXd pi = perm_rep(z4, reflection(z4.identity())).matrix;
    heatmap(pi, path);
    Pgm img = read_pgm(path);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        CHECK(img.pixels[i * 8 + j] == (pi(i, j) == 1.0 ? 255 : 0));
  }

  MatrixXd bad(2, 2);
  bad << 1, 2, 3, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(heatmap(bad, path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("matrix stats") {
  MatrixXd I = MatrixXd::Identity(5, 5);
  MatrixStats stats = matrix_stats(I);
  CHECK(stats.min == 0.0);
  CHECK(stats.max == 1.0);
  CHECK(stats.abs_mass == 5.0);
  CHECK(stats.rank_estimate == 5);

  Eigen::VectorXd v(4);
  v << 1, -2, 3, -4;
  MatrixXd rank1 = v * v.transpose();
  CHECK(matrix_stats(rank1).rank_estimate == 1);
  CHECK(matrix_stats(rank1).min == -12.0);
  CHECK(matrix_stats(rank1).max == 16.0);
}
