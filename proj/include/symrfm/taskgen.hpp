#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "symrfm/group.hpp"

namespace symrfm {

enum class OperationKind { add, sub, mul, div };

std::string to_string(OperationKind op);
OperationKind operation_from_string(std::string_view text);

/// A binary-operation learning task over a finite Abelian group. add/mul use
/// the group operation directly; sub/div use the right-inverse operation
/// f(a,b) = a * b^-1 and therefore the inverse-variant symmetry action.
struct Task {
  OperationKind operation = OperationKind::add;
  GroupSpec spec;
  ActionVariant variant = ActionVariant::direct;

  GroupElement label_of(const Pair& p) const;
  int label_index_of(PairIndex row) const;
};

/// add/sub over a product of cyclic factors.
Task make_task(OperationKind op, std::vector<int> moduli);
/// mul/div over Z_p^* for prime p (order p-1); also accepts add/sub with a
/// single modulus for convenience.
Task make_modular_task(OperationKind op, int modulus);

nlohmann::json task_to_json(const Task& task);
Task task_from_json(const nlohmann::json& j);

/// The full Cayley-table dataset: every ordered pair, one-hot encoded, in
/// canonical row order (row = index(a) * n + index(b)).
struct Dataset {
  Task task;
  Eigen::MatrixXd samples;                 // n^2 x 2n
  Eigen::MatrixXd labels;                  // n^2 x n
  std::vector<std::int32_t> label_index;   // n^2

  int group_order() const { return task.spec.order(); }
  std::int32_t rows() const { return static_cast<std::int32_t>(samples.rows()); }
  Pair pair_of_row(PairIndex row) const { return pair_at(task.spec, row); }
};

Dataset build_dataset(const Task& task);

/// Disjoint train/test split of dataset rows. The provenance block fully
/// determines both index sets given the task (see rebuild_partition).
struct Partition {
  std::vector<std::int32_t> train;  // sorted
  std::vector<std::int32_t> test;   // sorted
  nlohmann::json provenance;
};

Partition partition_random(const Dataset& ds, double fraction, std::uint64_t seed);

/// Test set = fixed points of one reflection, train = the rest. The train
/// set is H-invariant for H = {id, sr^x}.
Partition partition_fixed_points(const Dataset& ds, const DihedralElement& refl);

/// Test set = union of fixed points over every reflection in H.
Partition partition_subgroup_fixed_points(const Dataset& ds, const Subgroup& H);

/// Move a fresh uniform m-subset of the given partition's train set to test.
/// Each call draws from the base train set, so different counts are
/// independent draws rather than nested ones.
Partition move_random(const Dataset& ds, const Partition& base, int count, std::uint64_t seed);

/// Move m train pairs {(a,b), sr^x(a,b)} together, keeping the train set
/// invariant under {id, sr^x}. Fixed points of the reflection never move.
Partition move_symmetric_pairs(const Dataset& ds, const Partition& base, int pair_count,
                               const DihedralElement& refl, std::uint64_t seed);

/// Move a fresh uniform m-subset of the base partition's test set to train.
Partition move_fixed_to_train(const Dataset& ds, const Partition& base, int count,
                              std::uint64_t seed);

/// True iff every h in H permutes the row set onto itself.
bool is_invariant(const Dataset& ds, std::span<const std::int32_t> rows, const Subgroup& H);

/// Reconstruct a partition bit-exactly from its provenance block.
Partition rebuild_partition(const Dataset& ds, const nlohmann::json& provenance);

void write_partition(const std::string& path, const Partition& partition);
Partition read_partition(const std::string& path, const Dataset& ds);

}  // namespace symrfm
