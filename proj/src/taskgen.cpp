#include "symrfm/taskgen.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "symrfm/rng.hpp"

namespace symrfm {

namespace {

std::vector<std::int32_t> complement(std::span<const std::int32_t> sorted_rows,
                                     std::int32_t total) {
  std::vector<std::int32_t> out;
  out.reserve(total - static_cast<std::int32_t>(sorted_rows.size()));
  size_t k = 0;
  for (std::int32_t i = 0; i < total; ++i) {
    if (k < sorted_rows.size() && sorted_rows[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

bool contains_row(std::span<const std::int32_t> sorted_rows, std::int32_t row) {
  return std::binary_search(sorted_rows.begin(), sorted_rows.end(), row);
}

// Move the selected rows from `from` into `to`; both stay sorted.
void transfer(std::vector<std::int32_t>& from, std::vector<std::int32_t>& to,
              const std::vector<std::int32_t>& moved) {
  std::vector<std::int32_t> rest;
  rest.reserve(from.size() - moved.size());
  std::set_difference(from.begin(), from.end(), moved.begin(), moved.end(),
                      std::back_inserter(rest));
  from = std::move(rest);
  std::vector<std::int32_t> merged;
  merged.reserve(to.size() + moved.size());
  std::merge(to.begin(), to.end(), moved.begin(), moved.end(), std::back_inserter(merged));
  to = std::move(merged);
}

}  // namespace

std::string to_string(OperationKind op) {
  switch (op) {
    case OperationKind::add: return "add";
    case OperationKind::sub: return "sub";
    case OperationKind::mul: return "mul";
    case OperationKind::div: return "div";
  }
  throw std::logic_error("unreachable");
}

OperationKind operation_from_string(std::string_view text) {
  if (text == "add") return OperationKind::add;
  if (text == "sub") return OperationKind::sub;
  if (text == "mul") return OperationKind::mul;
  if (text == "div") return OperationKind::div;
  throw std::invalid_argument("unknown operation: '" + std::string(text) + "'");
}

GroupElement Task::label_of(const Pair& p) const {
  if (variant == ActionVariant::direct) return spec.op(p.first, p.second);
  return spec.op(p.first, spec.inverse(p.second));
}

int Task::label_index_of(PairIndex row) const {
  return spec.index_of(label_of(pair_at(spec, row)));
}

Task make_task(OperationKind op, std::vector<int> moduli) {
  if (op == OperationKind::mul || op == OperationKind::div) {
    if (moduli.size() != 1)
      throw std::invalid_argument("mul/div tasks need a single prime modulus");
    return make_modular_task(op, moduli[0]);
  }
  Task task;
  task.operation = op;
  task.spec = GroupSpec::product(std::move(moduli));
  task.variant = op == OperationKind::sub ? ActionVariant::inverse : ActionVariant::direct;
  return task;
}

Task make_modular_task(OperationKind op, int modulus) {
  Task task;
  task.operation = op;
  switch (op) {
    case OperationKind::add:
    case OperationKind::sub:
      task.spec = GroupSpec::cyclic(modulus);
      break;
    case OperationKind::mul:
    case OperationKind::div:
      task.spec = GroupSpec::multiplicative(modulus);
      break;
  }
  task.variant = (op == OperationKind::sub || op == OperationKind::div)
                     ? ActionVariant::inverse
                     : ActionVariant::direct;
  return task;
}

nlohmann::json task_to_json(const Task& task) {
  nlohmann::json j;
  j["operation"] = to_string(task.operation);
  if (task.spec.kind() == GroupSpec::Kind::multiplicative) {
    j["modulus"] = task.spec.multiplicative_prime();
  } else {
    j["moduli"] = task.spec.moduli();
  }
  return j;
}

Task task_from_json(const nlohmann::json& j) {
  OperationKind op = operation_from_string(j.at("operation").get<std::string>());
  if (j.contains("modulus")) return make_modular_task(op, j.at("modulus").get<int>());
  return make_task(op, j.at("moduli").get<std::vector<int>>());
}

Dataset build_dataset(const Task& task) {
  const GroupSpec& spec = task.spec;
  const int n = spec.order();
  const std::int32_t rows = static_cast<std::int32_t>(n) * n;

  Dataset ds;
  ds.task = task;
  ds.samples = Eigen::MatrixXd::Zero(rows, 2 * n);
  ds.labels = Eigen::MatrixXd::Zero(rows, n);
  ds.label_index.resize(rows);

  for (std::int32_t row = 0; row < rows; ++row) {
    const int a = row / n;
    const int b = row % n;
    ds.samples(row, a) = 1.0;
    ds.samples(row, n + b) = 1.0;
    const int l = task.label_index_of(row);
    ds.labels(row, l) = 1.0;
    ds.label_index[row] = l;
  }
  return ds;
}

Partition partition_random(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("training fraction must lie in [0, 1]");
  const std::int32_t rows = ds.rows();
  const auto train_count = static_cast<std::int32_t>(fraction * rows);

  Rng rng(seed);
  Partition p;
  p.train = rng.sample(rows, train_count);
  p.test = complement(p.train, rows);
  p.provenance = {{"family", "random"},
                  {"task", task_to_json(ds.task)},
                  {"fraction", fraction},
                  {"seed", seed}};
  return p;
}

Partition partition_fixed_points(const Dataset& ds, const DihedralElement& refl) {
  if (!refl.reflected)
    throw std::invalid_argument("fixed-point partition needs a reflection");
  if (refl.variant != ds.task.variant)
    throw std::invalid_argument("reflection variant does not match the task");
  Partition p;
  p.test = fixed_points(ds.task.spec, refl);
  p.train = complement(p.test, ds.rows());
  p.provenance = {{"family", "fixed-points"},
                  {"task", task_to_json(ds.task)},
                  {"reflection", format(ds.task.spec, refl)}};
  return p;
}

Partition partition_subgroup_fixed_points(const Dataset& ds, const Subgroup& H) {
  std::vector<DihedralElement> refls = H.reflections();
  if (refls.empty())
    throw std::invalid_argument("subgroup partition needs at least one reflection");
  std::vector<std::int32_t> test;
  for (const auto& refl : refls) {
    if (refl.variant != ds.task.variant)
      throw std::invalid_argument("subgroup variant does not match the task");
    auto fixed = fixed_points(ds.task.spec, refl);
    std::vector<std::int32_t> merged;
    std::set_union(test.begin(), test.end(), fixed.begin(), fixed.end(),
                   std::back_inserter(merged));
    test = std::move(merged);
  }
  Partition p;
  p.test = std::move(test);
  p.train = complement(p.test, ds.rows());
  p.provenance = {{"family", "subgroup-fixed-points"},
                  {"task", task_to_json(ds.task)},
                  {"subgroup", format(ds.task.spec, H.presentation)}};
  return p;
}

Partition move_random(const Dataset& ds, const Partition& base, int count, std::uint64_t seed) {
  if (count < 0 || count > static_cast<int>(base.train.size()))
    throw std::invalid_argument("cannot move more rows than the train set holds");
  Rng rng(seed);
  auto picks = rng.sample(static_cast<std::int32_t>(base.train.size()), count);
  std::vector<std::int32_t> moved;
  moved.reserve(picks.size());
  for (auto i : picks) moved.push_back(base.train[i]);

  Partition p = base;
  transfer(p.train, p.test, moved);
  p.provenance = {{"family", "move-random"},
                  {"base", base.provenance},
                  {"count", count},
                  {"seed", seed}};
  return p;
}

Partition move_symmetric_pairs(const Dataset& ds, const Partition& base, int pair_count,
                               const DihedralElement& refl, std::uint64_t seed) {
  if (!refl.reflected) throw std::invalid_argument("symmetric moves need a reflection");
  const GroupSpec& spec = ds.task.spec;

  // Representatives of the 2-cycles of the reflection fully inside train.
  std::vector<std::int32_t> reps;
  for (std::int32_t row : base.train) {
    PairIndex partner = apply_to_index(spec, refl, row);
    if (partner > row && contains_row(base.train, partner)) reps.push_back(row);
  }
  if (pair_count < 0 || pair_count > static_cast<int>(reps.size()))
    throw std::invalid_argument("train set does not hold enough symmetric pairs");

  Rng rng(seed);
  auto picks = rng.sample(static_cast<std::int32_t>(reps.size()), pair_count);
  std::vector<std::int32_t> moved;
  moved.reserve(2 * picks.size());
  for (auto i : picks) {
    moved.push_back(reps[i]);
    moved.push_back(apply_to_index(spec, refl, reps[i]));
  }
  std::sort(moved.begin(), moved.end());

  Partition p = base;
  transfer(p.train, p.test, moved);
  p.provenance = {{"family", "move-symmetric-pairs"},
                  {"base", base.provenance},
                  {"pairs", pair_count},
                  {"reflection", format(spec, refl)},
                  {"seed", seed}};
  return p;
}

Partition move_fixed_to_train(const Dataset& ds, const Partition& base, int count,
                              std::uint64_t seed) {
  if (count < 0 || count > static_cast<int>(base.test.size()))
    throw std::invalid_argument("cannot move more rows than the test set holds");
  Rng rng(seed);
  auto picks = rng.sample(static_cast<std::int32_t>(base.test.size()), count);
  std::vector<std::int32_t> moved;
  moved.reserve(picks.size());
  for (auto i : picks) moved.push_back(base.test[i]);

  Partition p = base;
  transfer(p.test, p.train, moved);
  p.provenance = {{"family", "move-fixed-to-train"},
                  {"base", base.provenance},
                  {"count", count},
                  {"seed", seed}};
  return p;
}

bool is_invariant(const Dataset& ds, std::span<const std::int32_t> rows, const Subgroup& H) {
  const GroupSpec& spec = ds.task.spec;
  for (const auto& h : H.elements) {
    for (std::int32_t row : rows)
      if (!contains_row(rows, apply_to_index(spec, h, row))) return false;
  }
  return true;
}

Partition rebuild_partition(const Dataset& ds, const nlohmann::json& provenance) {
  const std::string family = provenance.at("family").get<std::string>();
  const GroupSpec& spec = ds.task.spec;

  if (provenance.contains("task")) {
    Task described = task_from_json(provenance.at("task"));
    if (!(described.spec == ds.task.spec) || described.operation != ds.task.operation)
      throw std::invalid_argument("partition provenance describes a different task");
  }

  if (family == "random") {
    return partition_random(ds, provenance.at("fraction").get<double>(),
                            provenance.at("seed").get<std::uint64_t>());
  }
  if (family == "fixed-points") {
    return partition_fixed_points(
        ds, parse_dihedral(spec, provenance.at("reflection").get<std::string>()));
  }
  if (family == "subgroup-fixed-points") {
    SubgroupSpec sg = parse_subgroup(spec, provenance.at("subgroup").get<std::string>());
    return partition_subgroup_fixed_points(ds, enumerate_subgroup(spec, sg));
  }
  if (family == "move-random") {
    Partition base = rebuild_partition(ds, provenance.at("base"));
    return move_random(ds, base, provenance.at("count").get<int>(),
                       provenance.at("seed").get<std::uint64_t>());
  }
  if (family == "move-symmetric-pairs") {
    Partition base = rebuild_partition(ds, provenance.at("base"));
    return move_symmetric_pairs(
        ds, base, provenance.at("pairs").get<int>(),
        parse_dihedral(spec, provenance.at("reflection").get<std::string>()),
        provenance.at("seed").get<std::uint64_t>());
  }
  if (family == "move-fixed-to-train") {
    Partition base = rebuild_partition(ds, provenance.at("base"));
    return move_fixed_to_train(ds, base, provenance.at("count").get<int>(),
                               provenance.at("seed").get<std::uint64_t>());
  }
  throw std::invalid_argument("unknown partition family: '" + family + "'");
}

void write_partition(const std::string& path, const Partition& partition) {
  nlohmann::json j;
  j["format"] = "symrfm-partition-v1";
  j["provenance"] = partition.provenance;
  j["train"] = partition.train;
  j["test"] = partition.test;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open partition file for writing: " + path);
  out << j.dump(2) << '\n';
}

Partition read_partition(const std::string& path, const Dataset& ds) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open partition file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("format").get<std::string>() != "symrfm-partition-v1")
    throw std::runtime_error("unsupported partition file format");
  Partition p;
  p.provenance = j.at("provenance");
  p.train = j.at("train").get<std::vector<std::int32_t>>();
  p.test = j.at("test").get<std::vector<std::int32_t>>();

  Partition rebuilt = rebuild_partition(ds, p.provenance);
  if (rebuilt.train != p.train || rebuilt.test != p.test)
    throw std::runtime_error("partition file index lists disagree with provenance");
  return p;
}

}  // namespace symrfm
