#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grokmlp {

// One task instance: label == (a + b) mod p unless the triple was corrupted,
// in which case the label is guaranteed to differ from the true sum.
struct Triple {
  int a = 0;
  int b = 0;
  int label = 0;
  bool corrupted = false;
};

struct SplitDataset {
  std::vector<Triple> train;
  std::vector<Triple> val;
  int p = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;  // master seed the split/corruption streams derive from
};

// All p^2 triples (a, b, (a+b) mod p), none corrupted. Rejects p < 2.
std::vector<Triple> generate_triples(int p);

// Stratified split: exactly floor(train_frac * p) train pairs per residue
// class, selected uniformly per class from `seed`. `triples` must be the
// complete p^2 set. Rejects train_frac outside (0, 1) and fractions small
// enough to leave an empty train set.
SplitDataset stratified_split(const std::vector<Triple>& triples, double train_frac,
                              std::uint64_t seed);

// Corrupts exactly round(alpha * |train|) train labels, chosen uniformly
// without replacement; each new label is uniform over the p-1 wrong classes.
// The validation set is untouched. Rejects alpha outside [0, 1] and inputs
// that already contain corrupted triples.
SplitDataset corrupt_labels(const SplitDataset& split, double alpha, std::uint64_t seed);

// generate + split + corrupt with independent streams derived from
// `master_seed`, so the split is identical across alpha values.
SplitDataset make_dataset(int p, double train_frac, double alpha, std::uint64_t master_seed);

// Audit export, columns: a,b,label,corrupted,subset. Not read back anywhere.
void export_split_csv(const SplitDataset& split, const std::string& path);

}  // namespace grokmlp
