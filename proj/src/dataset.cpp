#include "grokmlp/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "grokmlp/rng.hpp"

namespace grokmlp {

std::vector<Triple> generate_triples(int p) {
  if (p < 2) throw std::invalid_argument("generate_triples: modulus must be >= 2");
  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(p) * p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      triples.push_back({a, b, (a + b) % p, false});
    }
  }
  return triples;
}

SplitDataset stratified_split(const std::vector<Triple>& triples, double train_frac,
                              std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw std::invalid_argument("stratified_split: train_frac must lie in (0, 1)");
  }
  if (triples.empty()) throw std::invalid_argument("stratified_split: empty triple set");
  int p = 0;
  for (const Triple& t : triples) p = std::max(p, std::max(t.a, t.b) + 1);
  if (triples.size() != static_cast<std::size_t>(p) * p) {
    throw std::invalid_argument("stratified_split: expected the complete p^2 triple set");
  }

  const int per_class = static_cast<int>(std::floor(train_frac * p));
  if (per_class < 1) {
    throw std::invalid_argument("stratified_split: train_frac leaves an empty train set");
  }
  if (per_class >= p) {
    throw std::invalid_argument("stratified_split: train_frac leaves an empty validation set");
  }

  std::vector<std::vector<std::size_t>> by_class(p);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    if (t.corrupted || t.label != (t.a + t.b) % p) {
      throw std::invalid_argument("stratified_split: input triples must be clean");
    }
    by_class[t.label].push_back(i);
  }

  SplitDataset out;
  out.p = p;
  out.alpha = 0.0;
  out.seed = seed;
  out.train.reserve(static_cast<std::size_t>(per_class) * p);
  out.val.reserve(triples.size() - out.train.capacity());

  Rng rng(seed);
  for (int c = 0; c < p; ++c) {
    std::vector<std::size_t>& members = by_class[c];
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < static_cast<std::size_t>(per_class) ? out.train : out.val)
          .push_back(triples[members[k]]);
    }
  }
  return out;
}

SplitDataset corrupt_labels(const SplitDataset& split, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("corrupt_labels: alpha must lie in [0, 1]");
  }
  for (const Triple& t : split.train) {
    if (t.corrupted) throw std::invalid_argument("corrupt_labels: input is already corrupted");
  }

  SplitDataset out = split;
  out.alpha = alpha;
  const std::size_t n_train = out.train.size();
  const std::size_t n_corrupt =
      static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n_train)));
  if (n_corrupt == 0) return out;

  Rng rng(seed);
  // Partial Fisher-Yates: the first n_corrupt entries are a uniform sample
  // without replacement.
  std::vector<std::size_t> idx(n_train);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < n_corrupt; ++k) {
    const std::size_t j = k + rng.below(n_train - k);
    std::swap(idx[k], idx[j]);
  }
  for (std::size_t k = 0; k < n_corrupt; ++k) {
    Triple& t = out.train[idx[k]];
    const int true_label = (t.a + t.b) % out.p;
    const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(out.p - 1)));
    t.label = (r >= true_label) ? r + 1 : r;  // uniform over the p-1 wrong classes
    t.corrupted = true;
  }
  return out;
}

SplitDataset make_dataset(int p, double train_frac, double alpha, std::uint64_t master_seed) {
  SplitDataset split =
      stratified_split(generate_triples(p), train_frac, derive_seed(master_seed, Stream::split));
  split.seed = master_seed;
  return corrupt_labels(split, alpha, derive_seed(master_seed, Stream::corrupt));
}

void export_split_csv(const SplitDataset& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_split_csv: cannot open " + path);
  out << "a,b,label,corrupted,subset\n";
  auto emit = [&out](const std::vector<Triple>& triples, const char* subset) {
    for (const Triple& t : triples) {
      out << t.a << ',' << t.b << ',' << t.label << ',' << (t.corrupted ? 1 : 0) << ',' << subset
          << '\n';
    }
  };
  emit(split.train, "train");
  emit(split.val, "val");
}

}  // namespace grokmlp
