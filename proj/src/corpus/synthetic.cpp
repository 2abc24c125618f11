#include "recembed/corpus/synthetic.hpp"

#include <algorithm>
#include <set>

#include "recembed/core/rng.hpp"

namespace recembed::corpus {

namespace {

const char* kSyllables[] = {"ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pa",
                            "ri", "so", "tu", "va", "wo", "za", "ke", "lu", "mo", "ne",
                            "pi", "ra", "su", "ta", "ve", "wi", "zo", "bu", "co", "da"};
constexpr int kNumSyllables = int(sizeof(kSyllables) / sizeof(kSyllables[0]));

const char* kVerbs[] = {"mix",   "stir",  "bake",  "simmer", "whisk", "fold",  "roast",
                        "grill", "steam", "saute", "chop",   "blend", "knead", "poach",
                        "toast", "braise", "sear",  "boil",   "glaze", "mash"};
const char* kDishes[] = {"stew",    "salad",  "pie",      "soup",    "curry",
                         "bread",   "ragout", "cake",     "noodles", "tacos",
                         "risotto", "chili",  "pasta",    "gratin",  "pilaf",
                         "omelet",  "porridge", "skewers", "dumplings", "fritters"};
const char* kAdjectives[] = {"soft", "golden", "tender", "crisp", "smooth",
                             "thick", "fragrant", "light", "brown", "fluffy"};
constexpr int kNumVerbs = int(sizeof(kVerbs) / sizeof(kVerbs[0]));
constexpr int kNumDishes = int(sizeof(kDishes) / sizeof(kDishes[0]));
constexpr int kNumAdjectives = int(sizeof(kAdjectives) / sizeof(kAdjectives[0]));

std::string ingredient_name(int global_index) {
  const int a = global_index / kNumSyllables;
  const int b = global_index % kNumSyllables;
  if (a >= kNumSyllables) {
    // Very large vocabularies wrap with a numeric tail.
    return std::string(kSyllables[a % kNumSyllables]) + kSyllables[b] +
           std::to_string(a / kNumSyllables);
  }
  return std::string(kSyllables[a]) + kSyllables[b];
}

}  // namespace

Eigen::VectorXd SyntheticCorpus::bag_of_ingredients(const Recipe& r) const {
  std::unordered_map<std::string, int> lookup;
  for (std::size_t g = 0; g < ingredient_names.size(); ++g)
    lookup.emplace(ingredient_names[g], int(g));
  Eigen::VectorXd bag = Eigen::VectorXd::Zero(Eigen::Index(ingredient_names.size()));
  for (const auto& line : r.ingredients) {
    auto it = lookup.find(line);
    if (it != lookup.end()) bag(it->second) = 1.0;
  }
  return bag;
}

Eigen::VectorXd SyntheticCorpus::clean_feature(const Recipe& r) const {
  return projection * bag_of_ingredients(r);
}

SyntheticCorpus generate_synthetic_corpus(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();

  SyntheticCorpus out;
  const int vocab = spec.num_classes * spec.ingredient_pool_per_class;
  out.ingredient_names.reserve(std::size_t(vocab));
  for (int g = 0; g < vocab; ++g) out.ingredient_names.push_back(ingredient_name(g));

  // Frozen projection; drawn once from its own stream so recipe sampling does
  // not disturb it.
  Rng proj_rng(derive_seed(seed, 0));
  out.projection.resize(spec.feature_dim, vocab);
  for (int j = 0; j < vocab; ++j)
    for (int i = 0; i < spec.feature_dim; ++i) out.projection(i, j) = proj_rng.normal();

  out.features.dim = spec.feature_dim;

  for (int c = 0; c < spec.num_classes; ++c) {
    std::set<std::vector<int>> used_sets;
    for (int i = 0; i < spec.recipes_per_class; ++i) {
      Rng rng(derive_seed(seed, 1 + std::uint64_t(c) * std::uint64_t(spec.recipes_per_class) +
                                    std::uint64_t(i)));
      Recipe r;
      r.id = "r" + std::to_string(c) + "_" + std::to_string(i);
      r.class_id = c;
      r.image_feature_ref = "img_" + r.id;
      const std::string dish = kDishes[c % kNumDishes];
      r.title = dish + " " + std::to_string(i);

      // Class-specific ingredient subset; distinct sets within a class keep
      // the image features separable.
      std::vector<int> chosen;
      for (int attempt = 0; attempt < 200; ++attempt) {
        const int k = spec.min_ingredients +
                      rng.uniform_int(spec.max_ingredients - spec.min_ingredients + 1);
        std::vector<int> pool(std::size_t(spec.ingredient_pool_per_class));
        for (int p = 0; p < spec.ingredient_pool_per_class; ++p)
          pool[std::size_t(p)] = c * spec.ingredient_pool_per_class + p;
        rng.shuffle(pool.begin(), pool.end());
        chosen.assign(pool.begin(), pool.begin() + k);
        std::sort(chosen.begin(), chosen.end());
        if (used_sets.insert(chosen).second) break;
      }
      for (int g : chosen) r.ingredients.push_back(out.ingredient_names[std::size_t(g)]);

      const std::string verb = kVerbs[c % kNumVerbs];
      const int m = spec.min_instructions +
                    rng.uniform_int(spec.max_instructions - spec.min_instructions + 1);
      for (int s = 0; s < m; ++s) {
        const auto& ing_a = r.ingredients[std::size_t(rng.uniform_int(int(r.ingredients.size())))];
        const auto& ing_b = r.ingredients[std::size_t(rng.uniform_int(int(r.ingredients.size())))];
        const std::string adj = kAdjectives[rng.uniform_int(kNumAdjectives)];
        switch (s % 3) {
          case 0:
            r.instructions.push_back(verb + " the " + ing_a + " and " + ing_b + " until " + adj +
                                     ".");
            break;
          case 1:
            r.instructions.push_back("add the " + ing_a + " to the " + dish + " and " + verb +
                                     " well.");
            break;
          default:
            r.instructions.push_back("serve the " + adj + " " + dish + " with " + ing_a + ".");
            break;
        }
      }

      Eigen::VectorXd bag = Eigen::VectorXd::Zero(vocab);
      for (int g : chosen) bag(g) = 1.0;
      Eigen::VectorXd feature = out.projection * bag;
      for (int d = 0; d < spec.feature_dim; ++d) feature(d) += spec.sigma * rng.normal();

      out.features.add(r.image_feature_ref, std::move(feature));
      out.recipes.push_back(std::move(r));
    }
  }
  return out;
}

CorpusSplit stratified_split(const std::vector<Recipe>& recipes, double train_frac,
                             double val_frac, std::uint64_t seed) {
  if (train_frac <= 0 || val_frac < 0 || train_frac + val_frac >= 1.0)
    throw std::invalid_argument("stratified_split: fractions invalid");
  std::unordered_map<int, std::vector<std::string>> by_class;
  for (const auto& r : recipes) by_class[r.class_id].push_back(r.id);

  std::vector<int> classes;
  for (const auto& [c, ids] : by_class) classes.push_back(c);
  std::sort(classes.begin(), classes.end());

  CorpusSplit split;
  for (int c : classes) {
    auto ids = by_class[c];
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, 0x5eed0000u + std::uint64_t(c)));
    rng.shuffle(ids.begin(), ids.end());
    const int n = int(ids.size());
    const int n_train = int(train_frac * n);
    const int n_val = int(val_frac * n);
    for (int i = 0; i < n; ++i) {
      if (i < n_train)
        split.train.push_back(ids[std::size_t(i)]);
      else if (i < n_train + n_val)
        split.validation.push_back(ids[std::size_t(i)]);
      else
        split.test.push_back(ids[std::size_t(i)]);
    }
  }
  return split;
}

}  // namespace recembed::corpus
