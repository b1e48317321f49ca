// Copyright 2026 The Lewis Authors. All Rights Reserved.
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

#include "lewis/toy.hpp"

#include "lewis/util.hpp"

namespace lewis::toy {
namespace {

const std::vector<std::string> kNouns{
    "food",  "service", "pizza", "pasta",  "staff",   "waiter",    "room",  "coffee", "soup",  "steak",
    "salad", "bread",   "dessert", "menu", "music",   "view",      "patio", "bar",    "burger", "sushi",
    "hotel", "lobby",   "pool",  "breakfast", "lunch", "dinner",   "table", "wine",   "beer",  "bakery"};
const std::vector<std::string> kPlaces{"downtown", "the mall",   "the station", "the airport", "the beach",
                                       "the park", "main street", "the corner", "the harbor",  "old town"};
const std::vector<std::string> kDays{"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
const std::vector<std::string> kPeople{"my wife",   "my husband", "my friend", "my boss",  "my sister",
                                       "my brother", "my mom",    "my dad",    "our kids", "our neighbor"};

// {A} and {B}: adjectives; {P}: phrase; {N}, {M}: nouns; {L}: place; {D}: day;
// {W}: person.
const std::vector<std::string> kScaffolds{
    "the {N} was {A} .",
    "this is {A} today",
    "the {N} at {L} was {A} .",
    "{W} said the {N} was {A} .",
    "we had a {A} {N} on {D} .",
    "the {N} and the {M} were {A} .",
    "our visit on {D} was {A} , the {N} was {B} .",
    "{A} {N} and {B} {M} !",
    "the {N} here is {P} .",
    "i took {W} to {L} on {D} and it was {P} .",
    "honestly , the {N} was {A} and the {M} was {B} .",
    "we ordered the {N} , {P} .",
    "{W} thinks this {N} is {A} .",
    "what a {A} place for {N} !",
    "the {N} on {D} was {A} as usual .",
    "i would say the {N} is {A} .",
};

const Lexicon kAdjectives{
    {"terrible", "awful",     "horrible",   "dreadful",  "lousy",      "disgusting", "rude",      "nasty",
     "mediocre", "poor",      "unpleasant", "bland",     "stale",      "dirty",      "unhelpful", "careless",
     "ugly",     "cramped",   "hideous",    "miserable", "pathetic",   "boring",     "impolite",  "stingy",
     "atrocious", "abysmal",  "crappy",     "dismal",    "shabby",     "subpar",     "filthy",    "hostile",
     "grumpy",   "unbearable", "disappointing", "stressful", "slow",   "overpriced", "worst",     "bad",
     "greasy",   "noisy",     "soggy",      "gross",     "inedible"},
    {"great",    "excellent", "amazing",    "wonderful", "fantastic",  "delicious",  "friendly",  "lovely",
     "perfect",  "superb",    "pleasant",   "tasty",     "fresh",      "clean",      "helpful",   "attentive",
     "beautiful", "cozy",     "gorgeous",   "outstanding", "brilliant", "charming",  "polite",    "generous",
     "marvelous", "terrific", "awesome",    "incredible", "splendid",  "exceptional", "spotless", "courteous",
     "cheerful", "enjoyable", "impressive", "relaxing",  "quick",      "reasonable", "best",      "good",
     "crispy",   "quiet",     "juicy",      "yummy",     "flavorful"},
};

const Lexicon kPhrases{
    {"a total waste of money", "not worth it", "a complete disaster", "never again", "a huge letdown",
     "far from acceptable"},
    {"worth every penny", "highly recommended", "a real gem", "simply the best", "a pleasant surprise",
     "better than expected"},
};

std::string pick(const std::vector<std::string>& v, Rng& rng) { return v[rng.index(v.size())]; }

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
  for (std::size_t at = text.find(key); at != std::string::npos; at = text.find(key, at + value.size())) {
    text.replace(at, key.size(), value);
  }
  return text;
}

}  // namespace

const Lexicon& adjectives() { return kAdjectives; }
const Lexicon& phrases() { return kPhrases; }

ToySentence ToyGenerator::sentence(const std::string& split, Style style, std::size_t index) const {
  Rng rng(derive_seed(seed_, {fnv1a64(split), static_cast<std::uint64_t>(style_index(style)), index}));
  const std::string& scaffold = pick(kScaffolds, rng);
  std::string shared = scaffold;
  shared = replace_all(shared, "{N}", pick(kNouns, rng));
  shared = replace_all(shared, "{M}", pick(kNouns, rng));
  shared = replace_all(shared, "{L}", pick(kPlaces, rng));
  shared = replace_all(shared, "{D}", pick(kDays, rng));
  shared = replace_all(shared, "{W}", pick(kPeople, rng));
  const std::size_t a = rng.index(kAdjectives.positive.size());
  const std::size_t b = rng.index(kAdjectives.positive.size());
  const std::size_t p = rng.index(kPhrases.positive.size());
  auto realize = [&](Style s) {
    const Lexicon& adj = kAdjectives;
    const auto& words = s == Style::k1 ? adj.positive : adj.negative;
    const auto& phrase = s == Style::k1 ? kPhrases.positive : kPhrases.negative;
    std::string out = replace_all(shared, "{A}", words[a]);
    out = replace_all(out, "{B}", words[b]);
    return replace_all(out, "{P}", phrase[p]);
  };
  return {realize(style), realize(opposite(style)), style};
}

std::vector<ToySentence> ToyGenerator::split(const std::string& name, Style style, std::size_t count) const {
  std::vector<ToySentence> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sentence(name, style, i));
  return out;
}

void write_corpus(const std::filesystem::path& dir, std::uint64_t seed, const ToySizes& sizes) {
  const ToyGenerator gen(seed);
  const std::vector<std::pair<std::string, std::size_t>> splits{
      {"train", sizes.train}, {"valid", sizes.valid}, {"test", sizes.test}, {"evalcls", sizes.evalcls}};
  for (Style style : {Style::k0, Style::k1}) {
    const std::string suffix = "." + std::to_string(style_index(style)) + ".txt";
    for (const auto& [name, count] : splits) {
      std::string text, refs;
      for (const auto& s : gen.split(name, style, count)) {
        text += s.text + '\n';
        refs += s.reference + '\n';
      }
      write_file(dir / (name + suffix), text);
      if (name == "test") write_file(dir / ("test_ref" + suffix), refs);
    }
  }
}

}  // namespace lewis::toy
