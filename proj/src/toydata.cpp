#include "advtext/toydata.hpp"

#include <map>

#include "advtext/store.hpp"

namespace advtext {

namespace {

using Pools = std::map<std::string, std::vector<std::string>>;

const Pools& shared_pools() {
  static const Pools p{
      {"city",
       {"Ohio", "Ontario", "Bavaria", "Lyon", "Texas", "Osaka", "Bristol", "Leeds", "Kyoto", "Porto", "Denver",
        "Quebec", "Geneva", "Perth", "Austin", "Oslo", "Vermont", "Galway"}},
      {"person",
       {"John Miller", "Anna Berg", "Paul Kent", "Maria Lopez", "Kenji Sato", "Laura Stone", "Peter Hale",
        "Emma Ward", "David Cole", "Sofia Marin", "Tom Baker", "Ruth Adams"}},
      {"syl1", {"Nor", "Vel", "Tar", "Mon", "Kel", "Bra", "Dun", "Ast", "Cor", "Lin", "Mar", "Sel", "Hal", "Ro", "Ven",
                "Tor", "Ash", "Gre"}},
      {"syl2", {"ex", "ton", "ia", "ford", "ick", "an", "or", "en", "is", "wood", "ley", "ara", "mere", "dale"}},
      {"word", {"Silent", "River", "Night", "Glass", "Winter", "Road", "Last", "Summer", "Blue", "Garden", "Stone",
                "Shadow", "Golden", "City", "Wild", "Heart"}},
      {"n", {"2", "3", "4", "12", "40", "75", "120", "250", "300", "900"}},
      {"filler",
       {"Its name comes from a local family.", "It remains well known in the region.",
        "The name was changed in {year}.", "It has been featured in several books.",
        "Little else is recorded about its early years.", "It is mentioned in a {year} survey of {city}.",
        "A photograph of it hangs in the {city} archive.", "Local newspapers covered it in {year}.", ""}},
  };
  return p;
}

struct TopicClass {
  std::string name;
  std::vector<std::string> first;
  std::vector<std::string> second;
  std::vector<std::string> third;
  Pools pools;
};

const std::vector<TopicClass>& topic_classes() {
  static const std::vector<TopicClass> c{
      {"Building",
       {"{nm} {bname} is a {b_adj} {b_noun} {b_loc} {city}.", "The {nm} {bname} is a {b_adj} {b_noun} {b_loc} {city}."},
       {"It was {b_made} in {year} {b_by} and {b_feat}.", "{b_start} in {year}, and the {b_noun} {b_feat}.",
        "The {b_noun} dates from {year} and {b_feat}."},
       {"The {b_part} is a contributing property in the historic district.",
        "The {b_part} stands on a hill near the old town.", "Its interior retains the original {b_part}.",
        "Visitors can tour the {b_part} on weekends.", "The {b_part} was renovated in {year}."},
       {{"bname", {"Hall", "House", "Tower", "Church", "Castle", "Manor", "Chapel", "Building", "Mill", "Court"}},
        {"b_adj", {"historic", "historic", "old", "listed", "restored", "Gothic", "Victorian", "Georgian"}},
        {"b_noun", {"house", "church", "building", "mansion", "hotel", "courthouse", "castle", "tower", "farmhouse",
                    "library"}},
        {"b_loc", {"located in", "in", "situated in", "near"}},
        {"b_made", {"built", "constructed", "erected", "completed"}},
        {"b_start", {"Construction began", "Work on the structure started", "The foundation was laid"}},
        {"b_part", {"staircase", "facade", "chapel", "roof", "tower", "hall", "porch", "courtyard"}},
        {"b_by", {"by architect {person}", "in the Gothic Revival style", "of brick and stone",
                  "for a local merchant"}},
        {"b_feat", {"was listed on the National Register of Historic Places in {year}", "is now a museum",
                    "has three stories and a slate roof", "was restored in {year}", "has a tall clock tower",
                    "serves as a parish church"}}}},
      {"Company",
       {"{nm} {corp} is a {c_adj} {c_noun} {c_loc} {city}.", "{nm} {corp} is a {c_adj} {c_noun} {c_loc} {city}."},
       {"The {c_self} was {c_made} in {year} by {person} and {c_verb} {c_product}.",
        "{c_made2} in {year}, the {c_self} {c_verb} {c_product}.",
        "Since {year} the {c_self} {c_verb} {c_product}."},
       {"It has {n} employees and its shares trade on the stock exchange.",
        "The {c_self} operates subsidiaries in {n} countries.", "Its revenue grew after a merger in {year}.",
        "Its chief executive is {person}.", "The {c_self} reported a profit in {year}."},
       {{"corp", {"Inc.", "Ltd.", "Group", "Systems", "Holdings", "Corporation", "Industries"}},
        {"c_adj", {"American", "Canadian", "German", "Japanese", "private", "public", "multinational"}},
        {"c_noun", {"company", "software company", "manufacturer", "retailer", "bank", "publisher", "brewery",
                    "technology company", "record label", "insurer"}},
        {"c_loc", {"headquartered in", "based in", "with offices in", "registered in"}},
        {"c_self", {"company", "firm", "business", "corporation"}},
        {"c_made", {"founded", "established", "incorporated", "started"}},
        {"c_made2", {"Founded", "Established", "Incorporated"}},
        {"c_verb", {"produces", "sells", "develops", "distributes", "markets", "provides"}},
        {"c_product", {"software", "consumer electronics", "financial services", "beer and soft drinks", "clothing",
                       "video games", "medical devices", "office furniture", "mobile phones"}}}},
      {"Film",
       {"{title} is a {year} {f_adj} film {f_by} {person}.", "{title} is a {f_adj} film released in {year} and {f_by} {person}."},
       {"The {f_self} stars {person} and {person} and {f_feat}.", "It stars {person} and {f_feat}.",
        "Starring {person}, the {f_self} {f_feat}."},
       {"The story follows a young {role} who {plot}.", "A sequel was released in {year}.",
        "The soundtrack was composed by {person}.", "The screenplay was written by {person}.",
        "Critics praised the {f_part}."},
       {{"title", {"The {word} {word}", "{word} of {word}", "The {word}", "{word} {word}"}},
        {"f_adj", {"American", "British", "French", "drama", "comedy", "horror", "romantic comedy", "crime drama",
                   "documentary", "animated"}},
        {"f_by", {"directed by", "made by", "from director", "helmed by"}},
        {"f_self", {"film", "movie", "picture"}},
        {"f_part", {"acting", "score", "cinematography", "script", "direction"}},
        {"f_feat", {"was released by {nm} Pictures", "premiered at the Cannes Film Festival",
                    "received mixed reviews from critics", "won an award for best screenplay",
                    "was a box office success", "was shot on location in {city}"}},
        {"role", {"teacher", "detective", "singer", "soldier", "girl", "lawyer"}},
        {"plot", {"returns to her hometown", "falls in love", "solves a murder", "loses everything"}}}},
      {"Transportation",
       {"The {nm} {tname} is a {t_adj} {t_noun} {t_made}.", "The {tname} is a {t_adj} {t_noun} {t_made}."},
       {"It was {t_intro} in {year} and {t_feat}.", "The {t_noun} first {t_went} in {year} and {t_feat}.",
        "Since {year} the {t_noun} {t_feat}."},
       {"A total of {n} units were built.", "The {t_noun} was launched from a shipyard in {city}.",
        "Several examples are preserved in museums.", "Its {t_part} was upgraded in {year}.",
        "The {t_noun} uses a {t_part} of local design."},
       {{"tname", {"K-{n}", "Class {n}", "Model {n}", "Mark {n}", "Type {n}"}},
        {"t_adj", {"diesel", "steam", "twin-engine", "light", "four-door", "military", "passenger", "electric"}},
        {"t_noun", {"locomotive", "aircraft", "car", "ship", "train", "helicopter", "bus", "ferry", "truck",
                    "airliner", "motorcycle"}},
        {"t_intro", {"introduced", "launched", "unveiled", "commissioned"}},
        {"t_went", {"flew", "sailed", "ran", "drove"}},
        {"t_part", {"engine", "gearbox", "hull", "cockpit", "chassis", "propeller"}},
        {"t_made", {"built by {nm} Motors", "produced by {nm} Aviation", "manufactured in {city}",
                    "designed for the navy", "operated by the national railway"}},
        {"t_feat", {"has a top speed of {n} km/h", "carries up to {n} passengers", "was powered by a V8 engine",
                    "served on regional routes", "entered service with the air force", "was retired in {year}"}}}},
  };
  return c;
}

const std::string& pick(const std::vector<std::string>& v, Rng& rng) { return v[rng.below(v.size())]; }

std::string expand(const std::string& tmpl, const Pools& local, const Pools& shared, Rng& rng, int depth = 0) {
  if (depth > 6) throw Error("toy template nests too deeply: " + tmpl);
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{') {
      out += tmpl[i];
      continue;
    }
    const auto close = tmpl.find('}', i);
    const std::string slot = tmpl.substr(i + 1, close - i - 1);
    i = close;
    if (slot == "year") {
      out += std::to_string(1890 + rng.below(121));
    } else if (slot == "nm") {
      out += pick(shared.at("syl1"), rng) + pick(shared.at("syl2"), rng);
    } else if (auto it = local.find(slot); it != local.end()) {
      out += expand(pick(it->second, rng), local, shared, rng, depth + 1);
    } else {
      out += expand(pick(shared.at(slot), rng), local, shared, rng, depth + 1);
    }
  }
  return out;
}

void join(std::string& text, const std::string& sentence) {
  if (sentence.empty()) return;
  if (!text.empty()) text += ' ';
  text += sentence;
}

Doc topic_doc(std::size_t cls, Rng& rng, const std::string& id) {
  const auto& classes = topic_classes();
  const auto& c = classes[cls];
  const auto& shared = shared_pools();
  std::string text;
  join(text, expand(pick(c.first, rng), c.pools, shared, rng));
  join(text, expand(pick(c.second, rng), c.pools, shared, rng));
  if (rng.uniform() < 0.15) {
    // A sentence borrowed from another class keeps the task from being trivial.
    const auto& other = classes[(cls + 1 + rng.below(classes.size() - 1)) % classes.size()];
    join(text, expand(pick(other.third, rng), other.pools, shared, rng));
  } else {
    join(text, expand(pick(c.third, rng), c.pools, shared, rng));
  }
  join(text, expand(pick(shared.at("filler"), rng), c.pools, shared, rng));
  join(text, expand(pick(c.third, rng), c.pools, shared, rng));
  join(text, expand(pick(shared.at("filler"), rng), c.pools, shared, rng));
  join(text, expand(pick(shared.at("filler"), rng), c.pools, shared, rng));
  return Doc::make(id, text, c.name);
}

const Pools& review_pools() {
  static const Pools p{
      {"product", {"phone", "camera", "router", "player", "printer", "headset", "speaker", "laptop"}},
      {"aspect", {"battery", "screen", "sound", "picture quality", "software", "keyboard", "menu", "remote", "case",
                  "charger", "lens", "signal"}},
      {"time", {"week", "month", "year", "summer"}},
      {"relative", {"wife", "husband", "son", "daughter", "father", "mother"}},
      {"day", {"monday", "friday", "saturday", "time"}},
      {"color", {"black", "silver", "white", "blue"}},
      {"n", {"5", "10", "15", "20"}},
      {"pos", {"great", "excellent", "amazing", "perfect", "fantastic", "awesome", "reliable", "impressive",
               "solid", "superb"}},
      {"neg", {"terrible", "awful", "poor", "bad", "useless", "horrible", "flimsy", "disappointing", "cheap",
               "broken"}},
      {"pos_verb", {"love", "recommend", "enjoy"}},
      {"neg_verb", {"hate", "regret", "returned"}},
      {"Positive",
       {"the {aspect} is {pos} .", "this {product} is {pos} .", "overall it is {pos} .",
        "i think the {aspect} is {pos} .", "{pos} {aspect} and {pos} {aspect} .", "i {pos_verb} this {product} .",
        "the {aspect} works and it is {pos} .", "a {pos} {product} for the price ."}},
      {"Negative",
       {"the {aspect} is {neg} .", "this {product} is {neg} .", "overall it is {neg} .",
        "i think the {aspect} is {neg} .", "{neg} {aspect} and {neg} {aspect} .", "i {neg_verb} this {product} .",
        "the {aspect} is not good and it is {neg} .", "a {neg} {product} for the price ."}},
      {"neutral",
       {"i bought this {product} last {time} .", "i use it every day .", "it came in a small box .",
        "my {relative} uses it too .", "the {aspect} is {color} .", "i got it for my {relative} .",
        "it arrived on {day} .", "setup took about {n} minutes .", "i read the manual first ."}},
  };
  return p;
}

Doc review_doc(std::size_t cls, Rng& rng, const std::string& id) {
  static const std::string names[] = {"Negative", "Positive"};
  const auto& p = review_pools();
  const Pools none;
  std::vector<std::string> sentences;
  const std::size_t own = 2 + rng.below(2);
  for (std::size_t i = 0; i < own; ++i) sentences.push_back(expand(pick(p.at(names[cls]), rng), p, none, rng));
  const std::size_t neutral = 1 + rng.below(2);
  for (std::size_t i = 0; i < neutral; ++i) sentences.push_back(expand(pick(p.at("neutral"), rng), p, none, rng));
  if (rng.uniform() < 0.2) sentences.push_back(expand(pick(p.at(names[1 - cls]), rng), p, none, rng));
  for (std::size_t i = sentences.size(); i > 1; --i) std::swap(sentences[i - 1], sentences[rng.below(i)]);
  std::string text;
  for (const auto& s : sentences) join(text, s);
  return Doc::make(id, text, names[cls]);
}

template <typename Make>
ToySplit generate(std::size_t train, std::size_t test, std::size_t classes, std::uint64_t seed, Make make) {
  Rng rng(seed);
  ToySplit out;
  for (std::size_t i = 0; i < train + test; ++i) {
    const bool is_train = i < train;
    const std::size_t row = (is_train ? i : i - train) + 1;
    Doc d = make(i % classes, rng, std::to_string(row));
    (is_train ? out.train : out.test).push_back(std::move(d));
  }
  return out;
}

}  // namespace

ToySplit make_topic_corpus(std::size_t train, std::size_t test, std::uint64_t seed) {
  return generate(train, test, topic_classes().size(), seed, topic_doc);
}

ToySplit make_sentiment_corpus(std::size_t train, std::size_t test, std::uint64_t seed) {
  return generate(train, test, 2, seed, review_doc);
}

void write_toy_data(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const auto topic = make_topic_corpus(1000, 250, seed);
  const auto reviews = make_sentiment_corpus(800, 200, seed + 4);
  save_dataset(dir / "topic_train.csv", topic.train);
  save_dataset(dir / "topic_test.csv", topic.test);
  save_dataset(dir / "sentiment_train.csv", reviews.train);
  save_dataset(dir / "sentiment_test.csv", reviews.test);
}

}  // namespace advtext
