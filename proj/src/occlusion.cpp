#include "advtext/occlusion.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "advtext/parallel.hpp"
#include "advtext/utf8.hpp"

namespace advtext {

ProbeError::ProbeError(std::size_t token, const std::string& what)
    : Error("probe for token " + std::to_string(token) + " failed: " + what), token_(token) {}

std::vector<std::string> gen_probes(const Doc& doc) {
  std::vector<std::string> out;
  out.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) {
    const std::size_t cps = utf8::length(std::string_view(doc.text).substr(t.begin, t.end - t.begin));
    std::string p = doc.text.substr(0, t.begin);
    p.append(cps, ' ');
    p.append(doc.text, t.end);
    out.push_back(std::move(p));
  }
  return out;
}

DeviationTable deviations(const Classifier& model, const Doc& doc, std::size_t jobs,
                          std::span<const std::size_t> order) {
  const auto probes = gen_probes(doc);
  if (!order.empty()) {
    std::vector<std::size_t> check(order.begin(), order.end());
    std::sort(check.begin(), check.end());
    std::vector<std::size_t> ids(probes.size());
    std::iota(ids.begin(), ids.end(), 0);
    if (check != ids) throw InvalidArgument("evaluation order must be a permutation of the token indices");
  }
  DeviationTable t;
  t.seed = model.classify(doc.text);
  t.seed_class = argmax(t.seed);
  t.probe_conf.resize(probes.size());
  std::size_t failed = 0;
  try {
    parallel_for(
        probes.size(), jobs,
        [&](std::size_t i) {
          const std::size_t tok = order.empty() ? i : order[i];
          t.probe_conf[tok] = model.classify(probes[tok]);
        },
        &failed);
  } catch (const std::exception& e) {
    throw ProbeError(order.empty() ? failed : order[failed], e.what());
  }
  t.calls = probes.size() + 1;
  t.deviation.reserve(probes.size());
  for (const auto& c : t.probe_conf) t.deviation.push_back(t.seed[t.seed_class] - c.at(t.seed_class));
  return t;
}

std::ptrdiff_t top_token(const DeviationTable& table) {
  if (table.deviation.empty()) return -1;
  return std::max_element(table.deviation.begin(), table.deviation.end()) - table.deviation.begin();
}

std::vector<HotSpan> hsps_black(const DeviationTable& table, const Doc& doc, std::size_t k) {
  if (k == 0) throw InvalidArgument("top-k must be at least 1");
  if (table.deviation.size() != doc.tokens.size()) throw InvalidArgument("deviation table does not match the doc");
  return hot_words(doc, table.deviation, k).phrases;
}

std::vector<HotSpan> hsps_black(const Classifier& model, const Doc& doc, const OcclusionConfig& config) {
  if (doc.tokens.empty()) return {};
  return hsps_black(deviations(model, doc, config.jobs), doc, config.top_k);
}

MiningResult mine_htps_black(const Classifier& model, const std::vector<Doc>& training, std::size_t top_n,
                             const OcclusionConfig& config) {
  if (training.empty()) throw InvalidArgument("HTP mining needs a nonempty training set");
  MiningResult out;
  out.dump.resize(training.size());
  // Samples run one after another; probes inside a sample use the jobs.
  for (std::size_t i = 0; i < training.size(); ++i) {
    const Doc& d = training[i];
    if (!d.label) throw InvalidArgument("doc '" + d.id + "' has no label");
    model.class_index(*d.label);
    PhraseDump& pd = out.dump[i];
    pd.sample_id = d.id;
    pd.cls = *d.label;
    if (d.tokens.empty()) continue;
    const auto best = top_token(deviations(model, d, config.jobs));
    pd.phrases.push_back(d.tokens[static_cast<std::size_t>(best)].word);
  }
  out.table = count_htps(out.dump, model.classes(), top_n);
  return out;
}

void write_probe_dump(std::ostream& out, const Doc& doc) {
  const auto probes = gen_probes(doc);
  for (std::size_t i = 0; i < probes.size(); ++i) out << i << '\t' << probes[i] << '\n';
}

}  // namespace advtext
