#include "advtext/attack.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "advtext/parallel.hpp"

namespace advtext {

namespace {

const char* const knowledge_names[] = {"white", "black"};
const char* const outcome_names[] = {"success", "budget-exhausted", "no-improving-candidate"};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(Knowledge k) { return knowledge_names[static_cast<int>(k)]; }
std::string to_string(Outcome o) { return outcome_names[static_cast<int>(o)]; }

Knowledge parse_knowledge(const std::string& name) {
  if (name == "white") return Knowledge::white;
  if (name == "black") return Knowledge::black;
  throw InvalidArgument("unknown knowledge mode '" + name + "' (expected white or black)");
}

Outcome parse_outcome(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == outcome_names[i]) return static_cast<Outcome>(i);
  }
  throw InvalidArgument("unknown outcome '" + name + "'");
}

StrategyMask parse_strategies(const std::string& list) {
  StrategyMask m{false, false, false};
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (item == "insert") {
      m.insert = true;
    } else if (item == "modify") {
      m.modify = true;
    } else if (item == "remove") {
      m.remove = true;
    } else {
      throw InvalidArgument("unknown strategy '" + item + "' (expected insert, modify or remove)");
    }
  }
  return m;
}

std::string to_string(const StrategyMask& mask) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(mask.insert, "insert");
  add(mask.modify, "modify");
  add(mask.remove, "remove");
  return out;
}

void AttackConfig::validate() const {
  if (budget < 1) throw InvalidArgument("budget must be at least 1");
  if (cap < 1) throw InvalidArgument("candidate cap must be at least 1");
  if (!(min_gain > 0.0)) throw InvalidArgument("minimum gain must be positive");
}

bool better_candidate(const CandidateScore& a, const CandidateScore& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  const auto& p = a.perturbation;
  const auto& q = b.perturbation;
  const std::size_t ca = p.changed_chars();
  const std::size_t cb = q.changed_chars();
  if (ca != cb) return ca < cb;
  if (p.kind != q.kind) return p.kind < q.kind;
  if (p.start != q.start) return p.start < q.start;
  if (p.inserted != q.inserted) return p.inserted < q.inserted;
  return p.removed < q.removed;
}

std::vector<CandidateScore> score_candidates(const Classifier& model, const Doc& doc, const ConfVector& before,
                                             std::size_t target, std::vector<Perturbation> candidates,
                                             std::size_t jobs) {
  std::vector<CandidateScore> out(candidates.size());
  parallel_for(candidates.size(), jobs, [&](std::size_t i) {
    CandidateScore& c = out[i];
    c.perturbation = std::move(candidates[i]);
    c.before = before;
    c.after = model.classify(apply(doc, c.perturbation).text);
    c.gain = c.after.at(target) - before.at(target);
  });
  return out;
}

std::vector<std::string> htp_phrases(const HtpTable& htps, const std::string& cls, std::size_t n) {
  const auto* entries = htps.find(cls);
  if (!entries || entries->empty()) throw InvalidArgument("no hot training phrases for class '" + cls + "'");
  std::vector<std::string> out;
  for (const auto& e : *entries) {
    if (out.size() >= n) break;
    out.push_back(e.phrase);
  }
  return out;
}

Suggestion suggest(const Classifier& model, const Doc& doc, const ConfVector& conf, std::size_t target,
                   const std::vector<std::string>& phrases, const PerturbLexicons& lex, const AttackConfig& config,
                   const TypoLocks& locks, const std::vector<Snippet>& snippets) {
  Suggestion out;
  if (config.strategies.empty()) return out;
  if (!doc.tokens.empty()) {
    if (config.knowledge == Knowledge::white) {
      out.hsps = hot_phrases(model, doc, argmax(conf), config.saliency);
    } else {
      const DeviationTable dt = deviations(model, doc, config.jobs);
      out.oracle_calls += dt.calls;
      out.hsps = hsps_black(dt, doc, config.black_top_k);
    }
  }
  std::vector<Perturbation> cands;
  if (config.strategies.insert) {
    auto v = propose_insertions(doc, out.hsps, phrases, lex, config.cap, snippets);
    cands.insert(cands.end(), v.begin(), v.end());
  }
  if (config.strategies.modify) {
    auto v = propose_modifications(doc, out.hsps, lex, config.cap, locks);
    cands.insert(cands.end(), v.begin(), v.end());
  }
  if (config.strategies.remove) {
    auto v = propose_removals(doc, out.hsps, lex, config.cap);
    cands.insert(cands.end(), v.begin(), v.end());
  }
  out.oracle_calls += cands.size();
  out.candidates = score_candidates(model, doc, conf, target, std::move(cands), config.jobs);
  std::sort(out.candidates.begin(), out.candidates.end(), better_candidate);
  return out;
}

AttackTrace attack(const Classifier& model, const Doc& doc, const HtpTable& htps, const PerturbLexicons& lex,
                   const AttackConfig& config) {
  config.validate();
  const std::size_t target = model.class_index(config.target);
  AttackTrace trace;
  trace.original = doc;
  trace.target = config.target;
  trace.target_index = target;
  trace.knowledge = config.knowledge;
  trace.initial_conf = model.classify(doc.text);
  ++trace.oracle_calls;
  const std::size_t source = argmax(trace.initial_conf);
  trace.source = model.classes()[source];

  Doc current = doc;
  ConfVector conf = trace.initial_conf;
  TypoLocks locks;
  const bool typo_checks = config.knowledge == Knowledge::white && model.kind() == ModelKind::char_cnn;
  if (argmax(conf) == target) {
    trace.outcome = Outcome::success;
  } else {
    const std::vector<std::string> phrases =
        config.strategies.insert ? htp_phrases(htps, config.target, config.htp_count) : std::vector<std::string>{};
    trace.outcome = Outcome::budget_exhausted;
    while (trace.steps.size() < config.budget) {
      Suggestion sg = suggest(model, current, conf, target, phrases, lex, config, locks,
                              trace.steps.empty() ? config.snippets : std::vector<Snippet>{});
      trace.oracle_calls += sg.oracle_calls;
      if (sg.candidates.empty() || !(sg.candidates.front().gain > config.min_gain)) {
        trace.outcome = Outcome::no_improving_candidate;
        break;
      }
      const CandidateScore* best = &sg.candidates.front();
      AttackStep step;
      step.perturbation = best->perturbation;
      step.before = conf;
      step.after = best->after;
      step.gain = best->gain;
      step.hsps = std::move(sg.hsps);
      step.payload_tokens = tokenize(step.perturbation.inserted).size();
      if (typo_checks && step.perturbation.kind == PerturbKind::modify) {
        step.direction = direction_check(model, current, step.perturbation, source, target);
      }
      if (config.record_pool) step.pool = sg.candidates;
      switch (step.perturbation.kind) {
        case PerturbKind::insert:
          ++trace.inserted;
          break;
        case PerturbKind::modify:
          ++trace.modified;
          break;
        case PerturbKind::remove:
          ++trace.removed;
          break;
      }
      update_locks(locks, step.perturbation);
      current = apply(current, step.perturbation);
      conf = step.after;
      trace.steps.push_back(std::move(step));
      if (argmax(conf) == target) {
        trace.outcome = Outcome::success;
        break;
      }
    }
  }
  trace.final_text = current.text;
  trace.final_conf = conf;
  return trace;
}

CampaignRow to_row(const AttackTrace& t) {
  CampaignRow r;
  r.doc_id = t.original.id;
  r.source = t.source;
  r.target = t.target;
  r.source_conf = t.initial_conf.at(argmax(t.initial_conf));
  r.target_conf = t.final_conf.at(t.target_index);
  r.inserted = t.inserted;
  r.modified = t.modified;
  r.removed = t.removed;
  r.steps = t.steps.size();
  r.outcome = t.outcome;
  r.changed_fraction = changed_fraction(t.original.text, t.final_text);
  r.oracle_calls = t.oracle_calls;
  return r;
}

CampaignSummary summarize(const std::vector<CampaignRow>& rows) {
  CampaignSummary s;
  s.attacks = rows.size();
  for (const auto& r : rows) {
    if (r.outcome == Outcome::success) ++s.successes;
    s.avg_inserted += static_cast<double>(r.inserted);
    s.avg_modified += static_cast<double>(r.modified);
    s.avg_removed += static_cast<double>(r.removed);
    s.avg_changed_fraction += r.changed_fraction;
  }
  if (!rows.empty()) {
    const auto n = static_cast<double>(rows.size());
    s.success_rate = static_cast<double>(s.successes) / n;
    s.avg_inserted /= n;
    s.avg_modified /= n;
    s.avg_removed /= n;
    s.avg_changed_fraction /= n;
  }
  return s;
}

std::vector<std::pair<std::string, std::string>> all_pairs(const std::vector<std::string>& classes) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : classes) {
    for (const auto& b : classes) {
      if (a != b) out.emplace_back(a, b);
    }
  }
  return out;
}

CampaignReport run_campaign(const Classifier& model, const std::vector<Doc>& docs,
                            const std::vector<std::pair<std::string, std::string>>& pairs, std::size_t per_pair,
                            const HtpTable& htps, const PerturbLexicons& lex, const AttackConfig& config,
                            std::size_t jobs) {
  config.validate();
  CampaignReport report;
  if (docs.empty() || pairs.empty()) {
    report.summary = summarize(report.rows);
    return report;
  }
  // Predictions once per doc; eligible docs are labeled and predicted as the source.
  std::set<std::string> sources;
  for (const auto& [s, t] : pairs) {
    model.class_index(s);
    model.class_index(t);
    htp_phrases(htps, t, 1);
    sources.insert(s);
  }
  std::vector<std::ptrdiff_t> predicted(docs.size(), -1);
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    if (docs[i].label && sources.count(*docs[i].label)) {
      predicted[i] = static_cast<std::ptrdiff_t>(argmax(model.classify(docs[i].text)));
    }
  });
  std::vector<std::pair<std::size_t, std::string>> work;
  for (const auto& [s, t] : pairs) {
    const auto si = static_cast<std::ptrdiff_t>(model.class_index(s));
    std::size_t taken = 0;
    for (std::size_t i = 0; i < docs.size() && taken < per_pair; ++i) {
      if (docs[i].label == s && predicted[i] == si) {
        work.emplace_back(i, t);
        ++taken;
      }
    }
  }
  report.traces.resize(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t w) {
    AttackConfig cfg = config;
    cfg.target = work[w].second;
    cfg.jobs = 1;
    report.traces[w] = attack(model, docs[work[w].first], htps, lex, cfg);
  });
  for (const auto& t : report.traces) report.rows.push_back(to_row(t));
  report.summary = summarize(report.rows);
  return report;
}

void write_campaign_csv(std::ostream& out, const CampaignReport& report) {
  out << "doc_id,source,target,source_conf,target_conf,inserted,modified,removed,steps,outcome,changed_fraction,"
         "oracle_calls\n";
  out << std::setprecision(17);
  for (const auto& r : report.rows) {
    out << csv_field(r.doc_id) << ',' << csv_field(r.source) << ',' << csv_field(r.target) << ',' << r.source_conf
        << ',' << r.target_conf << ',' << r.inserted << ',' << r.modified << ',' << r.removed << ',' << r.steps << ','
        << to_string(r.outcome) << ',' << r.changed_fraction << ',' << r.oracle_calls << '\n';
  }
}

void write_campaign_table(std::ostream& out, const CampaignReport& report) {
  std::ostringstream s;
  s << std::left << std::setw(5) << "No." << std::setw(10) << "Doc" << std::setw(26) << "Source" << std::setw(26)
    << "Target" << std::right << std::setw(9) << "Ins" << std::setw(5) << "Mod" << std::setw(5) << "Rem" << "  "
    << std::left << "Outcome\n";
  std::size_t no = 0;
  for (const auto& r : report.rows) {
    std::ostringstream src;
    std::ostringstream dst;
    src << std::fixed << std::setprecision(1) << r.source << " " << 100.0 * r.source_conf << "%";
    dst << std::fixed << std::setprecision(1) << r.target << " " << 100.0 * r.target_conf << "%";
    s << std::left << std::setw(5) << ++no << std::setw(10) << r.doc_id << std::setw(26) << src.str() << std::setw(26)
      << dst.str() << std::right << std::setw(9) << r.inserted << std::setw(5) << r.modified << std::setw(5)
      << r.removed << "  " << to_string(r.outcome) << '\n';
  }
  const auto& sum = report.summary;
  s << std::fixed << std::setprecision(1) << std::left << std::setw(67) << "Avg." << std::right << std::setw(9)
    << sum.avg_inserted << std::setw(5) << sum.avg_modified << std::setw(5) << sum.avg_removed << '\n';
  s << "attacks " << sum.attacks << ", successes " << sum.successes << ", success rate ";
  if (sum.success_rate) {
    s << std::setprecision(3) << *sum.success_rate;
  } else {
    s << "undefined";
  }
  s << '\n';
  out << s.str();
}

std::vector<OverlapRow> overlap_study(const HtpTable& white, const HtpTable& black, std::size_t n) {
  std::set<std::string> wc;
  std::set<std::string> bc;
  for (const auto& c : white.classes) wc.insert(c.cls);
  for (const auto& c : black.classes) bc.insert(c.cls);
  if (wc != bc) throw InvalidArgument("HTP tables cover different classes");
  std::vector<OverlapRow> out;
  for (const auto& c : white.classes) {
    std::set<std::string> top;
    for (std::size_t i = 0; i < c.entries.size() && i < n; ++i) top.insert(normalize_phrase(c.entries[i].phrase));
    OverlapRow row{c.cls, 0, n, {}};
    const auto& other = *black.find(c.cls);
    for (std::size_t i = 0; i < other.size() && i < n; ++i) {
      const std::string p = normalize_phrase(other[i].phrase);
      if (top.erase(p)) row.shared.push_back(p);
    }
    row.overlap = row.shared.size();
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace advtext
