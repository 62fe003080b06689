#pragma once

// Greedy source/target attacks: at every step the hot phrases are recomputed,
// candidates proposed for each enabled strategy, every candidate classified,
// and the one raising the target confidence most is applied.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advtext/occlusion.hpp"
#include "advtext/perturb.hpp"

namespace advtext {

enum class Knowledge { white, black };
enum class Outcome { success, budget_exhausted, no_improving_candidate };

std::string to_string(Knowledge k);
std::string to_string(Outcome o);
Knowledge parse_knowledge(const std::string& name);
Outcome parse_outcome(const std::string& name);

struct StrategyMask {
  bool insert = true;
  bool modify = true;
  bool remove = true;

  bool empty() const { return !insert && !modify && !remove; }
  bool operator==(const StrategyMask&) const = default;
};

/// Parses a comma-separated subset of insert,modify,remove ("" is empty).
StrategyMask parse_strategies(const std::string& list);
std::string to_string(const StrategyMask& mask);

struct AttackConfig {
  std::string target;
  std::size_t budget = 5;
  std::size_t cap = 50;
  double min_gain = 1e-4;
  Knowledge knowledge = Knowledge::white;
  StrategyMask strategies;
  SaliencyConfig saliency;
  std::size_t black_top_k = 3;
  std::size_t htp_count = 10;  // target HTPs offered to insertion
  std::size_t jobs = 1;
  std::vector<Snippet> snippets;
  bool record_pool = false;  // keep every scored candidate in the trace

  void validate() const;
};

struct CandidateScore {
  Perturbation perturbation;
  ConfVector before;
  ConfVector after;
  double gain = 0.0;
};

/// Strict weak order of the greedy choice: larger gain, fewer changed
/// characters, insert < modify < remove, earlier anchor, then payload.
bool better_candidate(const CandidateScore& a, const CandidateScore& b);

struct AttackStep {
  Perturbation perturbation;
  ConfVector before;
  ConfVector after;
  double gain = 0.0;
  std::vector<HotSpan> hsps;
  std::optional<DirectionCheck> direction;  // white-box modifications on a character model
  std::size_t payload_tokens = 0;
  std::vector<CandidateScore> pool;
};

struct AttackTrace {
  Doc original;
  std::string source;  // class predicted before the attack
  std::string target;
  std::size_t target_index = 0;
  Knowledge knowledge = Knowledge::white;
  std::vector<AttackStep> steps;
  Outcome outcome = Outcome::no_improving_candidate;
  std::string final_text;
  ConfVector initial_conf;
  ConfVector final_conf;
  std::size_t inserted = 0;
  std::size_t modified = 0;
  std::size_t removed = 0;
  std::size_t oracle_calls = 0;
};

/// Scores candidates against `doc` (one classification each), in any order.
std::vector<CandidateScore> score_candidates(const Classifier& model, const Doc& doc, const ConfVector& before,
                                             std::size_t target, std::vector<Perturbation> candidates,
                                             std::size_t jobs);

struct Suggestion {
  std::vector<HotSpan> hsps;
  std::vector<CandidateScore> candidates;  // best first
  std::size_t oracle_calls = 0;
};

/// One greedy step without applying it: hot spans of `doc` (gradients or
/// occlusion per `config.knowledge`), candidates of every enabled strategy,
/// each classified, sorted by better_candidate. `phrases` are the target
/// HTPs offered to insertion.
Suggestion suggest(const Classifier& model, const Doc& doc, const ConfVector& conf, std::size_t target,
                   const std::vector<std::string>& phrases, const PerturbLexicons& lex, const AttackConfig& config,
                   const TypoLocks& locks = {}, const std::vector<Snippet>& snippets = {});

/// Throws InvalidArgument naming the class when `htps` lacks the target.
AttackTrace attack(const Classifier& model, const Doc& doc, const HtpTable& htps, const PerturbLexicons& lex,
                   const AttackConfig& config);

struct CampaignRow {
  std::string doc_id;
  std::string source;
  std::string target;
  double source_conf = 0.0;  // before the attack
  double target_conf = 0.0;  // after the attack
  std::size_t inserted = 0;
  std::size_t modified = 0;
  std::size_t removed = 0;
  std::size_t steps = 0;
  Outcome outcome = Outcome::no_improving_candidate;
  double changed_fraction = 0.0;
  std::size_t oracle_calls = 0;
};

struct CampaignSummary {
  std::size_t attacks = 0;
  std::size_t successes = 0;
  std::optional<double> success_rate;  // undefined without attacks
  double avg_inserted = 0.0;
  double avg_modified = 0.0;
  double avg_removed = 0.0;
  double avg_changed_fraction = 0.0;
};

CampaignSummary summarize(const std::vector<CampaignRow>& rows);

struct CampaignReport {
  std::vector<CampaignRow> rows;
  CampaignSummary summary;
  std::vector<AttackTrace> traces;  // parallel to rows
};

CampaignRow to_row(const AttackTrace& trace);

/// For each (source, target) pair, attacks up to `per_pair` docs labeled
/// and predicted as the source. Attacks run concurrently on `jobs` threads.
CampaignReport run_campaign(const Classifier& model, const std::vector<Doc>& docs,
                            const std::vector<std::pair<std::string, std::string>>& pairs, std::size_t per_pair,
                            const HtpTable& htps, const PerturbLexicons& lex, const AttackConfig& config,
                            std::size_t jobs = 1);

/// Every ordered pair of distinct classes.
std::vector<std::pair<std::string, std::string>> all_pairs(const std::vector<std::string>& classes);

void write_campaign_csv(std::ostream& out, const CampaignReport& report);
void write_campaign_table(std::ostream& out, const CampaignReport& report);

struct OverlapRow {
  std::string cls;
  std::size_t overlap = 0;
  std::size_t n = 0;
  std::vector<std::string> shared;
};

/// Per class, |top-N(white) ∩ top-N(black)| after normalization.
std::vector<OverlapRow> overlap_study(const HtpTable& white, const HtpTable& black, std::size_t n = 10);

/// Top target-class phrases in rank order.
std::vector<std::string> htp_phrases(const HtpTable& htps, const std::string& cls, std::size_t n);

}  // namespace advtext
