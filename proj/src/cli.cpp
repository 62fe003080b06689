#include "advtext/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "advtext/config.hpp"
#include "advtext/external.hpp"
#include "advtext/service.hpp"
#include "advtext/store.hpp"
#include "advtext/toydata.hpp"

namespace advtext {

namespace {

struct ModelSource {
  std::string checkpoint;
  std::string oracle_cmd;
  std::string oracle_url;
  std::string remote_model;
  std::string classes;
  std::string id = "oracle";

  void add_to(CLI::App* app) {
    app->add_option("--model", checkpoint, "Checkpoint file");
    app->add_option("--oracle-cmd", oracle_cmd, "Shell command answering the line protocol");
    app->add_option("--oracle-url", oracle_url, "Base URL of a running service");
    app->add_option("--remote-model", remote_model, "Model id at --oracle-url");
    app->add_option("--classes", classes, "Comma-separated classes of an oracle");
    app->add_option("--id", id, "Model id of an oracle");
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ClassifierHandle open_model(const ModelSource& src, const Settings& settings) {
  const int given = !src.checkpoint.empty() + !src.oracle_cmd.empty() + !src.oracle_url.empty();
  if (given != 1) throw InvalidArgument("give exactly one of --model, --oracle-cmd, --oracle-url");
  if (!src.checkpoint.empty()) return load_checkpoint(src.checkpoint);
  std::vector<std::string> classes = split_list(src.classes);
  if (classes.empty()) classes = settings.classes;
  if (classes.empty()) throw InvalidArgument("an oracle needs --classes or model.classes in the config");
  if (!src.oracle_cmd.empty()) return ExternalClassifier::subprocess(src.id, classes, src.oracle_cmd);
  return ExternalClassifier::http(src.id, classes, src.oracle_url,
                                  src.remote_model.empty() ? src.id : src.remote_model);
}

std::shared_ptr<const NeuralClassifier> neural(const ClassifierHandle& m) {
  auto n = std::dynamic_pointer_cast<const NeuralClassifier>(m);
  if (!n) throw InvalidArgument("no gradients available for external model '" + m->id() + "'");
  return n;
}

SaliencyConfig saliency_config(const Settings& s) { return {s.char_top_k, s.min_hot_chars, s.word_top_k, s.jobs}; }

PerturbLexicons lexicons(const Settings& s) {
  return load_lexicons(LexiconPaths::in(s.lexicon_dir.empty() ? default_data_dir() : s.lexicon_dir), s.year);
}

AttackConfig attack_config(const Settings& s) {
  AttackConfig c;
  c.budget = s.budget;
  c.cap = s.cap;
  c.min_gain = s.min_gain;
  c.saliency = saliency_config(s);
  c.black_top_k = s.black_top_k;
  c.htp_count = s.htp_top_n;
  c.jobs = s.jobs;
  return c;
}

std::string fmt_conf(const ConfVector& conf) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < conf.size(); ++i) o << (i ? " " : "") << conf[i];
  return o.str();
}

// A text given directly or a row of a dataset.
struct TextSource {
  std::string text;
  std::string data;
  std::size_t row = 1;

  void add_to(CLI::App* app) {
    app->add_option("--text", text, "Input text");
    app->add_option("--data", data, "Dataset CSV (with --row)");
    app->add_option("--row", row, "Data row number, from 1");
  }
  Doc get() const {
    if (data.empty()) return Doc::make("text", text);
    const auto docs = load_dataset(data);
    if (row == 0 || row > docs.size()) throw InvalidArgument("--row out of range");
    return docs[row - 1];
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial text toolkit"};
  app.require_subcommand(0, 1);
  std::string config_path;
  std::string toy_dir;
  std::size_t jobs = 0;
  std::string lexicon_dir;
  bool quiet = false;
  app.add_option("--config", config_path, "INI file with defaults");
  app.add_option("--make-toy-data", toy_dir, "Write the bundled toy corpora into DIR");
  app.add_option("--jobs", jobs, "Worker threads");
  app.add_option("--lexicons", lexicon_dir, "Lexicon directory");
  app.add_flag("--quiet", quiet, "Do not print the resolved configuration");

  // train
  auto* train = app.add_subcommand("train", "Train a character or word CNN");
  std::string train_data, train_test, train_out, train_arch = "char", train_id;
  std::string vectors;
  train->add_option("--data", train_data, "Training CSV")->required();
  train->add_option("--test", train_test, "Held-out CSV");
  train->add_option("--arch", train_arch, "char or word")->check(CLI::IsMember({"char", "word"}));
  train->add_option("--out", train_out, "Checkpoint to write")->required();
  train->add_option("--id", train_id, "Model id (default: file stem)");
  train->add_option("--vectors", vectors, "Word-vector text file for the embedding");

  // eval
  auto* eval = app.add_subcommand("eval", "Accuracy and confusion matrix");
  ModelSource eval_model;
  std::string eval_data;
  eval_model.add_to(eval);
  eval->add_option("--data", eval_data, "Labeled CSV")->required();

  // htp-mine
  auto* mine = app.add_subcommand("htp-mine", "Hot training phrases per class");
  ModelSource mine_model;
  std::string mine_data, mine_out, mine_dump, mine_mode = "white";
  mine_model.add_to(mine);
  mine->add_option("--data", mine_data, "Labeled CSV")->required();
  mine->add_option("--mode", mine_mode, "white or black")->check(CLI::IsMember({"white", "black"}));
  mine->add_option("--out", mine_out, "HTP table JSON to write")->required();
  mine->add_option("--dump", mine_dump, "Per-sample phrase dump to write");

  // saliency
  auto* sal = app.add_subcommand("saliency", "Hot characters, words and phrases of one text");
  ModelSource sal_model;
  TextSource sal_text;
  std::string sal_class;
  sal_model.add_to(sal);
  sal_text.add_to(sal);
  sal->add_option("--class", sal_class, "Class w.r.t. which to score (default: predicted)");

  // occlude
  auto* occ = app.add_subcommand("occlude", "Occlusion deviations of one text");
  ModelSource occ_model;
  TextSource occ_text;
  std::string occ_probes;
  occ_model.add_to(occ);
  occ_text.add_to(occ);
  occ->add_option("--probes", occ_probes, "Write the probe texts to this file");

  // attack
  auto* atk = app.add_subcommand("attack", "Greedy attack on one text");
  ModelSource atk_model;
  TextSource atk_text;
  std::string atk_htp, atk_target, atk_knowledge = "white", atk_strategies = "insert,modify,remove", atk_trace;
  atk_model.add_to(atk);
  atk_text.add_to(atk);
  atk->add_option("--htp", atk_htp, "HTP table JSON");
  atk->add_option("--target", atk_target, "Target class")->required();
  atk->add_option("--knowledge", atk_knowledge, "white or black")->check(CLI::IsMember({"white", "black"}));
  atk->add_option("--strategies", atk_strategies, "Subset of insert,modify,remove");
  atk->add_option("--trace", atk_trace, "Trace JSON to write");

  // campaign
  auto* camp = app.add_subcommand("campaign", "All-pairs source/target attacks");
  ModelSource camp_model;
  std::string camp_data, camp_htp, camp_knowledge = "white", camp_csv, camp_strategies = "insert,modify,remove";
  std::size_t per_pair = 20;
  camp_model.add_to(camp);
  camp->add_option("--data", camp_data, "Labeled CSV")->required();
  camp->add_option("--htp", camp_htp, "HTP table JSON")->required();
  camp->add_option("--per-pair", per_pair, "Docs per ordered class pair");
  camp->add_option("--knowledge", camp_knowledge, "white or black")->check(CLI::IsMember({"white", "black"}));
  camp->add_option("--strategies", camp_strategies, "Subset of insert,modify,remove");
  camp->add_option("--csv", camp_csv, "Per-attack rows to write");

  // overlap
  auto* ovl = app.add_subcommand("overlap", "Agreement of two HTP tables");
  std::string ovl_white, ovl_black;
  std::size_t ovl_n = 10;
  ovl->add_option("--white", ovl_white, "White-box HTP table")->required();
  ovl->add_option("--black", ovl_black, "Black-box HTP table")->required();
  ovl->add_option("-n", ovl_n, "Top-N per class");

  // fgsm-demo
  auto* fgsm = app.add_subcommand("fgsm-demo", "Sign-gradient perturbation of a character grid");
  ModelSource fgsm_model;
  TextSource fgsm_text;
  double epsilon = 1.0;
  std::size_t flips = 0;
  std::string fgsm_target;
  fgsm_model.add_to(fgsm);
  fgsm_text.add_to(fgsm);
  fgsm->add_option("--epsilon", epsilon, "Step size in [0, 1]");
  fgsm->add_option("--flips", flips, "Also rewrite this many highest-gradient positions");
  fgsm->add_option("--target", fgsm_target, "Target class (default: untargeted)");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP JSON API");
  std::vector<std::string> serve_models, serve_htps;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--model", serve_models, "Checkpoint (repeatable)")->required();
  serve->add_option("--htp", serve_htps, "MODEL_ID=HTP_JSON (repeatable)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Settings settings;
    if (!config_path.empty()) apply_ini(settings, IniFile::load(config_path));
    if (jobs) settings.jobs = jobs;
    if (!lexicon_dir.empty()) settings.lexicon_dir = lexicon_dir;
    if (settings.lexicon_dir.empty()) settings.lexicon_dir = default_data_dir();
    if (!toy_dir.empty()) {
      write_toy_data(toy_dir);
      out << "wrote toy corpora to " << toy_dir << "\n";
    }
    if (app.get_subcommands().empty()) {
      if (toy_dir.empty()) out << app.help();
      return 0;
    }
    if (!quiet) err << "# resolved configuration\n" << describe(settings) << "\n";

    if (*train) {
      auto docs = load_dataset(train_data);
      auto classes = settings.classes.empty() ? collect_classes(docs) : settings.classes;
      const std::string id = train_id.empty() ? std::filesystem::path(train_out).stem().string() : train_id;
      std::shared_ptr<NeuralClassifier> model;
      if (train_arch == "char") {
        CharArch arch;
        arch.seed = settings.seed;
        model = build_char_cnn(id, classes, Alphabet::standard(), settings.char_length, arch);
      } else {
        WordArch arch;
        arch.seed = settings.seed;
        arch.dim = settings.word_dim;
        auto wm = build_word_cnn(id, classes, Vocabulary::build(docs), settings.word_length, arch);
        if (!vectors.empty()) {
          nn::Tensor& table = *wm->network().parameters().front();
          out << "imported " << import_word_vectors(vectors, wm->vocabulary(), table) << " vectors\n";
        }
        model = wm;
      }
      nn::TrainConfig tc{settings.epochs, settings.learning_rate, settings.batch_size, settings.seed};
      model->fit(docs, tc, [&](std::size_t epoch, double loss) {
        out << "epoch " << epoch + 1 << " loss " << std::setprecision(6) << loss << "\n" << std::flush;
      });
      save_checkpoint(train_out, *model);
      if (!train_test.empty()) {
        out << "held-out accuracy " << evaluate(*model, load_dataset(train_test)).accuracy << "\n";
      }
      out << "wrote " << train_out << "\n";
    } else if (*eval) {
      const auto model = open_model(eval_model, settings);
      const EvalReport r = evaluate(*model, load_dataset(eval_data));
      out << "accuracy " << r.accuracy << " over " << r.total << " docs\n";
      for (std::size_t i = 0; i < r.classes.size(); ++i) {
        out << std::setw(16) << r.classes[i];
        for (auto c : r.confusion[i]) out << std::setw(6) << c;
        out << "\n";
      }
    } else if (*mine) {
      const auto model = open_model(mine_model, settings);
      const auto docs = load_dataset(mine_data);
      MiningResult r = mine_mode == "white"
                           ? mine_htps(*model, docs, settings.htp_top_n, saliency_config(settings))
                           : mine_htps_black(*model, docs, settings.htp_top_n, {settings.jobs, settings.black_top_k});
      save_htp_table(mine_out, r.table);
      if (!mine_dump.empty()) {
        std::ofstream f(mine_dump);
        write_phrase_dump(f, r.dump);
      }
      for (const auto& c : r.table.classes) {
        out << c.cls << ":";
        for (const auto& e : c.entries) out << " " << e.phrase << "(" << e.frequency << ")";
        out << "\n";
      }
    } else if (*sal) {
      const auto model = open_model(sal_model, settings);
      const Doc doc = sal_text.get();
      const std::size_t cls =
          sal_class.empty() ? argmax(model->classify(doc.text)) : model->class_index(sal_class);
      const HotItems items = saliency_items(*model, doc, cls, saliency_config(settings));
      out << "class " << model->classes()[cls] << "\n";
      for (std::size_t i = 0; i < doc.tokens.size() && i < items.token_scores.size(); ++i) {
        out << i << "\t" << doc.tokens[i].word << "\t" << items.token_scores[i] << "\n";
      }
      for (const auto& p : items.phrases) out << "hot phrase: " << p.surface << " (" << p.score << ")\n";
    } else if (*occ) {
      const auto model = open_model(occ_model, settings);
      const Doc doc = occ_text.get();
      const DeviationTable t = deviations(*model, doc, settings.jobs);
      out << "seed class " << model->classes()[t.seed_class] << " conf " << fmt_conf(t.seed) << "\n";
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        out << i << "\t" << doc.tokens[i].word << "\t" << t.deviation[i] << "\n";
      }
      for (const auto& h : hsps_black(t, doc, settings.black_top_k)) out << "hot span: " << h.surface << "\n";
      out << "calls " << t.calls << "\n";
      if (!occ_probes.empty()) {
        std::ofstream f(occ_probes);
        write_probe_dump(f, doc);
      }
    } else if (*atk) {
      const auto model = open_model(atk_model, settings);
      AttackConfig cfg = attack_config(settings);
      cfg.target = atk_target;
      cfg.knowledge = parse_knowledge(atk_knowledge);
      cfg.strategies = parse_strategies(atk_strategies);
      const HtpTable htps = atk_htp.empty() ? HtpTable{} : load_htp_table(atk_htp);
      if (atk_htp.empty()) cfg.strategies.insert = false;
      const AttackTrace t = attack(*model, atk_text.get(), htps, lexicons(settings), cfg);
      out << "source " << t.source << " -> target " << t.target << "\n";
      out << "initial " << fmt_conf(t.initial_conf) << "\n";
      for (const auto& s : t.steps) {
        out << to_string(s.perturbation.kind) << "/" << to_string(s.perturbation.method) << " at "
            << s.perturbation.start << ": '" << s.perturbation.removed << "' -> '" << s.perturbation.inserted
            << "'  conf " << fmt_conf(s.after) << "\n";
      }
      out << "outcome " << to_string(t.outcome) << "\nfinal text: " << t.final_text << "\n";
      if (!atk_trace.empty()) save_trace(atk_trace, t);
    } else if (*camp) {
      const auto model = open_model(camp_model, settings);
      AttackConfig cfg = attack_config(settings);
      cfg.knowledge = parse_knowledge(camp_knowledge);
      cfg.strategies = parse_strategies(camp_strategies);
      cfg.jobs = 1;
      const auto report = run_campaign(*model, load_dataset(camp_data), all_pairs(model->classes()), per_pair,
                                       load_htp_table(camp_htp), lexicons(settings), cfg, settings.jobs);
      write_campaign_table(out, report);
      if (!camp_csv.empty()) {
        std::ofstream f(camp_csv);
        write_campaign_csv(f, report);
      }
    } else if (*ovl) {
      for (const auto& r : overlap_study(load_htp_table(ovl_white), load_htp_table(ovl_black), ovl_n)) {
        out << r.cls << "\t" << r.overlap << "/" << r.n << "\t";
        for (std::size_t i = 0; i < r.shared.size(); ++i) out << (i ? ", " : "") << r.shared[i];
        out << "\n";
      }
    } else if (*fgsm) {
      const auto model = neural(open_model(fgsm_model, settings));
      std::optional<std::size_t> target;
      if (!fgsm_target.empty()) target = model->class_index(fgsm_target);
      const FgsmResult r = fgsm_baseline(*model, fgsm_text.get(), epsilon, flips, target);
      out << "epsilon " << r.epsilon << "\noriginal conf  " << fmt_conf(r.original_conf) << "\nperturbed conf "
          << fmt_conf(r.perturbed_conf) << "\nchanged " << std::setprecision(3) << 100 * r.changed_fraction
          << "%" << (r.gibberish ? " (gibberish)" : "") << "\nperturbed: " << r.text << "\n";
      if (flips) out << flips << "-flip: " << r.flipped_text << "  conf " << fmt_conf(r.flipped_conf) << "\n";
    } else if (*serve) {
      Service svc(lexicons(settings), attack_config(settings));
      std::map<std::string, HtpTable> tables;
      for (const auto& spec : serve_htps) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--htp expects MODEL_ID=FILE, got '" + spec + "'");
        tables[spec.substr(0, eq)] = load_htp_table(spec.substr(eq + 1));
      }
      for (const auto& path : serve_models) {
        ClassifierHandle m = load_checkpoint(path);
        out << "model " << m->id() << " (" << to_string(m->kind()) << ")\n";
        auto it = tables.find(m->id());
        svc.add_model(m, it == tables.end() ? HtpTable{} : it->second);
      }
      out << "listening on http://" << host << ":" << port << "\n" << std::flush;
      svc.listen(host, port);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace advtext
