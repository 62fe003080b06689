#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "advtext/service.hpp"
#include "advtext/store.hpp"
#include "advtext/toydata.hpp"

namespace py = pybind11;
using namespace advtext;

namespace {

py::dict span_dict(const HotSpan& s) {
  py::dict d;
  d["begin"] = s.begin;
  d["end"] = s.end;
  d["surface"] = s.surface;
  d["score"] = s.score;
  d["kind"] = s.kind == SpanKind::word ? "word" : "phrase";
  return d;
}

py::list spans(const std::vector<HotSpan>& v) {
  py::list out;
  for (const auto& s : v) out.append(span_dict(s));
  return out;
}

std::shared_ptr<NeuralClassifier> mutable_neural(const ClassifierHandle& m) {
  auto n = std::const_pointer_cast<NeuralClassifier>(std::dynamic_pointer_cast<const NeuralClassifier>(m));
  if (!n) throw InvalidArgument("model '" + m->id() + "' is not trainable");
  return n;
}

}  // namespace

PYBIND11_MODULE(_advtext, m) {
  m.doc() = "Adversarial text toolkit";

  static py::exception<Error> error(m, "Error");
  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(invalid.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<Token>(m, "Token")
      .def_readonly("word", &Token::word)
      .def_readonly("begin", &Token::begin)
      .def_readonly("end", &Token::end);

  py::class_<Doc>(m, "Doc")
      .def(py::init(&Doc::make), py::arg("id"), py::arg("text"), py::arg("label") = std::nullopt)
      .def_readonly("id", &Doc::id)
      .def_readonly("text", &Doc::text)
      .def_readonly("label", &Doc::label)
      .def_readonly("tokens", &Doc::tokens)
      .def("__repr__", [](const Doc& d) { return "<Doc " + d.id + ">"; });

  py::class_<Alphabet>(m, "Alphabet")
      .def_static("standard", &Alphabet::standard)
      .def("__len__", &Alphabet::size)
      .def("index_of", &Alphabet::index_of);

  py::class_<Classifier, std::shared_ptr<Classifier>>(m, "Classifier")
      .def_property_readonly("id", &Classifier::id)
      .def_property_readonly("classes", &Classifier::classes)
      .def_property_readonly("kind", [](const Classifier& c) { return to_string(c.kind()); })
      .def("classify", [](const Classifier& c, const std::string& text) { return c.classify(text); })
      .def("fit",
           [](Classifier& c, const std::vector<Doc>& docs, std::size_t epochs, double lr, std::size_t batch,
              std::uint64_t seed) {
             auto* n = dynamic_cast<NeuralClassifier*>(&c);
             if (!n) throw InvalidArgument("model '" + c.id() + "' is not trainable");
             py::gil_scoped_release release;
             return n->fit(docs, {epochs, lr, batch, seed}).loss_curve;
           },
           py::arg("docs"), py::arg("epochs") = 10, py::arg("learning_rate") = 0.05, py::arg("batch_size") = 16,
           py::arg("seed") = 1);

  m.def("tokenize", &tokenize);
  m.def(
      "build_char_cnn",
      [](const std::string& id, const std::vector<std::string>& classes, std::size_t length, std::uint64_t seed) {
        CharArch arch;
        arch.seed = seed;
        return std::static_pointer_cast<Classifier>(build_char_cnn(id, classes, Alphabet::standard(), length, arch));
      },
      py::arg("id"), py::arg("classes"), py::arg("length") = 256, py::arg("seed") = 1);
  m.def(
      "build_word_cnn",
      [](const std::string& id, const std::vector<std::string>& classes, const std::vector<Doc>& docs,
         std::size_t length, std::uint64_t seed) {
        WordArch arch;
        arch.seed = seed;
        return std::static_pointer_cast<Classifier>(
            build_word_cnn(id, classes, Vocabulary::build(docs), length, arch));
      },
      py::arg("id"), py::arg("classes"), py::arg("docs"), py::arg("length") = 64, py::arg("seed") = 1);
  m.def("evaluate", [](const Classifier& c, const std::vector<Doc>& docs) { return evaluate(c, docs).accuracy; });

  m.def("load_checkpoint", [](const std::filesystem::path& p) {
    return std::const_pointer_cast<Classifier>(std::static_pointer_cast<const Classifier>(load_checkpoint(p)));
  });
  m.def("save_checkpoint", [](const std::filesystem::path& p, const std::shared_ptr<Classifier>& c) {
    save_checkpoint(p, *mutable_neural(c));
  });
  m.def("load_dataset", &load_dataset);
  m.def("make_topic_corpus", [](std::size_t train, std::size_t test, std::uint64_t seed) {
    auto s = make_topic_corpus(train, test, seed);
    return py::make_tuple(s.train, s.test);
  }, py::arg("train"), py::arg("test"), py::arg("seed") = 7);
  m.def("make_sentiment_corpus", [](std::size_t train, std::size_t test, std::uint64_t seed) {
    auto s = make_sentiment_corpus(train, test, seed);
    return py::make_tuple(s.train, s.test);
  }, py::arg("train"), py::arg("test"), py::arg("seed") = 11);

  m.def(
      "hot_phrases",
      [](const Classifier& c, const Doc& d, const std::string& cls) {
        return spans(hot_phrases(c, d, c.class_index(cls)));
      },
      py::arg("model"), py::arg("doc"), py::arg("cls"));
  m.def("gen_probes", &gen_probes);
  m.def("deviations", [](const Classifier& c, const Doc& d) {
    const DeviationTable t = deviations(c, d);
    py::dict out;
    out["seed"] = t.seed;
    out["seed_class"] = t.seed_class;
    out["deviation"] = t.deviation;
    out["calls"] = t.calls;
    return out;
  });
  m.def("hsps_black", [](const Classifier& c, const Doc& d, std::size_t k) { return spans(hsps_black(c, d, {1, k})); },
        py::arg("model"), py::arg("doc"), py::arg("k") = 3);

  py::class_<PerturbLexicons>(m, "Lexicons")
      .def_readonly("year", &PerturbLexicons::year)
      .def_property_readonly("templates", [](const PerturbLexicons& l) { return l.templates; });
  m.def("default_data_dir", &default_data_dir);
  m.def(
      "load_lexicons",
      [](const std::filesystem::path& dir, int year) { return load_lexicons(LexiconPaths::in(dir), year); },
      py::arg("dir"), py::arg("year") = 1996);

  py::class_<Perturbation>(m, "Perturbation")
      .def(py::init([](std::size_t start, std::string removed, std::string inserted, std::string base) {
             Perturbation p;
             p.kind = removed.empty() ? PerturbKind::insert : inserted.empty() ? PerturbKind::remove
                                                                               : PerturbKind::modify;
             p.start = start;
             p.removed = std::move(removed);
             p.inserted = std::move(inserted);
             p.base = std::move(base);
             return p;
           }),
           py::arg("start"), py::arg("removed"), py::arg("inserted"), py::arg("base"))
      .def_property_readonly("kind", [](const Perturbation& p) { return to_string(p.kind); })
      .def_readonly("start", &Perturbation::start)
      .def_readonly("removed", &Perturbation::removed)
      .def_readonly("inserted", &Perturbation::inserted);
  m.def("fingerprint", [](const std::string& s) { return fingerprint(s); });
  m.def("apply", &advtext::apply);
  m.def("revert", &revert);
  m.def("edit_distance", [](const std::string& a, const std::string& b) { return edit_distance(a, b); });

  m.def(
      "attack",
      [](const Classifier& c, const Doc& d, const std::string& htp_json, const PerturbLexicons& lex,
         const std::string& target, const std::string& knowledge, const std::string& strategies,
         std::size_t budget) {
        AttackConfig cfg;
        cfg.target = target;
        cfg.knowledge = parse_knowledge(knowledge);
        cfg.strategies = parse_strategies(strategies);
        cfg.budget = budget;
        const HtpTable htps = htp_table_from_json(htp_json);
        py::gil_scoped_release release;
        return trace_json(attack(c, d, htps, lex, cfg));
      },
      py::arg("model"), py::arg("doc"), py::arg("htps_json"), py::arg("lexicons"), py::arg("target"),
      py::arg("knowledge") = "white", py::arg("strategies") = "insert,modify,remove", py::arg("budget") = 5);

  py::class_<Service>(m, "Service")
      .def(py::init([](const PerturbLexicons& lex) { return std::make_unique<Service>(lex); }))
      .def("add_model",
           [](Service& s, const std::shared_ptr<Classifier>& c, const std::string& htp_json) {
             s.add_model(c, htp_json.empty() ? HtpTable{} : htp_table_from_json(htp_json));
           },
           py::arg("model"), py::arg("htps_json") = "")
      .def("handle",
           [](Service& s, const std::string& method, const std::string& path, const std::string& body) {
             py::gil_scoped_release release;
             const Response r = s.handle(method, path, body);
             return std::make_pair(r.status, r.body);
           },
           py::arg("method"), py::arg("path"), py::arg("body") = "");
}
