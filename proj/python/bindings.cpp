#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "empaudit/affect_metrics.hpp"
#include "empaudit/causal.hpp"
#include "empaudit/cognitive_metrics.hpp"
#include "empaudit/corpus.hpp"
#include "empaudit/gateway.hpp"
#include "empaudit/lexicon.hpp"
#include "empaudit/lexstats.hpp"
#include "empaudit/persona.hpp"
#include "empaudit/report.hpp"

namespace py = pybind11;
using namespace empaudit;

namespace {

using PersonaTuple = std::tuple<std::optional<std::string>, std::optional<std::string>,
                                std::optional<std::string>>;

persona::Persona to_persona(const PersonaTuple& t) {
    return persona::Persona{std::get<0>(t), std::get<1>(t), std::get<2>(t)};
}

PersonaTuple from_persona(const persona::Persona& p) {
    return {p.age, p.gender, p.culture};
}

EmotionVector to_vector(const std::vector<double>& values) {
    if (values.size() != kEmotionCount) {
        throw ArgumentError("expected 8 intensities");
    }
    std::array<double, kEmotionCount> a{};
    std::copy(values.begin(), values.end(), a.begin());
    return EmotionVector::from(a);
}

std::vector<double> from_vector(const EmotionVector& v) {
    return std::vector<double>(v.values().begin(), v.values().end());
}

lexstats::TokenCounts to_counts(const std::map<std::string, std::size_t>& counts) {
    lexstats::TokenCounts out;
    for (const auto& [token, n] : counts) out.add(token, n);
    return out;
}

// Opaque handle so the word map is not auto-converted to a python dict.
struct LexiconHandle {
    lex::IntensityLexicon map;
};

py::dict estimate_to_dict(const causal::AteEstimate& est) {
    py::dict d;
    d["category"] = std::string(persona::category_name(est.attribute.category));
    d["attribute"] = est.attribute.value;
    d["dimension"] = std::string(kDimensionNames[est.dimension]);
    d["setting"] = std::string(causal::setting_name(est.setting));
    d["mean_shift"] = est.mean_shift;
    d["n"] = est.n;
    d["skipped"] = est.skipped;
    d["ci_low"] = est.ci_low;
    d["ci_high"] = est.ci_high;
    d["p_value"] = est.p_value;
    d["equivalent_to_base"] = est.equivalent_to_base;
    d["equivalence_p"] = est.equivalence_p;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Persona-conditioned empathy audit harness (C++ core)";

    py::register_exception<Error>(m, "EmpauditError");

    // --- personas ---
    m.def("build_grid", [] {
        std::vector<PersonaTuple> out;
        for (const auto& p : persona::build_grid()) out.push_back(from_persona(p));
        return out;
    }, "Full 315-persona grid (age, gender, culture; None = Base).");
    m.def("isolation_personas", [] {
        std::vector<PersonaTuple> out;
        for (const auto& p : persona::isolation_personas()) out.push_back(from_persona(p));
        return out;
    }, "Single-attribute personas plus the base state (19 for the standard lists).");
    m.def("render", [](const PersonaTuple& p) { return persona::render(to_persona(p)); },
          py::arg("persona"),
          "Identity clause, or None for the base state (no identity turn).");

    // --- corpus ---
    m.def("mask_self_disclosure",
          [](const std::string& text, const std::string& label) {
              corpus::ExperienceRecord rec;
              rec.id = "py";
              rec.text = text;
              rec.gold_label = label;
              rec.word_count = corpus::count_words(text);
              return corpus::mask_self_disclosure(rec, corpus::default_disclosure_terms())
                  .text;
          },
          py::arg("text"), py::arg("gold_label"),
          "Replace the first self-disclosed emotion word with [MASK].");
    m.def("kcenter_sample", &corpus::kcenter_sample, py::arg("points"), py::arg("k"),
          py::arg("start_index") = 0,
          "Farthest-point-first subset selection over feature vectors.");
    m.def("count_syllables", &corpus::count_syllables, py::arg("word"));
    m.def("readability", [](const std::vector<std::string>& texts) {
        std::vector<corpus::ExperienceRecord> records;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            corpus::ExperienceRecord rec;
            rec.id = std::to_string(i);
            rec.text = texts[i];
            rec.gold_label = "joy";
            rec.word_count = corpus::count_words(texts[i]);
            records.push_back(std::move(rec));
        }
        auto stats = corpus::readability_stats(records);
        py::dict d;
        d["sample_count"] = stats.sample_count;
        d["mean_words"] = stats.mean_words;
        d["flesch_reading_ease"] = stats.flesch_reading_ease;
        d["flesch_kincaid_grade"] = stats.flesch_kincaid_grade;
        return d;
    }, py::arg("texts"), "Flesch Reading Ease / Flesch-Kincaid grade over texts.");

    // --- lexicon ---
    py::class_<LexiconHandle>(m, "Lexicon")
        .def_static("load", [](const std::filesystem::path& path) {
            return LexiconHandle{lex::load_lexicon(path)};
        }, py::arg("path"))
        .def("__len__", [](const LexiconHandle& lexicon) { return lexicon.map.size(); })
        .def("__contains__", [](const LexiconHandle& lexicon, const std::string& w) {
            return lexicon.map.count(to_lower(trim(w))) > 0;
        })
        .def("intensity", [](const LexiconHandle& lexicon, const std::string& w) {
            return from_vector(lex::intensity(w, lexicon.map));
        }, py::arg("word"), "Intensity vector for a lexicon word (raises on OOV).");

    // --- affect metrics ---
    m.def("parse_affective", [](const std::string& raw) {
        auto parsed = metrics::parse_affective(raw);
        py::dict d;
        d["persona_recall"] = parsed.persona_recall;
        d["emotion_word"] = parsed.emotion_word;
        d["multi_word"] = parsed.multi_word;
        return d;
    }, py::arg("raw"));
    m.def("parse_cognitive", [](const std::string& raw) {
        auto parsed = metrics::parse_cognitive(raw);
        py::dict d;
        d["response"] = parsed.response;
        d["lenient"] = parsed.lenient;
        return d;
    }, py::arg("raw"));
    m.def("affective_shift",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              auto shift = metrics::affective_shift(to_vector(a), to_vector(b));
              return std::vector<double>(shift.begin(), shift.end());
          },
          py::arg("with_attr"), py::arg("without_attr"));
    m.def("emd",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              return metrics::emd(to_vector(a), to_vector(b));
          },
          py::arg("a"), py::arg("b"),
          "Earth mover's distance between unit-mass-normalized intensity vectors.");
    m.def("lexical_accuracy", &metrics::lexical_accuracy, py::arg("predictions"),
          py::arg("golds"));
    m.def("intensity_mse",
          [](const std::vector<std::vector<double>>& predictions,
             const std::vector<std::vector<double>>& golds) {
              std::vector<EmotionVector> p, g;
              for (const auto& v : predictions) p.push_back(to_vector(v));
              for (const auto& v : golds) g.push_back(to_vector(v));
              return metrics::intensity_mse(p, g);
          },
          py::arg("predictions"), py::arg("golds"));
    m.def("rouge_l_f1", &metrics::rouge_l_f1, py::arg("injected"), py::arg("recalled"));
    m.def("cosine_similarity",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              return metrics::cosine_similarity(a, b);
          },
          py::arg("a"), py::arg("b"));

    // --- cognitive metrics ---
    m.def("cognitive_shift",
          [](std::tuple<int, int, int> a, std::tuple<int, int, int> b) {
              auto shift = cognitive::cognitive_shift(
                  EpitomeScore::from(std::get<0>(a), std::get<1>(a), std::get<2>(a)),
                  EpitomeScore::from(std::get<0>(b), std::get<1>(b), std::get<2>(b)));
              return std::vector<double>(shift.begin(), shift.end());
          },
          py::arg("with_attr"), py::arg("without_attr"));
    m.def("score_keyword",
          [](const std::string& post, const std::string& response) {
              cognitive::KeywordScorer scorer;
              auto score = scorer.score(post, response);
              return std::make_tuple(score.er, score.ip, score.ex);
          },
          py::arg("seeker_post"), py::arg("response"),
          "Offline keyword heuristic scorer (pipeline plumbing, not a faithful "
          "communication-level classifier).");

    // --- causal ---
    py::class_<causal::OutcomeTable>(m, "OutcomeTable")
        .def(py::init([](const std::string& model_id) {
            return causal::OutcomeTable(model_id);
        }), py::arg("model_id") = "model")
        .def("set_affect",
             [](causal::OutcomeTable& table, const std::string& record_id,
                const PersonaTuple& p, const std::vector<double>& values) {
                 table.set_affect(record_id, to_persona(p), to_vector(values));
             })
        .def("set_epitome",
             [](causal::OutcomeTable& table, const std::string& record_id,
                const PersonaTuple& p, std::tuple<int, int, int> score) {
                 table.set_epitome(record_id, to_persona(p),
                                   EpitomeScore::from(std::get<0>(score), std::get<1>(score),
                                                      std::get<2>(score)));
             })
        .def("mark_missing",
             [](causal::OutcomeTable& table, const std::string& record_id,
                const PersonaTuple& p) { table.mark_missing(record_id, to_persona(p)); })
        .def("__len__", &causal::OutcomeTable::cell_count);

    m.def("ate_isolation",
          [](const causal::OutcomeTable& table, const std::string& category,
             const std::string& value, int bootstrap_n, std::uint64_t seed) {
              causal::BootstrapConfig config;
              config.bootstrap_n = bootstrap_n;
              config.seed = seed;
              py::list out;
              for (const auto& est : causal::ate_isolation(
                       table, {persona::category_from_name(category), value}, config)) {
                  out.append(estimate_to_dict(est));
              }
              return out;
          },
          py::arg("outcomes"), py::arg("category"), py::arg("value"),
          py::arg("bootstrap_n") = 2000, py::arg("seed") = 0);
    m.def("ate_intersection",
          [](const causal::OutcomeTable& table, const std::string& category,
             const std::string& value, int bootstrap_n, std::uint64_t seed) {
              causal::BootstrapConfig config;
              config.bootstrap_n = bootstrap_n;
              config.seed = seed;
              py::list out;
              for (const auto& est : causal::ate_intersection(
                       table, {persona::category_from_name(category), value},
                       persona::Taxonomy::standard(), config)) {
                  out.append(estimate_to_dict(est));
              }
              return out;
          },
          py::arg("outcomes"), py::arg("category"), py::arg("value"),
          py::arg("bootstrap_n") = 2000, py::arg("seed") = 0);
    m.def("significance",
          [](const std::vector<double>& diffs, int bootstrap_n, std::uint64_t seed) {
              auto result = causal::significance(diffs, bootstrap_n, seed);
              return std::make_tuple(result.p_value, result.ci_low, result.ci_high);
          },
          py::arg("paired_diffs"), py::arg("bootstrap_n") = 2000, py::arg("seed") = 0,
          "Seeded paired bootstrap: (p_value, ci_low, ci_high).");
    m.def("equivalence_to_base",
          [](const std::vector<double>& diffs, double margin, int bootstrap_n,
             std::uint64_t seed) {
              auto result = causal::equivalence_to_base(diffs, margin, bootstrap_n, seed);
              return std::make_tuple(result.equivalent, result.p_value);
          },
          py::arg("paired_diffs"), py::arg("margin") = 0.005,
          py::arg("bootstrap_n") = 2000, py::arg("seed") = 0);
    m.def("spearman", &causal::spearman, py::arg("a"), py::arg("b"));

    // --- lexstats ---
    m.def("tokenize", [](const std::string& text) { return lexstats::tokenize(text); },
          py::arg("text"));
    m.def("log_odds",
          [](const std::map<std::string, std::size_t>& a,
             const std::map<std::string, std::size_t>& b,
             std::optional<std::map<std::string, std::size_t>> prior, double alpha_scale) {
              lexstats::TokenCounts ca = to_counts(a);
              lexstats::TokenCounts cb = to_counts(b);
              lexstats::TokenCounts cp = prior ? to_counts(*prior)
                                               : lexstats::TokenCounts::merged(ca, cb);
              py::list out;
              for (const auto& r : lexstats::log_odds_dirichlet(ca, cb, cp, alpha_scale)) {
                  out.append(py::make_tuple(r.token, r.delta, r.z));
              }
              return out;
          },
          py::arg("counts_a"), py::arg("counts_b"), py::arg("prior") = py::none(),
          py::arg("alpha_scale") = 10.0,
          "Dirichlet-prior log-odds: [(token, delta, z)] sorted by z descending. "
          "Default prior = union counts.");
    m.def("tav_ratio",
          [](const std::vector<std::vector<double>>& attr,
             const std::vector<std::vector<double>>& base, const std::string& mode) {
              return lexstats::tav_ratio(attr, base,
                                         mode == "pairwise"
                                             ? lexstats::TavMode::PairwiseVariance
                                             : lexstats::TavMode::Centroid);
          },
          py::arg("attr_embeddings"), py::arg("base_embeddings"),
          py::arg("mode") = "centroid");

    // --- pipeline ---
    m.def("run",
          [](const std::filesystem::path& manifest_path) {
              auto manifest = report::RunManifest::load(manifest_path);
              auto result = report::run(manifest);
              return result.output_dir.string();
          },
          py::arg("manifest_path"),
          "Drive the full audit pipeline from a manifest; returns the output dir.");

    m.attr("EMOTIONS") = std::vector<std::string>(kEmotionNames.begin(), kEmotionNames.end());
    m.attr("DIMENSIONS") =
        std::vector<std::string>(kDimensionNames.begin(), kDimensionNames.end());
#ifdef EMPAUDIT_VERSION
    m.attr("__version__") = EMPAUDIT_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
