#pragma once

// The 436-entry feature layout. Entry order is the on-disk column order of
// every feature matrix and must never change without bumping
// kCatalogVersion.
//
//   [  0,  19) MorphoSyntactic
//   [ 19,  71) LexicalRichness
//   [ 71,  96) RegisterNgram    (register-major, n = 1..5)
//   [ 96, 110) Readability
//   [110, 149) EmoSent
//   [149, 187) GALC
//   [187, 248) LIWC
//   [248, 436) Inquirer
//
// Entries with `filler == true` complete a group to its documented size where
// the source inventory names fewer features than the group count.

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace psyling::featx {

inline constexpr int kCatalogVersion = 1;
inline constexpr std::size_t kNumFeatures = 436;
inline constexpr std::size_t kNumGroups = 8;

enum class FeatureGroup : std::uint8_t {
  MorphoSyntactic = 0,
  LexicalRichness = 1,
  RegisterNgram = 2,
  Readability = 3,
  EmoSent = 4,
  GALC = 5,
  LIWC = 6,
  Inquirer = 7,
};

inline constexpr std::array<std::size_t, kNumGroups> kGroupSizes = {19, 52, 25, 14, 39, 38, 61, 188};

inline std::string_view group_name(FeatureGroup g) {
  static constexpr std::array<std::string_view, kNumGroups> names = {
      "MorphoSyntactic", "LexicalRichness", "RegisterNgram", "Readability",
      "EmoSent",         "GALC",            "LIWC",          "Inquirer"};
  return names[static_cast<std::size_t>(g)];
}

inline constexpr FeatureGroup group_at(std::size_t g) { return static_cast<FeatureGroup>(g); }

/// What a feature measures. Lexicon-backed categories share one measure and
/// are distinguished by (resource, category).
enum class Measure : std::uint8_t {
  // syntactic complexity
  MLC, MLS, MLT, ClausesPerSentence, ClausesPerTUnit, DepClausesPerClause, TUnitsPerSentence,
  ComplexTUnitsPerTUnit, DepClausesPerTUnit, CoordPhrasesPerClause, CoordPhrasesPerTUnit,
  NPPostMod, NPPreMod, ComplexNominalsPerClause, ComplexNominalsPerTUnit, VerbPhrasesPerTUnit,
  KolmogorovBase, KolmogorovMorph, KolmogorovSyntax,
  // lexical richness
  MeanWordLengthChars, MeanWordLengthSyllables, LexicalDensity, DifferentWords, CorrectedNDW,
  TTR, CorrectedTTR, RootTTR, FormulaSequences, ShareOutsideList, ShareInList, NonStopwordRate,
  MeanScalar, MaxScalar,
  // register n-grams
  NgramLogFreq,
  // readability
  ARI, ColemanLiau, DaleChall, FleschKincaidGrade, FleschReadingEase, FryX, FryY, Lix, SMOG,
  GunningFog, DaleChallPSK, FORCAST, Rix, Spache,
  // lexicon categories (EmoSent, GALC, LIWC, Inquirer, prevalence categories)
  LexiconMean,
};

struct FeatureSpec {
  std::string id;
  FeatureGroup group;
  Measure measure;
  std::string resource;  // empty when the feature needs no external resource
  std::string category;  // lexicon category, when measure == LexiconMean
  int ngram_n = 0;
  bool filler = false;

  std::vector<std::string> resource_deps() const {
    if (resource.empty()) return {};
    return {resource};
  }
};

namespace detail {

inline const std::vector<std::string>& liwc_categories() {
  // LIWC2007 categories without the three umbrella totals (funct, relativ, bio).
  static const std::vector<std::string> v = {
      "pronoun", "ppron",   "i",       "we",      "you",     "shehe",   "they",    "ipron",
      "article", "verb",    "auxverb", "past",    "present", "future",  "adverb",  "preps",
      "conj",    "negate",  "quant",   "number",  "swear",   "social",  "family",  "friend",
      "humans",  "affect",  "posemo",  "negemo",  "anx",     "anger",   "sad",     "cogmech",
      "insight", "cause",   "discrep", "tentat",  "certain", "inhib",   "incl",    "excl",
      "percept", "see",     "hear",    "feel",    "body",    "health",  "sexual",  "ingest",
      "motion",  "space",   "time",    "work",    "achieve", "leisure", "home",    "money",
      "relig",   "death",   "assent",  "nonfl",   "filler"};
  return v;
}

inline const std::vector<std::string>& inquirer_categories() {
  // Harvard IV-4 + Lasswell (182 categories).
  static const std::vector<std::string> v = {
      "Positiv", "Negativ", "Pstv",    "Affil",   "Ngtv",    "Hostile", "Strong",  "Power",
      "Weak",    "Submit",  "Active",  "Passive", "Pleasur", "Pain",    "Feel",    "Arousal",
      "EMOT",    "Virtue",  "Vice",    "Ovrst",   "Undrst",  "Academ",  "Doctrin", "Econ@",
      "Exch",    "ECON",    "Exprsv",  "Legal",   "Milit",   "Polit@",  "POLIT",   "Relig",
      "Role",    "COLL",    "Work",    "Ritual",  "SocRel",  "Race",    "Kin@",    "MALE",
      "Female",  "Nonadlt", "HU",      "ANI",     "PLACE",   "Social",  "Region",  "Route",
      "Aquatic", "Land",    "Sky",     "Object",  "Tool",    "Food",    "Vehicle", "BldgPt",
      "ComnObj", "NatObj",  "BodyPt",  "ComForm", "COM",     "Say",     "Need",    "Goal",
      "Try",     "Means",   "Persist", "Complet", "Fail",    "NatrPro", "Begin",   "Vary",
      "Increas", "Decreas", "Finish",  "Stay",    "Rise",    "Exert",   "Fetch",   "Travel",
      "Fall",    "Think",   "Know",    "Causal",  "Ought",   "Perceiv", "Compare", "Eval@",
      "EVAL",    "Solve",   "Abs@",    "ABS",     "Quality", "Quan",    "NUMB",    "ORD",
      "CARD",    "FREQ",    "DIST",    "Time@",   "TIME",    "Space",   "POS",     "DIM",
      "Rel",     "COLOR",   "Self",    "Our",     "You",     "Name",    "Yes",     "No",
      "Negate",  "Intrj",   "IAV",     "DAV",     "SV",      "IPadj",   "IndAdj",  "PowGain",
      "PowLoss", "PowEnds", "PowAren", "PowCon",  "PowCoop", "PowAuPt", "PowPt",   "PowDoct",
      "PowAuth", "PowOth",  "PowTot",  "RcEthic", "RcRelig", "RcGain",  "RcLoss",  "RcEnds",
      "RcTot",   "RspGain", "RspLoss", "RspOth",  "RspTot",  "AffGain", "AffLoss", "AffPt",
      "AffOth",  "AffTot",  "WltPt",   "WltTran", "WltOth",  "WltTot",  "WlbGain", "WlbLoss",
      "WlbPhys", "WlbPsyc", "WlbPt",   "WlbTot",  "EnlGain", "EnlLoss", "EnlEnds", "EnlPt",
      "EnlOth",  "EnlTot",  "SklAsth", "SklPt",   "SklOth",  "SklTot",  "TrnGain", "TrnLoss",
      "TranLw",  "MeansLw", "EndsLw",  "ArenaLw", "PtLw",    "Nation",  "Anomie",  "NegAff",
      "PosAff",  "SureLw",  "If",      "NotLw",   "TimeSpc", "FormLw"};
  return v;
}

inline const std::vector<std::string>& galc_categories() {
  static const std::vector<std::string> v = {
      "Admiration",   "Amusement",   "Anger",        "Anxiety",         "BeingTouched", "Boredom",
      "Compassion",   "Contempt",    "Contentment",  "Desperation",     "Disappointment",
      "Disgust",      "Dissatisfaction", "Envy",     "Fear",            "FeelingLove",  "Gratitude",
      "Guilt",        "Happiness",   "Hatred",       "Hope",            "Humility",     "Interest",
      "Irritation",   "Jealousy",    "Joy",          "Longing",         "Lust",         "Pleasure",
      "Pride",        "Relaxation",  "Relief",       "Sadness",         "Shame",        "Surprise",
      "Tension",      "Positive",    "Negative"};
  return v;
}

struct LexiconBlock {
  const char* resource;
  const char* prefix;
  std::vector<std::string> categories;
};

inline const std::vector<LexiconBlock>& emosent_blocks() {
  static const std::vector<LexiconBlock> v = {
      {"anew", "ANEW", {"valence", "arousal", "dominance"}},
      {"anew_emo", "ANEWEmo", {"happiness", "anger", "sadness", "fear", "disgust"}},
      {"depechemood", "DepecheMood",
       {"afraid", "amused", "angry", "annoyed", "dont_care", "happy", "inspired", "sad"}},
      {"nrc_emolex", "NRC",
       {"anger", "anticipation", "disgust", "fear", "joy", "negative", "positive", "sadness",
        "surprise", "trust"}},
      {"nrc_vad", "NRCVAD", {"valence", "arousal", "dominance"}},
      {"senticnet", "SenticNet", {"pleasantness", "attention", "sensitivity", "aptitude", "polarity"}},
      {"sentiment140", "Sentiment140", {"score", "num_positive", "num_negative"}},
  };
  return v;
}

inline void push(std::vector<FeatureSpec>& out, std::string id, FeatureGroup g, Measure m,
                 std::string resource = {}, std::string category = {}, int n = 0,
                 bool filler = false) {
  out.push_back(FeatureSpec{std::move(id), g, m, std::move(resource), std::move(category), n, filler});
}

inline std::vector<FeatureSpec> build_catalog() {
  using G = FeatureGroup;
  using M = Measure;
  std::vector<FeatureSpec> c;
  c.reserve(kNumFeatures);

  const G ms = G::MorphoSyntactic;
  push(c, "MLC", ms, M::MLC);
  push(c, "MLS", ms, M::MLS);
  push(c, "MLT", ms, M::MLT);
  push(c, "C/S", ms, M::ClausesPerSentence);
  push(c, "C/T", ms, M::ClausesPerTUnit);
  push(c, "DepC/C", ms, M::DepClausesPerClause);
  push(c, "T/S", ms, M::TUnitsPerSentence);
  push(c, "CompT/T", ms, M::ComplexTUnitsPerTUnit);
  push(c, "DepC/T", ms, M::DepClausesPerTUnit);
  push(c, "CoordP/C", ms, M::CoordPhrasesPerClause);
  push(c, "CoordP/T", ms, M::CoordPhrasesPerTUnit);
  push(c, "NP.PostMod", ms, M::NPPostMod);
  push(c, "NP.PreMod", ms, M::NPPreMod);
  push(c, "CompN/C", ms, M::ComplexNominalsPerClause);
  push(c, "CompN/T", ms, M::ComplexNominalsPerTUnit);
  push(c, "VP/T", ms, M::VerbPhrasesPerTUnit);
  push(c, "BaseKolDef", ms, M::KolmogorovBase);
  push(c, "MorKolDef", ms, M::KolmogorovMorph);
  push(c, "SynKolDef", ms, M::KolmogorovSyntax);

  const G lr = G::LexicalRichness;
  push(c, "MLWc", lr, M::MeanWordLengthChars);
  push(c, "MLWs", lr, M::MeanWordLengthSyllables);
  push(c, "LD", lr, M::LexicalDensity);
  push(c, "NDW", lr, M::DifferentWords);
  push(c, "CNDW", lr, M::CorrectedNDW);
  push(c, "TTR", lr, M::TTR);
  push(c, "cTTR", lr, M::CorrectedTTR);
  push(c, "rTTR", lr, M::RootTTR);
  push(c, "AFL", lr, M::FormulaSequences, "afl");
  push(c, "ANC", lr, M::ShareOutsideList, "anc_top2000");
  push(c, "BNC", lr, M::ShareOutsideList, "bnc_top2000");
  push(c, "NAWL", lr, M::ShareInList, "nawl");
  push(c, "NGSL", lr, M::ShareOutsideList, "ngsl");
  push(c, "NonStopWordsRate", lr, M::NonStopwordRate, "stopwords");
  push(c, "WordPrevalence", lr, M::MeanScalar, "word_prevalence");
  for (int k = 1; k <= 35; ++k) {
    std::string cat = (k < 10 ? "C0" : "C") + std::to_string(k);
    push(c, "Prevalence." + cat, lr, M::LexiconMean, "prevalence_categories", cat);
  }
  push(c, "AoA-mean", lr, M::MeanScalar, "aoa");
  push(c, "AoA-max", lr, M::MaxScalar, "aoa");

  const G rn = G::RegisterNgram;
  for (const char* reg : {"spoken", "fiction", "magazine", "news", "academic"})
    for (int n = 1; n <= 5; ++n)
      push(c, std::string("COCA.") + reg + "." + std::to_string(n), rn, M::NgramLogFreq,
           std::string("coca_") + reg + "_" + std::to_string(n), {}, n);

  const G rd = G::Readability;
  push(c, "ARI", rd, M::ARI);
  push(c, "ColemanLiau", rd, M::ColemanLiau);
  push(c, "DaleChall", rd, M::DaleChall, "dale_chall_easy");
  push(c, "FleschKincaidGradeLevel", rd, M::FleschKincaidGrade);
  push(c, "FleschKincaidReadingEase", rd, M::FleschReadingEase);
  push(c, "Fry-x", rd, M::FryX);
  push(c, "Fry-y", rd, M::FryY);
  push(c, "Lix", rd, M::Lix);
  push(c, "SMOG", rd, M::SMOG);
  push(c, "GunningFog", rd, M::GunningFog);
  push(c, "DaleChallPSK", rd, M::DaleChallPSK, "dale_chall_easy");
  push(c, "FORCAST", rd, M::FORCAST);
  push(c, "Rix", rd, M::Rix);
  push(c, "Spache", rd, M::Spache, "spache_easy");

  for (const auto& b : emosent_blocks())
    for (const auto& cat : b.categories)
      push(c, std::string(b.prefix) + "." + cat, G::EmoSent, M::LexiconMean, b.resource, cat);
  for (const char* cat : {"ext01", "ext02"})
    push(c, std::string("EmoSentExt.") + cat, G::EmoSent, M::LexiconMean, "emosent_ext", cat, 0,
         true);

  for (const auto& cat : galc_categories())
    push(c, "GALC." + cat, G::GALC, M::LexiconMean, "galc", cat);
  for (const auto& cat : liwc_categories())
    push(c, "LIWC." + cat, G::LIWC, M::LexiconMean, "liwc", cat);
  for (const auto& cat : inquirer_categories())
    push(c, "Inquirer." + cat, G::Inquirer, M::LexiconMean, "inquirer", cat);
  for (int k = 1; k <= 6; ++k) {
    std::string cat = "Ext0" + std::to_string(k);
    push(c, "Inquirer." + cat, G::Inquirer, M::LexiconMean, "inquirer", cat, 0, true);
  }
  return c;
}

}  // namespace detail

class FeatureCatalog {
 public:
  FeatureCatalog() : specs_(detail::build_catalog()) {
    std::size_t begin = 0;
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      group_begin_[g] = begin;
      begin += kGroupSizes[g];
    }
  }

  /// The process-wide default catalog.
  static const FeatureCatalog& standard() {
    static const FeatureCatalog catalog;
    return catalog;
  }

  std::size_t size() const noexcept { return specs_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<FeatureSpec>& specs() const noexcept { return specs_; }
  auto begin() const { return specs_.begin(); }
  auto end() const { return specs_.end(); }

  /// Column range [first, last) of one group.
  std::pair<std::size_t, std::size_t> group_slice(FeatureGroup g) const {
    auto gi = static_cast<std::size_t>(g);
    return {group_begin_[gi], group_begin_[gi] + kGroupSizes[gi]};
  }

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < specs_.size(); ++i)
      if (specs_[i].id == id) return i;
    return size();
  }

  std::set<std::string> resource_ids() const {
    std::set<std::string> ids;
    for (const auto& s : specs_)
      if (!s.resource.empty()) ids.insert(s.resource);
    return ids;
  }

  /// Stable text identity of the layout; hash it to fingerprint the catalog.
  std::string layout_text() const {
    std::string text = "catalog-v" + std::to_string(kCatalogVersion) + "\n";
    for (const auto& s : specs_) {
      text += s.id;
      text += '\t';
      text += group_name(s.group);
      text += '\t';
      text += s.resource;
      text += '\n';
    }
    return text;
  }

 private:
  std::vector<FeatureSpec> specs_;
  std::array<std::size_t, kNumGroups> group_begin_{};
};

}  // namespace psyling::featx
