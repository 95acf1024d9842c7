#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cohere/errors.hpp"

namespace cohere {

enum class Role : int { S = 0, O = 1, X = 2 };

inline char role_char(Role r) { return r == Role::S ? 'S' : (r == Role::O ? 'O' : 'X'); }

struct Token {
  std::string surface;
  std::string lower;
  int start = 0;  // char offsets into Document::body, [start, end)
  int end = 0;
  std::optional<std::string> pos;
  std::optional<Role> role;
  std::optional<int> coref_cluster;
};

struct Sentence {
  std::vector<Token> tokens;
  int start = 0;
  int end = 0;
};

struct Document {
  std::string text_id;
  std::string body;
  std::vector<Sentence> sentences;                // flat, reading order
  std::vector<std::pair<int, int>> paragraphs;    // [begin, end) sentence ranges

  int n_sentences() const { return static_cast<int>(sentences.size()); }
  int n_paragraphs() const { return static_cast<int>(paragraphs.size()); }

  int word_count() const {
    int n = 0;
    for (const auto& s : sentences)
      for (const auto& t : s.tokens)
        if (std::any_of(t.surface.begin(), t.surface.end(),
                        [](unsigned char c) { return std::isalnum(c); }))
          ++n;
    return n;
  }

  // Sentences reordered by `order`; paragraph structure collapses to one
  // paragraph (the ordering task ignores paragraphs).
  Document reordered(const std::vector<int>& order) const {
    Document out;
    out.text_id = text_id;
    out.body = body;
    out.sentences.reserve(order.size());
    for (int idx : order) out.sentences.push_back(sentences[idx]);
    out.paragraphs = {{0, static_cast<int>(out.sentences.size())}};
    return out;
  }
};

namespace textdet {

inline bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

inline std::string to_lower(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Words whose trailing period does not end a sentence.
inline const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> set = {
      "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",   "st",   "mt",  "etc", "vs",
      "inc",  "co",   "corp", "ltd",  "dept", "fig",  "gen",  "col",  "lt",  "sgt", "capt",
      "maj",  "rev",  "hon",  "gov",  "sen",  "rep",  "adm",  "cmdr", "jan", "feb", "mar",
      "apr",  "jun",  "jul",  "aug",  "sep",  "sept", "oct",  "nov",  "dec", "approx"};
  return set;
}

inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> set = {
      "a",       "about",   "above",   "after",   "again",    "against", "all",     "also",   "am",
      "an",      "and",     "any",     "are",     "aren't",   "as",      "at",      "be",     "because",
      "been",    "before",  "being",   "below",   "between",  "both",    "but",     "by",     "can",
      "cannot",  "could",   "couldn't","did",     "didn't",   "do",      "does",    "doesn't","doing",
      "don't",   "down",    "during",  "each",    "few",      "for",     "from",    "further","get",
      "got",     "had",     "hadn't",  "has",     "hasn't",   "have",    "haven't", "having", "he",
      "he'd",    "he'll",   "he's",    "her",     "here",     "here's",  "hers",    "herself","him",
      "himself", "his",     "how",     "how's",   "i",        "i'd",     "i'll",    "i'm",    "i've",
      "if",      "in",      "into",    "is",      "isn't",    "it",      "it's",    "its",    "itself",
      "just",    "let's",   "like",    "me",      "more",     "most",    "mustn't", "my",     "myself",
      "no",      "nor",     "not",     "now",     "of",       "off",     "on",      "once",   "only",
      "or",      "other",   "ought",   "our",     "ours",     "ourselves","out",    "over",   "own",
      "same",    "shan't",  "she",     "she'd",   "she'll",   "she's",   "should",  "shouldn't","so",
      "some",    "such",    "than",    "that",    "that's",   "the",     "their",   "theirs", "them",
      "themselves","then",  "there",   "there's", "these",    "they",    "they'd",  "they'll","they're",
      "they've", "this",    "those",   "through", "to",       "too",     "under",   "until",  "up",
      "upon",    "us",      "very",    "was",     "wasn't",   "we",      "we'd",    "we'll",  "we're",
      "we've",   "were",    "weren't", "what",    "what's",   "when",    "when's",  "where",  "where's",
      "which",   "while",   "who",     "who's",   "whom",     "why",     "why's",   "will",   "with",
      "won't",   "would",   "wouldn't","you",     "you'd",    "you'll",  "you're",  "you've", "your",
      "yours",   "yourself","yourselves","shall", "may",      "might",   "must",    "one",    "two",
      "first",   "next",    "finally", "however", "therefore","meanwhile","moreover","still",  "yet"};
  return set;
}

// Small lexicon standing in for a POS tagger when no sidecar is supplied.
inline const std::unordered_set<std::string>& verb_lexicon() {
  static const std::unordered_set<std::string> set = {
      "is",      "are",     "was",     "were",    "am",      "be",      "been",    "being",
      "has",     "have",    "had",     "do",      "does",    "did",     "say",     "says",
      "said",    "go",      "goes",    "went",    "gone",    "get",     "gets",    "got",
      "make",    "makes",   "made",    "see",     "sees",    "saw",     "seen",    "know",
      "knows",   "knew",    "take",    "takes",   "took",    "think",   "thinks",  "thought",
      "come",    "comes",   "came",    "want",    "wants",   "wanted",  "look",    "looks",
      "looked",  "use",     "uses",    "used",    "find",    "finds",   "found",   "give",
      "gives",   "gave",    "tell",    "tells",   "told",    "work",    "works",   "worked",
      "call",    "calls",   "called",  "try",     "tries",   "tried",   "need",    "needs",
      "needed",  "feel",    "feels",   "felt",    "become",  "becomes", "became",  "leave",
      "leaves",  "left",    "put",     "puts",    "mean",    "means",   "meant",   "keep",
      "keeps",   "kept",    "begin",   "begins",  "began",   "seem",    "seems",   "seemed",
      "help",    "helps",   "helped",  "show",    "shows",   "showed",  "expect",  "expects",
      "expected","visit",   "visits",  "visited", "describe","describes","described",
      "discuss", "discusses","discussed","review", "reviews", "reviewed","sent",    "send",
      "sends",   "writes",  "wrote",   "write",   "reads",   "read",    "likes",   "liked",
      "love",    "loves",   "loved",   "bought",  "buy",     "buys",    "opened",  "open",
      "opens",   "closed",  "close",   "closes",  "served",  "serve",   "serves",  "ordered",
      "order",   "orders",  "joined",  "join",    "joins",   "signed",  "sign",    "signs",
      "met",     "meet",    "meets",   "ran",     "run",     "runs",    "built",   "build",
      "builds",  "offers",  "offered", "offer",   "brings",  "brought", "bring",   "mentioned",
      "mentions","mention", "supports","supported","support", "includes","included","include",
      "explains","explained","explain", "prepared","prepares","prepare", "delivered","delivers",
      "deliver", "thanked", "thanks",  "thank",   "asked",   "asks",    "ask",     "answered",
      "answers", "answer",  "recommends","recommended","recommend",
      "praise",  "praised", "praises", "smile",   "smiled",  "smiles",  "arrived", "arrive",
      "arrives", "walked",  "walk",    "walks",   "planned", "plan",    "plans",   "finished",
      "finish",  "finishes","started", "start",   "starts",  "checked", "check",   "checks",
      "enjoyed", "enjoy",   "enjoys",  "noted",   "note",    "notes",   "raised",  "raise",
      "raises",  "covered", "cover",   "covers",  "updated", "update",  "updates", "confirmed",
      "confirm", "confirms","shared",  "share",   "shares",  "handled", "handle",  "handles"};
  return set;
}

inline bool is_sentence_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace textdet

// ---------------------------------------------------------------------------
// Tokenization and segmentation

namespace detail {

// Word tokens are maximal [alnum] runs, allowing a single ' or - between two
// alphanumerics ("don't", "well-known"). Every other non-space char is its
// own token. Spans index into the full body.
inline std::vector<Token> tokenize_span(const std::string& body, int begin, int end) {
  std::vector<Token> tokens;
  int i = begin;
  while (i < end) {
    const char c = body[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token tok;
    tok.start = i;
    if (textdet::is_word_char(c)) {
      int j = i + 1;
      while (j < end) {
        if (textdet::is_word_char(body[j])) {
          ++j;
        } else if ((body[j] == '\'' || body[j] == '-') && j + 1 < end && textdet::is_word_char(body[j + 1])) {
          j += 2;
          while (j < end && textdet::is_word_char(body[j])) ++j;
        } else {
          break;
        }
      }
      tok.end = j;
      i = j;
    } else {
      tok.end = i + 1;
      ++i;
    }
    tok.surface = body.substr(tok.start, tok.end - tok.start);
    tok.lower = textdet::to_lower(tok.surface);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

// Sentence boundary after position `i` (a terminator char)?
inline bool boundary_at(const std::string& text, int begin, int i, int end) {
  // consume a terminator run: ". . ." / "?!" etc.
  int j = i;
  while (j + 1 < end && (textdet::is_sentence_terminator(text[j + 1]) || text[j + 1] == '"' ||
                         text[j + 1] == '\''))
    ++j;
  // decimal number: digit '.' digit
  if (text[i] == '.' && i > begin && i + 1 < end &&
      std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
      std::isdigit(static_cast<unsigned char>(text[i + 1])))
    return false;
  if (text[i] == '.') {
    // collect the word immediately before the period
    int w = i - 1;
    while (w >= begin && textdet::is_word_char(text[w])) --w;
    const int wlen = i - 1 - w;
    if (wlen > 0) {
      std::string word = textdet::to_lower(text.substr(w + 1, wlen));
      if (wlen == 1 && std::isupper(static_cast<unsigned char>(text[w + 1])))
        return false;  // initials: "U.S. Army", "J. Smith"
      if (textdet::abbreviations().count(word)) return false;
    }
  }
  // must be followed by whitespace then an uppercase/digit/quote, or end
  int k = j + 1;
  if (k >= end) return true;
  if (!std::isspace(static_cast<unsigned char>(text[k]))) return false;
  while (k < end && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
  if (k >= end) return true;
  const unsigned char next = static_cast<unsigned char>(text[k]);
  return std::isupper(next) || std::isdigit(next) || next == '"' || next == '\'' || next == '(';
}

inline std::vector<Sentence> split_sentences(const std::string& body, int begin, int end) {
  std::vector<Sentence> sentences;
  int sent_begin = begin;
  for (int i = begin; i < end; ++i) {
    if (!textdet::is_sentence_terminator(body[i])) continue;
    if (!boundary_at(body, begin, i, end)) continue;
    int j = i;
    while (j + 1 < end &&
           (textdet::is_sentence_terminator(body[j + 1]) || body[j + 1] == '"' || body[j + 1] == '\''))
      ++j;
    Sentence s;
    s.start = sent_begin;
    s.end = j + 1;
    s.tokens = tokenize_span(body, s.start, s.end);
    if (!s.tokens.empty()) sentences.push_back(std::move(s));
    i = j;
    sent_begin = j + 1;
  }
  if (sent_begin < end) {
    Sentence s;
    s.start = sent_begin;
    s.end = end;
    s.tokens = tokenize_span(body, s.start, s.end);
    if (!s.tokens.empty()) sentences.push_back(std::move(s));
  }
  return sentences;
}

}  // namespace detail

// Paragraphs split on newline runs, sentences by rule-based terminator
// detection with an abbreviation guard, tokens on whitespace/punctuation
// boundaries. Throws EmptyDocumentError when no alphabetic char exists.
inline Document segment(const std::string& body, const std::string& text_id = "") {
  if (!std::any_of(body.begin(), body.end(),
                   [](unsigned char c) { return std::isalpha(c); }))
    throw EmptyDocumentError("segment: document '" + text_id + "' has no alphabetic content");
  Document doc;
  doc.text_id = text_id;
  doc.body = body;
  const int n = static_cast<int>(body.size());
  int i = 0;
  while (i < n) {
    while (i < n && body[i] == '\n') ++i;
    if (i >= n) break;
    int j = i;
    while (j < n && body[j] != '\n') ++j;
    auto sents = detail::split_sentences(body, i, j);
    if (!sents.empty()) {
      const int begin = static_cast<int>(doc.sentences.size());
      for (auto& s : sents) doc.sentences.push_back(std::move(s));
      doc.paragraphs.emplace_back(begin, static_cast<int>(doc.sentences.size()));
    }
    i = j;
  }
  if (doc.sentences.empty())
    throw EmptyDocumentError("segment: document '" + text_id + "' yielded no sentences");
  return doc;
}

// Vowel-group count with silent-e and -le corrections, floored at 1.
// Tokens with no alphabetic character count as 1 by convention.
inline int count_syllables(const std::string& word) {
  std::string w;
  for (char c : word)
    if (std::isalpha(static_cast<unsigned char>(c)))
      w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (w.empty()) return 1;
  auto vowel = [](char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; };
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    if (vowel(c) && !in_group) ++groups;
    in_group = vowel(c);
  }
  const std::size_t len = w.size();
  const bool ends_le = len >= 3 && w[len - 1] == 'e' && w[len - 2] == 'l' && !vowel(w[len - 3]);
  if (!ends_le && len >= 2 && w[len - 1] == 'e' && !vowel(w[len - 2])) --groups;
  return std::max(groups, 1);
}

// ---------------------------------------------------------------------------
// Annotation sidecar: tab-separated, one token per record:
//   text_id <TAB> start <TAB> end <TAB> pos <TAB> role <TAB> cluster_id
// with "_" marking an absent field.

struct SidecarRecord {
  std::string text_id;
  int start = 0;
  int end = 0;
  std::optional<std::string> pos;
  std::optional<Role> role;
  std::optional<int> coref_cluster;
};

struct AnnotationSidecar {
  std::map<std::string, std::vector<SidecarRecord>> by_text;
};

inline AnnotationSidecar load_sidecar(std::istream& in) {
  AnnotationSidecar sc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (fields.size() != 6)
      throw ParseError("sidecar line " + std::to_string(lineno) + ": expected 6 tab-separated fields");
    SidecarRecord rec;
    rec.text_id = fields[0];
    try {
      rec.start = std::stoi(fields[1]);
      rec.end = std::stoi(fields[2]);
    } catch (...) {
      throw ParseError("sidecar line " + std::to_string(lineno) + ": bad span");
    }
    if (fields[3] != "_") rec.pos = fields[3];
    if (fields[4] != "_") {
      if (fields[4] == "S") rec.role = Role::S;
      else if (fields[4] == "O") rec.role = Role::O;
      else if (fields[4] == "X") rec.role = Role::X;
      else throw ParseError("sidecar line " + std::to_string(lineno) + ": bad role '" + fields[4] + "'");
    }
    if (fields[5] != "_") {
      try {
        rec.coref_cluster = std::stoi(fields[5]);
      } catch (...) {
        throw ParseError("sidecar line " + std::to_string(lineno) + ": bad cluster id");
      }
    }
    sc.by_text[rec.text_id].push_back(rec);
  }
  return sc;
}

inline AnnotationSidecar load_sidecar_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("sidecar: cannot open " + path);
  return load_sidecar(in);
}

// Attach sidecar annotations to doc tokens. Every sidecar span must match a
// token span exactly; mismatches accumulate into one AlignmentError.
inline void apply_sidecar(Document& doc, const AnnotationSidecar& sc) {
  auto it = sc.by_text.find(doc.text_id);
  if (it == sc.by_text.end()) return;
  std::map<std::pair<int, int>, Token*> spans;
  for (auto& s : doc.sentences)
    for (auto& t : s.tokens) spans[{t.start, t.end}] = &t;
  std::string bad;
  for (const auto& rec : it->second) {
    auto found = spans.find({rec.start, rec.end});
    if (found == spans.end()) {
      if (!bad.empty()) bad += ", ";
      bad += "[" + std::to_string(rec.start) + "," + std::to_string(rec.end) + ")";
      continue;
    }
    Token* tok = found->second;
    if (rec.pos) tok->pos = rec.pos;
    if (rec.role) tok->role = rec.role;
    if (rec.coref_cluster) tok->coref_cluster = rec.coref_cluster;
  }
  if (!bad.empty())
    throw AlignmentError("sidecar spans do not align with tokens of '" + doc.text_id + "': " + bad);
}

// ---------------------------------------------------------------------------
// Entity extraction

enum class EntityMode { IdenticalNoun, SidecarCoref };

struct EntityMention {
  int sentence = 0;
  Role role = Role::X;
};

struct EntityMentionSet {
  std::string key;  // lowercased surface (identical-noun) or "cluster:<id>"
  std::vector<EntityMention> mentions;
  // Highest-ranked role per sentence (S > O > X); sentence -> role.
  std::map<int, Role> best_role;
  int total_mentions() const { return static_cast<int>(mentions.size()); }
};

namespace detail {

inline bool pos_is_noun(const std::string& pos) {
  return pos.rfind("NN", 0) == 0 || pos == "NOUN" || pos == "PROPN";
}

inline bool pos_is_verb(const std::string& pos) {
  return pos.rfind("VB", 0) == 0 || pos == "VERB" || pos == "AUX";
}

inline bool token_is_alpha(const Token& t) {
  return !t.surface.empty() && std::all_of(t.surface.begin(), t.surface.end(), [](unsigned char c) {
    return std::isalpha(c) || c == '\'' || c == '-';
  });
}

// Entity candidates without POS: alphabetic, not a stopword, and either
// capitalized mid-sentence or among the document's top-quartile frequent
// content words.
inline std::vector<std::vector<int>> candidate_entities(const Document& doc) {
  bool any_pos = false;
  for (const auto& s : doc.sentences)
    for (const auto& t : s.tokens)
      if (t.pos) any_pos = true;

  std::vector<std::vector<int>> per_sentence(doc.sentences.size());
  if (any_pos) {
    for (std::size_t si = 0; si < doc.sentences.size(); ++si)
      for (std::size_t ti = 0; ti < doc.sentences[si].tokens.size(); ++ti) {
        const Token& t = doc.sentences[si].tokens[ti];
        if (t.pos && pos_is_noun(*t.pos)) per_sentence[si].push_back(static_cast<int>(ti));
      }
    return per_sentence;
  }

  std::unordered_map<std::string, int> freq;
  for (const auto& s : doc.sentences)
    for (const auto& t : s.tokens)
      if (token_is_alpha(t) && !textdet::stopwords().count(t.lower)) ++freq[t.lower];
  std::vector<int> counts;
  counts.reserve(freq.size());
  for (const auto& [w, c] : freq) counts.push_back(c);
  int quartile_cut = 1;
  if (!counts.empty()) {
    std::sort(counts.rbegin(), counts.rend());
    quartile_cut = counts[(counts.size() - 1) / 4];
  }
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto& toks = doc.sentences[si].tokens;
    for (std::size_t ti = 0; ti < toks.size(); ++ti) {
      const Token& t = toks[ti];
      if (!token_is_alpha(t) || textdet::stopwords().count(t.lower)) continue;
      const bool cap_mid = ti > 0 && std::isupper(static_cast<unsigned char>(t.surface[0]));
      const bool frequent = freq[t.lower] >= quartile_cut && freq[t.lower] >= 2;
      if (cap_mid || frequent) per_sentence[si].push_back(static_cast<int>(ti));
    }
  }
  return per_sentence;
}

// S/O/X without a parser: subject = first candidate before the first
// verb-like token, object = first after; everything else X. Sidecar roles
// override whenever present.
inline Role heuristic_role(const Document& doc, int si, int ti, const std::vector<int>& cand) {
  const auto& toks = doc.sentences[si].tokens;
  int verb_at = -1;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    const bool verb = t.pos ? pos_is_verb(*t.pos) : textdet::verb_lexicon().count(t.lower) > 0;
    if (verb) {
      verb_at = static_cast<int>(i);
      break;
    }
  }
  if (verb_at < 0) return Role::X;
  int first_before = -1, first_after = -1;
  for (int c : cand) {
    if (c < verb_at && first_before < 0) first_before = c;
    if (c > verb_at && first_after < 0) first_after = c;
  }
  if (ti == first_before) return Role::S;
  if (ti == first_after) return Role::O;
  return Role::X;
}

}  // namespace detail

inline Role better_role(Role a, Role b) { return static_cast<int>(a) <= static_cast<int>(b) ? a : b; }

inline std::vector<EntityMentionSet> extract_entities(const Document& doc, EntityMode mode,
                                                      const AnnotationSidecar* sidecar = nullptr) {
  Document annotated = doc;
  if (sidecar) apply_sidecar(annotated, *sidecar);
  if (mode == EntityMode::SidecarCoref) {
    bool any_cluster = false;
    for (const auto& s : annotated.sentences)
      for (const auto& t : s.tokens)
        if (t.coref_cluster) any_cluster = true;
    if (!any_cluster)
      throw DomainError("extract_entities: sidecar_coref mode requires coref cluster ids");
  }

  // Identical-noun mode mines noun candidates; coref mode takes every token
  // the coreference system put in a cluster.
  std::vector<std::vector<int>> candidates;
  if (mode == EntityMode::SidecarCoref) {
    candidates.resize(annotated.sentences.size());
    for (std::size_t si = 0; si < annotated.sentences.size(); ++si)
      for (std::size_t ti = 0; ti < annotated.sentences[si].tokens.size(); ++ti)
        if (annotated.sentences[si].tokens[ti].coref_cluster)
          candidates[si].push_back(static_cast<int>(ti));
  } else {
    candidates = detail::candidate_entities(annotated);
  }
  std::vector<EntityMentionSet> entities;
  std::unordered_map<std::string, int> index;

  for (std::size_t si = 0; si < annotated.sentences.size(); ++si) {
    for (int ti : candidates[si]) {
      const Token& t = annotated.sentences[si].tokens[ti];
      std::string key;
      if (mode == EntityMode::SidecarCoref) {
        if (!t.coref_cluster) continue;
        key = "cluster:" + std::to_string(*t.coref_cluster);
      } else {
        key = t.lower;
      }
      const Role role =
          t.role ? *t.role : detail::heuristic_role(annotated, static_cast<int>(si), ti, candidates[si]);
      auto it = index.find(key);
      if (it == index.end()) {
        index[key] = static_cast<int>(entities.size());
        entities.push_back(EntityMentionSet{key, {}, {}});
        it = index.find(key);
      }
      EntityMentionSet& ent = entities[it->second];
      ent.mentions.push_back(EntityMention{static_cast<int>(si), role});
      auto br = ent.best_role.find(static_cast<int>(si));
      if (br == ent.best_role.end())
        ent.best_role[static_cast<int>(si)] = role;
      else
        br->second = better_role(br->second, role);
    }
  }
  return entities;
}

}  // namespace cohere
