#include "geo/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "geo/rng.hpp"
#include "geo/text.hpp"
#include "json.hpp"

namespace geo {

std::string Example::context_id() const { return query.id + "/" + target().id; }

namespace {

const std::vector<std::string>& topic_terms() {
  static const std::vector<std::string> v = {
      "solar",    "battery",  "coffee",   "marathon", "vaccine",  "mortgage", "python",   "telescope",
      "garden",   "volcano",  "insulin",  "bitcoin",  "glacier",  "sourdough", "violin",  "satellite",
      "wetland",  "protein",  "hybrid",   "insurance", "migraine", "orchard",  "turbine",  "compost",
      "espresso", "thermostat", "lithium", "antibiotic", "mangrove", "algorithm", "backpack", "ceramic"};
  return v;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> v = {
      "people",  "often",   "consider", "many",    "options", "before", "making",  "choice",
      "general", "overview", "helps",   "readers", "compare", "common", "factors", "cost",
      "quality", "time",    "local",    "experience", "varies", "widely", "depending", "needs",
      "simple",  "approach", "works",   "well",    "most",    "cases",  "careful", "planning"};
  return v;
}

const std::vector<std::string>& sources() {
  static const std::vector<std::string> v = {"the national survey", "a university study", "industry analysts",
                                             "the health agency", "independent reviewers"};
  return v;
}

std::string filler_sentence(Rng& rng, std::size_t words) {
  const auto& f = filler_words();
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (!s.empty()) s.push_back(' ');
    s += f[rng.uniform(f.size())];
  }
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + ".";
}

struct DocRecipe {
  int terms = 0;
  int stats = 0;
  int quotes = 0;
  int cites = 0;
};

std::string make_doc(Rng& rng, const std::vector<std::string>& qterms, const DocRecipe& r) {
  std::vector<std::string> parts;
  const std::size_t n_sent = 4 + rng.uniform(3);
  for (std::size_t i = 0; i < n_sent; ++i) parts.push_back(filler_sentence(rng, 7 + rng.uniform(6)));
  for (int i = 0; i < r.terms && i < static_cast<int>(qterms.size()); ++i) {
    parts[rng.uniform(parts.size())] += " This matters for " + qterms[i] + " decisions.";
  }
  for (int i = 0; i < r.stats; ++i) {
    parts[rng.uniform(parts.size())] += " Roughly " + std::to_string(10 + rng.uniform(80)) + "% agree.";
  }
  for (int i = 0; i < r.quotes; ++i) {
    parts[rng.uniform(parts.size())] += " \"It depends on the situation,\" one expert said.";
  }
  for (int i = 0; i < r.cites; ++i) {
    parts[rng.uniform(parts.size())] += " According to " + sources()[rng.uniform(sources().size())] + ", results vary.";
  }
  return text::join(parts, " ");
}

}  // namespace

Dataset make_synthetic_dataset(const SyntheticConfig& cfg) {
  if (cfg.docs_per_query < 2) throw std::invalid_argument("docs_per_query must be >= 2");
  Rng rng(cfg.seed);
  const auto& topics = topic_terms();
  Dataset out;
  for (std::size_t qi = 0; qi < cfg.size; ++qi) {
    std::vector<std::string> qterms;
    while (qterms.size() < 3) {
      const auto& t = topics[rng.uniform(topics.size())];
      if (std::find(qterms.begin(), qterms.end(), t) == qterms.end()) qterms.push_back(t);
    }
    Example ex;
    ex.query.id = "q" + std::to_string(qi);
    ex.query.text = "How should I think about " + qterms[0] + " and " + qterms[1] + " for " + qterms[2] + "?";
    ex.cands.target_index = rng.uniform(cfg.docs_per_query);
    for (std::size_t k = 0; k < cfg.docs_per_query; ++k) {
      DocRecipe r;
      if (k == ex.cands.target_index) {
        r.terms = static_cast<int>(rng.uniform(2));
      } else {
        r.terms = 1 + static_cast<int>(rng.uniform(3));
        r.stats = static_cast<int>(rng.uniform(3));
        r.quotes = static_cast<int>(rng.uniform(2));
        r.cites = static_cast<int>(rng.uniform(3));
      }
      Document d;
      d.id = ex.query.id + "-d" + std::to_string(k);
      d.text = make_doc(rng, qterms, r);
      d.rank_index = k;
      ex.cands.docs.push_back(std::move(d));
    }
    validate(ex.query);
    validate(ex.cands);
    out.push_back(std::move(ex));
  }
  return out;
}

std::string dataset_to_jsonl(const Dataset& d) {
  std::string out;
  for (const auto& ex : d) {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& doc : ex.cands.docs) docs.push_back({{"id", doc.id}, {"text", doc.text}});
    nlohmann::json j = {{"query", {{"id", ex.query.id}, {"text", ex.query.text}}},
                        {"docs", docs},
                        {"target_index", ex.cands.target_index}};
    out += j.dump() + "\n";
  }
  return out;
}

Dataset dataset_from_jsonl(const std::string& data) {
  Dataset out;
  std::istringstream in(data);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Example ex;
      ex.query.id = j.at("query").at("id").get<std::string>();
      ex.query.text = j.at("query").at("text").get<std::string>();
      std::size_t k = 0;
      for (const auto& dj : j.at("docs")) {
        Document d;
        d.id = dj.at("id").get<std::string>();
        d.text = dj.at("text").get<std::string>();
        d.rank_index = k++;
        ex.cands.docs.push_back(std::move(d));
      }
      ex.cands.target_index = j.at("target_index").get<std::size_t>();
      validate(ex.query);
      validate(ex.cands);
      out.push_back(std::move(ex));
    } catch (const std::exception& e) {
      throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << data;
  if (!out) throw std::runtime_error("write failed for " + path);
}

Dataset load_dataset(const std::string& path) { return dataset_from_jsonl(read_file(path)); }
void save_dataset(const Dataset& d, const std::string& path) { write_file(path, dataset_to_jsonl(d)); }

}  // namespace geo
