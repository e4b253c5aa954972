// Regenerates the offline fixtures of the bundled sample course: fetched pages, canned search results and the
// replay store of every model call made by `align pipeline` (default modes and all-agent modes).
//
//   make_sample [--course data/sample_course/course.json]
//
// Replies come from ScriptedChatBackend; search results come from the hand-written catalog below.

#include <filesystem>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "align/error.hpp"
#include "align/pipeline.hpp"
#include "align/text.hpp"
#include "make_sample/scripted_backend.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CatalogEntry {
  std::string url;
  std::string title;
  std::string snippet;
  int status;
  std::string content_type;
  std::string body;
};

std::string html(const std::string& title, const std::string& text) {
  return "<!doctype html><html><head><title>" + title + "</title><style>body{font-family:serif}</style>"
         "<script>window.analytics=[];</script></head><body><nav>Home | Courses | About</nav><h1>" + title +
         "</h1><p>" + text + "</p></body></html>";
}

const std::string k_html = "text/html; charset=utf-8";

std::map<std::string, std::vector<CatalogEntry>> catalog() {
  std::map<std::string, std::vector<CatalogEntry>> c;
  c["Arrays"] = {
      {"https://www.youtube.com/watch?v=ds101-arrays-1", "Arrays and zero-based indexing, step by step",
       "A short lecture on array indexing and loop bounds.", 200, k_html,
       html("Arrays and zero-based indexing", "This video walks through Arrays: why the first index is 0, how loop "
                                              "bounds avoid off-by-one errors, and why inserting at the front shifts every element.")},
      {"https://cs-notes.example.edu/arrays/indexing.html", "Arrays: indexing, bounds and shifting",
       "Course notes on arrays.", 200, k_html,
       html("Arrays: indexing, bounds and shifting",
            "Arrays store elements contiguously. With zero-based indexing the last element of an array of length n "
            "is at n - 1. Element shifting makes front insertion cost O(n).")},
      {"https://algo-visualization.example.net/array", "Array operations visualization",
       "Watch inserts and deletes shift array elements.", 200, k_html,
       html("Array operations visualization", "Step through Arrays operations and see element shifting and "
                                              "amortized growth of dynamic arrays.")},
  };
  c["Linked Lists"] = {
      {"https://www.youtube.com/watch?v=ds101-structures#t=340", "Data structures crash course: linked lists",
       "Chapter on linked lists.", 200, k_html,
       html("Data structures crash course", "Chapters on Arrays, Linked Lists and Hash Tables with worked examples.")},
      {"https://www.youtube.com/watch?v=ds101-lists-1", "Linked lists: pointer manipulation explained",
       "Insertion and deletion in singly linked lists.", 200, k_html,
       html("Linked lists: pointer manipulation", "Linked Lists keep a pointer to the next node. Insert after p by "
                                                  "setting x.next = p.next before p.next = x.")},
      {"https://cs-notes.example.edu/lists/pointers.html", "Pointer manipulation in linked lists",
       "Course notes with diagrams.", 200, k_html,
       html("Pointer manipulation in linked lists", "Linked Lists rely on careful pointer manipulation. The "
                                                    "two-pointer technique detects cycles with constant extra space.")},
      {"https://list-visualizer.example.org/singly", "Linked list visualizer", "Animate insertions and cycle detection.",
       200, k_html, html("Linked list visualizer", "Interactive Linked Lists: insert, delete and run the two-pointer technique.")},
      {"https://cs-notes.example.edu/complexity/big-o.html#lists", "Big-O cheat sheet", "Costs of common operations.", 200,
       k_html, html("Big-O cheat sheet", "Costs of common operations on Arrays, Linked Lists, Sorting and Hash Tables.")},
  };
  c["Recursion"] = {
      {"https://www.youtube.com/watch?v=ds101-recursion-1", "Recursion: base cases and the call stack",
       "Tracing recursive calls by hand.", 200, k_html,
       html("Recursion: base cases and the call stack", "Every Recursion needs a base case. Tracing calls shows how "
                                                        "the call stack grows and why deep recursion overflows it.")},
      {"https://lecture-archive.example.edu/ds101/recursion.pdf", "Recursion lecture slides (PDF)",
       "Slides on recursion trees.", 200, "application/pdf", "%PDF-1.4 binary slides"},
      {"https://recursion-tree-visualizer.example.org/", "Recursion tree visualizer", "Draw the recursion tree of any function.",
       200, k_html, html("Recursion tree visualizer", "Visualize the recursion tree of fib(n) and count the calls.")},
      {"https://cs-notes.example.edu/recursion/tracing.html", "Tracing recursive calls", "Worked tracing examples.", 200,
       k_html, html("Tracing recursive calls", "Recursion is easiest to understand by tracing calls on paper.")},
  };
  c["Sorting"] = {
      {"https://www.youtube.com/watch?v=ds101-sorting-1", "Sorting algorithms compared", "Time complexity of common sorts.",
       200, k_html, html("Sorting algorithms compared", "Sorting by insertion, merge and quicksort: time complexity, "
                                                        "stability and the effect of pivot choice.")},
      {"https://cs-notes.example.edu/complexity/big-o.html#sorting", "Big-O cheat sheet: sorting", "Costs of sorts.", 200,
       k_html, html("Big-O cheat sheet", "Costs of common operations on Arrays, Linked Lists, Sorting and Hash Tables.")},
      {"https://timeout.example.com/sorting", "Sorting in 5 minutes", "A fast overview.", 0, "", ""},
      {"https://sorting-visualization.example.net/", "Sorting visualization", "Watch sorting algorithms run.", 200, k_html,
       html("Sorting visualization", "Compare Sorting algorithms side by side, including stability and time complexity.")},
      {"https://lecture-archive.example.edu/ds101/sorting.pdf", "Sorting lecture notes (PDF)", "Merge sort and quicksort.",
       200, "application/pdf", "%PDF-1.4 binary notes"},
  };
  c["Hash Tables"] = {
      {"https://www.youtube.com/watch?v=ds101-structures#t=1260", "Data structures crash course: hash tables",
       "Chapter on hashing.", 200, k_html,
       html("Data structures crash course", "Chapters on Arrays, Linked Lists and Hash Tables with worked examples.")},
      {"https://broken.example.com/hash-tables-guide", "The complete guide to hash tables", "Everything about hashing.",
       404, k_html, html("Not found", "The page you requested does not exist.")},
      {"https://www.youtube.com/watch?v=ds101-hashing-1", "Hash tables: collisions and load factor",
       "Chaining versus open addressing.", 200, k_html,
       html("Hash tables: collisions and load factor", "Hash Tables resolve collisions by separate chaining or open "
                                                       "addressing; the load factor controls lookup cost.")},
      {"https://security-blog.example.com/password-hashing", "Password hashing done right", "Choosing a password hash.",
       200, k_html, html("Password hashing done right", "Use a slow, salted function such as bcrypt or Argon2 for passwords.")},
      {"https://cs-notes.example.edu/hashing/open-addressing.html", "Open addressing and deletion",
       "Why deleted slots get tombstones.", 200, k_html,
       html("Open addressing and deletion", "In Hash Tables with open addressing, collision resolution by linear probing "
                                           "needs tombstones so later probes do not stop early.")},
      {"https://hash-table-interactive.example.org/", "Interactive hash table", "Insert keys and watch the probes.", 200,
       k_html, html("Interactive hash table", "Insert keys into Hash Tables and watch collision resolution.")},
  };
  c["Trees"] = {
      {"https://cs-notes.example.edu/trees/traversal.html", "Tree traversals", "Preorder, inorder and postorder.", 200,
       k_html, html("Tree traversals", "Trees can be traversed in preorder, inorder or postorder.")},
  };
  return c;
}

/// Serves the catalog by topic (the query starts with the topic name) and records every query it answers.
class CatalogSearch final : public align::SearchBackend {
 public:
  explicit CatalogSearch(const std::map<std::string, std::vector<CatalogEntry>>& entries) : entries_(entries) {}

  std::vector<align::SearchResult> search(const std::string& query) override {
    std::vector<align::SearchResult> results;
    std::size_t best = 0;
    for (const auto& [topic, list] : entries_) {
      if (query.rfind(topic + " ", 0) == 0 && topic.size() > best) {
        best = topic.size();
        results.clear();
        for (const auto& e : list) results.push_back({e.url, e.title, e.snippet});
      }
    }
    recorded_[query] = results;
    return results;
  }

  json recorded() const {
    json doc = json::object();
    for (const auto& [query, results] : recorded_) {
      json list = json::array();
      for (const auto& r : results) list.push_back({{"url", r.url}, {"title", r.title}, {"snippet", r.snippet}});
      doc[query] = list;
    }
    return doc;
  }

 private:
  const std::map<std::string, std::vector<CatalogEntry>>& entries_;
  std::map<std::string, std::vector<align::SearchResult>> recorded_;
};

}  // namespace

int main(int argc, char** argv) {
  std::string course = "data/sample_course/course.json";
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--course" && i + 1 < argc) {
      course = argv[++i];
    } else {
      std::cerr << "usage: make_sample [--course <course.json>]\n";
      return 64;
    }
  }

  try {
    auto base = fs::path(course).parent_path();
    auto fixtures = base / "fixtures";
    auto pages = fixtures / "pages";
    fs::remove_all(pages);
    fs::create_directories(pages);

    auto entries = catalog();
    for (const auto& [topic, list] : entries) {
      for (const auto& e : list) {
        auto url = align::strip_fragment(e.url);
        align::text::write_file((pages / align::FixtureFetchBackend::page_file_name(url)).string(),
                                align::FixtureFetchBackend::serialize_page(url, {e.status, e.content_type, e.body}));
      }
    }

    align::tools::ScriptedChatBackend chat("Sorting");
    CatalogSearch search(entries);
    align::FixtureFetchBackend fetch(pages.string());
    auto scratch = fs::temp_directory_path() / "align_make_sample";

    std::vector<align::Transcript> transcripts;
    for (bool all_agent : {false, true}) {
      align::RunConfig config;
      config.course_path = course;
      config.out_dir = scratch.string();
      if (all_agent) {
        config.mode_compat = config.mode_summary = config.mode_prefs = align::StageMode::Agent;
      }
      align::Session session(config, &chat, &search, &fetch);
      align::run_pipeline(session);
      auto t = session.gateway().transcripts();
      transcripts.insert(transcripts.end(), t.begin(), t.end());
    }
    fs::remove_all(scratch);

    align::write_json((fixtures / "search.json").string(), search.recorded());
    align::record_session(transcripts, (base / "replay.json").string());
    std::cout << "wrote " << transcripts.size() << " model calls, " << search.recorded().size() << " queries and pages for "
              << entries.size() << " topics under " << base.string() << "\n";
  } catch (const align::Error& e) {
    std::cerr << "make_sample: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
