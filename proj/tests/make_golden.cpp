// Copyright 2026 The lexstruct Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Regenerates tests/data/golden_articles.jsonl from the seed-0 fixture
// corpus using the reference extractor in oracles.hpp.
//
//   make_golden <out.jsonl>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "lexstruct/extractor.hpp"
#include "lexstruct/fixtures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace lexstruct;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <out.jsonl>\n";
    return 2;
  }
  const fs::path tmp = fs::temp_directory_path() / "lexstruct_make_golden";
  fs::remove_all(tmp);
  make_fixtures(tmp, 0);
  const fs::path root = tmp / "corpus";

  std::vector<fs::path> docs;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) docs.push_back(fs::relative(e.path(), root));
  }
  std::sort(docs.begin(), docs.end());

  std::vector<ArticleRecord> all;
  for (const auto& rel : docs) {
    const bool is_rent = rel.generic_string().find("loyer") != std::string::npos;
    const auto d = parse_descriptor((root / rel.parent_path()).generic_string() + "/", rel.filename().string(),
                                    is_rent);
    std::ifstream in(root / rel, std::ios::binary);
    ElementReader reader(in, StreamOptions{is_rent});
    std::vector<DocumentElement> es;
    while (auto e = reader.next()) es.push_back(*e);
    for (auto& r : oracle::extract(d, es)) all.push_back(std::move(r));
  }
  std::ofstream out(argv[1], std::ios::binary | std::ios::trunc);
  write_records_jsonl(out, all);
  fs::remove_all(tmp);
  std::cout << all.size() << " records\n";
  return out ? 0 : 1;
}
