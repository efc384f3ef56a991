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


#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "lexstruct/fixtures.hpp"
#include "lexstruct/triples.hpp"
#include "triple_cases.hpp"

using namespace lexstruct;

namespace {

const std::string kArticle = "loi_64-46/5";

ProviderSpec mock_spec(const std::string& mode) {
  ProviderSpec s;
  s.name = "mock-" + mode;
  s.mock.mode = mode;
  s.retry.backoff_ms = 1;
  return s;
}

std::shared_ptr<const GroundTruth> truth() {
  auto gt = std::make_shared<GroundTruth>();
  (*gt)[kArticle] = GroundTruthEntry{
      {"articles 2, 5 ... 8 of law 64-46", "this law"},
      {{"the current article", "refers to", "articles 2, 5 ... 8 of law 64-46"},
       {"the current article", "refers to", "this law"},
       {"the current article", "corresponds to", "the national domain"}}};
  return gt;
}

ArticleRecord article(const std::string& number, int art) {
  ArticleRecord r;
  r.domain = "foncier";
  r.law_num = number;
  r.name = "loi";
  r.number = parse_instrument_number(number);
  r.signature_date = "1964-06-17";
  r.art_num = ArticleLabel{ArticlePrefix::None, art, Multiplicative::None};
  r.content = "Les terres du domaine national sont gérées par l'Etat.";
  return r;
}

PromptTemplate two_examples() {
  PromptTemplate tpl = default_template();
  tpl.examples.resize(2);
  return tpl;
}

int count_of(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(ParseTriples, Examples) {
  auto one = parse_triples("(the current article, refers to, articles 2 ... 7 of law 64-46)");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].object, "articles 2 ... 7 of law 64-46");
  EXPECT_EQ(parse_triples("(the current article, refers to, the previous article)").size(), 1u);
  EXPECT_TRUE(parse_triples("no triples here").empty());
  EXPECT_TRUE(parse_triples("").empty());
}

TEST(ParseTriples, FixtureFile) {
  const auto all = cases::load(LEXSTRUCT_TEST_DATA "/triple_cases.txt");
  EXPECT_GE(all.size(), 20u);
  for (const auto& c : all) {
    EXPECT_EQ(cases::check(c), "") << c.name;
  }
}

TEST(ParseTriples, TotalAndIdempotentOnNoise) {
  std::mt19937_64 rng(9);
  const std::string alphabet = "(),|-> abcR.L0123456789\n\xE2\x86\x92:;";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int n = static_cast<int>(rng() % 80);
    for (int k = 0; k < n; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    const auto first = parse_triples(s);
    EXPECT_EQ(parse_triples(serialize_triples(first)), first) << s;
  }
}

TEST(Prompt, TwoExamplesThreeOutputs) {
  const auto tpl = two_examples();
  const auto target = make_target(article("64-46", 5), {"this law"});
  const std::string p = render_prompt(tpl, target);
  EXPECT_EQ(count_of("\n" + p, "\nOutput:\n"), 3);
  EXPECT_EQ(p.substr(p.size() - 8), "Output:\n");
  EXPECT_NE(p.find("Let's think step by step."), std::string::npos);
  const auto content = p.find("Content:\n" + target.content);
  const auto meta = p.find("Metadata:", content);
  const auto refs = p.find("References:\nthis law", meta);
  EXPECT_NE(content, std::string::npos);
  EXPECT_NE(meta, std::string::npos);
  EXPECT_NE(refs, std::string::npos);
  EXPECT_EQ(render_prompt(tpl, target), p);
}

TEST(Prompt, NoExamples) {
  PromptTemplate tpl;
  try {
    render_prompt(tpl, PromptExample{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyExamples);
  }
}

TEST(Prompt, TemplateFileRoundTrip) {
  const auto tpl = default_template();
  EXPECT_EQ(tpl.examples.size(), 10u);
  const std::string doc = save_template(tpl);
  const auto back = load_template(doc);
  EXPECT_EQ(back, tpl);
  EXPECT_EQ(save_template(back), doc);
  for (const auto& e : tpl.examples) {
    for (const auto& t : e.output) EXPECT_EQ(parse_triples(serialize_triple(t)), std::vector<KnowledgeTriple>{t});
  }
  EXPECT_THROW(load_template("stray\n[instruction]\nx\n"), Error);
  EXPECT_THROW(load_template("[content]\nx\n"), Error);
  EXPECT_THROW(load_template("[example]\n[metadata]\nno colon\n"), Error);
}

TEST(Mock, EchoReturnsGroundTruth) {
  MockProvider p(mock_spec("echo"), truth());
  const auto r = generate_triples(article("64-46", 5), {}, two_examples(), p);
  EXPECT_EQ(r.triples, truth()->at(kArticle).triples);
  EXPECT_FALSE(r.empty_output);
  EXPECT_EQ(p.calls(), 1);
  // corrupt at rate 0 is echo
  auto spec = mock_spec("corrupt");
  spec.mock.rate = 0.0;
  MockProvider c(spec, truth());
  EXPECT_EQ(generate_triples(article("64-46", 5), {}, two_examples(), c).triples, r.triples);
}

TEST(Mock, CorruptIsDeterministicAndNested) {
  auto run = [](double rate, std::uint64_t seed) {
    auto spec = mock_spec("corrupt");
    spec.mock.rate = rate;
    spec.mock.seed = seed;
    MockProvider p(spec, truth());
    return generate_triples(article("64-46", 5), {}, two_examples(), p).raw;
  };
  EXPECT_EQ(run(0.5, 3), run(0.5, 3));
  EXPECT_NE(run(0.5, 3), run(0.5, 4));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // every word intact at the higher rate is intact at the lower one
    std::istringstream lo(run(0.3, seed)), hi(run(0.6, seed)), clean(run(0.0, seed));
    std::string a, b, c;
    while (clean >> c) {
      ASSERT_TRUE(lo >> a);
      ASSERT_TRUE(hi >> b);
      if (b == c) {
        EXPECT_EQ(a, c);
      }
    }
  }
  const auto all = run(1.0, 1);
  EXPECT_EQ(all.find("current article,"), std::string::npos);
}

TEST(Mock, FixedAndGarbage) {
  auto spec = mock_spec("fixed");
  spec.mock.text = "I cannot help with that.";
  MockProvider p(spec, truth());
  const auto r = generate_triples(article("64-46", 5), {}, two_examples(), p);
  EXPECT_TRUE(r.triples.empty());
  EXPECT_TRUE(r.empty_output);
  EXPECT_EQ(r.raw, spec.mock.text);
}

TEST(References, EchoAndRawFlag) {
  MockProvider p(mock_spec("echo"), truth());
  const auto refs = extract_references(article("64-46", 5), p);
  ASSERT_EQ(refs.size(), 2u);
  EXPECT_EQ(refs[0], (ExtractedReference{"articles 2, 5 ... 8 of law 64-46", false}));
  EXPECT_EQ(refs[1], (ExtractedReference{"this law", false}));
  const auto parsed = parse_reference_lines("References:\n- articles 5 ... of law 64-46\n1. Article 3 Of Decree 2020-567\nnone\n");
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_TRUE(parsed[0].raw);
  EXPECT_EQ(parsed[0].text, "articles 5 ... of law 64-46");
  EXPECT_FALSE(parsed[1].raw);
  EXPECT_EQ(parsed[1].text, "article 3 of decree 2020-567");
  EXPECT_TRUE(parse_reference_lines("none").empty());
}

TEST(Retry, BacksOffThenGivesUp) {
  auto spec = mock_spec("failing");
  spec.mock.retryable = true;
  spec.retry = RetryPolicy{4, 100, 2.0};
  MockProvider p(spec, truth());
  std::vector<int> sleeps;
  try {
    invoke_with_retry(p, ProviderRequest{"triples", kArticle, ""}, [&](int ms) { sleeps.push_back(ms); });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderError);
    EXPECT_NE(std::string(e.what()).find("4 attempts"), std::string::npos);
  }
  EXPECT_EQ(sleeps, (std::vector<int>{100, 200, 400}));
  EXPECT_EQ(p.calls(), 4);

  spec.mock.retryable = false;
  MockProvider q(spec, truth());
  sleeps.clear();
  EXPECT_THROW(invoke_with_retry(q, ProviderRequest{"triples", kArticle, ""}, [&](int ms) { sleeps.push_back(ms); }),
               Error);
  EXPECT_TRUE(sleeps.empty());
  EXPECT_EQ(q.calls(), 1);
}

TEST(ProviderConfig, ParsesAndValidates) {
  auto spec = provider_from_json(nlohmann::json::parse(
      R"({"name":"gpt","kind":"openai","endpoint":"https://api.example.org/v1","model":"gpt-4o-2024-08-06",)"
      R"("auth_env":"OPENAI_API_KEY","max_concurrent":2,"temperature":0,"npb":200})"));
  EXPECT_EQ(spec.auth_env, "OPENAI_API_KEY");
  EXPECT_EQ(spec.max_concurrent, 2);
  EXPECT_EQ(provider_from_json(nlohmann::json::parse(provider_to_json(spec).dump())).model, spec.model);
  for (const char* bad : {R"({"kind":"mock"})", R"({"name":"x","kind":"grpc"})", R"({"name":"x","kind":"openai"})",
                          R"({"name":"x","max_concurrent":0})", R"({"name":"x","mock":{"mode":"corrupt","rate":1.5}})",
                          R"({"name":"x","mock":{"mode":"shout"}})"}) {
    try {
      provider_from_json(nlohmann::json::parse(bad));
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError) << bad;
    }
  }
}

TEST(Batch, OrderFailuresAndTiming) {
  std::vector<ArticleRecord> arts;
  for (int i = 1; i <= 24; ++i) arts.push_back(article("64-46", i));
  auto gt = std::make_shared<GroundTruth>();
  for (const auto& a : arts) (*gt)[article_key(a)] = GroundTruthEntry{{}, {{"the current article", "refers to", "article " + std::to_string(a.art_num->number) + " of law 64-46"}}};

  auto spec = mock_spec("echo");
  spec.max_concurrent = 4;
  MockProvider echo(spec, gt);
  const auto seq = run_batch(arts, {}, two_examples(), echo, 1);
  const auto par = run_batch(arts, {}, two_examples(), echo, 8);
  ASSERT_EQ(par.items.size(), 24u);
  for (std::size_t i = 0; i < arts.size(); ++i) {
    EXPECT_EQ(par.items[i].article, article_key(arts[i]));
    EXPECT_EQ(par.items[i].triples, gt->at(article_key(arts[i])).triples);
    EXPECT_EQ(par.items[i].triples, seq.items[i].triples);
  }
  EXPECT_EQ(format_eid(par.total_seconds), "0m00s");

  auto failing = mock_spec("failing");
  failing.mock.fail_keys = {article_key(arts[6])};
  failing.max_concurrent = 4;
  MockProvider f(failing, gt);
  const auto partial = run_batch(arts, {}, two_examples(), f, 4);
  EXPECT_EQ(partial.failures(), 1u);
  EXPECT_TRUE(partial.items[6].error.has_value());
  for (std::size_t i = 0; i < arts.size(); ++i) {
    if (i != 6) {
      EXPECT_EQ(partial.items[i].triples, seq.items[i].triples);
    }
  }

  auto slow = mock_spec("delay");
  slow.mock.delay_ms = 100;
  MockProvider d(slow, gt);
  const auto timed = run_batch(arts, {}, two_examples(), d, 1);
  EXPECT_GE(timed.total_seconds, 2.4);
  EXPECT_EQ(timed.items[3].triples, seq.items[3].triples);

  PromptTemplate empty;
  EXPECT_THROW(run_batch(arts, {}, empty, echo, 1), Error);
}

TEST(Batch, EidFormat) {
  EXPECT_EQ(format_eid(233), "3m53s");
  EXPECT_EQ(format_eid(143), "2m23s");
  EXPECT_EQ(format_eid(0.2), "0m00s");
  EXPECT_EQ(format_eid(59.6), "1m00s");
}

TEST(Batch, JsonlRoundTrip) {
  MockProvider echo(mock_spec("echo"), truth());
  std::vector<ArticleRecord> arts = {article("64-46", 5), article("64-46", 6)};
  const auto b = run_batch(arts, {}, two_examples(), echo, 2);
  std::stringstream s;
  write_batch_jsonl(s, "echo", b);
  const auto set = read_generated_jsonl(s);
  EXPECT_EQ(set.model, "echo");
  EXPECT_EQ(set.triples.at(kArticle), truth()->at(kArticle).triples);
  EXPECT_TRUE(set.triples.at("loi_64-46/6").empty());
  std::stringstream bad("{\"article\": 1}\n");
  EXPECT_THROW(read_generated_jsonl(bad), RecordError);
}
