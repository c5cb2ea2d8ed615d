#include <gtest/gtest.h>
#include <fstream>

#include "ricl/core/http.hpp"
#include "ricl/embedding/gateway.hpp"
#include "ricl/embedding/precomputed.hpp"
#include "support/test_support.hpp"

using namespace ricl;
using ricl::testing::ScriptedProvider;
using ricl::testing::TempDir;

namespace {

ProviderConfig config(std::size_t text_dim, std::size_t image_dim) {
  ProviderConfig c;
  c.text_dim = text_dim;
  c.image_dim = image_dim;
  c.image_resolution = 32;
  c.batch_size = 2;
  return c;
}

ScenarioRecord rec(const std::string& id, const std::string& image) {
  ScenarioRecord r;
  r.id = id;
  r.caption = "caption " + id;
  r.outcome = "outcome " + id;
  r.image_ref = image;
  return r;
}

}  // namespace

TEST(EmbeddingVector, NormalizesThreeFour) {
  auto v = normalize(std::vector<double>{3.0, 4.0});
  EXPECT_TRUE(v.normalized);
  EXPECT_FLOAT_EQ(v.values[0], 0.6f);
  EXPECT_FLOAT_EQ(v.values[1], 0.8f);
  EXPECT_THROW(normalize(std::vector<double>{0.0, 0.0}), ProviderError);
  EXPECT_THROW(normalize(std::vector<double>{1.0, NAN}), ProviderError);
}

TEST(Gateway, TextMockThreeFourBecomesUnit) {
  auto text = std::make_shared<ScriptedProvider>([](const std::string&) { return std::vector<double>{3, 4}; });
  auto image = std::make_shared<ScriptedProvider>(4);
  EmbeddingGateway gw(config(2, 4), text, image);
  auto v = gw.embed_text("hello");
  EXPECT_EQ(v.dim(), 2u);
  EXPECT_NEAR(v.values[0], 0.6, 1e-7);
  EXPECT_NEAR(v.values[1], 0.8, 1e-7);
  EXPECT_TRUE(is_unit(v));
}

TEST(Gateway, SameTextTwiceIsBitIdenticalAndCached) {
  auto text = std::make_shared<ScriptedProvider>(8);
  EmbeddingGateway gw(config(8, 4), text, std::make_shared<ScriptedProvider>(4));
  auto a = gw.embed_text("the same string");
  auto b = gw.embed_text("the same string");
  EXPECT_EQ(a, b);
  EXPECT_EQ(text->calls.load(), 1);
}

TEST(Gateway, DimensionMismatchAndEmptyInput) {
  auto text = std::make_shared<ScriptedProvider>(3);
  EmbeddingGateway gw(config(8, 4), text, std::make_shared<ScriptedProvider>(4));
  EXPECT_THROW(gw.embed_text("x"), DimensionMismatch);
  EXPECT_THROW(gw.embed_text("  "), PreconditionError);
}

TEST(Gateway, ProviderFailurePropagates) {
  auto text = std::make_shared<ScriptedProvider>(8);
  text->fail = true;
  EmbeddingGateway gw(config(8, 4), text, std::make_shared<ScriptedProvider>(4));
  EXPECT_THROW(gw.embed_text("x"), ProviderError);
}

TEST(Gateway, ImageIsResizedBeforeDispatchAndCached) {
  TempDir dir;
  ricl::testing::write_png(dir / "a.png", 100, 60, 40);
  int seen_w = 0, seen_h = 0;
  auto image = std::make_shared<ScriptedProvider>([&](const std::string& b64) {
    auto png = ricl::testing::base64_decode(b64);
    std::vector<unsigned char> buf(png.begin(), png.end());
    auto m = cv::imdecode(buf, cv::IMREAD_COLOR);
    seen_w = m.cols;
    seen_h = m.rows;
    return ScriptedProvider::hashed_vector(png, 5);
  });
  EmbeddingGateway gw(config(4, 5), std::make_shared<ScriptedProvider>(4), image,
                      std::make_shared<EmbeddingCache>(), dir.path());
  auto v = gw.embed_image("a.png");
  EXPECT_EQ(seen_w, 32);
  EXPECT_EQ(seen_h, 32);
  EXPECT_EQ(v.dim(), 5u);
  EXPECT_NEAR(l2_norm(v.values), 1.0, 1e-6);
  EXPECT_EQ(gw.embed_image("a.png"), v);
  EXPECT_EQ(image->calls.load(), 1);
}

TEST(Gateway, MissingImageIsUnresolvable) {
  TempDir dir;
  EmbeddingGateway gw(config(4, 4), std::make_shared<ScriptedProvider>(4),
                      std::make_shared<ScriptedProvider>(4), std::make_shared<EmbeddingCache>(), dir.path());
  EXPECT_THROW(gw.embed_image("missing.png"), PreconditionError);
}

TEST(Gateway, WarmCacheCountsProviderWork) {
  TempDir dir;
  for (int i = 0; i < 3; ++i) ricl::testing::write_png(dir / ("i" + std::to_string(i) + ".png"), 8, 8, 10 * i);
  auto text = std::make_shared<ScriptedProvider>(4);
  auto image = std::make_shared<ScriptedProvider>(4);
  auto cache = std::make_shared<EmbeddingCache>(dir / "cache");
  EmbeddingGateway gw(config(4, 4), text, image, cache, dir.path());

  EXPECT_EQ(gw.warm_cache({}), CacheStats{});

  std::vector<ScenarioRecord> rs{rec("a", "i0.png"), rec("b", "i1.png"), rec("c", "i2.png")};
  auto cold = gw.warm_cache(rs);
  EXPECT_EQ(cold.hits, 0u);
  EXPECT_EQ(cold.misses, 6u);
  EXPECT_EQ(cold.failures, 0u);
  EXPECT_EQ(text->items.load() + image->items.load(), 6);

  auto warm = gw.warm_cache(rs);
  EXPECT_EQ(warm.hits, 6u);
  EXPECT_EQ(warm.misses, 0u);
  EXPECT_EQ(text->items.load() + image->items.load(), 6);

  // A fresh process reads the same vectors back from disk.
  auto text2 = std::make_shared<ScriptedProvider>(4);
  EmbeddingGateway gw2(config(4, 4), text2, std::make_shared<ScriptedProvider>(4),
                       std::make_shared<EmbeddingCache>(dir / "cache"), dir.path());
  EXPECT_EQ(gw2.embed_text("outcome a"), gw.embed_text("outcome a"));
  EXPECT_EQ(text2->calls.load(), 0);
}

TEST(Gateway, WarmCacheReportsFailuresWithoutThrowing) {
  TempDir dir;
  ricl::testing::write_png(dir / "ok.png", 8, 8, 1);
  auto text = std::make_shared<ScriptedProvider>(4);
  auto image = std::make_shared<ScriptedProvider>(4);
  image->fail = true;
  EmbeddingGateway gw(config(4, 4), text, image, std::make_shared<EmbeddingCache>(), dir.path());
  std::vector<ScenarioRecord> rs{rec("a", "ok.png"), rec("b", "gone.png")};
  auto stats = gw.warm_cache(rs);
  EXPECT_EQ(stats.misses, 2u);    // both texts
  EXPECT_EQ(stats.failures, 2u);  // provider failure + missing file
  EXPECT_EQ(stats.failed_ids, (std::vector<std::string>{"a", "b"}));
}

TEST(Gateway, CacheTransparency) {
  TempDir dir;
  auto with_cache = std::make_shared<ScriptedProvider>(16);
  EmbeddingGateway a(config(16, 4), with_cache, std::make_shared<ScriptedProvider>(4),
                     std::make_shared<EmbeddingCache>(dir / "c"));
  for (const char* s : {"alpha", "beta", "gamma"}) {
    auto cached_once = a.embed_text(s);
    auto cached_twice = a.embed_text(s);
    EmbeddingGateway fresh(config(16, 4), std::make_shared<ScriptedProvider>(16),
                           std::make_shared<ScriptedProvider>(4));
    EXPECT_EQ(cached_once, cached_twice);
    EXPECT_EQ(cached_once, fresh.embed_text(s));
  }
}

TEST(HttpProvider, SpeaksDocumentedProtocol) {
  httplib::Server server;
  std::string seen_auth;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    auto j = Json::parse(req.body);
    Json out;
    out["vectors"] = Json::array();
    for (const auto& in : j["inputs"]) out["vectors"].push_back({double(in.get<std::string>().size()), 1.0});
    res.set_content(out.dump(), "application/json");
  });
  server.Post("/short", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"vectors":[[1,2,3]]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const auto base = "http://127.0.0.1:" + std::to_string(port);
  HttpEmbeddingProvider p(base + "/embed", "secret", std::chrono::seconds(5));
  auto v = p.embed({"abc", "de"});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], (std::vector<double>{3.0, 1.0}));
  EXPECT_EQ(seen_auth, "Bearer secret");

  EmbeddingGateway gw(config(2, 2), std::make_shared<HttpEmbeddingProvider>(base + "/short", "", std::chrono::seconds(5)),
                      std::make_shared<ScriptedProvider>(2));
  EXPECT_THROW(gw.embed_text("x"), DimensionMismatch);

  HttpEmbeddingProvider dead("http://127.0.0.1:1/embed", "", std::chrono::milliseconds(200));
  EXPECT_THROW(dead.embed({"x"}), ProviderError);

  server.stop();
  t.join();
}

TEST(Precomputed, LoadsAndNormalizes) {
  ricl::testing::TempDir dir;
  std::ofstream(dir / "e.jsonl") << R"({"id":"a","image":[3,4],"text":[0,2,0]})" "\n"
                                 << R"({"id":"b","image":[1,0],"text":[1,1,1]})" "\n";
  const auto t = PrecomputedEmbeddings::load(dir / "e.jsonl");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_FLOAT_EQ(t.at("a").image.values[0], 0.6f);
  EXPECT_FLOAT_EQ(t.at("a").text.values[1], 1.0f);
  EXPECT_THROW(t.at("c"), PreconditionError);
}

TEST(Precomputed, RejectsDuplicatesAndMixedDims) {
  ricl::testing::TempDir dir;
  std::ofstream(dir / "dup.jsonl") << R"({"id":"a","image":[1],"text":[1]})" "\n"
                                   << R"({"id":"a","image":[1],"text":[1]})" "\n";
  EXPECT_THROW(PrecomputedEmbeddings::load(dir / "dup.jsonl"), SchemaError);
  std::ofstream(dir / "dims.jsonl") << R"({"id":"a","image":[1],"text":[1]})" "\n"
                                    << R"({"id":"b","image":[1,2],"text":[1]})" "\n";
  EXPECT_THROW(PrecomputedEmbeddings::load(dir / "dims.jsonl"), DimensionMismatch);
}
