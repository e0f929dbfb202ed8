#include <catch2/catch_amalgamated.hpp>

#include "genai/digest.hpp"
#include "genai/provider.hpp"

using namespace genai;

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex(std::string(1000000, 'a')) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("sha256 incremental updates match one-shot") {
    Sha256 h;
    h.update("hello ");
    h.update("world");
    CHECK(h.hex_digest() == sha256_hex("hello world"));
}

TEST_CASE("cache_key matches the frozen external oracle") {
    ModelRequest req;
    req.model_id = "m";
    req.temperature = 0.0;
    req.max_output_tokens = 16;
    req.prompt = "hello";
    // sha256 of {"max_output_tokens":16,"model_id":"m","prompt":"hello","temperature":0.0}
    CHECK(cache_key(req) == "a9a251fac3bd89ea4fd9510c1701faf35d284ac08921b94ecf1032dc798d4dc3");
}

TEST_CASE("cache_key is sensitive to every request field") {
    ModelRequest base{"m", 0.0, 16, "hello"};
    auto k = cache_key(base);
    ModelRequest r = base;
    r.model_id = "m2";
    CHECK(cache_key(r) != k);
    r = base;
    r.temperature = 0.5;
    CHECK(cache_key(r) != k);
    r = base;
    r.max_output_tokens = 17;
    CHECK(cache_key(r) != k);
    r = base;
    r.prompt = "hello!";
    CHECK(cache_key(r) != k);
}
