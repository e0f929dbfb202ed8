#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "genai/ingest.hpp"

using namespace genai;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    auto path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("find_invalid_utf8") {
    CHECK(!find_invalid_utf8("plain ascii"));
    CHECK(!find_invalid_utf8("caf\xc3\xa9"));          // é
    CHECK(!find_invalid_utf8("\xe2\x82\xac"));         // €
    CHECK(!find_invalid_utf8("\xf0\x9f\x8c\xbf"));     // 🌿
    CHECK(find_invalid_utf8("\xc3(") == 0);            // truncated sequence
    CHECK(find_invalid_utf8("ok\xff") == 2);           // invalid byte
    CHECK(find_invalid_utf8("\xc0\xaf") == 0);         // overlong encoding
    CHECK(find_invalid_utf8("\xed\xa0\x80") == 0);     // surrogate
}

TEST_CASE("load_text_document keeps bytes verbatim and rejects bad encoding") {
    auto p = write_temp("ingest_doc.txt", "line one\n\nline two\n");
    auto doc = load_text_document(p, "doc1", "fr", Origin::OcrText);
    CHECK(doc.id == "doc1");
    CHECK(doc.text == "line one\n\nline two\n");
    CHECK(doc.language == "fr");
    CHECK(doc.origin == Origin::OcrText);

    auto bad = write_temp("ingest_bad.txt", "ok\xff");
    CHECK_THROWS_AS(load_text_document(bad, "bad"), EncodingError);
    CHECK_THROWS_AS(load_text_document("/nonexistent/file.txt", "x"), FileMissing);
}

TEST_CASE("csv parser handles quoting, embedded delimiters and newlines") {
    auto rows = detail::parse_csv("a,b,c\n\"x,y\",\"he said \"\"hi\"\"\",\"two\nlines\"\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "x,y");
    CHECK(rows[1][1] == "he said \"hi\"");
    CHECK(rows[1][2] == "two\nlines");
    CHECK_THROWS_AS(detail::parse_csv("\"unterminated"), CsvParseError);
}

TEST_CASE("load_csv_records validates columns and rectangularity") {
    auto p = write_temp("ingest_good.csv", "name,code\nalpha,1111\nbeta,2121\n");
    auto batch = load_csv_records(p, {"name", "code"});
    CHECK(batch.rows.size() == 2);
    CHECK(*batch.column_index("code") == 1);

    CHECK_THROWS_AS(load_csv_records(p, {"missing"}), MissingColumn);
    auto ragged = write_temp("ingest_ragged.csv", "a,b\n1\n");
    CHECK_THROWS_AS(load_csv_records(ragged), RaggedRow);
}

TEST_CASE("csv serialize-parse round trip") {
    RecordBatch batch;
    batch.columns = {"name", "note"};
    batch.rows = {{"plain", "x"}, {"with,comma", "quote\"inside"}, {"multi\nline", ""}};
    auto text = serialize_csv(batch);
    auto rows = detail::parse_csv(text);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == batch.columns);
    for (std::size_t i = 0; i < batch.rows.size(); ++i) CHECK(rows[i + 1] == batch.rows[i]);
}

TEST_CASE("ground truth: species sets must parse") {
    auto good = write_temp("gt_species.json",
                           R"({"page1": ["Cistus crispus L.", "Tuberaria guttata (L.) Fourr."]})");
    auto gt = load_ground_truth(good, GroundTruthKind::SpeciesSet);
    CHECK(gt.species_sets.at("page1").size() == 2);

    auto bad = write_temp("gt_species_bad.json", R"gt({"page1": ["(just authors)"]})gt");
    CHECK_THROWS_AS(load_ground_truth(bad, GroundTruthKind::SpeciesSet), ParseError);
}

TEST_CASE("ground truth: naics labels are 4-digit codes") {
    auto good = write_temp("gt_naics.json", R"({"proj1": "7225"})");
    auto gt = load_ground_truth(good, GroundTruthKind::NaicsLabel);
    CHECK(gt.naics_labels.at("proj1") == "7225");
    auto bad = write_temp("gt_naics_bad.json", R"({"proj1": "72251"})");
    CHECK_THROWS_AS(load_ground_truth(bad, GroundTruthKind::NaicsLabel), ParseError);
}

TEST_CASE("ground truth: hta records carry exactly the 14 fields") {
    nlohmann::json rec;
    for (const auto& f : detail::hta_field_names()) rec[f] = nullptr;
    rec["hta_id"] = "TA1001";
    nlohmann::json j = {{"doc1", rec}};
    auto good = write_temp("gt_hta.json", j.dump());
    auto gt = load_ground_truth(good, GroundTruthKind::HtaRecord);
    CHECK(gt.hta_records.at("doc1").size() == 14);
    CHECK(*gt.hta_records.at("doc1").at("hta_id") == "TA1001");

    rec.erase("comparator");
    auto missing = write_temp("gt_hta_bad.json", nlohmann::json({{"doc1", rec}}).dump());
    CHECK_THROWS_AS(load_ground_truth(missing, GroundTruthKind::HtaRecord), ParseError);

    auto nonjson = write_temp("gt_hta_nonjson.json", "not json");
    CHECK_THROWS_AS(load_ground_truth(nonjson, GroundTruthKind::HtaRecord), ParseError);
}
