#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "genai/ingest.hpp"
#include "genai/tasks/seedlist.hpp"

using namespace genai;

static const std::filesystem::path kData = std::filesystem::path(GENAI_SOURCE_DIR) / "data";

namespace {

std::string label_of(const DiffClass& d) {
    std::string label = to_string(d.category);
    if (d.sub) label += ":" + to_string(*d.sub);
    return label;
}

}  // namespace

TEST_CASE("classify: identical names are consistent") {
    auto d = classify_name_diff("Cistus crispus L.", "Cistus crispus L.");
    CHECK(d.category == DiffCategory::Consistent);
    CHECK_FALSE(d.sub.has_value());
}

TEST_CASE("classify: author abbreviation is harmless") {
    auto d = classify_name_diff("Chenopodium capitatum (L.) Asch.",
                                "Chenopodium capitatum (L.) Aschers.");
    CHECK(d.category == DiffCategory::HarmlessAuthorVariant);
}

TEST_CASE("classify: wrong text substituted is erroneous") {
    auto d = classify_name_diff("Palisota barteri Hook.", "Palisota mannii C.B.Clarke");
    CHECK(d.category == DiffCategory::Erroneous);
    CHECK(d.sub == DiffSub::Substitution);
}

TEST_CASE("classify: extra text included is erroneous") {
    auto d = classify_name_diff("Achillea millefolium L. (NG)", "Achillea millefolium L.");
    CHECK(d.category == DiffCategory::Erroneous);
    CHECK(d.sub == DiffSub::Inclusion);
}

TEST_CASE("classify: dropped epithet is an exclusion") {
    auto d = classify_name_diff("Helianthemum var. roseum Grosser",
                                "Helianthemum apenninum var. roseum Grosser");
    CHECK(d.category == DiffCategory::Erroneous);
    CHECK(d.sub == DiffSub::Exclusion);
}

TEST_CASE("classify: divergence present in the OCR source is a residual, not a model error") {
    auto d = classify_name_diff("Aneilena papuanum Warb.", "Aneilema papuanum Warb.",
                                std::string("Aneilena papuanum Warburg"));
    CHECK(d.category == DiffCategory::OcrResidual);
    // without the source the same divergence is a substitution
    auto no_src = classify_name_diff("Aneilena papuanum Warb.", "Aneilema papuanum Warb.");
    CHECK(no_src.category == DiffCategory::Erroneous);
    CHECK(no_src.sub == DiffSub::Substitution);
}

TEST_CASE("classify: substitution outranks inclusion and exclusion in mixed cells") {
    auto d = classify_name_diff("Antennaria dioica (L.) Gaertn.", "Antennaria howellii Greene");
    CHECK(d.sub == DiffSub::Substitution);
}

TEST_CASE("the full three-run table fixture classifies exactly as transcribed") {
    auto runs = load_csv_records(kData / "table3.csv", {"run1", "run2", "run3"});
    auto expected = load_csv_records(kData / "table3_expected.csv",
                                     {"reference", "source", "run1", "run2", "run3"});
    REQUIRE(runs.rows.size() == 32);
    REQUIRE(expected.rows.size() == 32);

    std::size_t cells = 0;
    for (std::size_t row = 0; row < runs.rows.size(); ++row) {
        const std::string& reference = expected.rows[row][0];
        const std::string& source = expected.rows[row][1];
        for (std::size_t run = 0; run < 3; ++run) {
            const std::string& candidate = runs.rows[row][run];
            CHECK_NOTHROW(parse_species_name(candidate));
            auto diff = classify_name_diff(candidate, reference, source);
            INFO("row " << row + 1 << " run " << run + 1 << ": '" << candidate << "' vs '"
                        << reference << "'");
            CHECK(label_of(diff) == expected.rows[row][run + 2]);
            ++cells;
        }
    }
    CHECK(cells == 96);
}

TEST_CASE("species_names_match tolerates author variants only") {
    auto a = parse_species_name("Chenopodium capitatum (L.) Asch.");
    auto b = parse_species_name("Chenopodium capitatum (L.) Aschers.");
    auto c = parse_species_name("Chenopodium capitatum (L.) Hook.");
    CHECK(species_names_match(a, b));
    CHECK_FALSE(species_names_match(a, c));
    CHECK_FALSE(species_names_match(a, parse_species_name("Chenopodium urbicum (L.) Asch.")));
}

TEST_CASE("perfect pages score 1.0 on every metric") {
    for (std::size_t count : {42u, 28u, 23u, 32u}) {
        std::vector<SpeciesName> truth;
        for (std::size_t i = 0; i < count; ++i) {
            SpeciesName n;
            n.genus = "Genus" + std::to_string(i);
            n.epithet = "species" + std::to_string(i);
            n.authors = "L.";
            truth.push_back(n);
        }
        auto extracted = truth;
        auto m = score_page(extracted, truth);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.accuracy == 1.0);
        CHECK(m.matched == count);
    }
}

TEST_CASE("imperfect pages score as hand-counted") {
    std::vector<SpeciesName> truth;
    for (int i = 0; i < 4; ++i) {
        SpeciesName n;
        n.genus = "G" + std::to_string(i);
        n.epithet = "e";
        truth.push_back(n);
    }
    auto extracted = std::vector<SpeciesName>(truth.begin(), truth.begin() + 3);
    SpeciesName spurious;
    spurious.genus = "Spurious";
    spurious.epithet = "x";
    extracted.push_back(spurious);

    auto m = score_page(extracted, truth);
    CHECK(m.precision == 0.75);
    CHECK(m.recall == 0.75);
    CHECK(m.accuracy == 0.6);  // 3 matched over a union of 5

    auto empty = score_page({}, truth);
    CHECK(empty.recall == 0.0);
    CHECK(empty.precision == 0.0);
    CHECK(empty.precision_undefined);
}
