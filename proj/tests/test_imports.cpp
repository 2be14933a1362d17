#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "devforge/imports.hpp"

using namespace devforge::imports;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("detect_language maps extensions case-insensitively") {
    CHECK(detect_language("src/a.py") == LanguageId::Python);
    CHECK(detect_language("Model.ipynb") == LanguageId::JupyterNotebook);
    CHECK(detect_language("MAIN.C") == LanguageId::C);
    CHECK(detect_language("lib/Engine.KT") == LanguageId::Kotlin);
    CHECK(detect_language("script.R") == LanguageId::R);
    CHECK_FALSE(detect_language("README.md").has_value());
    CHECK_FALSE(detect_language("Makefile").has_value());
    CHECK_FALSE(detect_language("dir.with.dots/file").has_value());
}

TEST_CASE("spec table covers exactly the 17 languages") {
    CHECK(language_specs().size() == 17);
    for (LanguageId id : kAllLanguages) {
        const auto& spec = spec_for(id);
        CHECK(!spec.extensions.empty());
        for (const auto& ext : spec.extensions) {
            REQUIRE(!ext.empty());
            CHECK(ext.front() == '.');
            for (char c : ext) {
                CHECK((c == '.' || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')));
            }
        }
    }
}

TEST_CASE("versioned pattern table file matches the builtin") {
    auto file = nlohmann::json::parse(
        read_file(std::string(DEVFORGE_DATA_DIR) + "/language_specs.json"));
    auto builtin = nlohmann::json::parse(builtin_spec_json());
    CHECK(file == builtin);
}

TEST_CASE("python extraction follows the from/import rules") {
    auto imports =
        extract_imports("from foo.bar import baz\nimport qux", LanguageId::Python);
    CHECK(imports == std::vector<std::string>{"foo.bar", "qux"});
}

TEST_CASE("empty content extracts nothing in every language") {
    for (LanguageId id : kAllLanguages) {
        if (id == LanguageId::JupyterNotebook) {
            continue;  // an empty string is not a JSON notebook
        }
        CHECK(extract_imports("", id).empty());
    }
}

TEST_CASE("C include extraction") {
    CHECK(extract_imports("#include <stdio.h>", LanguageId::C) ==
          std::vector<std::string>{"stdio.h"});
}

TEST_CASE("all 17 language fixtures extract their expected import lists") {
    auto expected = nlohmann::json::parse(
        read_file(std::string(DEVFORGE_FIXTURES_DIR) + "/imports/expected.json"));
    REQUIRE(expected.size() == 17);
    for (LanguageId id : kAllLanguages) {
        const std::string name(to_string(id));
        INFO("language " << name);
        REQUIRE(expected.contains(name));
        const auto& entry = expected[name];
        const std::string content =
            read_file(std::string(DEVFORGE_FIXTURES_DIR) + "/imports/" +
                      entry["file"].get<std::string>());
        auto detected = detect_language(entry["file"].get<std::string>());
        REQUIRE(detected.has_value());
        CHECK(*detected == id);
        auto imports = extract_imports(content, id);
        CHECK(imports == entry["imports"].get<std::vector<std::string>>());
    }
}

TEST_CASE("extraction output never has empty or whitespace names") {
    const char* nasty =
        "import ''\nimport \"  \"\nrequire('')\nimport  from 'x y'\n";
    for (LanguageId id : {LanguageId::JavaScript, LanguageId::TypeScript}) {
        for (const auto& name : extract_imports(nasty, id)) {
            CHECK(!name.empty());
            CHECK(name.find_first_of(" \t\r\n") == std::string::npos);
        }
    }
}

TEST_CASE("extraction is pure") {
    const std::string content = "import a.b.c;\nimport x.y.*;\n";
    auto first = extract_imports(content, LanguageId::Java);
    auto second = extract_imports(content, LanguageId::Java);
    CHECK(first == second);
}

TEST_CASE("zero wall budget raises PatternTimeout") {
    CHECK_THROWS_AS(extract_imports("import os\n", LanguageId::Python,
                                    std::chrono::milliseconds(-1)),
                    PatternTimeoutError);
}

TEST_CASE("notebook extraction walks only code cells") {
    const char* nb = R"({"cells":[
        {"cell_type":"code","source":["import foo\n"]},
        {"cell_type":"markdown","source":["import nope\n"]},
        {"cell_type":"code","source":"from a.b import c"}
    ]})";
    CHECK(extract_from_notebook(nb) == std::vector<std::string>{"foo", "a.b"});
    CHECK(extract_from_notebook(R"({"cells":[]})").empty());
    CHECK_THROWS_AS(extract_from_notebook("not json"), MalformedNotebookError);
    CHECK_THROWS_AS(extract_from_notebook(R"({"nbformat":4})"), MalformedNotebookError);
}
