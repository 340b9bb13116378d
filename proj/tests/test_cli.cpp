#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "actortype/cli.hpp"
#include "fixtures.hpp"

using namespace actortype;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

RunResult invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("actortype-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_file(const TempDir& dir, const std::string& name, const std::string& content) {
    std::string path = dir.file(name);
    std::ofstream out(path);
    out << content;
    return path;
}

std::string lazarus_kb_file(const TempDir& dir, const std::string& name = "lazarus.kb") {
    KnowledgeBase kb = fixtures::lazarus_kb(nullptr); // builtin profile
    std::ostringstream buffer;
    save(kb, buffer);
    return write_file(dir, name, buffer.str());
}

const char* kExtensionProfilePath =
    ACTORTYPE_SOURCE_DIR "/profiles/tal-nationalistic-hacktivist.json";

} // namespace

TEST_CASE("profile validate accepts the shipped library") {
    RunResult r = invoke({"profile", "validate", ACTORTYPE_SOURCE_DIR "/profiles/tal.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("21 type rules") != std::string::npos);
}

TEST_CASE("profile validate names the broken rule and term") {
    TempDir dir;
    std::string broken = write_file(dir, "broken.json", R"({
      "profile_version": "broken-1",
      "vocabularies": [
        {"id": "skills", "ordered": true, "terms": [
          {"id": "none", "label": "", "definition": ""}]}
      ],
      "attributes": [
        {"kind": "skills", "property": "hasSkillsAttribute", "vocabulary": "skills",
         "cardinality": {"min": 1, "max": 1}}
      ],
      "types": [
        {"id": "sorcerer", "label": "", "hostility": "hostile",
         "expression": "hasSkillsAttribute value skills:wizard"}
      ]})");
    RunResult r = invoke({"profile", "validate", broken});
    CHECK(r.code == 1);
    CHECK(r.err.find("sorcerer") != std::string::npos);
    CHECK(r.err.find("wizard") != std::string::npos);
}

TEST_CASE("classify lists the nation-state inference for the wiper activity") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    RunResult r = invoke({"classify", "--kb", kb_path});
    CHECK(r.code == 0);
    CHECK(r.out.find("governmentCyberwarrior") != std::string::npos);
    CHECK(r.out.find("darkseoul2013") != std::string::npos);
    CHECK(r.out.find("vandal") != std::string::npos);
}

TEST_CASE("classify machine output is byte-identical across runs and insertion orders") {
    TempDir dir;
    std::string a = lazarus_kb_file(dir, "a.kb");

    KnowledgeBase permuted = fixtures::lazarus_kb(nullptr, {2, 0, 3, 1});
    std::ostringstream buffer;
    save(permuted, buffer);
    std::string b = write_file(dir, "b.kb", buffer.str());

    RunResult r1 = invoke({"classify", "--kb", a, "--json"});
    RunResult r2 = invoke({"classify", "--kb", a, "--json"});
    RunResult r3 = invoke({"classify", "--kb", b, "--json"});
    CHECK(r1.code == 0);
    CHECK(r1.out == r2.out);
    CHECK(r1.out == r3.out);
    CHECK(r1.out.find("\"governmentCyberwarrior\"") != std::string::npos);
}

TEST_CASE("classify honors --out and --actor") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    std::string report_path = dir.file("report.json");
    RunResult r = invoke({"classify", "--kb", kb_path, "--actor", "lazarus", "--out", report_path});
    CHECK(r.code == 0);
    std::ifstream in(report_path);
    REQUIRE(in.good());
    std::stringstream content;
    content << in.rdbuf();
    CHECK(content.str().find("governmentCyberwarrior") != std::string::npos);

    RunResult missing = invoke({"classify", "--kb", kb_path, "--actor", "ghost"});
    CHECK(missing.code == 1);
}

TEST_CASE("the near-miss threshold flag reaches the reasoner") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    RunResult silent = invoke({"classify", "--kb", kb_path, "--near-miss", "0", "--json"});
    CHECK(silent.code == 0);
    CHECK(silent.out.find("failing_conjuncts") == std::string::npos);
    RunResult chatty = invoke({"classify", "--kb", kb_path, "--near-miss", "2", "--json"});
    CHECK(chatty.out.find("failing_conjuncts") != std::string::npos);
}

TEST_CASE("export without --out writes the bundle to stdout") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    RunResult r = invoke({"export", "stix", "--kb", kb_path, "--actors", "lazarus"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"type\": \"bundle\"") != std::string::npos);
    CHECK(r.out.find("x_inferred_actor_types") != std::string::npos);
}

TEST_CASE("classify --profile extends the rule set wholesale") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    RunResult r = invoke(
        {"classify", "--kb", kb_path, "--profile", kExtensionProfilePath});
    CHECK(r.code == 0);
    CHECK(r.out.find("nationalisticHacktivist") != std::string::npos);
}

TEST_CASE("ACTORTYPE_PROFILE overrides the default profile") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    ::setenv("ACTORTYPE_PROFILE", kExtensionProfilePath, 1);
    RunResult r = invoke({"classify", "--kb", kb_path});
    ::unsetenv("ACTORTYPE_PROFILE");
    CHECK(r.code == 0);
    CHECK(r.out.find("nationalisticHacktivist") != std::string::npos);
}

TEST_CASE("explain shows the lone failing conjunct for the near miss") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    RunResult r = invoke(
        {"explain", "--kb", kb_path, "--activity", "sony2014", "--type", "governmentCyberwarrior"});
    CHECK(r.code == 0);
    CHECK(r.out.find("NOT SATISFIED") != std::string::npos);
    CHECK(r.out.find("near miss: 7/8") != std::string::npos);
    CHECK(r.out.find("failing: (hasResourcesAttribute value resources:government)") !=
          std::string::npos);
    CHECK(r.out.find("observed: resources:organization") != std::string::npos);

    RunResult satisfied = invoke({"explain", "--kb", kb_path, "--activity", "darkseoul2013",
                                  "--type", "governmentCyberwarrior"});
    CHECK(satisfied.code == 0);
    CHECK(satisfied.out.find("activity darkseoul2013: SATISFIED") != std::string::npos);
    CHECK(satisfied.out.find("NOT SATISFIED") == std::string::npos);

    RunResult unknown = invoke({"explain", "--kb", kb_path, "--activity", "nosuch", "--type",
                                "governmentCyberwarrior"});
    CHECK(unknown.code == 1);
}

TEST_CASE("query returns matching ids and JSON lines") {
    TempDir dir;
    std::string kb_path = lazarus_kb_file(dir);
    RunResult r = invoke({"query", "--kb", kb_path,
                          "actors where inferred_type = governmentCyberwarrior"});
    CHECK(r.code == 0);
    CHECK(r.out.find("lazarus") != std::string::npos);
    // data stays on the output stream, the count line on the diagnostic stream
    CHECK(r.out.find("result(s)") == std::string::npos);
    CHECK(r.err.find("1 result(s)") != std::string::npos);

    RunResult j = invoke({"query", "--kb", kb_path,
                          "activities where attribute.definingMotivation = dominance and start >= "
                          "2014-01-01",
                          "--json"});
    CHECK(j.code == 0);
    CHECK(j.out.find("\"id\":\"sony2014\"") != std::string::npos);
    CHECK(j.out.find("darkseoul2013") == std::string::npos);

    RunResult bad = invoke({"query", "--kb", kb_path, "actors where start > banana"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("ill-typed") != std::string::npos);
}

TEST_CASE("ingest stix then export preserves the bundle") {
    TempDir dir;
    std::string bundle_path = write_file(dir, "bundle.json", R"({
      "type": "bundle",
      "id": "bundle--aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeeee",
      "objects": [
        {"type": "threat-actor", "spec_version": "2.1",
         "id": "threat-actor--0a0a0a0a-1111-4222-8333-444444444444",
         "created": "2019-07-26T13:32:48.000Z", "modified": "2021-01-06T20:03:00.000Z",
         "name": "Wind Serpent", "threat_actor_types": ["nation-state"],
         "resource_level": "individual", "primary_motivation": "dominance"},
        {"type": "malware", "spec_version": "2.1",
         "id": "malware--0b0b0b0b-1111-4222-8333-444444444444",
         "created": "2019-07-26T13:32:48.000Z", "modified": "2019-07-26T13:32:48.000Z",
         "name": "wiper", "is_family": true}
      ]})");
    std::string kb_path = dir.file("store.kb");

    RunResult ingest = invoke({"ingest", "stix", bundle_path, "--kb", kb_path});
    CHECK(ingest.code == 0);
    CHECK(ingest.out.find("imported 1 actor(s)") != std::string::npos);
    CHECK(ingest.out.find("L1") != std::string::npos);

    RunResult strict = invoke({"--strict", "ingest", "stix", bundle_path, "--kb", kb_path});
    CHECK(strict.code == 1);

    std::string out_path = dir.file("export.json");
    RunResult exported = invoke({"export", "stix", "--kb", kb_path, "--actors",
                                 "threat-actor--0a0a0a0a-1111-4222-8333-444444444444", "--out",
                                 out_path});
    CHECK(exported.code == 0);
    std::ifstream in(out_path);
    REQUIRE(in.good());
    std::stringstream content;
    content << in.rdbuf();
    CHECK(content.str().find("\"Wind Serpent\"") != std::string::npos);
    CHECK(content.str().find("malware--0b0b0b0b-1111-4222-8333-444444444444") !=
          std::string::npos);
    CHECK(content.str().find("\"threat_actor_types\"") != std::string::npos);
}

TEST_CASE("ingest misp imports the cluster fixtures") {
    TempDir dir;
    std::string cluster_path = write_file(dir, "cluster.json", R"([{
      "description": "Anchor Panda ...",
      "meta": {"attribution-confidence": "50", "motive": "Espionage", "synonyms": ["APT14"]},
      "uuid": "c82c904f-b3b4-40a2-bf0d-008912953104",
      "value": "Anchor Panda"
    }])");
    std::string kb_path = dir.file("store.kb");
    RunResult r = invoke({"ingest", "misp", cluster_path, "--kb", kb_path});
    CHECK(r.code == 0);
    CHECK(r.out.find("unmapped motive value \"Espionage\"") != std::string::npos);

    RunResult q = invoke({"query", "--kb", kb_path, "actors where alias = APT14"});
    CHECK(q.code == 0);
    CHECK(q.out.find("c82c904f-b3b4-40a2-bf0d-008912953104") != std::string::npos);
}

TEST_CASE("sequential ingests update one store") {
    TempDir dir;
    std::string bundle_path = write_file(dir, "bundle.json", R"({
      "type": "bundle", "id": "bundle--aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeeee",
      "objects": [
        {"type": "threat-actor", "spec_version": "2.1",
         "id": "threat-actor--0e0e0e0e-1111-4222-8333-444444444444",
         "created": "2019-07-26T13:32:48.000Z", "modified": "2021-01-06T20:03:00.000Z",
         "name": "First Group"}
      ]})");
    std::string cluster_path = write_file(dir, "cluster.json",
                                          R"([{"value": "Second Group",
                                               "meta": {"synonyms": ["SG-2"]}}])");
    std::string kb_path = dir.file("store.kb");

    CHECK(invoke({"ingest", "stix", bundle_path, "--kb", kb_path}).code == 0);
    CHECK(invoke({"ingest", "misp", cluster_path, "--kb", kb_path}).code == 0);

    std::ifstream in(kb_path);
    KnowledgeBase kb = load(in);
    CHECK(kb.actors().size() == 2);
    CHECK(kb.find_actor("threat-actor--0e0e0e0e-1111-4222-8333-444444444444") != nullptr);
    CHECK(kb.find_actor("second-group") != nullptr);
    CHECK(kb.triples().size() == 1);
}

TEST_CASE("lint exit codes follow --strict") {
    TempDir dir;
    KnowledgeBase kb;
    ThreatActor actor;
    actor.id = "legacy";
    actor.canonical_name = "Legacy";
    actor.asserted_types.insert({"nationState", "feed"});
    actor.created = actor.modified = Timestamp::parse("2020-01-01T00:00:00Z");
    upsert_actor(kb, actor);
    std::ostringstream buffer;
    save(kb, buffer);
    std::string kb_path = write_file(dir, "store.kb", buffer.str());

    RunResult relaxed = invoke({"lint", "--kb", kb_path});
    CHECK(relaxed.code == 0);
    CHECK(relaxed.out.find("L3") != std::string::npos);

    RunResult strict = invoke({"--strict", "lint", "--kb", kb_path});
    CHECK(strict.code == 1);

    std::string clean_path = lazarus_kb_file(dir, "clean.kb");
    RunResult clean = invoke({"--strict", "lint", "--kb", clean_path});
    CHECK(clean.code == 0);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(invoke({"conquer"}).code == 2);
    CHECK(invoke({"classify"}).code == 2);                   // missing --kb
    CHECK(invoke({"classify", "--zap", "x"}).code == 2);     // unknown flag
    CHECK(invoke({}).code == 2);                             // no subcommand
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("domain failures exit with 1") {
    TempDir dir;
    CHECK(invoke({"classify", "--kb", dir.file("absent.kb")}).code == 1);
    std::string garbage = write_file(dir, "garbage.kb", "not a store");
    CHECK(invoke({"classify", "--kb", garbage}).code == 1);
    std::string truncated = write_file(dir, "trunc.kb", "{\"format_version\": \"1\"");
    CHECK(invoke({"lint", "--kb", truncated}).code == 1);
}
