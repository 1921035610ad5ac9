#include <doctest.h>

#include "ontomatch/errors.hpp"
#include "ontomatch/ontology.hpp"

#include "testutil.hpp"

using namespace ontomatch;
using testutil::make_concept;

TEST_CASE("from_concepts merges duplicates and repairs edges") {
  std::vector<Concept> in;
  in.push_back(make_concept("c:1", {"Heart", "heart"}, {"c:2", "c:1", "c:9"}));
  in.push_back(make_concept("c:2", {"Organ"}));
  in.push_back(make_concept("c:1", {"HEART", "cardiac organ"}, {"c:2"}));
  const Ontology o = Ontology::from_concepts(std::move(in));

  REQUIRE(o.size() == 2);
  const Concept& c1 = o.at("c:1");
  // "heart" and "HEART" collapse onto the first spelling seen.
  CHECK(c1.labels == std::vector<std::string>{"Heart", "cardiac organ"});
  // self edge and dangling edge to c:9 are gone, duplicate c:2 edge merged
  CHECK(c1.parents == std::vector<ConceptIri>{"c:2"});

  CHECK_THROWS_AS((void)o.at("c:9"), LookupError);
  CHECK(o.contains("c:2"));
}

TEST_CASE("neighbors are IRI sorted both ways") {
  std::vector<Concept> in;
  in.push_back(make_concept("n:root", {"root"}));
  in.push_back(make_concept("n:b", {"b"}, {"n:root"}));
  in.push_back(make_concept("n:a", {"a"}, {"n:root"}));
  in.push_back(make_concept("n:c", {"c"}, {"n:b", "n:a"}));
  const Ontology o = Ontology::from_concepts(std::move(in));

  const auto children = o.neighbors("n:root", Direction::Child);
  REQUIRE(children.size() == 2);
  CHECK(children[0]->iri == "n:a");
  CHECK(children[1]->iri == "n:b");

  const auto parents = o.neighbors("n:c", Direction::Parent);
  REQUIRE(parents.size() == 2);
  CHECK(parents[0]->iri == "n:a");
  CHECK(parents[1]->iri == "n:b");

  const auto a_children = o.neighbors("n:a", Direction::Child);
  REQUIRE(a_children.size() == 1);
  CHECK(a_children[0]->iri == "n:c");
  CHECK(o.neighbors("n:c", Direction::Child).empty());
  CHECK_THROWS_AS((void)o.neighbors("n:zzz", Direction::Parent), LookupError);
}

TEST_CASE("json dump roundtrip is canonical") {
  std::vector<Concept> in;
  in.push_back(make_concept("z:last", {"zeta", "last one"}, {"a:first"}));
  in.push_back(make_concept("a:first", {"alpha"}));
  const Ontology o = Ontology::from_concepts(std::move(in));

  const std::string dump = serialize_json_dump(o);
  CHECK(dump.back() == '\n');
  // concepts sorted by IRI regardless of insertion order
  CHECK(dump.find("a:first") < dump.find("z:last"));

  const Ontology back = parse_json_dump(dump);
  CHECK(back == o);
  CHECK(serialize_json_dump(back) == dump);
}

TEST_CASE("json dump parse errors name the offending concept") {
  CHECK_THROWS_AS(parse_json_dump("not json"), ParseError);
  CHECK_THROWS_AS(parse_json_dump("[]"), ParseError);
  CHECK_THROWS_AS(parse_json_dump(R"({"concepts": 5})"), ParseError);
  CHECK_THROWS_AS(
      parse_json_dump(R"({"concepts":[{"labels":["x"],"parents":[]}]})"),
      ParseError);
  // empty label list
  CHECK_THROWS_AS(
      parse_json_dump(R"({"concepts":[{"iri":"a","labels":[],"parents":[]}]})"),
      ParseError);
  // duplicate IRI
  CHECK_THROWS_AS(
      parse_json_dump(
          R"({"concepts":[{"iri":"a","labels":["x"],"parents":[]},)"
          R"({"iri":"a","labels":["y"],"parents":[]}]})"),
      ParseError);

  try {
    parse_json_dump(R"({"concepts":[{"iri":"ok","labels":["x"],"parents":[]},)"
                    R"({"iri":7,"labels":["y"],"parents":[]}]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("concepts[1]") != std::string::npos);
  }
}

TEST_CASE("world generator sanity") {
  const testutil::World w = testutil::make_world(10, 5, 20);
  CHECK(w.src.size() == 15);
  CHECK(w.tgt.size() == 30);
  CHECK(w.refs.size() == 10);
  for (const MappingPair& p : w.refs) {
    CHECK(w.src.contains(p.source));
    CHECK(w.tgt.contains(p.target));
  }
}
