#include <random>
#include <sstream>

#include <stdexcept>

#include "doctest.h"
#include "rrlab/records.hpp"

using namespace rrlab;

TEST_CASE("field escaping round trips arbitrary bytes") {
  CHECK(escape_field("a\tb\nc\\d\re") == "a\\tb\\nc\\\\d\\re");
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab\t\n\r\\x ()";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 20);
    for (int j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
    const auto e = escape_field(s);
    CHECK(e.find('\t') == std::string::npos);
    CHECK(e.find('\n') == std::string::npos);
    CHECK(unescape_field(e) == s);
  }
}

TEST_CASE("split_tabs keeps empty fields") {
  CHECK(split_tabs("a\t\tb\t") == std::vector<std::string>{"a", "", "b", ""});
  CHECK(split_tabs("x\r") == std::vector<std::string>{"x"});
  CHECK(split_tabs("") == std::vector<std::string>{""});
}

TEST_CASE("trajectory dump round trip") {
  Trajectory t;
  t.task_id = "task\t7";
  Chunk c;
  c.turn_index = 2;
  c.agent_slot = 1;
  c.agent_role = Role::corrupt;
  c.token_count = 100;
  c.v_after = 0.1234567890123456789;
  t.chunks.push_back(c);
  c.v_after.reset();
  c.agent_role = Role::honest;
  t.chunks.push_back(c);

  std::stringstream ss;
  ss << "# provenance\n";
  write_trajectory_dump(ss, t, 4);
  const auto rows = read_trajectory_dump(ss);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].task_id == "task\t7");
  CHECK(rows[0].shot == 4);
  CHECK(rows[0].turn == 2);
  CHECK(rows[0].slot == 1);
  CHECK(rows[0].role == Role::corrupt);
  CHECK(rows[0].tokens == 100);
  CHECK(*rows[0].v_after == 0.1234567890123456789);
  CHECK_FALSE(rows[1].v_after.has_value());

  std::istringstream bad("a\t1\t2\n");
  CHECK_THROWS(read_trajectory_dump(bad));
}

TEST_CASE("replay pool round trip mixes chunk and answer records") {
  std::stringstream ss;
  ss << "# recorded\n";
  write_replay_chunk(ss, {"t1", 0, 2, 3, Role::corrupt, "line one\nFINAL ANSWER: (B)", "B"});
  write_replay_answer(ss, {"t1", 5, 1, "C"});
  write_replay_answer(ss, {"t2", 0, 0, ""});
  const auto pool = read_replay_pool(ss);
  CHECK(pool.chunk_count() == 1);
  CHECK(pool.answer_count() == 2);
  const auto* ch = pool.find_chunk("t1", 0, 2, 3);
  REQUIRE(ch != nullptr);
  CHECK(ch->chunk_text == "line one\nFINAL ANSWER: (B)");
  CHECK(ch->role == Role::corrupt);
  CHECK(pool.find_chunk("t1", 0, 2, 4) == nullptr);
  REQUIRE(pool.find_answer("t1", 5, 1) != nullptr);
  CHECK(pool.find_answer("t1", 5, 1)->answer_label == "C");
  CHECK(pool.find_answer("t2", 0, 0)->answer_label.empty());

  std::istringstream bad("t1\t0\t1\n");
  CHECK_THROWS(read_replay_pool(bad));
  std::istringstream bad_int("t1\tx\t1\tA\n");
  CHECK_THROWS(read_replay_pool(bad_int));
}

TEST_CASE("task file round trip") {
  std::vector<Task> tasks{{"a", "What is 1 + 1?", {"A", "B", "C", "D"}, "A", "D"},
                          {"b", "quote \" and tab\t", {"X", "Y"}, "Y", "X"}};
  std::stringstream ss;
  write_tasks(ss, tasks);
  const auto back = read_tasks(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].prompt == tasks[1].prompt);
  CHECK(back[1].options == tasks[1].options);
  CHECK(back[0].distractor_label == "D");

  std::istringstream missing(R"({"id":"x","prompt":"p","options":["A","B"],"correct_label":"A"})");
  CHECK_THROWS(read_tasks(missing));
  std::istringstream invalid(R"({"id":"x","prompt":"p","options":["A","B"],"correct_label":"A","distractor_label":"A"})");
  CHECK_THROWS(read_tasks(invalid));
}

TEST_CASE("outcome records round trip") {
  std::vector<OutcomeRecord> recs{{"3c2t", "t1", 0, "RR", Role::corrupt, "B", "A"},
                                  {"3c2t", "t1", 0, "MAJ", std::nullopt, std::nullopt, "A"},
                                  {"0c5t", "t2", 3, "RRMaj", std::nullopt, "A", "A"}};
  std::stringstream ss;
  write_outcome_header(ss);
  for (const auto& r : recs) write_outcome(ss, r);
  const auto back = read_outcomes(ss);
  REQUIRE(back.size() == 3);
  CHECK(back[0].final_role == Role::corrupt);
  CHECK_FALSE(back[0].correct());
  CHECK_FALSE(back[1].final_role.has_value());
  CHECK_FALSE(back[1].answer.has_value());
  CHECK_FALSE(back[1].correct());
  CHECK(back[2].correct());
  CHECK(back[2].shot == 3);
}
